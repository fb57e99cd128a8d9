//! Exact moment calculus for the β-generalized basis functions
//!
//! ```text
//! L_{n,k}^{(β)}(x) = nx (nx + kβ)^{k-1} e^{-(nx+kβ)} / k!
//! ```
//!
//! The auxiliary series `S(r, α, β)` is built by recursion in the ring
//! `Q[v, β][1/(1-β)]`, graded into coefficient triangles θ, φ and σ, and
//! checked against printed tables, printed closed forms, integer sequences
//! and a floating-point evaluation of the defining sums.

pub mod closedforms;
pub mod combinatorics;
pub mod exact;
pub mod fixtures;
pub mod moments;
pub mod oeis;
pub mod oracle;
pub mod render;
pub mod report;
pub mod series;
pub mod triangle;

pub use exact::{BetaPoly, BiPoly, ExactError, Integer, RatFuncBeta, Rational};
pub use moments::{moment, MomentForm, MomentScale};
pub use report::{DiscrepancyReport, Mismatch, Repair, TermDiff};
pub use series::{s_alpha, s_shifted, GradedForm, MainVar, SeriesEngine, SeriesError, SeriesForm};
pub use triangle::{CoeffFamily, CoeffTriangle};
