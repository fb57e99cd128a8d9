//! Exact rational and polynomial arithmetic.
//!
//! Everything symbolic in this crate lives in the ring
//! `Q[v, β][1/(1-β)]`: polynomials in a main variable `v` (either `α` or
//! `y = nx`) and `β`, divided by a power of `(1-β)`. The shorthand
//! `p = 1/(1-β)` is therefore never a separate symbol; `p^k` is the value
//! with numerator `1` and denominator exponent `k`.

mod beta_poly;
mod bipoly;
mod ratfunc;
mod rational;

pub use beta_poly::BetaPoly;
pub use bipoly::BiPoly;
pub use ratfunc::RatFuncBeta;
pub use rational::{int, parse_rational, rat, serde_rational, Integer, Rational};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("evaluation at β = 1 hits the pole of p = 1/(1-β)")]
    PoleAtBetaOne,
    #[error("value is not divisible by β^{beta_power} p^{p_power}: {reason}")]
    NotDivisible {
        beta_power: u32,
        p_power: u32,
        reason: String,
    },
    #[error("value depends on the main variable (degree {degree}); expected a v-free value")]
    DependsOnMainVariable { degree: u32 },
}
