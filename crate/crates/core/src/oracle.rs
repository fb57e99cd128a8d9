//! Floating-point oracle: direct truncated summation of the defining
//! series and of the operators, independent of the symbolic engine.
//!
//! All terms are formed in log space, so `(α+βk)^{k+r-1}/k!` never
//! overflows, and summed with Neumaier's compensated summation.

use crate::exact::{rat, ExactError, Rational};
use crate::moments;
use crate::series::{self, SeriesError};
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("series did not meet the stop rule within {max_terms} terms (last term {last_term:e})")]
    TruncationNotConverged { max_terms: usize, last_term: f64 },
    #[error("β = {0} is outside [0, 1)")]
    BetaOutOfRange(f64),
    #[error("argument {name} = {value} must be positive")]
    NonPositive { name: &'static str, value: f64 },
    #[error("invalid truncation policy: {0}")]
    BadPolicy(&'static str),
    #[error("bad grid value {0:?}")]
    BadGrid(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// When to stop summing: after `window` consecutive terms each below
/// `abs_tail`, or fail after `max_terms`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    pub max_terms: usize,
    pub abs_tail: f64,
    pub window: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            max_terms: 20_000,
            abs_tail: 1e-18,
            window: 25,
        }
    }
}

impl TruncationPolicy {
    fn validate(&self) -> Result<(), OracleError> {
        if self.max_terms < 1 {
            return Err(OracleError::BadPolicy("max_terms must be >= 1"));
        }
        if self.abs_tail.is_nan() || self.abs_tail <= 0.0 {
            return Err(OracleError::BadPolicy("abs_tail must be > 0"));
        }
        if self.window < 1 {
            return Err(OracleError::BadPolicy("window must be >= 1"));
        }
        Ok(())
    }
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// A truncated sum and how it ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartialSum {
    pub value: f64,
    pub terms_used: usize,
    pub converged: bool,
}

fn sum_terms<F: FnMut(usize) -> f64>(policy: &TruncationPolicy, mut term: F) -> PartialSum {
    let mut acc = CompensatedSum::default();
    let mut small_run = 0;
    for k in 0..policy.max_terms {
        let t = term(k);
        acc.add(t);
        if t.abs() < policy.abs_tail {
            small_run += 1;
            if small_run >= policy.window {
                return PartialSum {
                    value: acc.value(),
                    terms_used: k + 1,
                    converged: true,
                };
            }
        } else {
            small_run = 0;
        }
    }
    PartialSum {
        value: acc.value(),
        terms_used: policy.max_terms,
        converged: false,
    }
}

fn finish(sum: PartialSum, policy: &TruncationPolicy, last_term: f64) -> Result<PartialSum, OracleError> {
    if sum.converged {
        Ok(sum)
    } else {
        Err(OracleError::TruncationNotConverged {
            max_terms: policy.max_terms,
            last_term,
        })
    }
}

fn check_beta(beta: f64) -> Result<(), OracleError> {
    if (0.0..1.0).contains(&beta) {
        Ok(())
    } else {
        Err(OracleError::BetaOutOfRange(beta))
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<(), OracleError> {
    if value > 0.0 {
        Ok(())
    } else {
        Err(OracleError::NonPositive { name, value })
    }
}

/// Running `ln k!` for consecutive `k`, starting at 0.
#[derive(Default)]
struct LnFactorial {
    next_k: usize,
    value: f64,
}

impl LnFactorial {
    fn at(&mut self, k: usize) -> f64 {
        debug_assert_eq!(k, self.next_k);
        if k > 0 {
            self.value += (k as f64).ln();
        }
        self.next_k = k + 1;
        self.value
    }
}

/// `k`-th term of `S(r, α, β)`: `(α+βk)^{k+r-1} e^{-(α+βk)} / k!`.
fn series_term(r: u32, alpha: f64, beta: f64, k: usize, ln_fact: f64) -> f64 {
    let a = alpha + beta * k as f64;
    let exponent = k as f64 + r as f64 - 1.0;
    (exponent * a.ln() - a - ln_fact).exp()
}

/// The first `n_terms` terms of `S(r, α, β)`, with no stop rule.
pub fn partial_s(r: u32, alpha: f64, beta: f64, n_terms: usize) -> f64 {
    let mut lf = LnFactorial::default();
    let mut acc = CompensatedSum::default();
    for k in 0..n_terms {
        acc.add(series_term(r, alpha, beta, k, lf.at(k)));
    }
    acc.value()
}

/// `S(r, α, β)` by direct summation of its defining series.
pub fn numeric_s(r: u32, alpha: f64, beta: f64, policy: &TruncationPolicy) -> Result<PartialSum, OracleError> {
    policy.validate()?;
    check_positive("alpha", alpha)?;
    check_beta(beta)?;
    let mut lf = LnFactorial::default();
    let mut last = 0.0;
    let sum = sum_terms(policy, |k| {
        last = series_term(r, alpha, beta, k, lf.at(k));
        last
    });
    finish(sum, policy, last)
}

/// `ln L_{n,k}^{(β)}(x)`; the `k = 0` term is `e^{-nx}`.
fn ln_basis(y: f64, k: usize, beta: f64, ln_fact: f64) -> f64 {
    let a = y + beta * k as f64;
    y.ln() + (k as f64 - 1.0) * a.ln() - ln_fact - a
}

/// The basis function `L_{n,k}^{(β)}(x) = nx (nx+kβ)^{k-1} e^{-(nx+kβ)} / k!`.
pub fn numeric_basis(n: f64, k: usize, beta: f64, x: f64) -> Result<f64, OracleError> {
    check_positive("n", n)?;
    check_positive("x", x)?;
    check_beta(beta)?;
    let ln_fact: f64 = (1..=k).map(|j| (j as f64).ln()).sum();
    Ok(ln_basis(n * x, k, beta, ln_fact).exp())
}

/// `Σ_k L_{n,k}^{(β)}(x)`, which should be 1.
pub fn numeric_basis_sum(n: f64, x: f64, beta: f64, policy: &TruncationPolicy) -> Result<PartialSum, OracleError> {
    numeric_moment(0, n, x, beta, policy)
}

/// `B_n^β(t^m, x) = Σ_k (k/n)^m L_{n,k}^{(β)}(x)`.
pub fn numeric_moment(m: u32, n: f64, x: f64, beta: f64, policy: &TruncationPolicy) -> Result<PartialSum, OracleError> {
    policy.validate()?;
    check_positive("n", n)?;
    check_positive("x", x)?;
    check_beta(beta)?;
    let y = n * x;
    let mut lf = LnFactorial::default();
    let mut last = 0.0;
    let sum = sum_terms(policy, |k| {
        let ln_fact = lf.at(k);
        last = if m > 0 && k == 0 {
            0.0
        } else {
            let weight = if m == 0 { 0.0 } else { m as f64 * (k as f64 / n).ln() };
            (weight + ln_basis(y, k, beta, ln_fact)).exp()
        };
        last
    });
    finish(sum, policy, last)
}

/// Right-hand side of the recursion, `Σ_k β^k (α+βk) S(r-1, α+βk, β)`,
/// evaluated with the numeric `S` on each inner term.
pub fn numeric_recursion_rhs(r: u32, alpha: f64, beta: f64, policy: &TruncationPolicy) -> Result<PartialSum, OracleError> {
    if r == 0 {
        return Err(OracleError::BadPolicy("the recursion needs r >= 1"));
    }
    check_beta(beta)?;
    let mut failure = None;
    let mut last = 0.0;
    let sum = sum_terms(policy, |k| {
        if failure.is_some() {
            return 0.0;
        }
        let a = alpha + beta * k as f64;
        let weight = beta.powi(k as i32) * a;
        if weight == 0.0 {
            last = 0.0;
            return 0.0;
        }
        match numeric_s(r - 1, a, beta, policy) {
            Ok(inner) => {
                last = weight * inner.value;
                last
            }
            Err(e) => {
                failure = Some(e);
                0.0
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    finish(sum, policy, last)
}

/// Outcome of comparing an exact value against a float.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub exact: f64,
    pub numeric: f64,
    pub abs_error: f64,
    pub scaled_error: f64,
    pub pass: bool,
}

/// Passes when `|exact - numeric| <= rel_tol · max(1, |exact|)`.
pub fn compare(exact: &Rational, numeric: f64, rel_tol: f64) -> Comparison {
    compare_f64(exact.to_f64().unwrap_or(f64::NAN), numeric, rel_tol)
}

/// [`compare`] with a float reference value.
pub fn compare_f64(e: f64, numeric: f64, rel_tol: f64) -> Comparison {
    let abs_error = (e - numeric).abs();
    let scaled_error = abs_error / e.abs().max(1.0);
    Comparison {
        exact: e,
        numeric,
        abs_error,
        scaled_error,
        pass: scaled_error <= rel_tol,
    }
}

/// Rational form of a decimal grid value such as `0.75`.
pub fn decimal(s: &str) -> Rational {
    try_decimal(s).expect("decimal literal")
}

pub fn try_decimal(s: &str) -> Option<Rational> {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let den = num_traits::pow(num_bigint::BigInt::from(10), frac.len());
    Some(Rational::new(digits.parse().ok()?, den))
}

/// Sample grid for `S(r, α, β)`: `α ∈ {0.5, 1, 3}`, `β ∈ {0, 0.25, 0.5, 0.75}`.
pub const SERIES_GRID_ALPHA: [&str; 3] = ["0.5", "1", "3"];
pub const SERIES_GRID_BETA: [&str; 4] = ["0", "0.25", "0.5", "0.75"];

/// Sample `(n, x, β)` points for moments.
pub const MOMENT_GRID: [(&str, &str, &str); 3] = [("1", "1", "0"), ("2", "0.5", "0.3"), ("5", "1.5", "0.6")];

/// `(n, x, β)` grid for the partition of unity.
pub fn unity_grid() -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for n in [1.0, 2.0, 5.0] {
        for x in [0.5, 1.0, 1.5] {
            for beta in [0.0, 0.25, 0.5, 0.75, 0.9] {
                out.push((n, x, beta));
            }
        }
    }
    out
}

/// One point of a numeric sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericCheck {
    pub kind: &'static str,
    pub point: String,
    pub tol: f64,
    pub terms_used: usize,
    #[serde(flatten)]
    pub cmp: Comparison,
}

/// `(α, β)` grid for the series checks, as decimal strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesGrid {
    pub alphas: Vec<String>,
    pub betas: Vec<String>,
}

impl Default for SeriesGrid {
    fn default() -> Self {
        Self {
            alphas: SERIES_GRID_ALPHA.iter().map(|s| s.to_string()).collect(),
            betas: SERIES_GRID_BETA.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl std::str::FromStr for SeriesGrid {
    type Err = OracleError;

    /// `alpha=0.5,1,3;beta=0,0.25`; an omitted axis keeps its default.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut grid = Self::default();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (axis, values) = part.split_once('=').ok_or_else(|| OracleError::BadGrid(part.into()))?;
            let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
            for v in &values {
                let q = try_decimal(v).ok_or_else(|| OracleError::BadGrid(v.clone()))?;
                let bad = match axis.trim() {
                    "alpha" => q <= rat(0),
                    "beta" => q < rat(0) || q >= rat(1),
                    _ => true,
                };
                if bad {
                    return Err(OracleError::BadGrid(format!("{axis}={v}")));
                }
            }
            match axis.trim() {
                "alpha" => grid.alphas = values,
                _ => grid.betas = values,
            }
        }
        Ok(grid)
    }
}

fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Exact `S(r, α, β)` against the truncated series, `0 <= r <= max_r`.
pub fn series_checks(max_r: u32, grid: &SeriesGrid, tol: f64, policy: &TruncationPolicy) -> Result<Vec<NumericCheck>, OracleError> {
    series::s_alpha(max_r.max(1))?;
    let mut points = Vec::new();
    for r in 0..=max_r {
        for a in &grid.alphas {
            for b in &grid.betas {
                points.push((r, a.as_str(), b.as_str()));
            }
        }
    }
    points
        .par_iter()
        .map(|&(r, a, b)| {
            let (alpha, beta) = (decimal(a), decimal(b));
            let exact = if r == 0 {
                rat(1) / &alpha
            } else {
                series::s_alpha(r)?.value.eval(&alpha, &beta)?
            };
            let num = numeric_s(r, to_f64(&alpha), to_f64(&beta), policy)?;
            Ok(NumericCheck {
                kind: "series",
                point: format!("r={r} alpha={a} beta={b}"),
                tol,
                terms_used: num.terms_used,
                cmp: compare(&exact, num.value, tol),
            })
        })
        .collect()
}

/// Exact moments against the truncated operator sum, `0 <= m <= max_m`.
pub fn moment_checks(max_m: u32, tol: f64, policy: &TruncationPolicy) -> Result<Vec<NumericCheck>, OracleError> {
    for m in 0..=max_m {
        moments::moment(m)?;
    }
    let points: Vec<(u32, (&str, &str, &str))> = (0..=max_m)
        .flat_map(|m| MOMENT_GRID.iter().map(move |p| (m, *p)))
        .collect();
    points
        .par_iter()
        .map(|&(m, (n, x, b))| {
            let (nq, xq, bq) = (decimal(n), decimal(x), decimal(b));
            let exact = moments::moment(m)?.eval(&nq, &xq, &bq)?;
            let num = numeric_moment(m, to_f64(&nq), to_f64(&xq), to_f64(&bq), policy)?;
            Ok(NumericCheck {
                kind: "moment",
                point: format!("m={m} n={n} x={x} beta={b}"),
                tol,
                terms_used: num.terms_used,
                cmp: compare(&exact, num.value, tol),
            })
        })
        .collect()
}

/// `Σ_k L_{n,k}^{(β)}(x)` against 1 over [`unity_grid`].
pub fn unity_checks(tol: f64, policy: &TruncationPolicy) -> Result<Vec<NumericCheck>, OracleError> {
    unity_grid()
        .par_iter()
        .map(|&(n, x, b)| {
            let num = numeric_basis_sum(n, x, b, policy)?;
            Ok(NumericCheck {
                kind: "unity",
                point: format!("n={n} x={x} beta={b}"),
                tol,
                terms_used: num.terms_used,
                cmp: compare_f64(1.0, num.value, tol),
            })
        })
        .collect()
}

/// The recursion checked numerically, with no symbolic input:
/// `S(r, α, β)` against `Σ_k β^k (α+βk) S(r-1, α+βk, β)`, `1 <= r <= max_r`.
pub fn recurrence_checks(max_r: u32, grid: &SeriesGrid, tol: f64, policy: &TruncationPolicy) -> Result<Vec<NumericCheck>, OracleError> {
    let mut points = Vec::new();
    for r in 1..=max_r {
        for a in &grid.alphas {
            for b in &grid.betas {
                points.push((r, a.as_str(), b.as_str()));
            }
        }
    }
    points
        .par_iter()
        .map(|&(r, a, b)| {
            let (alpha, beta) = (to_f64(&decimal(a)), to_f64(&decimal(b)));
            let lhs = numeric_s(r, alpha, beta, policy)?;
            let rhs = numeric_recursion_rhs(r, alpha, beta, policy)?;
            Ok(NumericCheck {
                kind: "recurrence",
                point: format!("r={r} alpha={a} beta={b}"),
                tol,
                terms_used: rhs.terms_used,
                cmp: compare_f64(lhs.value, rhs.value, tol),
            })
        })
        .collect()
}
