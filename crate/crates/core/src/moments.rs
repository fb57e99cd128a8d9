//! Moments `B_n^β(t^m, x)` of the β-generalized operators,
//!
//! ```text
//! B_n^β(t^m, x) = (y / n^m) Σ_{r=1}^m S(m, r) S(r, y + rβ, β)
//!               = (y p^m / n^m) Σ_k C_k(β) y^{m-1-k} p^k,
//! ```
//!
//! where `y = nx`. `n` is not a ring variable; the `y/n^m` prefactor is
//! carried as [`MomentScale`].

use crate::combinatorics::{binomial, eulerian_poly_second, stirling2};
use crate::exact::{BetaPoly, Rational, RatFuncBeta};
use crate::series::{self, GradedForm, SeriesEngine, SeriesError};
use crate::triangle::{CoeffFamily, CoeffTriangle};
use num_traits::One;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

/// The symbolic prefactor `y^y_exp / n^n_exp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MomentScale {
    pub y_exp: u32,
    pub n_exp: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentForm {
    pub m: u32,
    /// Grading in `y`; for `m = 0` this is the constant `1` with no prefix.
    pub graded: GradedForm,
    pub scale: MomentScale,
}

impl MomentForm {
    /// Exact value at `(n, x, β)`.
    pub fn eval(&self, n: &Rational, x: &Rational, beta: &Rational) -> Result<Rational, crate::exact::ExactError> {
        let y = n * x;
        let inner = self.graded.to_value().eval(&y, beta)?;
        let y_pow = num_traits::pow(y, self.scale.y_exp as usize);
        let n_pow = num_traits::pow(n.clone(), self.scale.n_exp as usize);
        Ok(inner * y_pow / n_pow)
    }

    /// `y^y_exp · (graded form at β = 0)`, a polynomial in `y` (with `n = 1`).
    pub fn at_beta_zero(&self) -> BetaPoly {
        self.graded.to_value().at_beta_zero().shift_up(self.scale.y_exp as usize)
    }
}

fn zeroth() -> MomentForm {
    MomentForm {
        m: 0,
        graded: GradedForm {
            prefix_p_exp: 0,
            entries: vec![BetaPoly::one()],
        },
        scale: MomentScale { y_exp: 0, n_exp: 0 },
    }
}

fn violation(m: u32, k: Option<u32>, reason: String) -> SeriesError {
    SeriesError::AnsatzViolation {
        what: "B_n^β(t^m, x)",
        index: m,
        k,
        reason,
    }
}

/// Builds the `m`-th moment from the gradings of the shifted series.
///
/// `S(r, y+rβ)` contributes `E_k y^{r-1-k} p^{r+k}`; rewritten against
/// `p^m · y^{m-1-K} p^K` with `K = m-r+k` this leaves `(1-β)^{2(m-r)}`.
pub fn compute_moment(engine: &SeriesEngine, m: u32) -> Result<MomentForm, SeriesError> {
    if m == 0 {
        return Ok(zeroth());
    }
    let shifted = (1..=m)
        .map(|r| engine.s_shifted(r))
        .collect::<Result<Vec<_>, _>>()?;
    let e = |r: u32, k: u32| &shifted[r as usize - 1].graded.as_ref().expect("series forms are always graded").entries[k as usize];
    // C_K = Σ_j q^j S(m, m-j) E_{K-j}(m-j) with q = (1-β)², by Horner in q.
    let q = BetaPoly::one_minus_x_pow(2);
    let entries: Vec<BetaPoly> = (0..m)
        .map(|big_k| {
            (0..=big_k).rev().fold(BetaPoly::zero(), |acc, j| {
                let s = Rational::from_integer(stirling2(m as usize, (m - j) as usize));
                &(&acc * &q) + &e(m - j, big_k - j).scale(&s)
            })
        })
        .collect();
    if !entries[0].is_one() {
        return Err(violation(m, Some(0), "leading coefficient is not 1".into()));
    }
    Ok(MomentForm {
        m,
        graded: GradedForm {
            prefix_p_exp: m,
            entries,
        },
        scale: MomentScale { y_exp: 1, n_exp: m },
    })
}

/// The same moment by summing the full series values and grading the
/// sum afterwards. Slower; kept as an independent check.
pub fn compute_moment_from_values(engine: &SeriesEngine, m: u32) -> Result<MomentForm, SeriesError> {
    if m == 0 {
        return Ok(zeroth());
    }
    let parts = (1..=m)
        .map(|r| {
            let s = engine.s_shifted(r)?;
            Ok(s.value.scale(&Rational::from_integer(stirling2(m as usize, r as usize))))
        })
        .collect::<Result<Vec<_>, SeriesError>>()?;
    let value = RatFuncBeta::sum_all(&parts);
    let graded = GradedForm::from_value(&value, m - 1, m).map_err(|e| violation(m, None, e.to_string()))?;
    if !graded.entries[0].is_one() {
        return Err(violation(m, Some(0), "leading coefficient is not 1".into()));
    }
    Ok(MomentForm {
        m,
        graded,
        scale: MomentScale { y_exp: 1, n_exp: m },
    })
}

static MEMO: Mutex<BTreeMap<u32, Arc<MomentForm>>> = Mutex::new(BTreeMap::new());

/// Memoised `m`-th moment over the global series engine.
pub fn moment(m: u32) -> Result<Arc<MomentForm>, SeriesError> {
    if let Some(f) = MEMO.lock().expect("moment memo poisoned").get(&m) {
        return Ok(f.clone());
    }
    let form = Arc::new(compute_moment(series::engine(), m)?);
    Ok(MEMO.lock().expect("moment memo poisoned").entry(m).or_insert(form).clone())
}

/// `σ_k^m(β)` for `k = 2..m-2`.
pub fn extract_sigma(m: u32) -> Result<BTreeMap<u32, BetaPoly>, SeriesError> {
    if m < 4 {
        return Err(SeriesError::InvalidIndex {
            index: m,
            reason: "σ_k^m exists for m >= 4",
        });
    }
    let f = moment(m)?;
    Ok((2..=m - 2).map(|k| (k, f.graded.entries[k as usize].clone())).collect())
}

/// σ triangle for `4 <= m <= max_m`.
pub fn sigma_triangle(max_m: u32) -> Result<CoeffTriangle, SeriesError> {
    let rows: Vec<_> = (4..=max_m).into_par_iter().map(|m| extract_sigma(m).map(|r| (m, r))).collect();
    let mut tri = CoeffTriangle::new(CoeffFamily::Sigma);
    for row in rows {
        let (m, row) = row?;
        for (k, p) in row {
            tri.entries.insert((m, k), p);
        }
    }
    Ok(tri)
}

/// Any of the three coefficient triangles up to row `max_index`.
pub fn triangle(family: CoeffFamily, max_index: u32) -> Result<CoeffTriangle, SeriesError> {
    match family {
        CoeffFamily::Sigma => sigma_triangle(max_index),
        other => series::engine().triangle(other, max_index),
    }
}

/// `(C_{m-1}, B_{m-1})`: the computed `p^{m-1}` coefficient and the
/// second-order Eulerian polynomial it should equal.
pub fn endpoint_check(m: u32) -> Result<(BetaPoly, BetaPoly), SeriesError> {
    if m < 2 {
        return Err(SeriesError::InvalidIndex {
            index: m,
            reason: "endpoint check needs m >= 2",
        });
    }
    let f = moment(m)?;
    Ok((
        f.graded.entries[m as usize - 1].clone(),
        eulerian_poly_second(m as usize - 1),
    ))
}

/// The Touchard polynomial `Σ_r S(m, r) y^r`, built from Stirling numbers
/// alone.
pub fn moment_beta_zero(m: u32) -> BetaPoly {
    BetaPoly::from_coeffs(
        (0..=m as usize)
            .map(|r| Rational::from_integer(stirling2(m as usize, r)))
            .collect(),
    )
}

/// `C_1 = C(m, 2)` check value for `m >= 2`.
pub fn expected_second_coefficient(m: u32) -> BetaPoly {
    BetaPoly::constant(Rational::from_integer(binomial(m as usize, 2)))
}

/// Whether `C_0 = 1` and `C_1 = C(m, 2)`.
pub fn grading_sane(f: &MomentForm) -> bool {
    let g = &f.graded.entries;
    let lead = g.first().is_some_and(|c| c.coeffs() == [Rational::one()]);
    let second = f.m < 2 || g.get(1) == Some(&expected_second_coefficient(f.m));
    lead && second
}
