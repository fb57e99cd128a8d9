//! The auxiliary series `S(r, α, β) = Σ_k (α+βk)^{k+r-1} e^{-(α+βk)} / k!`
//! built symbolically from its recursion
//!
//! ```text
//! S(r, α, β) = Σ_{k≥0} β^k (α + βk) S(r-1, α + βk, β),   S(1) = p,
//! ```
//!
//! plus its shifted form `S(r, y + rβ, β)` and the graded coefficient
//! triangles `θ_k^r` and `φ_k^r`:
//!
//! ```text
//! S(r, α, β)      = p^r [α^{r-1} + Σ_k θ_k^r(β) α^{r-k-1} β^{k+1} p^k]
//! S(r, y + rβ, β) = p^r [y^{r-1} + Σ_k φ_k^r(β) y^{r-k-1} β^k p^k]
//! ```

use crate::combinatorics::power_sum_closed;
use crate::exact::{rat, BetaPoly, ExactError, RatFuncBeta};
use crate::triangle::{CoeffFamily, CoeffTriangle};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("ansatz violated for {what} (index {index}, k = {k:?}): {reason}")]
    AnsatzViolation {
        what: &'static str,
        index: u32,
        k: Option<u32>,
        reason: String,
    },
    #[error("index {index} out of range: {reason}")]
    InvalidIndex { index: u32, reason: &'static str },
}

/// The main variable of a series value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MainVar {
    /// `α`, as in `S(r, α, β)`.
    Alpha,
    /// `y = nx`, as in `S(r, y + rβ, β)`.
    Y,
}

impl MainVar {
    pub fn symbol(self) -> &'static str {
        match self {
            Self::Alpha => "α",
            Self::Y => "y",
        }
    }
}

/// `value = p^prefix · Σ_k C_k(β) v^{top-k} p^k`, with `top = len - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedForm {
    pub prefix_p_exp: u32,
    pub entries: Vec<BetaPoly>,
}

impl GradedForm {
    /// Reads the coefficients `C_0..C_top` off a canonical value. Fails if
    /// the value has `v`-degree above `top` or if some `C_k` is not a
    /// polynomial in `β`.
    pub fn from_value(value: &RatFuncBeta, top: u32, prefix: u32) -> Result<Self, ExactError> {
        if let Some(d) = value.v_degree().filter(|&d| d > top) {
            return Err(ExactError::DependsOnMainVariable { degree: d });
        }
        let entries = (0..=top)
            .map(|k| value.v_coeff(top - k).divide_out(0, prefix + k))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            prefix_p_exp: prefix,
            entries,
        })
    }

    pub fn top_degree(&self) -> u32 {
        self.entries.len() as u32 - 1
    }

    pub fn entry(&self, k: u32) -> Option<&BetaPoly> {
        self.entries.get(k as usize)
    }

    /// Rebuilds the value from the grading.
    pub fn to_value(&self) -> RatFuncBeta {
        let top = self.top_degree();
        let terms: Vec<RatFuncBeta> = self
            .entries
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let mut t = RatFuncBeta::p_pow(self.prefix_p_exp + k as u32).mul_beta_poly(c);
                for _ in 0..top - k as u32 {
                    t = &t * &RatFuncBeta::v();
                }
                t
            })
            .collect();
        RatFuncBeta::sum_all(&terms)
    }
}

/// `S(r, ·, β)` in one of its two main variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesForm {
    pub r: u32,
    pub variable: MainVar,
    pub value: RatFuncBeta,
    pub graded: Option<GradedForm>,
}

/// `Σ_{k≥0} β^k (v + βk) g(v + βk, β)` in closed form.
///
/// `g(v + βk)` is expanded in powers of `k`; each `Σ_k k^t β^k` is then
/// replaced by its Eulerian closed form.
pub fn weighted_sum_transform(g: &RatFuncBeta) -> RatFuncBeta {
    let beta = BetaPoly::x();
    let parts = g.shift_main_var(&beta);
    let v = RatFuncBeta::v();
    let terms: Vec<RatFuncBeta> = (0..=parts.len())
        .map(|t| {
            // coefficient of k^t in (v + βk) g(v + βk)
            let mut h = RatFuncBeta::zero();
            if let Some(c) = parts.get(t) {
                h = &h + &(&v * c);
            }
            if t >= 1 {
                h = &h + &parts[t - 1].mul_beta_poly(&beta);
            }
            &h * &power_sum_closed(t)
        })
        .collect();
    RatFuncBeta::sum_all(&terms)
}

fn violation(what: &'static str, index: u32, k: Option<u32>, reason: impl Into<String>) -> SeriesError {
    SeriesError::AnsatzViolation {
        what,
        index,
        k,
        reason: reason.into(),
    }
}

/// Grades a series value and checks the leading coefficient and the
/// β-divisibility of every `C_k`.
fn grade_series(r: u32, variable: MainVar, value: &RatFuncBeta) -> Result<GradedForm, SeriesError> {
    let what = match variable {
        MainVar::Alpha => "S(r, α, β)",
        MainVar::Y => "S(r, y + rβ, β)",
    };
    if value.v_degree() != Some(r - 1) {
        return Err(violation(
            what,
            r,
            None,
            format!("main-variable degree {:?}, expected {}", value.v_degree(), r - 1),
        ));
    }
    let graded = GradedForm::from_value(value, r - 1, r).map_err(|e| violation(what, r, None, e.to_string()))?;
    if !graded.entries[0].is_one() {
        return Err(violation(what, r, Some(0), "leading coefficient is not p^r"));
    }
    for k in 1..r {
        let need = match variable {
            MainVar::Alpha => k + 1,
            MainVar::Y => k,
        };
        if graded.entries[k as usize].div_x_pow(need as usize).is_none() {
            return Err(violation(what, r, Some(k), format!("C_k not divisible by β^{need}")));
        }
    }
    Ok(graded)
}

/// Memo tables for `S(r, α, β)` and `S(r, y + rβ, β)`.
#[derive(Debug, Default)]
pub struct SeriesEngine {
    alpha: Mutex<Vec<Arc<SeriesForm>>>,
    shifted: Mutex<BTreeMap<u32, Arc<SeriesForm>>>,
}

impl SeriesEngine {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn s_alpha(&self, r: u32) -> Result<Arc<SeriesForm>, SeriesError> {
        if r == 0 {
            return Err(SeriesError::InvalidIndex {
                index: r,
                reason: "S(0, α, β) = 1/α is not polynomial",
            });
        }
        let mut memo = self.alpha.lock().expect("series memo poisoned");
        while memo.len() < r as usize {
            let next_r = memo.len() as u32 + 1;
            let value = match memo.last() {
                None => RatFuncBeta::p_pow(1),
                Some(prev) => weighted_sum_transform(&prev.value),
            };
            let graded = grade_series(next_r, MainVar::Alpha, &value)?;
            memo.push(Arc::new(SeriesForm {
                r: next_r,
                variable: MainVar::Alpha,
                value,
                graded: Some(graded),
            }));
        }
        Ok(memo[r as usize - 1].clone())
    }

    pub fn s_shifted(&self, r: u32) -> Result<Arc<SeriesForm>, SeriesError> {
        if let Some(f) = self.shifted.lock().expect("series memo poisoned").get(&r) {
            return Ok(f.clone());
        }
        let base = self.s_alpha(r)?;
        let value = base.value.translate_main_var(&BetaPoly::monomial(rat(r as i64), 1));
        let graded = grade_series(r, MainVar::Y, &value)?;
        let form = Arc::new(SeriesForm {
            r,
            variable: MainVar::Y,
            value,
            graded: Some(graded),
        });
        let mut memo = self.shifted.lock().expect("series memo poisoned");
        Ok(memo.entry(r).or_insert(form).clone())
    }

    pub fn extract_theta(&self, r: u32) -> Result<BTreeMap<u32, BetaPoly>, SeriesError> {
        let s = self.s_alpha(r)?;
        extract(&s, CoeffFamily::Theta)
    }

    pub fn extract_phi(&self, r: u32) -> Result<BTreeMap<u32, BetaPoly>, SeriesError> {
        let s = self.s_shifted(r)?;
        extract(&s, CoeffFamily::Phi)
    }

    /// `θ` or `φ` triangle for `2 <= r <= max_r`. Rows are computed in
    /// parallel; the result is ordered by key regardless.
    pub fn triangle(&self, family: CoeffFamily, max_r: u32) -> Result<CoeffTriangle, SeriesError> {
        let rows: Vec<_> = match family {
            CoeffFamily::Theta => {
                self.s_alpha(max_r.max(1))?;
                (2..=max_r).into_par_iter().map(|r| self.extract_theta(r).map(|row| (r, row))).collect()
            }
            CoeffFamily::Phi => (2..=max_r).into_par_iter().map(|r| self.extract_phi(r).map(|row| (r, row))).collect(),
            CoeffFamily::Sigma => {
                return Err(SeriesError::InvalidIndex {
                    index: max_r,
                    reason: "σ is a moment triangle",
                })
            }
        };
        let mut tri = CoeffTriangle::new(family);
        for row in rows {
            let (r, row) = row?;
            for (k, p) in row {
                tri.entries.insert((r, k), p);
            }
        }
        Ok(tri)
    }
}

fn extract(s: &SeriesForm, family: CoeffFamily) -> Result<BTreeMap<u32, BetaPoly>, SeriesError> {
    let r = s.r;
    if r < 2 {
        return Err(SeriesError::InvalidIndex {
            index: r,
            reason: "coefficient triangles start at r = 2",
        });
    }
    let what = match family {
        CoeffFamily::Phi => "φ",
        _ => "θ",
    };
    (1..r)
        .map(|k| {
            let beta_power = match family {
                CoeffFamily::Phi => k,
                _ => k + 1,
            };
            s.value
                .v_coeff(r - 1 - k)
                .divide_out(beta_power, r + k)
                .map(|p| (k, p))
                .map_err(|e| violation(what, r, Some(k), e.to_string()))
        })
        .collect()
}

/// The process-wide engine used by the free functions below.
pub fn engine() -> &'static SeriesEngine {
    static ENGINE: OnceLock<SeriesEngine> = OnceLock::new();
    ENGINE.get_or_init(SeriesEngine::new)
}

pub fn s_alpha(r: u32) -> Result<Arc<SeriesForm>, SeriesError> {
    engine().s_alpha(r)
}

pub fn s_shifted(r: u32) -> Result<Arc<SeriesForm>, SeriesError> {
    engine().s_shifted(r)
}

pub fn extract_theta(r: u32) -> Result<BTreeMap<u32, BetaPoly>, SeriesError> {
    engine().extract_theta(r)
}

pub fn extract_phi(r: u32) -> Result<BTreeMap<u32, BetaPoly>, SeriesError> {
    engine().extract_phi(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{binomial, eulerian_poly_second};
    use crate::exact::{BiPoly, Rational};

    fn bp(c: &[i64]) -> BetaPoly {
        BetaPoly::from_ints(c.iter().copied())
    }

    fn alpha_pow(e: u32) -> RatFuncBeta {
        (0..e).fold(RatFuncBeta::one(), |acc, _| &acc * &RatFuncBeta::v())
    }

    fn term(coeff: &[i64], alpha_exp: u32, p_exp: u32) -> RatFuncBeta {
        &alpha_pow(alpha_exp) * &RatFuncBeta::p_pow(p_exp).mul_beta_poly(&bp(coeff))
    }

    #[test]
    fn base_cases_match_closed_expressions() {
        assert_eq!(s_alpha(1).unwrap().value, RatFuncBeta::p_pow(1));
        // p(αp + β²p²)
        let s2 = RatFuncBeta::sum_all(&[term(&[1], 1, 2), term(&[0, 0, 1], 0, 3)]);
        assert_eq!(s_alpha(2).unwrap().value, s2);
        // α²p³ + 3αβ²p⁴ + β³(1+2β)p⁵
        let s3 = RatFuncBeta::sum_all(&[term(&[1], 2, 3), term(&[0, 0, 3], 1, 4), term(&[0, 0, 0, 1, 2], 0, 5)]);
        assert_eq!(s_alpha(3).unwrap().value, s3);
        // p⁴[α³ + 6α²β²p + (4+11β)αβ³p² + (1+8β+6β²)β⁴p³]
        let s4 = RatFuncBeta::sum_all(&[
            term(&[1], 3, 4),
            term(&[0, 0, 6], 2, 5),
            term(&[0, 0, 0, 4, 11], 1, 6),
            term(&[0, 0, 0, 0, 1, 8, 6], 0, 7),
        ]);
        assert_eq!(s_alpha(4).unwrap().value, s4);
    }

    #[test]
    fn transform_examples() {
        // g = 1 gives αp + β²p²
        let out = weighted_sum_transform(&RatFuncBeta::one());
        assert_eq!(out, RatFuncBeta::sum_all(&[term(&[1], 1, 1), term(&[0, 0, 1], 0, 2)]));
        assert_eq!(weighted_sum_transform(&RatFuncBeta::zero()), RatFuncBeta::zero());
        // at β = 0 only k = 0 survives: α g(α)
        let g = RatFuncBeta::from_bipoly(BiPoly::from_terms([((2, 0), rat(3)), ((0, 1), rat(1))]));
        let out = weighted_sum_transform(&g);
        assert_eq!(out.at_beta_zero(), bp(&[0, 0, 0, 3]));
    }

    #[test]
    fn exact_value_at_a_point() {
        let half = Rational::new(1.into(), 2.into());
        assert_eq!(s_alpha(2).unwrap().value.eval(&rat(1), &half).unwrap(), rat(6));
        assert_eq!(s_alpha(3).unwrap().value.eval(&rat(1), &half).unwrap(), rat(28));
    }

    #[test]
    fn theta_examples() {
        assert_eq!(extract_theta(3).unwrap()[&2], bp(&[1, 2]));
        assert_eq!(extract_theta(10).unwrap()[&1], bp(&[45]));
        assert_eq!(
            extract_theta(10).unwrap()[&9],
            bp(&[1, 1004, 67260, 1062500, 5765500, 12440064, 11026296, 3733920, 362880])
        );
    }

    #[test]
    fn phi_examples() {
        assert_eq!(extract_phi(2).unwrap()[&1], bp(&[2, -1]));
        assert_eq!(extract_phi(5).unwrap()[&4], bp(&[625, -974, 622, -192, 24]));
        assert_eq!(extract_phi(10).unwrap()[&1], bp(&[90, -45]));
    }

    #[test]
    fn shifted_examples() {
        assert_eq!(s_shifted(1).unwrap().value, RatFuncBeta::p_pow(1));
        // p²(y + (2-β)βp)
        let s = RatFuncBeta::sum_all(&[term(&[1], 1, 2), term(&[0, 2, -1], 0, 3)]);
        assert_eq!(s_shifted(2).unwrap().value, s);
        for r in 1..=8 {
            let mut expect = vec![rat(0); r as usize];
            expect[r as usize - 1] = rat(1);
            assert_eq!(s_shifted(r).unwrap().value.at_beta_zero(), BetaPoly::from_coeffs(expect));
        }
    }

    #[test]
    fn r_zero_is_rejected() {
        assert!(matches!(s_alpha(0), Err(SeriesError::InvalidIndex { .. })));
        assert!(matches!(extract_theta(1), Err(SeriesError::InvalidIndex { .. })));
    }

    #[test]
    fn leading_and_degree_laws() {
        for r in 2..=12 {
            for (form, family) in [(s_alpha(r).unwrap(), CoeffFamily::Theta), (s_shifted(r).unwrap(), CoeffFamily::Phi)] {
                let g = form.graded.as_ref().unwrap();
                assert!(g.entries[0].is_one());
                assert_eq!(form.value.v_coeff(r - 1), RatFuncBeta::p_pow(r));
                let row = match family {
                    CoeffFamily::Theta => extract_theta(r).unwrap(),
                    _ => extract_phi(r).unwrap(),
                };
                for (k, p) in row {
                    assert_eq!(p.degree(), Some(family.expected_degree(k) as usize), "{family} r={r} k={k}");
                }
            }
        }
    }

    #[test]
    fn theta_constant_terms_are_binomials() {
        for r in 2..=12u32 {
            for (k, p) in extract_theta(r).unwrap() {
                assert_eq!(p.coeff(0), Rational::from_integer(binomial(r as usize, k as usize + 1)));
            }
        }
    }

    #[test]
    fn theta_endpoint_is_second_order_eulerian() {
        for r in 3..=11u32 {
            assert_eq!(extract_theta(r).unwrap()[&(r - 1)], eulerian_poly_second(r as usize - 1));
        }
    }

    #[test]
    fn alpha_and_y_forms_are_consistent() {
        // Rebuild S(r) from the θ grading alone, substitute α = y + rβ,
        // and re-extract φ.
        for r in 2..=9u32 {
            let theta = extract_theta(r).unwrap();
            let mut entries = vec![BetaPoly::one()];
            for k in 1..r {
                entries.push(theta[&k].shift_up(k as usize + 1));
            }
            let rebuilt = GradedForm { prefix_p_exp: r, entries }.to_value();
            let shifted = rebuilt.translate_main_var(&BetaPoly::monomial(rat(r as i64), 1));
            let form = SeriesForm {
                r,
                variable: MainVar::Y,
                value: shifted,
                graded: None,
            };
            assert_eq!(extract(&form, CoeffFamily::Phi).unwrap(), extract_phi(r).unwrap());
        }
    }

    #[test]
    fn beta_zero_reduction() {
        for r in 1..=10u32 {
            let mut expect = vec![rat(0); r as usize];
            expect[r as usize - 1] = rat(1);
            assert_eq!(s_alpha(r).unwrap().value.at_beta_zero(), BetaPoly::from_coeffs(expect));
        }
    }

    #[test]
    fn graded_round_trip() {
        for r in 1..=8 {
            let s = s_alpha(r).unwrap();
            assert_eq!(s.graded.as_ref().unwrap().to_value(), s.value);
        }
    }

    #[test]
    fn fresh_engine_matches_global() {
        let e = SeriesEngine::new();
        assert_eq!(e.s_shifted(6).unwrap().value, s_shifted(6).unwrap().value);
    }
}
