//! Printed parametric closed forms for θ, φ and σ, encoded term for term
//! (including suspected misprints) and checked against the recursion.
//!
//! Every form has the shape
//!
//! ```text
//! prefactor · C(index, j) · Σ_terms scale · Π factors(index) · β^exp
//! ```
//!
//! with each factor a polynomial in the row index (`r` or `m`).

use crate::combinatorics::{binomial, stirling1_unsigned};
use crate::exact::{rat, serde_rational, BetaPoly, Rational};
use crate::moments;
use crate::report::{term_diffs, DiscrepancyReport, FormSummary, IndexingNote, Mismatch, Repair};
use crate::series::{self, SeriesError};
use crate::triangle::CoeffFamily;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::ops::RangeInclusive;

/// One printed summand: `scale · Π factors · β^beta_exp`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrintedTerm {
    pub beta_exp: u32,
    #[serde(with = "serde_rational")]
    pub scale: Rational,
    /// Polynomials in the index, ascending coefficients.
    pub factors: Vec<BetaPoly>,
}

impl PrintedTerm {
    /// The expanded coefficient formula in the index.
    pub fn formula(&self) -> BetaPoly {
        self.factors
            .iter()
            .fold(BetaPoly::constant(self.scale.clone()), |acc, f| &acc * f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    /// Stated in running text.
    Inline,
    /// A displayed formula.
    Display,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosedFormSpec {
    pub name: String,
    pub family: CoeffFamily,
    pub k: u32,
    pub source: Source,
    #[serde(with = "serde_rational")]
    pub prefactor: Rational,
    /// Lower index of the binomial prefactor `C(index, binomial)`.
    pub binomial: u32,
    pub terms: Vec<PrintedTerm>,
}

impl ClosedFormSpec {
    fn outer(&self, index: u32) -> Rational {
        &self.prefactor * Rational::from_integer(binomial(index as usize, self.binomial as usize))
    }

    /// Smallest index at which the form applies.
    pub fn first_index(&self) -> u32 {
        self.family.first_index(self.k)
    }
}

/// Evaluates the printed form at a concrete index. Terms sharing a
/// printed exponent are summed. Below the valid range the binomial
/// prefactor makes the result zero.
pub fn closed_eval(spec: &ClosedFormSpec, index: u32) -> BetaPoly {
    let x = rat(index as i64);
    let outer = spec.outer(index);
    spec.terms
        .iter()
        .map(|t| BetaPoly::monomial(&outer * t.formula().eval(&x), t.beta_exp as usize))
        .sum()
}

// descending-coefficient shorthand: d(&[3, -7, -2]) = 3i² - 7i - 2
fn d(coeffs: &[i64]) -> BetaPoly {
    BetaPoly::from_ints(coeffs.iter().rev().copied())
}

fn idx() -> BetaPoly {
    d(&[1, 0])
}

fn term(beta_exp: u32, num: i64, den: i64, factors: Vec<BetaPoly>) -> PrintedTerm {
    PrintedTerm {
        beta_exp,
        scale: Rational::new(num.into(), den.into()),
        factors,
    }
}

fn spec(name: &str, family: CoeffFamily, k: u32, source: Source, prefactor: (i64, i64), terms: Vec<PrintedTerm>) -> ClosedFormSpec {
    ClosedFormSpec {
        name: name.into(),
        family,
        k,
        source,
        prefactor: Rational::new(prefactor.0.into(), prefactor.1.into()),
        binomial: k + 1,
        terms,
    }
}

/// All encoded closed forms, ordered by family then `k`.
pub fn catalogue() -> Vec<ClosedFormSpec> {
    use CoeffFamily::*;
    use Source::*;
    let r = idx;
    vec![
        spec("theta_1", Theta, 1, Inline, (1, 1), vec![term(0, 1, 1, vec![])]),
        spec(
            "theta_2",
            Theta,
            2,
            Inline,
            (1, 1),
            vec![term(0, 1, 1, vec![]), term(1, 1, 4, vec![d(&[3, -1])])],
        ),
        spec(
            "theta_3",
            Theta,
            3,
            Display,
            (1, 1),
            vec![
                term(0, 1, 1, vec![]),
                term(1, 2, 1, vec![r()]),
                term(2, 1, 2, vec![r(), d(&[1, -1])]),
            ],
        ),
        spec(
            "theta_4",
            Theta,
            4,
            Display,
            (1, 1),
            vec![
                term(0, 1, 1, vec![]),
                term(1, 1, 6, vec![d(&[25, 7])]),
                term(2, 1, 6, vec![d(&[15, -5, -2])]),
                term(3, 1, 48, vec![d(&[15, -30, 5, 2])]),
            ],
        ),
        spec(
            "theta_5",
            Theta,
            5,
            Display,
            (1, 1),
            vec![
                term(0, 1, 1, vec![]),
                term(1, 1, 1, vec![d(&[8, 4])]),
                term(2, 1, 4, vec![d(&[35, 9, -2])]),
                term(3, 1, 2, vec![r(), d(&[5, -5, -2])]),
                term(3, 1, 16, vec![r(), d(&[1, -1]), d(&[3, -7, -2])]),
            ],
        ),
        spec("phi_1", Phi, 1, Inline, (1, 1), vec![term(0, 2, 1, vec![]), term(1, -1, 1, vec![])]),
        spec(
            "phi_2",
            Phi,
            2,
            Display,
            (1, 4),
            vec![
                term(0, 12, 1, vec![r()]),
                term(1, -4, 1, vec![d(&[3, -1])]),
                term(2, 1, 1, vec![d(&[3, -1])]),
            ],
        ),
        spec(
            "phi_3",
            Phi,
            3,
            Display,
            (1, 2),
            vec![
                term(0, 8, 1, vec![d(&[1, 0, 0])]),
                term(1, -2, 1, vec![d(&[6, -4, -1])]),
                term(2, 6, 1, vec![r(), d(&[1, -1])]),
                term(3, -1, 1, vec![r(), d(&[1, -1])]),
            ],
        ),
        spec(
            "phi_4",
            Phi,
            4,
            Display,
            (1, 48),
            vec![
                term(0, 240, 1, vec![d(&[1, 0, 0, 0])]),
                term(1, -48, 1, vec![d(&[10, -10, -5, -1])]),
                term(2, 8, 1, vec![d(&[45, -75, -5, 7])]),
                term(3, -8, 1, vec![d(&[15, -30, 5, 2])]),
                term(4, 1, 1, vec![d(&[15, -30, 5, 2])]),
            ],
        ),
        spec(
            "phi_5",
            Phi,
            5,
            Display,
            (1, 16),
            vec![
                term(0, 96, 1, vec![d(&[1, 0, 0, 0, 0])]),
                term(1, -16, 1, vec![d(&[15, -20, -15, -6, -1])]),
                term(2, 16, 1, vec![d(&[15, -35, -5, 9, 4])]),
                term(3, 4, 1, vec![d(&[30, -90, 25, 27, 2])]),
                term(4, 10, 1, vec![r(), d(&[1, -1]), d(&[3, -7, -2])]),
                term(5, 1, 1, vec![r(), d(&[1, -1]), d(&[3, -7, -2])]),
            ],
        ),
        spec(
            "sigma_2",
            Sigma,
            2,
            Display,
            (1, 4),
            vec![term(0, 1, 1, vec![d(&[3, -5])]), term(1, 8, 1, vec![])],
        ),
        spec(
            "sigma_3",
            Sigma,
            3,
            Display,
            (1, 2),
            vec![
                term(0, 1, 1, vec![d(&[1, -2]), d(&[1, -3])]),
                term(1, 8, 1, vec![d(&[1, -2])]),
                term(2, 12, 1, vec![]),
            ],
        ),
        spec(
            "sigma_4",
            Sigma,
            4,
            Display,
            (1, 48),
            vec![
                term(0, 1, 1, vec![d(&[15, -150, 485, -502])]),
                term(1, 16, 1, vec![d(&[15, -95, 116])]),
                term(2, 16, 1, vec![d(&[65, -151])]),
                term(3, 1152, 1, vec![]),
            ],
        ),
        spec(
            "sigma_5",
            Sigma,
            5,
            Display,
            (1, 16),
            vec![
                term(0, 1, 1, vec![d(&[3, -50, 305, -802, 760])]),
                term(1, 16, 1, vec![d(&[5, -55, 196, -224])]),
                term(2, 8, 1, vec![d(&[85, -537, 818])]),
                term(3, 192, 1, vec![d(&[11, -29])]),
                term(4, 120, 1, vec![]),
            ],
        ),
    ]
}

pub fn find(family: CoeffFamily, k: u32) -> Option<ClosedFormSpec> {
    catalogue().into_iter().find(|s| s.family == family && s.k == k)
}

/// Recursion-derived `θ_k^r`, `φ_k^r` or `σ_k^m`.
pub fn truth(family: CoeffFamily, k: u32, index: u32) -> Result<BetaPoly, SeriesError> {
    let row = match family {
        CoeffFamily::Theta => series::extract_theta(index)?,
        CoeffFamily::Phi => series::extract_phi(index)?,
        CoeffFamily::Sigma => moments::extract_sigma(index)?,
    };
    row.get(&k).cloned().ok_or(SeriesError::InvalidIndex {
        index,
        reason: "column k is outside this row",
    })
}

/// Interpolates `points` by the lowest-degree polynomial that fits all of
/// them, requiring at least two points beyond the degree as confirmation.
pub fn fit_index_poly(points: &[(u32, Rational)]) -> Option<BetaPoly> {
    let n = points.len();
    let xs: Vec<Rational> = points.iter().map(|(x, _)| rat(*x as i64)).collect();
    // Newton divided differences, in place
    let mut c: Vec<Rational> = points.iter().map(|(_, y)| y.clone()).collect();
    for level in 1..n {
        for i in (level..n).rev() {
            c[i] = (&c[i] - &c[i - 1]) / (&xs[i] - &xs[i - level]);
        }
    }
    let degree = c.iter().rposition(|v| !v.is_zero()).unwrap_or(0);
    if degree + 2 >= n {
        return None;
    }
    let mut poly = BetaPoly::constant(c[degree].clone());
    for i in (0..degree).rev() {
        let lin = BetaPoly::from_coeffs(vec![-xs[i].clone(), rat(1)]);
        poly = &(&poly * &lin) + &BetaPoly::constant(c[i].clone());
    }
    Some(poly)
}

struct Checked {
    index: u32,
    truth: BetaPoly,
}

fn matches_all(spec: &ClosedFormSpec, rows: &[Checked]) -> bool {
    rows.iter().all(|row| closed_eval(spec, row.index) == row.truth)
}

fn coeff_matches(spec: &ClosedFormSpec, rows: &[Checked], exp: u32) -> bool {
    rows.iter()
        .all(|row| closed_eval(spec, row.index).coeff(exp as usize) == row.truth.coeff(exp as usize))
}

fn find_repairs(spec: &ClosedFormSpec, rows: &[Checked], flagged: &[u32]) -> Vec<Repair> {
    let max_exp = rows
        .iter()
        .filter_map(|r| r.truth.degree())
        .chain(spec.terms.iter().map(|t| t.beta_exp as usize))
        .max()
        .unwrap_or(0) as u32;
    for (i, t) in spec.terms.iter().enumerate() {
        for target in (0..=max_exp + 1).filter(|&e| e != t.beta_exp) {
            let mut moved = spec.clone();
            moved.terms[i].beta_exp = target;
            if matches_all(&moved, rows) {
                return vec![Repair::ExponentMisprint {
                    term: i,
                    printed_exp: t.beta_exp,
                    derived_exp: target,
                }];
            }
        }
    }
    let mut repairs = Vec::new();
    for &exp in flagged {
        let flip = spec.terms.iter().enumerate().filter(|(_, t)| t.beta_exp == exp).find_map(|(i, _)| {
            let mut flipped = spec.clone();
            flipped.terms[i].scale = -flipped.terms[i].scale.clone();
            coeff_matches(&flipped, rows, exp).then_some(i)
        });
        if let Some(term) = flip {
            repairs.push(Repair::SignFlip { term, beta_exp: exp });
            continue;
        }
        let printed: BetaPoly = spec
            .terms
            .iter()
            .filter(|t| t.beta_exp == exp)
            .map(PrintedTerm::formula)
            .sum();
        let points: Option<Vec<(u32, Rational)>> = rows
            .iter()
            .map(|row| {
                let outer = spec.outer(row.index);
                (!outer.is_zero()).then(|| (row.index, row.truth.coeff(exp as usize) / outer))
            })
            .collect();
        match points.as_deref().and_then(fit_index_poly) {
            Some(derived) => repairs.push(Repair::Coefficient {
                beta_exp: exp,
                printed,
                derived,
            }),
            None => repairs.push(Repair::Unresolved { beta_exp: exp }),
        }
    }
    repairs
}

/// Checks one closed form over `indices` (clamped to the valid range).
pub fn verify_spec(spec: &ClosedFormSpec, indices: RangeInclusive<u32>) -> Result<DiscrepancyReport, SeriesError> {
    let first = (*indices.start()).max(spec.first_index());
    let last = *indices.end();
    let rows = (first..=last)
        .into_par_iter()
        .map(|index| truth(spec.family, spec.k, index).map(|truth| Checked { index, truth }))
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = DiscrepancyReport::new(format!("closed form {}", spec.name));
    let mut flagged = BTreeSet::new();
    let mut per_index = Vec::new();
    for row in &rows {
        let diffs = term_diffs(&closed_eval(spec, row.index), &row.truth);
        report.checked += 1;
        let exps: BTreeSet<u32> = diffs.iter().map(|d| d.beta_exp).collect();
        flagged.extend(exps.iter().copied());
        per_index.push(exps);
        if diffs.is_empty() {
            report.matched += 1;
        } else {
            report.mismatches.push(Mismatch {
                id: format!("{} {}={}", spec.name, spec.family.index_var(), row.index),
                family: Some(spec.family),
                index: row.index,
                k: spec.k,
                diffs,
                expected: false,
            });
        }
    }
    let flagged: Vec<u32> = flagged.into_iter().collect();
    let consistent = !rows.is_empty() && per_index.iter().all(|e| e.iter().copied().eq(flagged.iter().copied()));
    let repairs = if flagged.is_empty() {
        Vec::new()
    } else {
        find_repairs(spec, &rows, &flagged)
    };
    // A misprint flags the same terms at every index and each one has a
    // single-term repair. Anything else is left unexplained.
    let explained = consistent && !repairs.iter().any(|r| matches!(r, Repair::Unresolved { .. }));
    for m in &mut report.mismatches {
        m.expected = explained;
    }
    report.summaries.push(FormSummary {
        form: spec.name.clone(),
        family: spec.family,
        k: spec.k,
        first_index: first,
        last_index: last,
        flagged_exps: flagged,
        consistent,
        repairs,
    });
    Ok(report)
}

fn merge(into: &mut DiscrepancyReport, part: DiscrepancyReport) {
    into.checked += part.checked;
    into.matched += part.matched;
    into.mismatches.extend(part.mismatches);
    into.summaries.extend(part.summaries);
    into.indexing.extend(part.indexing);
}

/// Every encoded form of `family` with `k` in `ks`, over `indices`.
pub fn verify_family(
    family: CoeffFamily,
    ks: RangeInclusive<u32>,
    indices: RangeInclusive<u32>,
) -> Result<DiscrepancyReport, SeriesError> {
    let mut report = DiscrepancyReport::new(format!("closed forms ({family})"));
    for spec in catalogue().iter().filter(|s| s.family == family && ks.contains(&s.k)) {
        merge(&mut report, verify_spec(spec, indices.clone())?);
    }
    report.sort();
    Ok(report)
}

/// The printed Stirling-number identifications for the top θ
/// coefficients, `(k, printed (n offset, m offset), label)`.
const PRINTED_INDEXINGS: [(u32, i64, i64, &str); 3] = [
    (2, 1, -1, "s(r+1, r-1)"),
    (3, 2, -1, "s(r+2, r-1)"),
    (4, 3, -1, "s(r+3, r-1)"),
];

/// Checks the printed Stirling indexings of the top θ coefficients against
/// `c(r, r-k)`, which is what the recursion gives.
pub fn indexing_notes(indices: RangeInclusive<u32>) -> Result<Vec<IndexingNote>, SeriesError> {
    let mut notes = Vec::new();
    for (k, n_off, m_off, label) in PRINTED_INDEXINGS {
        let exp = k - 1;
        let mut printed_holds = true;
        let mut derived_holds = true;
        for r in (*indices.start()).max(k + 1)..=*indices.end() {
            let top = truth(CoeffFamily::Theta, k, r)?.coeff(exp as usize);
            let printed = stirling1_unsigned((r as i64 + n_off) as usize, (r as i64 + m_off) as usize);
            let derived = stirling1_unsigned(r as usize, (r - k) as usize);
            printed_holds &= top == Rational::from_integer(printed);
            derived_holds &= top == Rational::from_integer(derived);
        }
        notes.push(IndexingNote {
            family: CoeffFamily::Theta,
            k,
            beta_exp: exp,
            printed: label.into(),
            derived: format!("c(r, r-{k})"),
            printed_holds,
            derived_holds,
        });
    }
    Ok(notes)
}

/// All catalogue entries over `2..=max_index`, plus the indexing notes.
pub fn verify_all(max_index: u32) -> Result<DiscrepancyReport, SeriesError> {
    let mut report = DiscrepancyReport::new(format!("closed forms, index <= {max_index}"));
    for family in CoeffFamily::ALL {
        let part = verify_family(family, 1..=u32::MAX, 2..=max_index)?;
        merge(&mut report, part);
    }
    report.indexing = indexing_notes(2..=max_index)?;
    report.sort();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bp(c: &[i64]) -> BetaPoly {
        BetaPoly::from_ints(c.iter().copied())
    }

    fn summary(r: &DiscrepancyReport) -> &FormSummary {
        &r.summaries[0]
    }

    #[test]
    fn eval_examples() {
        let th3 = find(CoeffFamily::Theta, 3).unwrap();
        assert_eq!(closed_eval(&th3, 5), bp(&[5, 50, 50]));
        let th4 = find(CoeffFamily::Theta, 4).unwrap();
        assert_eq!(closed_eval(&th4, 5), bp(&[1, 22, 58, 24]));
        let s2 = find(CoeffFamily::Sigma, 2).unwrap();
        assert_eq!(closed_eval(&s2, 4), bp(&[7, 8]));
    }

    #[test]
    fn duplicate_exponents_are_summed() {
        // both printed β³ terms of θ_5 land on β³; at r = 6 that is 444 + 120
        let th5 = find(CoeffFamily::Theta, 5).unwrap();
        assert_eq!(closed_eval(&th5, 6), bp(&[1, 52, 328, 564]));
    }

    #[test]
    fn theta_3_clean() {
        let r = verify_family(CoeffFamily::Theta, 3..=3, 4..=12).unwrap();
        assert!(r.is_clean());
        assert_eq!(r.checked, 9);
    }

    #[test]
    fn theta_5_exponent_misprint() {
        let r = verify_family(CoeffFamily::Theta, 5..=5, 6..=12).unwrap();
        let s = summary(&r);
        assert_eq!(s.flagged_exps, vec![3, 4]);
        assert!(s.consistent);
        assert_eq!(
            s.repairs,
            vec![Repair::ExponentMisprint {
                term: 4,
                printed_exp: 3,
                derived_exp: 4
            }]
        );
        // computed β⁴ coefficient equals the printed final term's formula
        let th5 = find(CoeffFamily::Theta, 5).unwrap();
        for m in &r.mismatches {
            let b4 = m.diffs.iter().find(|d| d.beta_exp == 4).unwrap();
            let last = th5.terms[4].formula().eval(&rat(m.index as i64)) * th5.outer(m.index);
            assert_eq!(b4.computed, last);
        }
    }

    #[test]
    fn sigma_4_coefficient() {
        let r = verify_family(CoeffFamily::Sigma, 4..=4, 6..=12).unwrap();
        let s = summary(&r);
        assert_eq!(s.flagged_exps, vec![1]);
        assert!(s.consistent);
        let m6 = r.mismatches.iter().find(|m| m.index == 6).unwrap();
        assert_eq!(m6.diffs[0].computed, rat(292));
        let m7 = r.mismatches.iter().find(|m| m.index == 7).unwrap();
        assert_eq!(m7.diffs[0].computed, rat(1792));
        assert_eq!(
            s.repairs,
            vec![Repair::Coefficient {
                beta_exp: 1,
                printed: d(&[240, -1520, 1856]),
                derived: d(&[240, -1360, 1856]),
            }]
        );
    }

    #[test]
    fn phi_5_sign_flips() {
        let r = verify_family(CoeffFamily::Phi, 5..=5, 6..=14).unwrap();
        let s = summary(&r);
        assert_eq!(s.flagged_exps, vec![3, 5]);
        assert_eq!(
            s.repairs,
            vec![Repair::SignFlip { term: 3, beta_exp: 3 }, Repair::SignFlip { term: 5, beta_exp: 5 }]
        );
    }

    #[test]
    fn sigma_5_coefficient() {
        let r = verify_family(CoeffFamily::Sigma, 5..=5, 7..=14).unwrap();
        let s = summary(&r);
        assert_eq!(s.flagged_exps, vec![4]);
        assert_eq!(
            s.repairs,
            vec![Repair::Coefficient {
                beta_exp: 4,
                printed: bp(&[120]),
                derived: bp(&[1920]),
            }]
        );
    }

    #[test]
    fn inline_forms_exact_to_30() {
        for (family, k) in [(CoeffFamily::Theta, 1), (CoeffFamily::Theta, 2), (CoeffFamily::Phi, 1)] {
            let r = verify_family(family, k..=k, 2..=30).unwrap();
            assert!(r.is_clean(), "{family} {k}");
        }
    }

    #[test]
    fn consistent_misprints_are_explained() {
        let r = verify_all(16).unwrap();
        assert!(!r.mismatches.is_empty());
        assert_eq!(r.unexpected().count(), 0);
        // A uniformly perturbed term is localized and repaired.
        let mut spec = find(CoeffFamily::Theta, 3).unwrap();
        spec.terms[0].scale += rat(1);
        let bad = verify_spec(&spec, 2..=16).unwrap();
        let s = &bad.summaries[0];
        assert!(s.consistent);
        assert!(matches!(s.repairs[..], [Repair::Coefficient { .. }]));
        assert_eq!(bad.unexpected().count(), 0);
    }

    #[test]
    fn stirling_indexings() {
        let notes = indexing_notes(2..=14).unwrap();
        assert_eq!(notes.len(), 3);
        assert!(notes.iter().all(|n| !n.printed_holds && n.derived_holds));
    }

    #[test]
    fn fit_recovers_polynomials() {
        let p = d(&[3, -7, -2]);
        let pts: Vec<_> = (2..10).map(|x| (x, p.eval(&rat(x as i64)))).collect();
        assert_eq!(fit_index_poly(&pts), Some(p));
        assert_eq!(fit_index_poly(&pts[..3]), None);
    }

    #[test]
    fn specs_round_trip() {
        for s in catalogue() {
            let j = serde_json::to_string(&s).unwrap();
            let back: ClosedFormSpec = serde_json::from_str(&j).unwrap();
            assert_eq!(back, s);
        }
    }
}
