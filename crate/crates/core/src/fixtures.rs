//! The printed coefficient tables, embedded verbatim, and their diff
//! against computed values.

use crate::combinatorics::eulerian_poly_first;
use crate::exact::{parse_rational, BetaPoly, Rational};
use crate::moments;
use crate::report::{term_diffs, DiscrepancyReport, Mismatch};
use crate::series::{self, SeriesError};
use crate::triangle::CoeffFamily;
use num_traits::One;
use rayon::prelude::*;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;
use thiserror::Error;

pub const FIXTURE_TEXT: &str = include_str!("../data/paper_fixtures.txt");
pub const EXPECTED_MISMATCH_TEXT: &str = include_str!("../data/expected_mismatch.txt");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FixtureError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: duplicate fixture {id}")]
    Duplicate { line: usize, id: String },
    #[error("annotation line {line}: no fixture {id}")]
    UnknownAnnotation { line: usize, id: String },
}

/// Which computed value a printed row is compared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Theta { r: u32, k: u32 },
    Phi { r: u32, k: u32 },
    /// Coefficient `C_k` of the `m`-th moment grading.
    Moment { m: u32, k: u32 },
    /// `A_n(x)`.
    Eulerian { n: u32 },
}

impl Slot {
    pub fn family(self) -> Option<CoeffFamily> {
        match self {
            Self::Theta { .. } => Some(CoeffFamily::Theta),
            Self::Phi { .. } => Some(CoeffFamily::Phi),
            _ => None,
        }
    }

    fn index_k(self) -> (u32, u32) {
        match self {
            Self::Theta { r, k } | Self::Phi { r, k } => (r, k),
            Self::Moment { m, k } => (m, k),
            Self::Eulerian { n } => (n, 0),
        }
    }

    /// Recomputes the slot from the recursion (or the Eulerian triangle).
    pub fn computed(self) -> Result<BetaPoly, SeriesError> {
        let missing = |index| SeriesError::InvalidIndex {
            index,
            reason: "fixture column outside the computed row",
        };
        match self {
            Self::Theta { r, k } => series::extract_theta(r)?.remove(&k).ok_or(missing(r)),
            Self::Phi { r, k } => series::extract_phi(r)?.remove(&k).ok_or(missing(r)),
            Self::Moment { m, k } => moments::moment(m)?
                .graded
                .entry(k)
                .cloned()
                .ok_or(missing(m)),
            Self::Eulerian { n } => Ok(eulerian_poly_first(n as usize)),
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Theta { r, k } => write!(f, "theta {r} {k}"),
            Self::Phi { r, k } => write!(f, "phi {r} {k}"),
            Self::Moment { m, k } => write!(f, "moment {m} {k}"),
            Self::Eulerian { n } => write!(f, "eulerian {n}"),
        }
    }
}

/// One printed polynomial, stored term by term as printed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaperFixture {
    /// Section the row came from.
    pub location: String,
    pub line: usize,
    pub slot: Slot,
    pub scale: Rational,
    /// `(β-exponent, coefficient)` in printed order; exponents may repeat.
    pub terms: Vec<(u32, Rational)>,
}

impl PaperFixture {
    pub fn id(&self) -> String {
        self.slot.to_string()
    }

    /// The printed value, with repeated exponents summed.
    pub fn printed_value(&self) -> BetaPoly {
        self.terms
            .iter()
            .map(|(e, c)| BetaPoly::monomial(&self.scale * c, *e as usize))
            .sum()
    }
}

fn malformed(line: usize, reason: impl Into<String>) -> FixtureError {
    FixtureError::Malformed {
        line,
        reason: reason.into(),
    }
}

fn parse_slot(line: usize, head: &str) -> Result<Slot, FixtureError> {
    let mut words = head.split_whitespace();
    let family = words.next().ok_or_else(|| malformed(line, "missing family"))?;
    let nums = words
        .map(|w| w.parse::<u32>().map_err(|_| malformed(line, format!("bad index {w:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let slot = match (family, nums.as_slice()) {
        ("theta", [r, k]) => Slot::Theta { r: *r, k: *k },
        ("phi", [r, k]) => Slot::Phi { r: *r, k: *k },
        ("moment", [m, k]) => Slot::Moment { m: *m, k: *k },
        ("eulerian", [n]) => Slot::Eulerian { n: *n },
        ("theta" | "phi" | "moment" | "eulerian", _) => {
            return Err(malformed(line, format!("wrong number of indices for {family}")))
        }
        (other, _) => return Err(malformed(line, format!("unknown family {other:?}"))),
    };
    let valid = match slot {
        Slot::Theta { r, k } | Slot::Phi { r, k } => k >= 1 && k < r,
        Slot::Moment { m, k } => k < m.max(1),
        Slot::Eulerian { .. } => true,
    };
    if !valid {
        return Err(malformed(line, format!("{slot} is outside its triangle")));
    }
    Ok(slot)
}

fn parse_coeff(line: usize, s: &str) -> Result<Rational, FixtureError> {
    parse_rational(s).ok_or_else(|| malformed(line, format!("bad coefficient {s:?}")))
}

fn parse_terms(line: usize, body: &str) -> Result<(Rational, Vec<(u32, Rational)>), FixtureError> {
    let (scale, rest) = match body.split_once('*') {
        Some((s, rest)) => (parse_coeff(line, s.trim())?, rest),
        None => (Rational::one(), body),
    };
    let tokens: Vec<&str> = rest.split_whitespace().collect();
    if tokens.is_empty() {
        return Err(malformed(line, "no coefficients"));
    }
    let tagged = tokens.iter().filter(|t| t.contains('@')).count();
    let terms = if tagged == 0 {
        tokens
            .iter()
            .enumerate()
            .map(|(e, t)| Ok((e as u32, parse_coeff(line, t)?)))
            .collect::<Result<Vec<_>, _>>()?
    } else if tagged == tokens.len() {
        tokens
            .iter()
            .map(|t| {
                let (c, e) = t.split_once('@').expect("tagged token");
                let e = e.parse().map_err(|_| malformed(line, format!("bad exponent in {t:?}")))?;
                Ok((e, parse_coeff(line, c)?))
            })
            .collect::<Result<Vec<_>, _>>()?
    } else {
        return Err(malformed(line, "mixes positional and c@e coefficients"));
    };
    Ok((scale, terms))
}

/// Parses the fixture format. Any malformed line is an error.
pub fn parse_fixtures(text: &str) -> Result<Vec<PaperFixture>, FixtureError> {
    let mut location = String::from("unsectioned");
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(sec) = comment.trim().strip_prefix("section:") {
                location = sec.trim().to_string();
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let (head, body) = trimmed
            .split_once(':')
            .ok_or_else(|| malformed(line, "missing ':'"))?;
        let slot = parse_slot(line, head)?;
        let (scale, terms) = parse_terms(line, body)?;
        if !seen.insert(slot) {
            return Err(FixtureError::Duplicate {
                line,
                id: slot.to_string(),
            });
        }
        out.push(PaperFixture {
            location: location.clone(),
            line,
            slot,
            scale,
            terms,
        });
    }
    Ok(out)
}

/// Parses the expected-mismatch list (`id  # note` per line) and checks
/// that each id names a fixture.
pub fn parse_annotations(text: &str, fixtures: &[PaperFixture]) -> Result<BTreeSet<String>, FixtureError> {
    let known: BTreeSet<String> = fixtures.iter().map(PaperFixture::id).collect();
    let mut out = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let id = raw.split('#').next().unwrap_or("").split_whitespace().collect::<Vec<_>>().join(" ");
        if id.is_empty() {
            continue;
        }
        if !known.contains(&id) {
            return Err(FixtureError::UnknownAnnotation { line: i + 1, id });
        }
        out.insert(id);
    }
    Ok(out)
}

/// The embedded fixtures, parsed once.
pub fn paper_fixtures() -> &'static [PaperFixture] {
    static CELL: OnceLock<Vec<PaperFixture>> = OnceLock::new();
    CELL.get_or_init(|| parse_fixtures(FIXTURE_TEXT).expect("embedded fixture file is malformed"))
}

pub fn expected_mismatches() -> &'static BTreeSet<String> {
    static CELL: OnceLock<BTreeSet<String>> = OnceLock::new();
    CELL.get_or_init(|| {
        parse_annotations(EXPECTED_MISMATCH_TEXT, paper_fixtures()).expect("embedded annotation file is malformed")
    })
}

/// Number of fixtures per kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FixtureCounts {
    pub theta: usize,
    pub phi: usize,
    /// Distinct `m`, not lines.
    pub moment_rows: usize,
    pub eulerian: usize,
}

pub fn counts(fixtures: &[PaperFixture]) -> FixtureCounts {
    let mut c = FixtureCounts::default();
    let mut ms = BTreeSet::new();
    for f in fixtures {
        match f.slot {
            Slot::Theta { .. } => c.theta += 1,
            Slot::Phi { .. } => c.phi += 1,
            Slot::Moment { m, .. } => {
                ms.insert(m);
            }
            Slot::Eulerian { .. } => c.eulerian += 1,
        }
    }
    c.moment_rows = ms.len();
    c
}

/// Diffs `fixtures` against computed values, marking ids in `expected`.
pub fn diff_fixtures(fixtures: &[PaperFixture], expected: &BTreeSet<String>) -> Result<DiscrepancyReport, SeriesError> {
    // the recursions memoise sequentially; warm them before fanning out
    let max_r = fixtures
        .iter()
        .filter_map(|f| match f.slot {
            Slot::Theta { r, .. } | Slot::Phi { r, .. } | Slot::Moment { m: r, .. } => Some(r),
            Slot::Eulerian { .. } => None,
        })
        .max()
        .unwrap_or(1);
    series::s_alpha(max_r.max(1))?;
    let computed = fixtures
        .par_iter()
        .map(|f| f.slot.computed())
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = DiscrepancyReport::new("printed tables");
    for (f, value) in fixtures.iter().zip(computed) {
        report.checked += 1;
        let diffs = term_diffs(&f.printed_value(), &value);
        if diffs.is_empty() {
            report.matched += 1;
            continue;
        }
        let (index, k) = f.slot.index_k();
        let id = f.id();
        report.mismatches.push(Mismatch {
            expected: expected.contains(&id),
            id,
            family: f.slot.family(),
            index,
            k,
            diffs,
        });
    }
    report.sort();
    Ok(report)
}

/// The embedded fixtures against computed values, annotations applied.
pub fn diff_all() -> Result<DiscrepancyReport, SeriesError> {
    diff_fixtures(paper_fixtures(), expected_mismatches())
}

/// Ways a diff can disagree with the annotation file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExpectationFailure {
    /// Mismatch not listed in the annotations.
    Unexpected(String),
    /// Listed in the annotations but the row now matches.
    NowMatches(String),
}

impl fmt::Display for ExpectationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Unexpected(id) => write!(f, "{id}: unexpected mismatch"),
            Self::NowMatches(id) => write!(f, "{id}: annotated as a mismatch but matches"),
        }
    }
}

pub fn check_expectations(report: &DiscrepancyReport, expected: &BTreeSet<String>) -> Vec<ExpectationFailure> {
    let mismatched: BTreeSet<&str> = report.mismatches.iter().map(|m| m.id.as_str()).collect();
    let mut out: Vec<ExpectationFailure> = report
        .unexpected()
        .map(|m| ExpectationFailure::Unexpected(m.id.clone()))
        .collect();
    out.extend(
        expected
            .iter()
            .filter(|id| !mismatched.contains(id.as_str()))
            .map(|id| ExpectationFailure::NowMatches(id.clone())),
    );
    out
}

/// Printed and computed values for one slot under another family's
/// reading, e.g. the row labelled `θ_7^9` in the φ listing.
pub fn compare_as(fixture: &PaperFixture, slot: Slot) -> Result<bool, SeriesError> {
    Ok(fixture.printed_value() == slot.computed()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn embedded_file_parses_with_fixed_counts() {
        let c = counts(paper_fixtures());
        assert_eq!(
            c,
            FixtureCounts {
                theta: 36,
                phi: 45,
                moment_rows: 11,
                eulerian: 6
            }
        );
        assert_eq!(expected_mismatches().len(), 6);
    }

    #[test]
    fn printed_duplicates_are_kept_term_by_term() {
        let f = paper_fixtures().iter().find(|f| f.id() == "theta 8 7").unwrap();
        assert_eq!(f.terms.len(), 7);
        assert_eq!(f.terms[4], (3, rat(58140)));
        assert_eq!(f.printed_value().coeff(3), rat(32120 + 58140));
        assert_eq!(f.printed_value().coeff(4), rat(0));
    }

    #[test]
    fn scale_rows() {
        let f = paper_fixtures().iter().find(|f| f.id() == "phi 10 1").unwrap();
        assert_eq!(f.printed_value(), BetaPoly::from_ints([90, -45]));
        let f = paper_fixtures().iter().find(|f| f.id() == "moment 9 6").unwrap();
        assert_eq!(f.printed_value().coeff(0), rat(3025));
    }

    #[test]
    fn diff_matches_annotations() {
        let report = diff_all().unwrap();
        let failures = check_expectations(&report, expected_mismatches());
        assert!(failures.is_empty(), "{failures:?}");
        assert_eq!(report.checked, 143);
        assert_eq!(report.matched, 137);
    }

    #[test]
    fn smoke_floor() {
        let report = diff_all().unwrap();
        for m in &report.mismatches {
            let f = paper_fixtures().iter().find(|f| f.id() == m.id).unwrap();
            let low = match f.slot {
                Slot::Theta { r, .. } | Slot::Phi { r, .. } => r <= 5,
                Slot::Moment { m, .. } => m <= 5,
                Slot::Eulerian { .. } => true,
            };
            assert!(!low, "{} must match", m.id);
        }
    }

    #[test]
    fn phi_4_10_final_term() {
        let report = diff_all().unwrap();
        let m = report.mismatches.iter().find(|m| m.id == "phi 10 4").unwrap();
        let last = m.diffs.iter().find(|d| d.beta_exp == 4).unwrap();
        assert_eq!(last.printed, rat(292593));
        // equals the θ_4^10 top coefficient, as in the rows r = 5..9
        assert_eq!(last.computed, rat(63273));
        assert!(m.expected);
    }

    #[test]
    fn mislabelled_row_is_phi() {
        let f = paper_fixtures().iter().find(|f| f.id() == "phi 9 7").unwrap();
        assert!(compare_as(f, Slot::Phi { r: 9, k: 7 }).unwrap());
        assert!(!compare_as(f, Slot::Theta { r: 9, k: 7 }).unwrap());
    }

    #[test]
    fn fixed_paper_is_a_failure() {
        let mut fixtures = paper_fixtures().to_vec();
        let f = fixtures.iter_mut().find(|f| f.id() == "phi 7 5").unwrap();
        f.terms = f.slot.computed().unwrap().coeffs().iter().cloned().enumerate().map(|(e, c)| (e as u32, c)).collect();
        let report = diff_fixtures(&fixtures, expected_mismatches()).unwrap();
        assert_eq!(
            check_expectations(&report, expected_mismatches()),
            vec![ExpectationFailure::NowMatches("phi 7 5".into())]
        );
    }

    #[test]
    fn diff_is_deterministic() {
        let a = serde_json::to_string(&diff_all().unwrap()).unwrap();
        let b = serde_json::to_string(&diff_all().unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn malformed_lines_are_rejected() {
        let bad = [
            ("theta 3 2 1 2", 1),
            ("theta 3 : 1 2", 1),
            ("gamma 3 2 : 1", 1),
            ("theta 3 2 :", 1),
            ("# ok\ntheta 3 2 : 1 x", 2),
            ("theta 3 2 : 1@0 2", 1),
            ("theta 3 3 : 1", 1),
            ("phi 3 2 : 1@z", 1),
        ];
        for (text, line) in bad {
            match parse_fixtures(text) {
                Err(FixtureError::Malformed { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
        assert!(matches!(
            parse_fixtures("theta 3 2 : 1\ntheta 3 2 : 1"),
            Err(FixtureError::Duplicate { line: 2, .. })
        ));
        let f = parse_fixtures("theta 3 2 : 1 2").unwrap();
        assert!(matches!(
            parse_annotations("phi 9 9", &f),
            Err(FixtureError::UnknownAnnotation { line: 1, .. })
        ));
    }

    #[test]
    fn rational_and_scaled_entries() {
        let f = parse_fixtures("# section: s\nphi 4 2 : 1/2 * 3/4 -1").unwrap();
        assert_eq!(f[0].location, "s");
        assert_eq!(f[0].printed_value().coeff(0), Rational::new(3.into(), 8.into()));
        assert_eq!(f[0].printed_value().coeff(1), Rational::new((-1).into(), 2.into()));
    }
}
