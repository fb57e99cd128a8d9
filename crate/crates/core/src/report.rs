//! Discrepancy reports: where computed values and printed text disagree.
//!
//! Exact values serialize as strings so no precision is lost.

use crate::exact::{serde_rational, BetaPoly, Rational};
use crate::render;
use crate::triangle::CoeffFamily;
use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// One β-exponent at which the printed and computed polynomials differ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermDiff {
    pub beta_exp: u32,
    #[serde(with = "serde_rational")]
    pub printed: Rational,
    #[serde(with = "serde_rational")]
    pub computed: Rational,
}

/// Per-exponent differences between two polynomials, ascending.
pub fn term_diffs(printed: &BetaPoly, computed: &BetaPoly) -> Vec<TermDiff> {
    let len = printed.coeffs().len().max(computed.coeffs().len());
    (0..len)
        .filter_map(|e| {
            let (a, b) = (printed.coeff(e), computed.coeff(e));
            (a != b).then_some(TermDiff {
                beta_exp: e as u32,
                printed: a,
                computed: b,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    /// Stable identifier, e.g. `phi 10 4` or `sigma_4 m=7`.
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<CoeffFamily>,
    pub index: u32,
    pub k: u32,
    pub diffs: Vec<TermDiff>,
    /// Accounted for: annotated, or localized to a consistent misprint.
    #[serde(default)]
    pub expected: bool,
}

/// A single-term change that makes a printed formula agree with the
/// recursion over the whole checked range. Derived, not the author's intent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Repair {
    /// Printed term `term` belongs at `derived_exp`, not `printed_exp`.
    ExponentMisprint { term: usize, printed_exp: u32, derived_exp: u32 },
    /// Printed term `term` has the wrong sign.
    SignFlip { term: usize, beta_exp: u32 },
    /// The whole `β^beta_exp` coefficient, as a polynomial in the index
    /// (inside the common prefactor), fitted to the recursion values.
    Coefficient {
        beta_exp: u32,
        printed: BetaPoly,
        derived: BetaPoly,
    },
    /// No polynomial of low degree in the index fits.
    Unresolved { beta_exp: u32 },
}

/// Outcome of checking one closed form over an index range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormSummary {
    pub form: String,
    pub family: CoeffFamily,
    pub k: u32,
    pub first_index: u32,
    pub last_index: u32,
    /// Exponents flagged at any index, ascending.
    pub flagged_exps: Vec<u32>,
    /// Every index in the range flags exactly `flagged_exps`.
    pub consistent: bool,
    pub repairs: Vec<Repair>,
}

impl FormSummary {
    pub fn verified(&self) -> bool {
        self.flagged_exps.is_empty()
    }
}

/// A printed Stirling-number indexing checked against the recursion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexingNote {
    pub family: CoeffFamily,
    pub k: u32,
    pub beta_exp: u32,
    /// As printed, e.g. `s(r+1, r-1)`.
    pub printed: String,
    /// The indexing that matches, e.g. `c(r, r-2)`.
    pub derived: String,
    pub printed_holds: bool,
    pub derived_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct DiscrepancyReport {
    pub subject: String,
    pub checked: usize,
    pub matched: usize,
    pub mismatches: Vec<Mismatch>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub summaries: Vec<FormSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub indexing: Vec<IndexingNote>,
}

impl DiscrepancyReport {
    pub fn new(subject: impl Into<String>) -> Self {
        Self {
            subject: subject.into(),
            ..Self::default()
        }
    }

    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty()
    }

    /// Mismatches not covered by an annotation.
    pub fn unexpected(&self) -> impl Iterator<Item = &Mismatch> {
        self.mismatches.iter().filter(|m| !m.expected)
    }

    pub fn sort(&mut self) {
        self.mismatches.sort_by(|a, b| {
            (a.family, a.index, a.k, &a.id).cmp(&(b.family, b.index, b.k, &b.id))
        });
        self.summaries.sort_by(|a, b| (a.family, a.k, &a.form).cmp(&(b.family, b.k, &b.form)));
    }

    /// Human-readable table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "== {} ==", self.subject).unwrap();
        writeln!(
            out,
            "checked {}, matched {}, mismatched {} ({} expected)",
            self.checked,
            self.matched,
            self.mismatches.len(),
            self.mismatches.iter().filter(|m| m.expected).count()
        )
        .unwrap();
        for s in &self.summaries {
            let status = if s.verified() {
                "verified".to_string()
            } else {
                let exps: Vec<String> = s.flagged_exps.iter().map(|e| format!("β{}", render::superscript(*e as usize))).collect();
                format!(
                    "flags {} ({})",
                    exps.join(", "),
                    if s.consistent { "every index" } else { "varies by index" }
                )
            };
            writeln!(out, "{:<10} {}={}..{}  {}", s.form, s.family.index_var(), s.first_index, s.last_index, status).unwrap();
            for r in &s.repairs {
                writeln!(out, "    repair: {}", repair_text(r, s.family.index_var())).unwrap();
            }
        }
        for n in &self.indexing {
            writeln!(
                out,
                "{}_{} β{}: printed {} {}, derived {} {}",
                n.family.symbol(),
                n.k,
                render::superscript(n.beta_exp as usize),
                n.printed,
                if n.printed_holds { "holds" } else { "fails" },
                n.derived,
                if n.derived_holds { "holds" } else { "fails" }
            )
            .unwrap();
        }
        for m in &self.mismatches {
            let tag = if m.expected { " [expected]" } else { "" };
            writeln!(out, "{}{}", m.id, tag).unwrap();
            for d in &m.diffs {
                writeln!(
                    out,
                    "    β{:<3} printed {:>14}  computed {:>14}",
                    render::superscript(d.beta_exp as usize),
                    d.printed.to_string(),
                    d.computed.to_string()
                )
                .unwrap();
            }
        }
        out
    }
}

fn repair_text(r: &Repair, var: char) -> String {
    let var = var.to_string();
    match r {
        Repair::ExponentMisprint { term, printed_exp, derived_exp } => format!(
            "term {term}: β{} should be β{}",
            render::superscript(*printed_exp as usize),
            render::superscript(*derived_exp as usize)
        ),
        Repair::SignFlip { term, beta_exp } => {
            format!("term {term} (β{}): sign flipped", render::superscript(*beta_exp as usize))
        }
        Repair::Coefficient { beta_exp, printed, derived } => format!(
            "β{} coefficient {} should be {}",
            render::superscript(*beta_exp as usize),
            render::poly(printed, &var, false),
            render::poly(derived, &var, false)
        ),
        Repair::Unresolved { beta_exp } => {
            format!("β{}: no low-degree fit", render::superscript(*beta_exp as usize))
        }
    }
}
