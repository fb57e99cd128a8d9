use crate::exact::{BetaPoly, Rational};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Which coefficient triangle an entry belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoeffFamily {
    /// `θ_k^r(β)`, coefficients of `S(r, α, β)`.
    Theta,
    /// `φ_k^r(β)`, coefficients of `S(r, y + rβ, β)`.
    Phi,
    /// `σ_k^m(β)`, interior coefficients of the `m`-th moment.
    Sigma,
}

impl CoeffFamily {
    pub const ALL: [CoeffFamily; 3] = [Self::Theta, Self::Phi, Self::Sigma];

    pub fn name(self) -> &'static str {
        match self {
            Self::Theta => "theta",
            Self::Phi => "phi",
            Self::Sigma => "sigma",
        }
    }

    /// Name of the row index variable (`r` for series, `m` for moments).
    pub fn index_var(self) -> char {
        match self {
            Self::Theta | Self::Phi => 'r',
            Self::Sigma => 'm',
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Self::Theta => "θ",
            Self::Phi => "φ",
            Self::Sigma => "σ",
        }
    }

    /// Smallest row index at which column `k` exists.
    pub fn first_index(self, k: u32) -> u32 {
        match self {
            Self::Theta | Self::Phi => k + 1,
            Self::Sigma => (k + 2).max(4),
        }
    }

    /// The column range of row `index`.
    pub fn columns(self, index: u32) -> std::ops::RangeInclusive<u32> {
        match self {
            Self::Theta | Self::Phi => 1..=index.saturating_sub(1),
            Self::Sigma => 2..=index.saturating_sub(2),
        }
    }

    /// β-degree every entry of column `k` must have.
    pub fn expected_degree(self, k: u32) -> u32 {
        match self {
            Self::Theta | Self::Sigma => k - 1,
            Self::Phi => k,
        }
    }
}

impl fmt::Display for CoeffFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CoeffFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "theta" => Ok(Self::Theta),
            "phi" => Ok(Self::Phi),
            "sigma" => Ok(Self::Sigma),
            other => Err(format!("unknown coefficient family {other:?}")),
        }
    }
}

/// A triangle of coefficient polynomials keyed by `(index, k)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "TriangleDoc", from = "TriangleDoc")]
pub struct CoeffTriangle {
    pub family: CoeffFamily,
    pub entries: BTreeMap<(u32, u32), BetaPoly>,
}

impl CoeffTriangle {
    pub fn new(family: CoeffFamily) -> Self {
        Self {
            family,
            entries: BTreeMap::new(),
        }
    }

    pub fn get(&self, index: u32, k: u32) -> Option<&BetaPoly> {
        self.entries.get(&(index, k))
    }

    /// Coefficient of `β^exp` down column `k`, in increasing index order.
    pub fn column(&self, k: u32, exp: usize) -> Vec<(u32, Rational)> {
        self.entries
            .iter()
            .filter(|((_, kk), _)| *kk == k)
            .map(|((i, _), p)| (*i, p.coeff(exp)))
            .collect()
    }

    pub fn max_index(&self) -> Option<u32> {
        self.entries.keys().map(|(i, _)| *i).max()
    }
}

#[derive(Serialize, Deserialize)]
struct TriangleDoc {
    family: CoeffFamily,
    entries: Vec<EntryDoc>,
}

#[derive(Serialize, Deserialize)]
struct EntryDoc {
    index: u32,
    k: u32,
    coeffs: BetaPoly,
}

impl From<CoeffTriangle> for TriangleDoc {
    fn from(t: CoeffTriangle) -> Self {
        Self {
            family: t.family,
            entries: t
                .entries
                .into_iter()
                .map(|((index, k), coeffs)| EntryDoc { index, k, coeffs })
                .collect(),
        }
    }
}

impl From<TriangleDoc> for CoeffTriangle {
    fn from(d: TriangleDoc) -> Self {
        Self {
            family: d.family,
            entries: d
                .entries
                .into_iter()
                .map(|e| ((e.index, e.k), e.coeffs))
                .collect(),
        }
    }
}
