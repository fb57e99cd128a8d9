//! The fifteen cited integer sequences: exact builtin generators, b-file
//! parsing and an opt-in fetch with an on-disk cache, and column matching.

use crate::combinatorics::{self, binomial, TriangleFamily};
use crate::exact::Integer;
use crate::series::{self, SeriesError};
use crate::triangle::CoeffFamily;
use num_traits::{One, Zero};
use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Environment variable naming the b-file cache directory.
pub const CACHE_ENV: &str = "JAIN_OEIS_CACHE";

/// Largest index shift `match_column` tries in either direction.
pub const MAX_SHIFT: i64 = 5;

#[derive(Debug, Error)]
pub enum OeisError {
    #[error("unknown sequence {0}")]
    UnknownSequence(String),
    #[error("malformed b-file at line {line}: {reason}")]
    MalformedBFile { line: usize, reason: String },
    #[error("b-file line {line}: index {found} follows {previous}")]
    NonContiguousIndices { line: usize, previous: i64, found: i64 },
    #[error("{0} is not cached and network access is disabled")]
    NetworkDisabled(String),
    #[error("fetching {id} failed: {reason}")]
    FetchFailed { id: String, reason: String },
    #[error("cache: {0}")]
    Cache(#[from] std::io::Error),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Builtin,
    Bfile,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceRef {
    pub id: String,
    /// OEIS index of `terms[0]`.
    pub offset: i64,
    pub source: Source,
    pub terms: Vec<Integer>,
}

impl SequenceRef {
    /// Term at OEIS index `n`, if present.
    pub fn at(&self, n: i64) -> Option<&Integer> {
        usize::try_from(n - self.offset).ok().and_then(|i| self.terms.get(i))
    }
}

/// How a builtin sequence is generated.
#[derive(Debug, Clone, Copy)]
enum Rule {
    /// `C(n + shift, k)`.
    Binomial { k: usize, shift: usize },
    /// `c(n + d, n)`, unsigned Stirling numbers of the first kind.
    StirlingFirst { d: usize },
    /// Eulerian triangle `A(n, k)`, rows `n >= 1`, `1 <= k <= n`.
    Eulerian,
    /// Second-order Eulerian triangle, rows `n >= 1`, `n` entries each.
    EulerianSecond,
}

const REGISTRY: [(&str, i64, Rule); 15] = [
    ("A000217", 0, Rule::Binomial { k: 2, shift: 1 }),
    ("A000292", 0, Rule::Binomial { k: 3, shift: 2 }),
    ("A000332", 0, Rule::Binomial { k: 4, shift: 0 }),
    ("A000389", 0, Rule::Binomial { k: 5, shift: 0 }),
    ("A000579", 0, Rule::Binomial { k: 6, shift: 0 }),
    ("A000580", 0, Rule::Binomial { k: 7, shift: 0 }),
    ("A000581", 0, Rule::Binomial { k: 8, shift: 0 }),
    ("A000582", 0, Rule::Binomial { k: 9, shift: 0 }),
    ("A001287", 0, Rule::Binomial { k: 10, shift: 0 }),
    ("A000914", 0, Rule::StirlingFirst { d: 2 }),
    ("A001303", 1, Rule::StirlingFirst { d: 3 }),
    ("A000915", 1, Rule::StirlingFirst { d: 4 }),
    ("A053567", 1, Rule::StirlingFirst { d: 5 }),
    ("A008292", 1, Rule::Eulerian),
    ("A008517", 1, Rule::EulerianSecond),
];

pub fn supported_ids() -> impl Iterator<Item = &'static str> {
    REGISTRY.iter().map(|(id, _, _)| *id)
}

/// `c(n, k)` by expanding the rising factorial `x(x+1)...(x+n-1)`.
fn stirling_first_row(n: usize) -> Vec<Integer> {
    let mut row = vec![Integer::one()];
    for j in 0..n {
        let mut next = vec![Integer::zero(); row.len() + 1];
        for (i, c) in row.iter().enumerate() {
            next[i + 1] += c;
            next[i] += c * Integer::from(j);
        }
        row = next;
    }
    row
}

fn pow(base: i64, e: usize) -> Integer {
    num_traits::pow(Integer::from(base), e)
}

/// `A(n, k) = Σ_{j=0}^{k} (-1)^j C(n+1, j) (k-j)^n`, `1 <= k <= n`.
pub fn eulerian_row_explicit(n: usize) -> Vec<Integer> {
    (1..=n.max(1))
        .map(|k| {
            (0..=k).fold(Integer::zero(), |acc, j| {
                let t = binomial(n + 1, j) * pow((k - j) as i64, n);
                if j % 2 == 0 {
                    acc + t
                } else {
                    acc - t
                }
            })
        })
        .collect()
}

/// `S(n, k) = (1/k!) Σ_i (-1)^i C(k, i) (k-i)^n`.
fn stirling2_explicit(n: usize, k: usize) -> Integer {
    let sum = (0..=k).fold(Integer::zero(), |acc, i| {
        let t = binomial(k, i) * pow((k - i) as i64, n);
        if i % 2 == 0 {
            acc + t
        } else {
            acc - t
        }
    });
    let fact = (1..=k).fold(Integer::one(), |a, j| a * j);
    sum / fact
}

/// Row `n` of the second-order Eulerian triangle,
/// `<<n, k>> = Σ_j (-1)^j C(2n+1, j) S(n+k+1-j, k+1-j)` for `0 <= k < n`.
pub fn eulerian_second_row_explicit(n: usize) -> Vec<Integer> {
    (0..n.max(1))
        .map(|k| {
            (0..=k).fold(Integer::zero(), |acc, j| {
                let t = binomial(2 * n + 1, j) * stirling2_explicit(n + k + 1 - j, k + 1 - j);
                if j % 2 == 0 {
                    acc + t
                } else {
                    acc - t
                }
            })
        })
        .collect()
}

fn lookup(id: &str) -> Result<(i64, Rule), OeisError> {
    REGISTRY
        .iter()
        .find(|(i, _, _)| *i == id)
        .map(|(_, offset, rule)| (*offset, *rule))
        .ok_or_else(|| OeisError::UnknownSequence(id.to_string()))
}

/// The first `count` terms of a supported sequence, from its formula.
/// Triangles are flattened row by row.
pub fn builtin_terms(id: &str, count: usize) -> Result<SequenceRef, OeisError> {
    let (offset, rule) = lookup(id)?;
    let terms: Vec<Integer> = match rule {
        Rule::Binomial { k, shift } => (0..count).map(|i| binomial(i + offset as usize + shift, k)).collect(),
        Rule::StirlingFirst { d } => (0..count)
            .map(|i| {
                let n = i + offset as usize;
                stirling_first_row(n + d).swap_remove(n)
            })
            .collect(),
        Rule::Eulerian | Rule::EulerianSecond => {
            let mut out = Vec::with_capacity(count);
            let mut n = 1;
            while out.len() < count {
                let row = match rule {
                    Rule::Eulerian => eulerian_row_explicit(n),
                    _ => eulerian_second_row_explicit(n),
                };
                out.extend(row);
                n += 1;
            }
            out.truncate(count);
            out
        }
    };
    Ok(SequenceRef {
        id: id.to_string(),
        offset,
        source: Source::Builtin,
        terms,
    })
}

/// Row `n >= 1` of one of the two builtin triangles.
pub fn triangle_row(id: &str, n: usize) -> Result<Vec<Integer>, OeisError> {
    match lookup(id)?.1 {
        Rule::Eulerian => Ok(eulerian_row_explicit(n)),
        Rule::EulerianSecond => Ok(eulerian_second_row_explicit(n)),
        _ => Err(OeisError::UnknownSequence(format!("{id} is not a triangle"))),
    }
}

fn is_oeis_id(s: &str) -> bool {
    s.len() == 7 && s.starts_with('A') && s[1..].bytes().all(|b| b.is_ascii_digit())
}

fn malformed(line: usize, reason: impl Into<String>) -> OeisError {
    OeisError::MalformedBFile {
        line,
        reason: reason.into(),
    }
}

/// Parses b-file text: `#` comments, blank lines, and `index value` lines
/// with consecutive indices. The id is taken from the first comment that
/// mentions one.
pub fn parse_bfile(text: &str) -> Result<SequenceRef, OeisError> {
    let mut id = String::new();
    let mut offset = None;
    let mut previous: Option<i64> = None;
    let mut terms = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let trimmed = raw.trim();
        if let Some(comment) = trimmed.strip_prefix('#') {
            if id.is_empty() {
                if let Some(tok) = comment
                    .split(|c: char| !c.is_ascii_alphanumeric())
                    .find(|t| is_oeis_id(t))
                {
                    id = tok.to_string();
                }
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let mut words = trimmed.split_whitespace();
        let (Some(n), Some(v), None) = (words.next(), words.next(), words.next()) else {
            return Err(malformed(line, "expected `index value`"));
        };
        let n: i64 = n.parse().map_err(|_| malformed(line, format!("bad index {n:?}")))?;
        let v: Integer = v.parse().map_err(|_| malformed(line, format!("bad value {v:?}")))?;
        if let Some(p) = previous {
            if n != p + 1 {
                return Err(OeisError::NonContiguousIndices {
                    line,
                    previous: p,
                    found: n,
                });
            }
        }
        offset.get_or_insert(n);
        previous = Some(n);
        terms.push(v);
    }
    let Some(offset) = offset else {
        return Err(malformed(last_line.max(1), "no terms"));
    };
    Ok(SequenceRef {
        id,
        offset,
        source: Source::Bfile,
        terms,
    })
}

pub fn render_bfile(seq: &SequenceRef) -> String {
    let mut out = String::new();
    if !seq.id.is_empty() {
        writeln!(out, "# {}", seq.id).unwrap();
    }
    for (i, t) in seq.terms.iter().enumerate() {
        writeln!(out, "{} {}", seq.offset + i as i64, t).unwrap();
    }
    out
}

/// Something that can perform an HTTP GET.
pub trait Transport: Send + Sync {
    fn get(&self, url: &str) -> Result<String, String>;
}

#[cfg(feature = "http")]
pub struct HttpTransport {
    client: reqwest::blocking::Client,
}

#[cfg(feature = "http")]
impl HttpTransport {
    pub fn new() -> Result<Self, String> {
        let client = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_secs(30))
            .build()
            .map_err(|e| e.to_string())?;
        Ok(Self { client })
    }
}

#[cfg(feature = "http")]
impl Transport for HttpTransport {
    fn get(&self, url: &str) -> Result<String, String> {
        let resp = self.client.get(url).send().map_err(|e| e.to_string())?;
        let status = resp.status();
        if !status.is_success() {
            return Err(format!("HTTP {status}"));
        }
        resp.text().map_err(|e| e.to_string())
    }
}

pub fn bfile_url(id: &str) -> String {
    format!("https://oeis.org/{id}/b{}.txt", &id[1..])
}

/// Cache directory from an explicit flag, falling back to the environment.
pub fn cache_dir(flag: Option<&Path>) -> Option<PathBuf> {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
}

/// Fetches b-files through a cache directory. Without a transport only
/// cache hits succeed.
pub struct Fetcher {
    cache_dir: PathBuf,
    transport: Option<Box<dyn Transport>>,
}

impl Fetcher {
    pub fn offline(cache_dir: impl Into<PathBuf>) -> Self {
        Self {
            cache_dir: cache_dir.into(),
            transport: None,
        }
    }

    pub fn with_transport(cache_dir: impl Into<PathBuf>, transport: Box<dyn Transport>) -> Self {
        Self {
            cache_dir: cache_dir.into(),
            transport: Some(transport),
        }
    }

    pub fn cache_path(&self, id: &str) -> PathBuf {
        self.cache_dir.join(format!("{id}.txt"))
    }

    pub fn fetch_bfile(&self, id: &str) -> Result<SequenceRef, OeisError> {
        lookup(id)?;
        let path = self.cache_path(id);
        if path.exists() {
            return parse_bfile(&std::fs::read_to_string(&path)?);
        }
        let Some(transport) = &self.transport else {
            return Err(OeisError::NetworkDisabled(id.to_string()));
        };
        let url = bfile_url(id);
        let body = transport.get(&url).map_err(|reason| OeisError::FetchFailed {
            id: id.to_string(),
            reason,
        })?;
        let seq = parse_bfile(&body)?;
        let fetched = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        std::fs::create_dir_all(&self.cache_dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&self.cache_dir)?;
        write!(tmp, "# id: {id}\n# source: {url}\n# fetched: {fetched}\n{body}")?;
        tmp.persist(&path).map_err(|e| e.error)?;
        Ok(SequenceRef {
            id: id.to_string(),
            ..seq
        })
    }
}

/// Alignment of a coefficient column against a sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchReport {
    pub id: String,
    /// Triangle index of `values[0]`.
    pub first_index: i64,
    /// `values[i]` is compared with the term at OEIS index
    /// `first_index + i + shift`.
    pub shift: i64,
    pub matched: usize,
    pub total: usize,
    pub full: bool,
}

/// Finds the shift in `-MAX_SHIFT..=MAX_SHIFT` with the longest exact
/// prefix match; ties go to the smaller `|shift|`, then the smaller shift.
pub fn match_column(values: &[Integer], first_index: i64, seq: &SequenceRef) -> MatchReport {
    let mut best = (0usize, 0i64);
    for shift in -MAX_SHIFT..=MAX_SHIFT {
        let matched = values
            .iter()
            .enumerate()
            .take_while(|(i, v)| seq.at(first_index + *i as i64 + shift) == Some(v))
            .count();
        let better = matched > best.0 || (matched == best.0 && (shift.abs(), shift) < (best.1.abs(), best.1));
        if better {
            best = (matched, shift);
        }
    }
    MatchReport {
        id: seq.id.clone(),
        first_index,
        shift: best.1,
        matched: best.0,
        total: values.len(),
        full: !values.is_empty() && best.0 == values.len(),
    }
}

/// A sequence the paper identifies with a θ coefficient column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Identification {
    pub id: &'static str,
    pub family: CoeffFamily,
    pub k: u32,
    pub beta_exp: u32,
}

/// Constant terms of `θ_{j-1}` against the binomial columns `C(r, j)`,
/// `j = 2..10`, and the top coefficients of `θ_2..θ_5` against the
/// Stirling columns.
pub fn paper_identifications() -> Vec<Identification> {
    let binomial_ids = [
        "A000217", "A000292", "A000332", "A000389", "A000579", "A000580", "A000581", "A000582", "A001287",
    ];
    let mut out: Vec<Identification> = binomial_ids
        .iter()
        .enumerate()
        .map(|(i, id)| Identification {
            id,
            family: CoeffFamily::Theta,
            k: i as u32 + 1,
            beta_exp: 0,
        })
        .collect();
    for (k, id) in [(2, "A000914"), (3, "A001303"), (4, "A000915"), (5, "A053567")] {
        out.push(Identification {
            id,
            family: CoeffFamily::Theta,
            k,
            beta_exp: k - 1,
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentificationResult {
    pub identification: Identification,
    pub source: Source,
    pub report: MatchReport,
}

/// Runs every identification over rows `r <= max_r`, taking sequences
/// from `sequence` (builtin or fetched).
pub fn check_identifications<F>(max_r: u32, mut sequence: F) -> Result<Vec<IdentificationResult>, OeisError>
where
    F: FnMut(&str, usize) -> Result<SequenceRef, OeisError>,
{
    let theta = series::engine().triangle(CoeffFamily::Theta, max_r)?;
    let mut out = Vec::new();
    for ident in paper_identifications() {
        let column = theta.column(ident.k, ident.beta_exp as usize);
        let values: Vec<Integer> = column
            .iter()
            .map(|(_, c)| {
                debug_assert!(c.is_integer());
                c.to_integer()
            })
            .collect();
        let first_index = column.first().map(|(r, _)| *r as i64).unwrap_or(0);
        let needed = (first_index.abs() + values.len() as i64 + 2 * MAX_SHIFT + 2) as usize;
        let seq = sequence(ident.id, needed)?;
        out.push(IdentificationResult {
            identification: ident,
            source: seq.source,
            report: match_column(&values, first_index, &seq),
        });
    }
    Ok(out)
}

/// Builtin source for [`check_identifications`].
pub fn builtin_source(id: &str, count: usize) -> Result<SequenceRef, OeisError> {
    builtin_terms(id, count)
}

/// A row of a flattened OEIS triangle against the recurrence generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowCheck {
    pub id: &'static str,
    pub n: usize,
    pub source: Source,
    pub matched: bool,
}

/// Rows `1..=max_n` of A008292 and A008517 (row `n` has `n` entries)
/// against the Eulerian recurrences of both orders.
pub fn check_triangle_rows<F>(max_n: usize, mut sequence: F) -> Result<Vec<RowCheck>, OeisError>
where
    F: FnMut(&str, usize) -> Result<SequenceRef, OeisError>,
{
    let count = max_n * (max_n + 1) / 2;
    let mut out = Vec::new();
    for (id, family) in [("A008292", TriangleFamily::Eulerian1), ("A008517", TriangleFamily::Eulerian2)] {
        let seq = sequence(id, count)?;
        for n in 1..=max_n {
            let start = seq.offset + ((n - 1) * n / 2) as i64;
            let generated = combinatorics::cache(family).row(n);
            let matched = generated
                .iter()
                .enumerate()
                .all(|(i, g)| seq.at(start + i as i64) == Some(g));
            out.push(RowCheck {
                id,
                n,
                source: seq.source,
                matched,
            });
        }
    }
    Ok(out)
}
