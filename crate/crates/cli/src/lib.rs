//! The `jain` command line.
//!
//! Exit codes: 0 success, 1 unexpected discrepancy or runtime failure,
//! 2 usage error (including the `--cap` guard).

use clap::{Parser, Subcommand};
use jain_core::fixtures::{self, ExpectationFailure};
use jain_core::oeis::{self, IdentificationResult, OeisError, RowCheck, SequenceRef};
use jain_core::oracle::{self, NumericCheck, SeriesGrid, TruncationPolicy};
use jain_core::render::{self, Format};
use jain_core::{closedforms, moments, series, BetaPoly, CoeffFamily, CoeffTriangle, DiscrepancyReport, MainVar};
use serde::Serialize;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

/// Tolerances for `verify numeric` when `--tol` is absent.
pub const SERIES_TOL: f64 = 1e-9;
pub const MOMENT_TOL: f64 = 1e-8;
pub const UNITY_TOL: f64 = 1e-9;
pub const RECURRENCE_TOL: f64 = 1e-7;

/// Largest `r` (series) and `m` (moments) swept numerically.
pub const NUMERIC_MAX_R: u32 = 8;
pub const NUMERIC_MAX_M: u32 = 8;
pub const RECURRENCE_MAX_R: u32 = 4;

pub const DEFAULT_CLOSED_FORM_MAX: u32 = 30;
pub const DEFAULT_OEIS_MAX_R: u32 = 12;
pub const TRIANGLE_ROWS_MAX_N: usize = 10;

#[derive(Debug, Parser)]
#[command(name = "jain", version, about = "Exact moments of the β-generalized basis functions")]
struct Cli {
    /// Output format: text, latex or json.
    #[arg(long, global = true, default_value = "text")]
    format: Format,
    /// Also write the machine-readable JSON report to this path.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Hard cap on r, m and --max.
    #[arg(long, global = true, default_value_t = 64)]
    cap: u32,
    /// Worker threads for the parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// S(r, α, β), or S(r, y + rβ, β) with --shifted, in graded form.
    Series {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        shifted: bool,
    },
    /// The m-th moment in graded form.
    Moment {
        #[arg(long)]
        m: u32,
    },
    /// Dump a coefficient triangle.
    Table {
        /// theta, phi or sigma.
        family: CoeffFamily,
        #[arg(long)]
        max: u32,
    },
    /// Check closed forms, printed tables and numerics.
    #[command(subcommand)]
    Verify(Verify),
    /// Integer-sequence identification.
    #[command(subcommand)]
    Oeis(Oeis),
}

#[derive(Debug, Subcommand)]
enum Verify {
    /// Every encoded closed form against the recursion.
    ClosedForms {
        #[arg(long, default_value_t = DEFAULT_CLOSED_FORM_MAX)]
        max: u32,
    },
    /// The printed tables against the recursion.
    Paper,
    /// Exact values against truncated sums.
    Numeric {
        /// One tolerance for every sweep, replacing the defaults.
        #[arg(long)]
        tol: Option<f64>,
        /// Series grid, e.g. `alpha=0.5,1,3;beta=0,0.25`.
        #[arg(long)]
        grid: Option<SeriesGrid>,
    },
    /// Everything above plus `oeis check`, offline.
    All,
}

#[derive(Debug, Subcommand)]
enum Oeis {
    /// Match coefficient columns against the cited sequences.
    Check {
        /// Download missing b-files into the cache.
        #[arg(long)]
        fetch: bool,
        /// Cache directory (overrides JAIN_OEIS_CACHE).
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_OEIS_MAX_R)]
        max_r: u32,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// What a command produced. `latex` falls back to `text`.
struct Outcome {
    text: String,
    latex: Option<String>,
    json: String,
    ok: bool,
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report types serialize")
}

/// Runs the CLI on `argv` (program name first). Returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let result = match cli.threads {
        Some(0) => Err(Failure::Usage("--threads must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(Failure::Runtime(e.to_string())),
        },
        None => dispatch(&cli),
    };
    match result {
        Ok(o) => {
            let body = match cli.format {
                Format::Text => &o.text,
                Format::Latex => o.latex.as_ref().unwrap_or(&o.text),
                Format::Json => &o.json,
            };
            let _ = write!(out, "{body}");
            if !body.ends_with('\n') {
                let _ = writeln!(out);
            }
            if let Some(path) = &cli.report {
                if let Err(e) = std::fs::write(path, format!("{}\n", o.json)) {
                    let _ = writeln!(err, "jain: cannot write report {}: {e}", path.display());
                    return 1;
                }
            }
            if o.ok {
                0
            } else {
                1
            }
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "jain: {msg}");
            2
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(err, "jain: {msg}");
            if let Some(path) = &cli.report {
                let doc = serde_json::json!({ "ok": false, "error": msg });
                let _ = std::fs::write(path, format!("{}\n", pretty(&doc)));
            }
            1
        }
    }
}

fn capped(name: &str, value: u32, cap: u32) -> Result<u32, Failure> {
    if value > cap {
        Err(Failure::Usage(format!("{name} = {value} exceeds the cap {cap} (raise it with --cap)")))
    } else {
        Ok(value)
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Series { r, shifted } => series_cmd(capped("r", *r, cli.cap)?, *shifted),
        Command::Moment { m } => moment_cmd(capped("m", *m, cli.cap)?),
        Command::Table { family, max } => table_cmd(*family, capped("max", *max, cli.cap)?),
        Command::Verify(Verify::ClosedForms { max }) => {
            let r = closed_forms(capped("max", *max, cli.cap)?)?;
            Ok(report_outcome(&r))
        }
        Command::Verify(Verify::Paper) => {
            let p = paper()?;
            Ok(Outcome {
                text: p.text(),
                latex: None,
                json: pretty(&p),
                ok: p.ok(),
            })
        }
        Command::Verify(Verify::Numeric { tol, grid }) => {
            let n = numeric(*tol, &grid.clone().unwrap_or_default())?;
            Ok(Outcome {
                text: n.text(),
                latex: None,
                json: pretty(&n),
                ok: n.ok(),
            })
        }
        Command::Verify(Verify::All) => all(),
        Command::Oeis(Oeis::Check { fetch, cache, max_r }) => {
            let o = oeis_check(capped("max-r", *max_r, cli.cap)?, *fetch, cache.clone())?;
            Ok(Outcome {
                text: o.text(),
                latex: None,
                json: pretty(&o),
                ok: o.ok(),
            })
        }
    }
}

#[derive(Serialize)]
struct SeriesDoc<'a> {
    r: u32,
    variable: &'static str,
    prefix_p_exp: u32,
    entries: &'a [BetaPoly],
}

fn series_cmd(r: u32, shifted: bool) -> Result<Outcome, Failure> {
    if r == 0 {
        return Err(Failure::Usage("r must be at least 1".into()));
    }
    let s = if shifted { series::s_shifted(r)? } else { series::s_alpha(r)? };
    let g = s.graded.as_ref().expect("series forms are graded");
    let doc = SeriesDoc {
        r,
        variable: match s.variable {
            MainVar::Alpha => "alpha",
            MainVar::Y => "y",
        },
        prefix_p_exp: g.prefix_p_exp,
        entries: &g.entries,
    };
    Ok(Outcome {
        text: render::series(&s, false),
        latex: Some(render::series(&s, true)),
        json: pretty(&doc),
        ok: true,
    })
}

#[derive(Serialize)]
struct MomentDoc<'a> {
    m: u32,
    y_exp: u32,
    n_exp: u32,
    prefix_p_exp: u32,
    entries: &'a [BetaPoly],
}

fn moment_cmd(m: u32) -> Result<Outcome, Failure> {
    let f = moments::moment(m)?;
    let doc = MomentDoc {
        m,
        y_exp: f.scale.y_exp,
        n_exp: f.scale.n_exp,
        prefix_p_exp: f.graded.prefix_p_exp,
        entries: &f.graded.entries,
    };
    Ok(Outcome {
        text: render::moment(&f, false),
        latex: Some(render::moment(&f, true)),
        json: pretty(&doc),
        ok: true,
    })
}

fn latex_symbol(family: CoeffFamily) -> &'static str {
    match family {
        CoeffFamily::Theta => "\\theta",
        CoeffFamily::Phi => "\\phi",
        CoeffFamily::Sigma => "\\sigma",
    }
}

/// Text and LaTeX listings of a triangle, one entry per line, rows
/// separated by a blank line.
pub fn triangle_text(t: &CoeffTriangle, latex: bool) -> String {
    let mut out = String::new();
    if latex {
        out.push_str("\\begin{aligned}\n");
    }
    let mut last = None;
    for ((index, k), p) in &t.entries {
        if last.is_some_and(|l| l != *index) {
            out.push_str(if latex { "\\\\[4pt]\n" } else { "\n" });
        }
        last = Some(*index);
        if latex {
            writeln!(out, "{}_{{{k}}}^{{{index}}} &= {} \\\\", latex_symbol(t.family), render::beta_poly(p, true)).unwrap();
        } else {
            writeln!(out, "{}_{k}^{index} = {}", t.family.symbol(), render::beta_poly(p, false)).unwrap();
        }
    }
    if latex {
        out.push_str("\\end{aligned}\n");
    }
    out
}

fn table_cmd(family: CoeffFamily, max: u32) -> Result<Outcome, Failure> {
    let t = moments::triangle(family, max)?;
    Ok(Outcome {
        text: triangle_text(&t, false),
        latex: Some(triangle_text(&t, true)),
        json: pretty(&t),
        ok: true,
    })
}

fn report_outcome(r: &DiscrepancyReport) -> Outcome {
    Outcome {
        text: r.to_text(),
        latex: None,
        json: pretty(r),
        ok: r.unexpected().count() == 0,
    }
}

fn closed_forms(max: u32) -> Result<DiscrepancyReport, Failure> {
    Ok(closedforms::verify_all(max)?)
}

#[derive(Serialize)]
struct PaperDoc {
    report: DiscrepancyReport,
    failures: Vec<String>,
}

impl PaperDoc {
    fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    fn text(&self) -> String {
        let mut out = self.report.to_text();
        for f in &self.failures {
            writeln!(out, "FAIL {f}").unwrap();
        }
        out
    }
}

fn paper() -> Result<PaperDoc, Failure> {
    let report = fixtures::diff_all()?;
    let failures = fixtures::check_expectations(&report, fixtures::expected_mismatches())
        .iter()
        .map(ExpectationFailure::to_string)
        .collect();
    Ok(PaperDoc { report, failures })
}

#[derive(Serialize)]
struct SweepSummary {
    kind: &'static str,
    tol: f64,
    checked: usize,
    failed: usize,
    max_scaled_error: f64,
}

#[derive(Serialize)]
struct NumericDoc {
    summaries: Vec<SweepSummary>,
    checks: Vec<NumericCheck>,
}

impl NumericDoc {
    fn ok(&self) -> bool {
        self.summaries.iter().all(|s| s.failed == 0)
    }

    fn text(&self) -> String {
        let mut out = String::from("== numeric oracle ==\n");
        for s in &self.summaries {
            writeln!(
                out,
                "{:<10} checked {:>4}  failed {:>3}  max scaled error {:.2e}  tol {:.0e}",
                s.kind, s.checked, s.failed, s.max_scaled_error, s.tol
            )
            .unwrap();
        }
        for c in self.checks.iter().filter(|c| !c.cmp.pass) {
            writeln!(
                out,
                "FAIL {} {}: exact {:e} numeric {:e} scaled error {:.2e}",
                c.kind, c.point, c.cmp.exact, c.cmp.numeric, c.cmp.scaled_error
            )
            .unwrap();
        }
        out
    }
}

fn numeric(tol: Option<f64>, grid: &SeriesGrid) -> Result<NumericDoc, Failure> {
    if let Some(t) = tol {
        if t.is_nan() || t <= 0.0 {
            return Err(Failure::Usage(format!("--tol must be positive, got {t}")));
        }
    }
    let policy = TruncationPolicy::default();
    let sweeps = [
        ("series", oracle::series_checks(NUMERIC_MAX_R, grid, tol.unwrap_or(SERIES_TOL), &policy)?),
        ("moment", oracle::moment_checks(NUMERIC_MAX_M, tol.unwrap_or(MOMENT_TOL), &policy)?),
        ("unity", oracle::unity_checks(tol.unwrap_or(UNITY_TOL), &policy)?),
        (
            "recurrence",
            oracle::recurrence_checks(RECURRENCE_MAX_R, grid, tol.unwrap_or(RECURRENCE_TOL), &policy)?,
        ),
    ];
    let mut doc = NumericDoc {
        summaries: Vec::new(),
        checks: Vec::new(),
    };
    for (kind, checks) in sweeps {
        doc.summaries.push(SweepSummary {
            kind,
            tol: checks.first().map_or(0.0, |c| c.tol),
            checked: checks.len(),
            failed: checks.iter().filter(|c| !c.cmp.pass).count(),
            max_scaled_error: checks.iter().map(|c| c.cmp.scaled_error).fold(0.0, f64::max),
        });
        doc.checks.extend(checks);
    }
    Ok(doc)
}

#[derive(Serialize)]
struct OeisDoc {
    identifications: Vec<IdentificationResult>,
    rows: Vec<RowCheck>,
}

impl OeisDoc {
    fn ok(&self) -> bool {
        self.identifications.iter().all(|i| i.report.full) && self.rows.iter().all(|r| r.matched)
    }

    fn text(&self) -> String {
        let mut out = String::from("== OEIS identifications ==\n");
        for i in &self.identifications {
            let id = &i.identification;
            writeln!(
                out,
                "{}  {}_{} β{:<2} rows {}..  shift {:>2}  matched {}/{}  {}",
                id.id,
                id.family.symbol(),
                id.k,
                render::superscript(id.beta_exp as usize),
                i.report.first_index,
                i.report.shift,
                i.report.matched,
                i.report.total,
                if i.report.full { "full" } else { "PARTIAL" }
            )
            .unwrap();
        }
        for id in ["A008292", "A008517"] {
            let rows: Vec<_> = self.rows.iter().filter(|r| r.id == id).collect();
            let bad: Vec<String> = rows.iter().filter(|r| !r.matched).map(|r| r.n.to_string()).collect();
            let status = if bad.is_empty() { "all match".to_string() } else { format!("MISMATCH at n = {}", bad.join(", ")) };
            writeln!(out, "{id}  rows 1..{}  {status}", rows.len()).unwrap();
        }
        out
    }
}

type SourceFn = Box<dyn FnMut(&str, usize) -> Result<SequenceRef, OeisError>>;

fn oeis_source(fetch: bool, cache: Option<PathBuf>) -> Result<SourceFn, Failure> {
    let dir = oeis::cache_dir(cache.as_deref());
    if fetch {
        let dir = dir.unwrap_or_else(|| std::env::temp_dir().join("jain-oeis"));
        return fetching(dir);
    }
    Ok(match dir {
        // Cached b-files win; anything missing comes from the builtin formulas.
        Some(dir) => {
            let fetcher = oeis::Fetcher::offline(dir);
            Box::new(move |id, count| match fetcher.fetch_bfile(id) {
                Err(OeisError::NetworkDisabled(_)) => oeis::builtin_source(id, count),
                other => other,
            })
        }
        None => Box::new(oeis::builtin_source),
    })
}

#[cfg(feature = "http")]
fn fetching(dir: PathBuf) -> Result<SourceFn, Failure> {
    let transport = oeis::HttpTransport::new().map_err(Failure::Runtime)?;
    let fetcher = oeis::Fetcher::with_transport(dir, Box::new(transport));
    Ok(Box::new(move |id, _| fetcher.fetch_bfile(id)))
}

#[cfg(not(feature = "http"))]
fn fetching(_dir: PathBuf) -> Result<SourceFn, Failure> {
    Err(Failure::Usage("--fetch needs the http feature".into()))
}

fn oeis_check(max_r: u32, fetch: bool, cache: Option<PathBuf>) -> Result<OeisDoc, Failure> {
    let mut source = oeis_source(fetch, cache)?;
    let identifications = oeis::check_identifications(max_r, &mut source)?;
    let rows = oeis::check_triangle_rows(TRIANGLE_ROWS_MAX_N, &mut source)?;
    Ok(OeisDoc { identifications, rows })
}

#[derive(Serialize)]
struct AllDoc {
    ok: bool,
    closed_forms: DiscrepancyReport,
    paper: PaperDoc,
    numeric: NumericDoc,
    oeis: OeisDoc,
}

fn all() -> Result<Outcome, Failure> {
    let closed_forms = closed_forms(DEFAULT_CLOSED_FORM_MAX)?;
    let paper = paper()?;
    let numeric = numeric(None, &SeriesGrid::default())?;
    let oeis = oeis_check(DEFAULT_OEIS_MAX_R, false, None)?;
    let verdicts = [
        ("closed forms", closed_forms.unexpected().count() == 0),
        ("paper tables", paper.ok()),
        ("numeric oracle", numeric.ok()),
        ("OEIS", oeis.ok()),
    ];
    let ok = verdicts.iter().all(|(_, v)| *v);
    let mut text = [closed_forms.to_text(), paper.text(), numeric.text(), oeis.text()].join("\n");
    text.push('\n');
    for (name, v) in verdicts {
        writeln!(text, "{:<15} {}", name, if v { "ok" } else { "FAIL" }).unwrap();
    }
    let doc = AllDoc {
        ok,
        closed_forms,
        paper,
        numeric,
        oeis,
    };
    Ok(Outcome {
        text,
        latex: None,
        json: pretty(&doc),
        ok,
    })
}
