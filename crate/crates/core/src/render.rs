//! Text and LaTeX rendering of polynomials and moment forms.
//!
//! Coefficients are always listed in ascending degree.

use crate::exact::{BetaPoly, Rational};
use crate::moments::MomentForm;
use crate::series::{MainVar, SeriesForm};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Latex,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Self::Text),
            "latex" => Ok(Self::Latex),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format {other:?} (expected text, latex or json)")),
        }
    }
}

const SUPERSCRIPTS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];

pub fn superscript(n: usize) -> String {
    n.to_string()
        .bytes()
        .map(|b| SUPERSCRIPTS[(b - b'0') as usize])
        .collect()
}

/// `var^exp` in the given style; empty for `exp = 0`.
pub fn power(var: &str, exp: usize, latex: bool) -> String {
    match (exp, latex) {
        (0, _) => String::new(),
        (1, _) => var.to_string(),
        (e, false) => format!("{var}{}", superscript(e)),
        (e, true) => format!("{var}^{{{e}}}"),
    }
}

fn rational_latex(c: &Rational) -> String {
    if c.is_integer() {
        c.to_string()
    } else {
        format!("\\frac{{{}}}{{{}}}", c.numer(), c.denom())
    }
}

fn join_terms(terms: Vec<(bool, String)>) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (neg, body)) in terms.into_iter().enumerate() {
        match (i, neg) {
            (0, true) => write!(out, "-{body}").unwrap(),
            (0, false) => out.push_str(&body),
            (_, true) => write!(out, " - {body}").unwrap(),
            (_, false) => write!(out, " + {body}").unwrap(),
        }
    }
    out
}

/// A univariate polynomial in `var`, e.g. `1 + 22β + 58β² + 24β³`.
pub fn poly(p: &BetaPoly, var: &str, latex: bool) -> String {
    let var = if latex && var == "β" { "\\beta" } else { var };
    let terms = p
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(e, c)| {
            let mag = c.abs();
            let x = power(var, e, latex);
            let coef = if latex { rational_latex(&mag) } else { mag.to_string() };
            let body = match (mag.is_one(), x.is_empty(), latex) {
                (_, true, _) => coef,
                (true, false, _) => x,
                (false, false, true) => format!("{coef} {x}"),
                (false, false, false) => format!("{coef}{x}"),
            };
            (c.is_negative(), body)
        })
        .collect();
    join_terms(terms)
}

pub fn beta_poly(p: &BetaPoly, latex: bool) -> String {
    poly(p, "β", latex)
}

/// Splits off the gcd of the coefficients when the polynomial has more
/// than one term, as in `15(1 + 4β + 2β²)`.
fn factored(p: &BetaPoly, latex: bool) -> (Option<Rational>, String) {
    let nonzero: Vec<&Rational> = p.coeffs().iter().filter(|c| !c.is_zero()).collect();
    if nonzero.len() < 2 || !p.is_integral() {
        return (None, beta_poly(p, latex));
    }
    let g = nonzero
        .iter()
        .fold(num_bigint::BigInt::zero(), |g, c| num_integer::Integer::gcd(&g, c.numer()));
    if g.is_one() {
        return (None, beta_poly(p, latex));
    }
    let g = Rational::from_integer(g);
    (Some(g.clone()), beta_poly(&p.scale(&(Rational::one() / g)), latex))
}

/// A β-polynomial used as a multiplier: `g β^e (inner)` with the gcd
/// and the lowest β power pulled out; single terms are left bare.
fn coefficient(p: &BetaPoly, latex: bool) -> String {
    let low = p.coeffs().iter().position(|c| !c.is_zero()).unwrap_or(0);
    let rest = p.div_x_pow(low).expect("lowest power divides");
    let multi = rest.coeffs().iter().filter(|c| !c.is_zero()).count() > 1;
    if !multi {
        return beta_poly(p, latex);
    }
    let (g, inner) = factored(&rest, latex);
    let beta = power(if latex { "\\beta" } else { "β" }, low, latex);
    let inner = if latex {
        format!("\\left({inner}\\right)")
    } else {
        format!("({})", inner.replace(" + ", "+").replace(" - ", "-"))
    };
    let mut out = g.map(|g| g.to_string()).unwrap_or_default();
    out.push_str(&beta);
    if latex && !out.is_empty() {
        out.push(' ');
    }
    out.push_str(&inner);
    out
}

/// `Σ_k C_k y^{top-k} p^k` with both variables named by the caller.
fn graded_sum(entries: &[BetaPoly], main: &str, latex: bool) -> String {
    let top = entries.len().saturating_sub(1);
    let terms = entries
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| {
            let vars: Vec<String> = [power(main, top - k, latex), power("p", k, latex)]
                .into_iter()
                .filter(|s| !s.is_empty())
                .collect();
            let vars = vars.join(if latex { " " } else { "" });
            let coef = if c.is_one() { String::new() } else { coefficient(c, latex) };
            let body = match (coef.is_empty(), vars.is_empty()) {
                (true, true) => "1".to_string(),
                (true, false) => vars,
                (false, true) => coef,
                (false, false) if latex => format!("{coef} {vars}"),
                (false, false) => format!("{coef}{vars}"),
            };
            (false, body)
        })
        .collect();
    join_terms(terms)
}

/// `y p³/n³ · (y² + 3yp + (1+2β)p²)` in text, or the LaTeX equivalent.
pub fn moment(f: &MomentForm, latex: bool) -> String {
    if f.m == 0 {
        return "1".into();
    }
    let m = f.m as usize;
    let inner = graded_sum(&f.graded.entries, "y", latex);
    if latex {
        let body = if f.graded.entries.len() == 1 { inner } else { format!("\\left( {inner} \\right)") };
        format!("\\frac{{y {}}}{{{}}} \\, {body}", power("p", m, true), power("n", m, true))
    } else if f.graded.entries.len() == 1 {
        format!("y{}/{}", power("p", m, false), power("n", m, false))
    } else {
        format!("y {}/{} · ({inner})", power("p", m, false), power("n", m, false))
    }
}

/// `S(r, α, β)` or `S(r, y+rβ, β)` in the graded form, e.g.
/// `p³ · (α² + 3β²αp + β³(1 + 2β)p²)` in text.
pub fn series(s: &SeriesForm, latex: bool) -> String {
    let var = match (s.variable, latex) {
        (MainVar::Alpha, true) => "\\alpha",
        (MainVar::Alpha, false) => "α",
        (MainVar::Y, _) => "y",
    };
    let g = s.graded.as_ref().expect("series forms are always graded");
    let prefix = power("p", g.prefix_p_exp as usize, latex);
    if g.entries.len() == 1 {
        return prefix;
    }
    let inner = graded_sum(&g.entries, var, latex);
    if latex {
        format!("{prefix} \\left( {inner} \\right)")
    } else {
        format!("{prefix} · ({inner})")
    }
}
