use super::rational::{over, over_common_denominator};
use super::{BetaPoly, BiPoly, ExactError, Integer, Rational};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

/// `numerator(v, β) / (1-β)^den_exp`, the canonical value type for series
/// and moments.
///
/// Canonical form: `den_exp == 0` or the numerator does not vanish at
/// `β = 1`. The zero value always has `den_exp == 0`. With that, two
/// values are equal iff their fields are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFuncBeta {
    num: BiPoly,
    den_exp: u32,
}

impl RatFuncBeta {
    pub fn new(num: BiPoly, den_exp: u32) -> Self {
        Self { num, den_exp }.canonicalize()
    }

    pub fn zero() -> Self {
        Self::new(BiPoly::zero(), 0)
    }

    pub fn one() -> Self {
        Self::new(BiPoly::one(), 0)
    }

    /// `p^k = (1-β)^{-k}`
    pub fn p_pow(k: u32) -> Self {
        Self::new(BiPoly::one(), k)
    }

    pub fn from_bipoly(num: BiPoly) -> Self {
        Self::new(num, 0)
    }

    pub fn from_beta_poly(b: &BetaPoly) -> Self {
        Self::new(BiPoly::from_beta_poly(b), 0)
    }

    /// The main variable `v`.
    pub fn v() -> Self {
        Self::from_bipoly(BiPoly::v())
    }

    pub fn canonicalize(mut self) -> Self {
        if self.num.is_zero() {
            self.den_exp = 0;
            return self;
        }
        while self.den_exp > 0 {
            match self.num.div_one_minus_beta() {
                Some(q) => {
                    self.num = q;
                    self.den_exp -= 1;
                }
                None => break,
            }
        }
        self
    }

    pub fn numerator(&self) -> &BiPoly {
        &self.num
    }

    pub fn den_exp(&self) -> u32 {
        self.den_exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn v_degree(&self) -> Option<u32> {
        self.num.v_degree()
    }

    pub fn is_v_free(&self) -> bool {
        self.num.is_v_free()
    }

    /// Numerator rewritten over `(1-β)^den`, `den >= self.den_exp`.
    fn lift(&self, den: u32) -> BiPoly {
        debug_assert!(den >= self.den_exp);
        match den - self.den_exp {
            0 => self.num.clone(),
            k => self.num.mul_beta_poly(&BetaPoly::one_minus_x_pow(k)),
        }
    }

    /// Exact sum with a single common denominator and one canonicalisation.
    pub fn sum_all<'a, I: IntoIterator<Item = &'a RatFuncBeta>>(items: I) -> Self {
        let items: Vec<&RatFuncBeta> = items.into_iter().collect();
        let den = items.iter().map(|f| f.den_exp).max().unwrap_or(0);
        let lifted: Vec<BiPoly> = items.iter().map(|f| f.lift(den)).collect();
        let (d, nums) = over_common_denominator(lifted.iter().flat_map(|b| b.terms().map(|(_, c)| c)));
        let mut acc: BTreeMap<(u32, u32), Integer> = BTreeMap::new();
        for ((k, _), c) in lifted.iter().flat_map(|b| b.terms()).zip(nums) {
            *acc.entry(*k).or_insert_with(Integer::zero) += c;
        }
        Self::new(BiPoly::from_terms(acc.into_iter().map(|(k, c)| (k, over(c, &d)))), den)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.num.scale(c), self.den_exp)
    }

    pub fn mul_beta_poly(&self, b: &BetaPoly) -> Self {
        Self::new(self.num.mul_beta_poly(b), self.den_exp)
    }

    /// Coefficient of `v^i`, as a `v`-free value.
    pub fn v_coeff(&self, i: u32) -> Self {
        Self::new(BiPoly::from_beta_poly(&self.num.v_slice(i)), self.den_exp)
    }

    /// Exact value at `(v, β)`.
    pub fn eval(&self, v: &Rational, beta: &Rational) -> Result<Rational, ExactError> {
        let one_minus = Rational::one() - beta;
        if one_minus.is_zero() {
            return Err(ExactError::PoleAtBetaOne);
        }
        let den = num_traits::pow(one_minus, self.den_exp as usize);
        Ok(self.num.eval(v, beta) / den)
    }

    /// The value at `β = 0`, a polynomial in `v`.
    pub fn at_beta_zero(&self) -> BetaPoly {
        self.num.at_beta(&Rational::zero())
    }

    /// Expands `f(v + step·k)` in powers of `k`: returns `c_0..c_D` with
    /// `f(v + step·k) = Σ_t c_t k^t`.
    pub fn shift_main_var(&self, step: &BetaPoly) -> Vec<RatFuncBeta> {
        let degree = self.v_degree().unwrap_or(0) as usize;
        let (ds, step_num) = over_common_denominator(step.coeffs());
        let step_pows = int_powers(&step_num, degree);
        let binom = binomial_rows(degree);
        let (d, nums) = over_common_denominator(self.num.terms().map(|(_, c)| c));
        let mut parts: Vec<BTreeMap<(u32, u32), Integer>> = vec![BTreeMap::new(); degree + 1];
        for ((&(i, j), _), c) in self.num.terms().zip(&nums) {
            for t in 0..=i as usize {
                let scaled = c * &binom[i as usize][t];
                for (e, s) in step_pows[t].iter().enumerate() {
                    if s.is_zero() {
                        continue;
                    }
                    *parts[t]
                        .entry((i - t as u32, j + e as u32))
                        .or_insert_with(Integer::zero) += &scaled * s;
                }
            }
        }
        let mut den = d;
        parts
            .into_iter()
            .map(|terms| {
                let part = BiPoly::from_terms(terms.into_iter().map(|(k, c)| (k, over(c, &den))));
                den *= &ds;
                Self::new(part, self.den_exp)
            })
            .collect()
    }

    /// Substitutes `v -> v + shift`.
    pub fn translate_main_var(&self, shift: &BetaPoly) -> Self {
        Self::sum_all(&self.shift_main_var(shift))
    }

    /// For a `v`-free value `f`, returns the polynomial `q` with
    /// `f = q · β^beta_power · p^p_power`.
    pub fn divide_out(&self, beta_power: u32, p_power: u32) -> Result<BetaPoly, ExactError> {
        if let Some(d) = self.v_degree().filter(|&d| d > 0) {
            return Err(ExactError::DependsOnMainVariable { degree: d });
        }
        let not_divisible = |reason: String| ExactError::NotDivisible {
            beta_power,
            p_power,
            reason,
        };
        let mut q = self.num.v_slice(0);
        if p_power >= self.den_exp {
            q = &q * &BetaPoly::one_minus_x_pow(p_power - self.den_exp);
        } else {
            for _ in p_power..self.den_exp {
                q = q.div_one_minus_x().ok_or_else(|| {
                    not_divisible(format!(
                        "denominator (1-β)^{} exceeds p^{p_power}",
                        self.den_exp
                    ))
                })?;
            }
        }
        q.div_x_pow(beta_power as usize).ok_or_else(|| {
            not_divisible(format!(
                "low β-coefficients below β^{beta_power} are not all zero"
            ))
        })
    }
}

fn int_powers(base: &[Integer], up_to: usize) -> Vec<Vec<Integer>> {
    let mut out = Vec::with_capacity(up_to + 1);
    out.push(vec![Integer::one()]);
    for t in 1..=up_to {
        let prev: &Vec<Integer> = &out[t - 1];
        let mut next = vec![Integer::zero(); prev.len() + base.len().max(1) - 1];
        for (i, a) in prev.iter().enumerate() {
            for (j, b) in base.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        out.push(next);
    }
    out
}

fn binomial_rows(n: usize) -> Vec<Vec<Integer>> {
    let mut rows: Vec<Vec<Integer>> = vec![vec![Integer::one()]];
    for i in 1..=n {
        let prev = &rows[i - 1];
        let mut row = vec![Integer::one(); i + 1];
        for k in 1..i {
            row[k] = &prev[k - 1] + &prev[k];
        }
        rows.push(row);
    }
    rows
}

impl Add for &RatFuncBeta {
    type Output = RatFuncBeta;

    fn add(self, rhs: &RatFuncBeta) -> RatFuncBeta {
        RatFuncBeta::sum_all([self, rhs])
    }
}

impl Neg for &RatFuncBeta {
    type Output = RatFuncBeta;

    fn neg(self) -> RatFuncBeta {
        RatFuncBeta {
            num: -&self.num,
            den_exp: self.den_exp,
        }
    }
}

impl Sub for &RatFuncBeta {
    type Output = RatFuncBeta;

    fn sub(self, rhs: &RatFuncBeta) -> RatFuncBeta {
        self + &(-rhs)
    }
}

impl Mul for &RatFuncBeta {
    type Output = RatFuncBeta;

    fn mul(self, rhs: &RatFuncBeta) -> RatFuncBeta {
        RatFuncBeta::new(&self.num * &rhs.num, self.den_exp + rhs.den_exp)
    }
}
