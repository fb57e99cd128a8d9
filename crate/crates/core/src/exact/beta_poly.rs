use super::rational::{over, over_common_denominator, parse_rational, Integer, Rational};
use num_traits::{One, Zero};
use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};
use std::ops::{Add, Mul, Neg, Sub};

/// Dense univariate polynomial over the rationals.
///
/// Named for its main job, holding coefficient polynomials in `β`, but it
/// is also used wherever a single indeterminate is needed (Eulerian
/// polynomials in `x`, Touchard polynomials in `y`, closed-form
/// coefficients in the row index).
///
/// Canonical form: no trailing zero coefficients; the zero polynomial has
/// no coefficients and no degree.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BetaPoly {
    coeffs: Vec<Rational>,
}

impl BetaPoly {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// `c · x^exp`
    pub fn monomial(c: Rational, exp: usize) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![Rational::zero(); exp + 1];
        coeffs[exp] = c;
        Self { coeffs }
    }

    /// The indeterminate itself.
    pub fn x() -> Self {
        Self::monomial(Rational::one(), 1)
    }

    pub fn from_coeffs(coeffs: Vec<Rational>) -> Self {
        Self { coeffs }.canonicalize()
    }

    pub fn from_ints<I: IntoIterator<Item = i64>>(coeffs: I) -> Self {
        Self::from_coeffs(coeffs.into_iter().map(super::rat).collect())
    }

    /// `(1 - x)^k`
    pub fn one_minus_x_pow(k: u32) -> Self {
        let base = Self::from_ints([1, -1]);
        base.pow(k)
    }

    pub fn canonicalize(mut self) -> Self {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
        self
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, exp: usize) -> Rational {
        self.coeffs.get(exp).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// True when every coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Multiplies by `x^exp`.
    pub fn shift_up(&self, exp: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![Rational::zero(); exp];
        coeffs.extend(self.coeffs.iter().cloned());
        Self { coeffs }
    }

    /// Exact division by `x^exp`; `None` if a low coefficient is nonzero.
    pub fn div_x_pow(&self, exp: usize) -> Option<Self> {
        if self.is_zero() {
            return Some(Self::zero());
        }
        if self.coeffs.iter().take(exp).any(|c| !c.is_zero()) {
            return None;
        }
        Some(Self {
            coeffs: self.coeffs.iter().skip(exp).cloned().collect(),
        })
    }

    /// Exact division by `(1 - x)`; `None` unless the polynomial vanishes
    /// at `x = 1`.
    pub fn div_one_minus_x(&self) -> Option<Self> {
        // q_0 = f_0, q_i = f_i + q_{i-1}; the remainder is f(1).
        let n = self.coeffs.len();
        if n == 0 {
            return Some(Self::zero());
        }
        let (d, nums) = over_common_denominator(&self.coeffs);
        let mut q = Vec::with_capacity(n - 1);
        let mut acc = Integer::zero();
        for c in &nums[..n - 1] {
            acc += c;
            q.push(acc.clone());
        }
        if !(acc + &nums[n - 1]).is_zero() {
            return None;
        }
        Some(Self::from_coeffs(q.into_iter().map(|c| over(c, &d)).collect()))
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Substitutes `x -> x + shift`.
    pub fn translate(&self, shift: &Rational) -> Self {
        let lin = Self::from_coeffs(vec![shift.clone(), Rational::one()]);
        self.coeffs
            .iter()
            .rev()
            .fold(Self::zero(), |acc, c| &(&acc * &lin) + &Self::constant(c.clone()))
    }

    /// Sum of all coefficients (the value at `x = 1`).
    pub fn coefficient_sum(&self) -> Rational {
        self.coeffs.iter().sum()
    }
}

impl Add for &BetaPoly {
    type Output = BetaPoly;

    fn add(self, rhs: &BetaPoly) -> BetaPoly {
        let (long, short) = if self.coeffs.len() >= rhs.coeffs.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut coeffs = long.coeffs.clone();
        for (c, s) in coeffs.iter_mut().zip(&short.coeffs) {
            *c += s;
        }
        BetaPoly::from_coeffs(coeffs)
    }
}

impl Neg for &BetaPoly {
    type Output = BetaPoly;

    fn neg(self) -> BetaPoly {
        BetaPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Sub for &BetaPoly {
    type Output = BetaPoly;

    fn sub(self, rhs: &BetaPoly) -> BetaPoly {
        self + &(-rhs)
    }
}

impl Mul for &BetaPoly {
    type Output = BetaPoly;

    fn mul(self, rhs: &BetaPoly) -> BetaPoly {
        if self.is_zero() || rhs.is_zero() {
            return BetaPoly::zero();
        }
        let (da, na) = over_common_denominator(&self.coeffs);
        let (db, nb) = over_common_denominator(&rhs.coeffs);
        let mut acc = vec![Integer::zero(); na.len() + nb.len() - 1];
        for (i, a) in na.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in nb.iter().enumerate() {
                acc[i + j] += a * b;
            }
        }
        let den = da * db;
        BetaPoly::from_coeffs(acc.into_iter().map(|c| over(c, &den)).collect())
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for BetaPoly {
            type Output = BetaPoly;
            fn $m(self, rhs: BetaPoly) -> BetaPoly {
                (&self).$m(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for BetaPoly {
    type Output = BetaPoly;
    fn neg(self) -> BetaPoly {
        -&self
    }
}

impl std::iter::Sum for BetaPoly {
    fn sum<I: Iterator<Item = BetaPoly>>(iter: I) -> Self {
        iter.fold(BetaPoly::zero(), |a, b| &a + &b)
    }
}

impl Serialize for BetaPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.coeffs.iter().map(|c| c.to_string()))
    }
}

impl<'de> Deserialize<'de> for BetaPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        let coeffs = raw
            .iter()
            .map(|s| parse_rational(s).ok_or_else(|| D::Error::custom(format!("bad coefficient {s:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BetaPoly::from_coeffs(coeffs))
    }
}
