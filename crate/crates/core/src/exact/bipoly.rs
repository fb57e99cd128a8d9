use super::rational::{over, over_common_denominator};
use super::{BetaPoly, Integer, Rational};
use num_traits::{One, Zero};
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

/// Sparse polynomial in the main variable `v` and `β`.
///
/// Keys are `(v_exp, beta_exp)`; zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BiPoly {
    terms: BTreeMap<(u32, u32), Rational>,
}

impl BiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(Rational::one(), 0, 0)
    }

    pub fn monomial(c: Rational, v_exp: u32, beta_exp: u32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((v_exp, beta_exp), c);
        }
        Self { terms }
    }

    /// The main variable `v`.
    pub fn v() -> Self {
        Self::monomial(Rational::one(), 1, 0)
    }

    /// Builds from arbitrary (possibly repeated) terms, summing duplicates.
    pub fn from_terms<I: IntoIterator<Item = ((u32, u32), Rational)>>(iter: I) -> Self {
        let mut terms: BTreeMap<(u32, u32), Rational> = BTreeMap::new();
        for (key, c) in iter {
            match terms.entry(key) {
                Entry::Vacant(e) => {
                    e.insert(c);
                }
                Entry::Occupied(mut e) => *e.get_mut() += c,
            }
        }
        Self { terms }.canonicalize()
    }

    /// `Σ_i slices[i](β) · v^i`
    pub fn from_v_slices<'a, I: IntoIterator<Item = (u32, &'a BetaPoly)>>(slices: I) -> Self {
        let mut terms = BTreeMap::new();
        for (i, slice) in slices {
            for (j, c) in slice.coeffs().iter().enumerate() {
                if !c.is_zero() {
                    terms.insert((i, j as u32), c.clone());
                }
            }
        }
        Self { terms }
    }

    pub fn from_beta_poly(b: &BetaPoly) -> Self {
        Self::from_v_slices([(0, b)])
    }

    pub fn canonicalize(mut self) -> Self {
        self.terms.retain(|_, c| !c.is_zero());
        self
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Rational)> + Clone {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn v_degree(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.0).max()
    }

    pub fn beta_degree(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.1).max()
    }

    pub fn is_v_free(&self) -> bool {
        self.v_degree().is_none_or(|d| d == 0)
    }

    /// Coefficient of `v^i` as a polynomial in `β`.
    pub fn v_slice(&self, i: u32) -> BetaPoly {
        let entries: Vec<_> = self.terms.range((i, 0)..=(i, u32::MAX)).collect();
        let Some(top) = entries.last().map(|(k, _)| k.1) else {
            return BetaPoly::zero();
        };
        let mut coeffs = vec![Rational::zero(); top as usize + 1];
        for ((_, j), c) in entries {
            coeffs[*j as usize] = c.clone();
        }
        BetaPoly::from_coeffs(coeffs)
    }

    /// All nonzero `v`-slices in ascending `v` order.
    pub fn v_slices(&self) -> Vec<(u32, BetaPoly)> {
        let mut out = Vec::new();
        let mut last = None;
        for &(i, _) in self.terms.keys() {
            if last != Some(i) {
                out.push((i, self.v_slice(i)));
                last = Some(i);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(k, a)| (*k, a * c)).collect(),
        }
    }

    pub fn mul_beta_poly(&self, b: &BetaPoly) -> Self {
        let (da, na) = over_common_denominator(self.terms.values());
        let (db, nb) = over_common_denominator(b.coeffs());
        let mut out: BTreeMap<(u32, u32), Integer> = BTreeMap::new();
        for (&(i, j), a) in self.terms.keys().zip(&na) {
            for (e, c) in nb.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                *out.entry((i, j + e as u32)).or_insert_with(Integer::zero) += a * c;
            }
        }
        let den = da * db;
        Self {
            terms: out.into_iter().map(|(k, c)| (k, over(c, &den))).collect(),
        }
        .canonicalize()
    }

    /// True when the polynomial vanishes identically at `β = 1`.
    pub fn vanishes_at_beta_one(&self) -> bool {
        self.v_slices()
            .iter()
            .all(|(_, s)| s.coefficient_sum().is_zero())
    }

    /// Exact division by `(1 - β)`, slice by slice.
    pub fn div_one_minus_beta(&self) -> Option<Self> {
        let slices = self
            .v_slices()
            .into_iter()
            .map(|(i, s)| s.div_one_minus_x().map(|q| (i, q)))
            .collect::<Option<Vec<_>>>()?;
        Some(Self::from_v_slices(slices.iter().map(|(i, q)| (*i, q))))
    }

    pub fn eval(&self, v: &Rational, beta: &Rational) -> Rational {
        self.at_beta(beta).eval(v)
    }

    /// Substitutes `β = beta`, leaving a polynomial in `v`.
    pub fn at_beta(&self, beta: &Rational) -> BetaPoly {
        let slices = self.v_slices();
        let Some(top) = slices.last().map(|(i, _)| *i) else {
            return BetaPoly::zero();
        };
        let mut coeffs = vec![Rational::zero(); top as usize + 1];
        for (i, s) in slices {
            coeffs[i as usize] = s.eval(beta);
        }
        BetaPoly::from_coeffs(coeffs)
    }
}

impl Add for &BiPoly {
    type Output = BiPoly;

    fn add(self, rhs: &BiPoly) -> BiPoly {
        let mut terms = self.terms.clone();
        for (k, c) in &rhs.terms {
            *terms.entry(*k).or_insert_with(Rational::zero) += c;
        }
        BiPoly { terms }.canonicalize()
    }
}

impl Neg for &BiPoly {
    type Output = BiPoly;

    fn neg(self) -> BiPoly {
        BiPoly {
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }
}

impl Sub for &BiPoly {
    type Output = BiPoly;

    fn sub(self, rhs: &BiPoly) -> BiPoly {
        self + &(-rhs)
    }
}

impl Mul for &BiPoly {
    type Output = BiPoly;

    fn mul(self, rhs: &BiPoly) -> BiPoly {
        let (da, na) = over_common_denominator(self.terms.values());
        let (db, nb) = over_common_denominator(rhs.terms.values());
        let mut acc: BTreeMap<(u32, u32), Integer> = BTreeMap::new();
        for (&(i1, j1), a) in self.terms.keys().zip(&na) {
            for (&(i2, j2), b) in rhs.terms.keys().zip(&nb) {
                *acc.entry((i1 + i2, j1 + j2)).or_insert_with(Integer::zero) += a * b;
            }
        }
        let den = da * db;
        let terms = acc.into_iter().map(|(k, c)| (k, over(c, &den))).collect();
        BiPoly { terms }.canonicalize()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use proptest::prelude::*;

    pub(crate) fn bipoly() -> impl Strategy<Value = BiPoly> {
        prop::collection::vec(((0u32..4, 0u32..4), -9i64..9), 0..6)
            .prop_map(|ts| BiPoly::from_terms(ts.into_iter().map(|(k, c)| (k, rat(c)))))
    }

    #[test]
    fn slices_round_trip() {
        let p = BiPoly::from_terms([((0, 1), rat(2)), ((2, 0), rat(-1)), ((2, 3), rat(5))]);
        assert_eq!(p.v_slice(2), BetaPoly::from_ints([-1, 0, 0, 5]));
        assert_eq!(p.v_slice(1), BetaPoly::zero());
        let rebuilt = BiPoly::from_v_slices(p.v_slices().iter().map(|(i, s)| (*i, s)));
        assert_eq!(rebuilt, p);
    }

    #[test]
    fn eval_handles_sparse_v() {
        // 3 v^3 β + v  at v = 2, β = 1/2
        let p = BiPoly::from_terms([((3, 1), rat(3)), ((1, 0), rat(1))]);
        let v = rat(2);
        let b = Rational::new(1.into(), 2.into());
        assert_eq!(p.eval(&v, &b), rat(14));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn canonicalize_is_idempotent(a in bipoly()) {
            let raw = BiPoly { terms: a.terms.iter().map(|(k, c)| (*k, c.clone())).chain([((7, 7), rat(0))]).collect() };
            let once = raw.canonicalize();
            prop_assert_eq!(once.clone().canonicalize(), once);
        }

        #[test]
        fn ring_axioms(a in bipoly(), b in bipoly(), c in bipoly()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert!((&a - &a).is_zero());
        }

        #[test]
        fn eval_is_a_homomorphism(a in bipoly(), b in bipoly(), v in -5i64..5, n in -5i64..5, d in 1i64..5) {
            let v = rat(v);
            let beta = Rational::new(n.into(), d.into());
            prop_assert_eq!((&a * &b).eval(&v, &beta), a.eval(&v, &beta) * b.eval(&v, &beta));
            prop_assert_eq!((&a + &b).eval(&v, &beta), a.eval(&v, &beta) + b.eval(&v, &beta));
        }
    }
}
