//! Binomials, Stirling numbers of both kinds, and Eulerian numbers of the
//! first and second kind, with process-lifetime row caches.
//!
//! Rows are generated by their recurrences only; independent closed-form
//! cross-checks live in the tests.

use crate::exact::{BetaPoly, BiPoly, Integer, RatFuncBeta, Rational};
use num_traits::{One, Zero};
use std::sync::RwLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TriangleFamily {
    Binomial,
    /// Unsigned Stirling numbers of the first kind `c(n, k)`.
    Stirling1,
    Stirling2,
    /// `A(n, m)`, `0 <= m < n` (row 0 is `[1]`).
    Eulerian1,
    /// Second-order Eulerian `T(n, k)`, `0 <= k < n` (row 0 is `[1]`).
    Eulerian2,
}

impl TriangleFamily {
    fn row_len(self, n: usize) -> usize {
        match self {
            Self::Binomial | Self::Stirling1 | Self::Stirling2 => n + 1,
            Self::Eulerian1 | Self::Eulerian2 => n.max(1),
        }
    }

    fn next_row(self, n: usize, prev: &[Integer]) -> Vec<Integer> {
        let at = |k: isize| -> Integer {
            if k < 0 {
                Integer::zero()
            } else {
                prev.get(k as usize).cloned().unwrap_or_else(Integer::zero)
            }
        };
        (0..self.row_len(n))
            .map(|k| {
                let ki = k as isize;
                let kk = Integer::from(k);
                let nn = Integer::from(n);
                match self {
                    Self::Binomial => at(ki - 1) + at(ki),
                    Self::Stirling1 => (nn - 1u32) * at(ki) + at(ki - 1),
                    Self::Stirling2 => kk * at(ki) + at(ki - 1),
                    Self::Eulerian1 => (&kk + 1u32) * at(ki) + (nn - &kk) * at(ki - 1),
                    Self::Eulerian2 => {
                        (&kk + 1u32) * at(ki) + (Integer::from(2 * n) - 1u32 - &kk) * at(ki - 1)
                    }
                }
            })
            .collect()
    }
}

/// A growable table of exact rows for one family. Rows are only ever
/// appended, so readers never observe a partially built table.
#[derive(Debug)]
pub struct TriangleCache {
    family: TriangleFamily,
    rows: RwLock<Vec<Vec<Integer>>>,
}

impl TriangleCache {
    pub const fn new(family: TriangleFamily) -> Self {
        Self {
            family,
            rows: RwLock::new(Vec::new()),
        }
    }

    pub fn family(&self) -> TriangleFamily {
        self.family
    }

    pub fn row(&self, n: usize) -> Vec<Integer> {
        if let Some(row) = self.rows.read().expect("cache poisoned").get(n) {
            return row.clone();
        }
        let mut rows = self.rows.write().expect("cache poisoned");
        if rows.is_empty() {
            rows.push(vec![Integer::one()]);
        }
        while rows.len() <= n {
            let next = self.family.next_row(rows.len(), rows.last().unwrap());
            rows.push(next);
        }
        rows[n].clone()
    }

    pub fn get(&self, n: usize, k: usize) -> Integer {
        if k >= self.family.row_len(n) {
            return Integer::zero();
        }
        self.row(n).swap_remove(k)
    }
}

static BINOMIAL: TriangleCache = TriangleCache::new(TriangleFamily::Binomial);
static STIRLING1: TriangleCache = TriangleCache::new(TriangleFamily::Stirling1);
static STIRLING2: TriangleCache = TriangleCache::new(TriangleFamily::Stirling2);
static EULERIAN1: TriangleCache = TriangleCache::new(TriangleFamily::Eulerian1);
static EULERIAN2: TriangleCache = TriangleCache::new(TriangleFamily::Eulerian2);

pub fn cache(family: TriangleFamily) -> &'static TriangleCache {
    match family {
        TriangleFamily::Binomial => &BINOMIAL,
        TriangleFamily::Stirling1 => &STIRLING1,
        TriangleFamily::Stirling2 => &STIRLING2,
        TriangleFamily::Eulerian1 => &EULERIAN1,
        TriangleFamily::Eulerian2 => &EULERIAN2,
    }
}

/// `C(n, k)`, zero for `k > n`.
pub fn binomial(n: usize, k: usize) -> Integer {
    BINOMIAL.get(n, k)
}

/// `C(n, k)` for a signed upper index; zero when `n < 0`.
pub fn binomial_i(n: i64, k: usize) -> Integer {
    if n < 0 {
        Integer::zero()
    } else {
        binomial(n as usize, k)
    }
}

pub fn stirling2(m: usize, r: usize) -> Integer {
    STIRLING2.get(m, r)
}

pub fn stirling1_unsigned(n: usize, k: usize) -> Integer {
    STIRLING1.get(n, k)
}

pub fn eulerian1(n: usize, m: usize) -> Integer {
    EULERIAN1.get(n, m)
}

pub fn eulerian2(n: usize, k: usize) -> Integer {
    EULERIAN2.get(n, k)
}

fn int_row_poly(row: Vec<Integer>) -> BetaPoly {
    BetaPoly::from_coeffs(row.into_iter().map(Rational::from_integer).collect())
}

/// `A_n(x)`, with `A_0 = 1`.
pub fn eulerian_poly_first(n: usize) -> BetaPoly {
    int_row_poly(EULERIAN1.row(n))
}

/// `B_n(x)`, the second-order Eulerian polynomial, with `B_0 = 1`.
pub fn eulerian_poly_second(n: usize) -> BetaPoly {
    int_row_poly(EULERIAN2.row(n))
}

/// `Σ_{k≥0} k^n β^k` as a value in `β`: `β A_n(β) p^{n+1}` for `n >= 1`,
/// and `p` for `n = 0` (where the `k = 0` term is `1`, not `0`).
pub fn power_sum_closed(n: usize) -> RatFuncBeta {
    if n == 0 {
        return RatFuncBeta::p_pow(1);
    }
    let numer = eulerian_poly_first(n).shift_up(1);
    RatFuncBeta::new(BiPoly::from_beta_poly(&numer), n as u32 + 1)
}

pub fn factorial(n: usize) -> Integer {
    (1..=n).fold(Integer::one(), |acc, k| acc * k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    fn pow_i(b: i64, e: usize) -> Integer {
        num_traits::pow(Integer::from(b), e)
    }

    /// Set partitions of {0..n} by restricted growth strings, counted by block number.
    fn brute_stirling2(n: usize, k: usize) -> u64 {
        fn go(i: usize, n: usize, max: usize, k: usize) -> u64 {
            if i == n {
                return u64::from(max == k);
            }
            (0..=max).map(|b| go(i + 1, n, max.max(b + 1), k)).sum()
        }
        if n == 0 {
            return u64::from(k == 0);
        }
        go(1, n, 1, k)
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    fn cycles(p: &[usize]) -> usize {
        let mut seen = vec![false; p.len()];
        let mut count = 0;
        for s in 0..p.len() {
            if !seen[s] {
                count += 1;
                let mut i = s;
                while !seen[i] {
                    seen[i] = true;
                    i = p[i];
                }
            }
        }
        count
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial(5, 2), int(10));
        assert_eq!(binomial(7, 0), int(1));
        assert_eq!(binomial(3, 5), int(0));
        assert_eq!(binomial(10, 3), factorial(10) / (factorial(3) * factorial(7)));
        assert_eq!(binomial(10, 3), int(120));
    }

    #[test]
    fn binomial_rows_two_ways() {
        for n in 0..40 {
            let row = BINOMIAL.row(n);
            assert_eq!(row.iter().sum::<Integer>(), pow_i(2, n));
            for (k, c) in row.iter().enumerate() {
                assert_eq!(c, &(factorial(n) / (factorial(k) * factorial(n - k))));
            }
        }
    }

    #[test]
    fn stirling2_examples_against_brute_force() {
        assert_eq!(stirling2(3, 2), int(3));
        assert_eq!(stirling2(4, 2), int(7));
        for m in 1..9 {
            assert_eq!(stirling2(m, m), int(1));
            assert_eq!(stirling2(m, 1), int(1));
            for r in 0..=m {
                assert_eq!(stirling2(m, r), Integer::from(brute_stirling2(m, r)), "S({m},{r})");
            }
        }
    }

    #[test]
    fn stirling2_explicit_formula() {
        // S(n,k) = (1/k!) Σ_j (-1)^j C(k,j) (k-j)^n
        for n in 0..25 {
            for k in 0..=n {
                let s: Integer = (0..=k)
                    .map(|j| {
                        let t = binomial(k, j) * pow_i((k - j) as i64, n);
                        if j % 2 == 0 {
                            t
                        } else {
                            -t
                        }
                    })
                    .sum();
                assert_eq!(s / factorial(k), stirling2(n, k));
            }
        }
    }

    #[test]
    fn stirling1_examples_and_cycle_count() {
        assert_eq!(stirling1_unsigned(4, 2), int(11));
        assert_eq!(stirling1_unsigned(5, 3), int(35));
        for n in 0..8 {
            assert_eq!(stirling1_unsigned(n, n), int(1));
            let perms = permutations(n);
            for k in 0..=n {
                let count = perms.iter().filter(|p| cycles(p) == k).count();
                assert_eq!(stirling1_unsigned(n, k), Integer::from(count), "c({n},{k})");
            }
        }
    }

    #[test]
    fn stirling1_rising_factorial_expansion() {
        // x(x+1)...(x+n-1) = Σ_k c(n,k) x^k
        let mut rising = BetaPoly::one();
        for n in 0..25 {
            let row: Vec<Rational> = (0..=n).map(|k| Rational::from_integer(stirling1_unsigned(n, k))).collect();
            assert_eq!(BetaPoly::from_coeffs(row), rising);
            rising = &rising * &BetaPoly::from_coeffs(vec![rat(n as i64), rat(1)]);
        }
    }

    #[test]
    fn theta2_stirling_identity() {
        // c(r, r-2) = C(r,3)(3r-1)/4
        for r in 3..=30usize {
            let lhs = stirling1_unsigned(r, r - 2) * 4u32;
            let rhs = binomial(r, 3) * Integer::from(3 * r - 1);
            assert_eq!(lhs, rhs, "r = {r}");
        }
    }

    #[test]
    fn eulerian_first_examples() {
        assert_eq!(eulerian_poly_first(0), BetaPoly::one());
        assert_eq!(eulerian_poly_first(3), BetaPoly::from_ints([1, 4, 1]));
        assert_eq!(eulerian_poly_first(4), BetaPoly::from_ints([1, 11, 11, 1]));
        assert_eq!(eulerian_poly_first(5), BetaPoly::from_ints([1, 26, 66, 26, 1]));
        for n in 1..=8 {
            assert_eq!(eulerian_poly_first(n).coefficient_sum(), Rational::from_integer(factorial(n)));
        }
    }

    #[test]
    fn eulerian_first_descents_and_explicit_formula() {
        for n in 1..8 {
            let perms = permutations(n);
            for m in 0..n {
                let count = perms
                    .iter()
                    .filter(|p| p.windows(2).filter(|w| w[0] > w[1]).count() == m)
                    .count();
                assert_eq!(eulerian1(n, m), Integer::from(count));
            }
        }
        // A(n,m) = Σ_{j=0}^{m+1} (-1)^j C(n+1,j) (m+1-j)^n
        for n in 1..20 {
            for m in 0..n {
                let s: Integer = (0..=m + 1)
                    .map(|j| {
                        let t = binomial(n + 1, j) * pow_i((m + 1 - j) as i64, n);
                        if j % 2 == 0 {
                            t
                        } else {
                            -t
                        }
                    })
                    .sum();
                assert_eq!(s, eulerian1(n, m));
                assert_eq!(eulerian1(n, m), eulerian1(n, n - 1 - m), "symmetry");
            }
        }
    }

    #[test]
    fn eulerian_second_examples() {
        assert_eq!(eulerian_poly_second(2), BetaPoly::from_ints([1, 2]));
        assert_eq!(eulerian_poly_second(4), BetaPoly::from_ints([1, 22, 58, 24]));
        let mut double_fact = Integer::one();
        for n in 1..=8 {
            double_fact *= 2 * n - 1;
            assert_eq!(
                eulerian_poly_second(n).coefficient_sum(),
                Rational::from_integer(double_fact.clone())
            );
        }
    }

    #[test]
    fn eulerian_second_stirling_identity() {
        // S(x, x-n) = Σ_k T(n,k) C(x+n-1-k, 2n)
        for n in 1..8usize {
            for x in n..n + 10 {
                let lhs = stirling2(x, x - n);
                let rhs: Integer = (0..n)
                    .map(|k| eulerian2(n, k) * binomial_i((x + n - 1 - k) as i64, 2 * n))
                    .sum();
                assert_eq!(lhs, rhs, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn power_sum_examples() {
        assert_eq!(power_sum_closed(0), RatFuncBeta::p_pow(1));
        assert_eq!(
            power_sum_closed(1),
            RatFuncBeta::p_pow(2).mul_beta_poly(&BetaPoly::x())
        );
        assert_eq!(
            power_sum_closed(2),
            RatFuncBeta::p_pow(3).mul_beta_poly(&BetaPoly::from_ints([0, 1, 1]))
        );
    }

    #[test]
    fn power_sum_matches_truncated_sum() {
        for n in 0..8usize {
            for (num, den) in [(1i64, 4i64), (1, 2), (3, 5)] {
                let x0 = num as f64 / den as f64;
                let exact = power_sum_closed(n)
                    .eval(&rat(0), &Rational::new(num.into(), den.into()))
                    .unwrap();
                let exact: f64 = num_traits::ToPrimitive::to_f64(&exact).unwrap();
                let truncated: f64 = (0..4000).map(|k| (k as f64).powi(n as i32) * x0.powi(k)).sum();
                assert!(((exact - truncated) / exact).abs() < 1e-10, "n={n} x={x0}");
            }
        }
    }

    #[test]
    fn rows_have_family_lengths() {
        for n in 0..12 {
            assert_eq!(BINOMIAL.row(n).len(), n + 1);
            assert_eq!(STIRLING1.row(n).len(), n + 1);
            assert_eq!(STIRLING2.row(n).len(), n + 1);
            assert_eq!(EULERIAN1.row(n).len(), n.max(1));
            assert_eq!(EULERIAN2.row(n).len(), n.max(1));
        }
    }

    #[test]
    fn concurrent_readers_agree() {
        let handles: Vec<_> = (0..8)
            .map(|i| std::thread::spawn(move || (0..30).map(|n| stirling2(n + i, 3)).collect::<Vec<_>>()))
            .collect();
        let results: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        for (i, r) in results.iter().enumerate() {
            for (n, v) in r.iter().enumerate() {
                assert_eq!(v, &results[0].get(n + i).cloned().unwrap_or_else(|| stirling2(n + i, 3)));
            }
        }
    }
}
