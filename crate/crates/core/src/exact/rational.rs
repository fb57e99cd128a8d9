use num_bigint::BigInt;
use num_integer::Integer as _;
use num_rational::BigRational;
use num_traits::One;
use std::str::FromStr;

/// Arbitrary-precision integer.
pub type Integer = BigInt;

/// Arbitrary-precision rational, always stored reduced with a positive
/// denominator.
pub type Rational = BigRational;

pub fn int(n: i64) -> Integer {
    Integer::from(n)
}

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(Integer::from(n))
}

/// Common denominator `d` of `qs` and the integers `q·d`, so products can
/// be accumulated without a gcd per step.
pub(crate) fn over_common_denominator<'a, I>(qs: I) -> (Integer, Vec<Integer>)
where
    I: IntoIterator<Item = &'a Rational>,
    I::IntoIter: Clone,
{
    let qs = qs.into_iter();
    let d = qs.clone().fold(Integer::one(), |d, q| if q.denom().is_one() { d } else { d.lcm(q.denom()) });
    let nums = qs.map(|q| if d.is_one() { q.numer().clone() } else { q.numer() * (&d / q.denom()) }).collect();
    (d, nums)
}

/// `c / d` for a positive `d`, skipping the reduction when `d = 1`.
pub(crate) fn over(c: Integer, d: &Integer) -> Rational {
    if d.is_one() {
        Rational::from_integer(c)
    } else {
        Rational::new(c, d.clone())
    }
}

/// Parses `a` or `a/b` with arbitrary-size integers. A zero denominator
/// is rejected rather than panicking.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        None => Integer::from_str(s).ok().map(Rational::from_integer),
        Some((n, d)) => {
            let n = Integer::from_str(n.trim()).ok()?;
            let d = Integer::from_str(d.trim()).ok()?;
            if d == Integer::from(0) {
                return None;
            }
            Some(Rational::new(n, d))
        }
    }
}

/// Serde adaptors that carry rationals as exact `"a/b"` strings.
pub mod serde_rational {
    use super::{parse_rational, Rational};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&value.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).ok_or_else(|| D::Error::custom(format!("invalid rational {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integers_and_fractions() {
        assert_eq!(parse_rational("42"), Some(rat(42)));
        assert_eq!(parse_rational("-6/4"), Some(Rational::new(int(-3), int(2))));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
        let huge = "123456789012345678901234567890";
        assert_eq!(parse_rational(huge).unwrap().to_string(), huge);
    }

    #[test]
    fn canonical_rationals() {
        let r = Rational::new(int(4), int(-6));
        assert_eq!(r.numer(), &int(-2));
        assert_eq!(r.denom(), &int(3));
        assert_eq!(Rational::new(int(0), int(7)).denom(), &int(1));
    }
}
