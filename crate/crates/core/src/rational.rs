//! Exact rational scalars.
//!
//! Every coefficient in the crate is a [`Rational`]: an arbitrary-precision
//! fraction kept in lowest terms with a positive denominator. The type is
//! `num_rational::BigRational`; this module adds the parsing, formatting and
//! conversion helpers the rest of the crate needs.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use num_rational::BigRational as Rational;

/// Builds `num / den` in lowest terms. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// The integer `n` as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `p` or `p/q` (optional leading `-`, `q > 0`). Decimal points are
/// rejected so that every literal is exact.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (text, None),
    };
    let num: BigInt = parse_integer(num)?;
    let den: BigInt = match den {
        Some(d) => {
            if d.starts_with('-') || d.starts_with('+') {
                return None;
            }
            parse_integer(d)?
        }
        None => BigInt::one(),
    };
    if den.is_zero() {
        return None;
    }
    Some(Rational::new(num, den))
}

fn parse_integer(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Nearest `f64` (exact for integers and dyadic fractions in range).
pub fn to_f64(q: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_i64(), q.denom().to_i64()) {
        if n.unsigned_abs() < (1u64 << 53) && (d as u64) < (1u64 << 53) {
            return n as f64 / d as f64;
        }
    }
    // Large operands: scale down to keep both parts representable.
    let n = q.numer().to_f64().unwrap_or(f64::NAN);
    let d = q.denom().to_f64().unwrap_or(f64::NAN);
    if n.is_finite() && d.is_finite() {
        return n / d;
    }
    let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(1000);
    let n = (q.numer() >> shift).to_f64().unwrap_or(0.0);
    let d = (q.denom() >> shift).to_f64().unwrap_or(1.0);
    n / d
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values.into_iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

/// Rescales a vector to a primitive integer vector whose first nonzero entry
/// is positive. The zero vector is returned unchanged.
pub fn primitive_integer_vector(values: &[Rational]) -> Vec<Rational> {
    let Some(first) = values.iter().find(|q| !q.is_zero()) else {
        return values.to_vec();
    };
    let den = common_denominator(values);
    let ints: Vec<BigInt> = values.iter().map(|q| (q * &den).to_integer()).collect();
    let mut g = BigInt::zero();
    for i in &ints {
        g = g.gcd(i);
    }
    if first.is_negative() {
        g = -g;
    }
    ints.into_iter().map(|i| Rational::from_integer(i / &g)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("29851/10000"), Some(rat(29851, 10000)));
        assert_eq!(parse_rational("-6/4"), Some(rat(-3, 2)));
        assert_eq!(parse_rational("7"), Some(int(7)));
        assert_eq!(parse_rational("0.5"), None);
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("1/-2"), None);
        assert_eq!(parse_rational(""), None);
    }

    #[test]
    fn lowest_terms_and_sign() {
        let q = rat(10, -4);
        assert_eq!(q.numer(), &BigInt::from(-5));
        assert_eq!(q.denom(), &BigInt::from(2));
        assert_eq!(q.to_string(), "-5/2");
        assert_eq!(int(3).to_string(), "3");
    }

    #[test]
    fn float_conversion() {
        assert_eq!(to_f64(&rat(29851, 10000)), 2.9851);
        assert_eq!(to_f64(&int(-3)), -3.0);
    }

    #[test]
    fn primitive_vectors() {
        let v = primitive_integer_vector(&[rat(-1, 3), int(0), rat(1, 1)]);
        assert_eq!(v, vec![int(1), int(0), int(-3)]);
        let v = primitive_integer_vector(&[int(3), int(1), int(-3)]);
        assert_eq!(v, vec![int(3), int(1), int(-3)]);
    }
}
