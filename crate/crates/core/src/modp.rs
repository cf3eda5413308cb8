//! Arithmetic modulo the Mersenne prime 2^61 - 1.
//!
//! Used only to discard candidates quickly: if a rational matrix has full
//! column rank modulo p it has full column rank over Q, because every
//! nonvanishing maximal minor mod p is nonzero over Q. The converse does not
//! hold, so a deficient result mod p is always re-checked exactly.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::rational::Rational;

pub const P: u64 = (1 << 61) - 1;

#[inline]
pub fn add(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= P {
        s - P
    } else {
        s
    }
}

#[inline]
pub fn sub(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + P - b
    }
}

#[inline]
pub fn mul(a: u64, b: u64) -> u64 {
    let w = a as u128 * b as u128;
    let lo = (w as u64) & P;
    let hi = (w >> 61) as u64;
    add(lo, hi)
}

pub fn pow(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mul(r, a);
        }
        a = mul(a, a);
        e >>= 1;
    }
    r
}

pub fn inv(a: u64) -> u64 {
    debug_assert!(a != 0);
    pow(a, P - 2)
}

fn reduce_int(n: &BigInt) -> u64 {
    let m = BigInt::from(P);
    let mut r = n % &m;
    if r < BigInt::zero() {
        r += &m;
    }
    r.to_u64().expect("reduced residue fits")
}

/// Image of a rational in Z/p, or `None` when p divides the denominator.
pub fn reduce(q: &Rational) -> Option<u64> {
    let d = reduce_int(q.denom());
    if d == 0 {
        return None;
    }
    Some(mul(reduce_int(q.numer()), inv(d)))
}

/// Image of a signed integer in Z/p.
pub fn from_i64(n: i64) -> u64 {
    if n >= 0 {
        (n as u64) % P
    } else {
        sub(0, n.unsigned_abs() % P)
    }
}

/// Rank of a dense row-major matrix over Z/p. The buffer is consumed.
pub fn rank(mut data: Vec<u64>, rows: usize, cols: usize) -> usize {
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| data[i * cols + c] != 0) else {
            continue;
        };
        if p != r {
            for j in c..cols {
                data.swap(p * cols + j, r * cols + j);
            }
        }
        let inv_p = inv(data[r * cols + c]);
        for i in r + 1..rows {
            let f = data[i * cols + c];
            if f == 0 {
                continue;
            }
            let f = mul(f, inv_p);
            for j in c..cols {
                let v = data[r * cols + j];
                if v != 0 {
                    data[i * cols + j] = sub(data[i * cols + j], mul(f, v));
                }
            }
        }
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn field_identities() {
        let a = 123_456_789_012_345u64;
        assert_eq!(mul(a, inv(a)), 1);
        assert_eq!(add(P - 1, 2), 1);
        assert_eq!(sub(1, 2), P - 1);
        assert_eq!(from_i64(-1), P - 1);
    }

    #[test]
    fn rational_reduction() {
        let half = reduce(&rat(1, 2)).unwrap();
        assert_eq!(mul(half, 2), 1);
        let neg = reduce(&rat(-3, 4)).unwrap();
        assert_eq!(mul(neg, 4), from_i64(-3));
    }

    #[test]
    fn rank_matches_small_cases() {
        assert_eq!(rank(vec![1, 2, 2, 4], 2, 2), 1);
        assert_eq!(rank(vec![1, 0, 0, 1], 2, 2), 2);
        assert_eq!(rank(vec![0, 0, 0], 3, 1), 0);
    }
}
