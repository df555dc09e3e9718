//! Outward-rounded fixed-point enclosures of natural logarithms.
//!
//! Values are bracketed as `[lo, hi] / 2^prec`. Comparisons widen the
//! precision until the enclosure separates from the target.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

const GUARD: u32 = 16;
const MAX_PREC: u32 = 1 << 14;

fn ceil_div(a: &BigUint, b: &BigUint) -> BigUint {
    let (q, r) = a.div_rem(b);
    if r.is_zero() {
        q
    } else {
        q + 1u32
    }
}

/// Bounds on 2^p * atanh(zn/zd) for 0 <= zn/zd <= 1/3.
fn atanh_fixed(zn: &BigUint, zd: &BigUint, p: u32) -> (BigUint, BigUint) {
    let s = BigUint::one() << p;
    let z_lo = (zn * &s) / zd;
    let z_hi = ceil_div(&(zn * &s), zd);

    let z2_lo = (&z_lo * &z_lo) >> p;
    let mut lo = BigUint::zero();
    let mut pw = z_lo;
    let mut i = 0u32;
    while !pw.is_zero() {
        lo += &pw / BigUint::from(2 * i + 1);
        pw = (&pw * &z2_lo) >> p;
        i += 1;
    }

    let z2_hi = ceil_div(&(&z_hi * &z_hi), &s);
    let mut hi = BigUint::zero();
    let mut pw = z_hi;
    let stop = BigUint::from(16u32);
    let mut i = 0u32;
    loop {
        hi += ceil_div(&pw, &BigUint::from(2 * i + 1));
        pw = ceil_div(&(&pw * &z2_hi), &s);
        i += 1;
        if pw <= stop || z2_hi.is_zero() {
            // remaining tail is at most pw / (1 - z^2) <= 9 pw / 8
            hi += &pw * 2u32;
            break;
        }
    }
    (lo, hi)
}

/// Bounds `(lo, hi)` with `lo <= 2^p ln x <= hi` for positive rational `x`.
fn ln_fixed(x: &BigRational, p: u32) -> (BigInt, BigInt) {
    assert!(x.is_positive(), "logarithm of a non-positive number");
    let n = x.numer().magnitude().clone();
    let d = x.denom().magnitude().clone();
    let mut k = n.bits() as i64 - d.bits() as i64;
    let (mut mn, mut md) = shift_pair(&n, &d, k);
    if mn < md {
        k -= 1;
        (mn, md) = shift_pair(&n, &d, k);
    } else if mn >= &md * 2u32 {
        k += 1;
        (mn, md) = shift_pair(&n, &d, k);
    }
    // m = mn/md in [1, 2), z = (m - 1)/(m + 1) in [0, 1/3)
    let (a_lo, a_hi) = atanh_fixed(&(&mn - &md), &(&mn + &md), p);
    let (l2_lo, l2_hi) = atanh_fixed(&BigUint::one(), &BigUint::from(3u32), p);
    let (l2_lo, l2_hi) = (BigInt::from(l2_lo) * 2, BigInt::from(l2_hi) * 2);
    let kk = BigInt::from(k);
    let (klo, khi) = if k >= 0 { (&kk * &l2_lo, &kk * &l2_hi) } else { (&kk * &l2_hi, &kk * &l2_lo) };
    (klo + BigInt::from(a_lo) * 2, khi + BigInt::from(a_hi) * 2)
}

/// Returns `(n', d')` with `n'/d' = (n/d) / 2^k`.
fn shift_pair(n: &BigUint, d: &BigUint, k: i64) -> (BigUint, BigUint) {
    if k >= 0 {
        (n.clone(), d << k as u64)
    } else {
        (n << (-k) as u64, d.clone())
    }
}

/// An enclosure `lo <= ln x <= hi` with both ends exact dyadic rationals
/// of roughly `prec` bits after the point.
pub fn ln_enclosure(x: &BigRational, prec: u32) -> (BigRational, BigRational) {
    let p = prec + GUARD;
    let (lo, hi) = ln_fixed(x, p);
    let s = BigInt::one() << p;
    (BigRational::new(lo, s.clone()), BigRational::new(hi, s))
}

/// Compares `sum_i c_i ln x_i` against the rational `rhs`.
///
/// Each `x_i` must be positive. Precision doubles until the enclosure of the
/// difference excludes zero; a difference that stays within the enclosure
/// up to the precision cap is reported as `Equal`.
pub fn cmp_ln_sum(terms: &[(BigRational, BigRational)], rhs: &BigRational) -> Ordering {
    let mut p = 64u32;
    loop {
        let s = BigInt::one() << p;
        let mut lo = -ceil_int(&(rhs * &s));
        let mut hi = -floor_int(&(rhs * &s));
        for (c, x) in terms {
            if c.is_zero() {
                continue;
            }
            let (l, h) = ln_fixed(x, p);
            let (a, b) = (BigRational::from_integer(l) * c, BigRational::from_integer(h) * c);
            let (a, b) = if c.is_negative() { (b, a) } else { (a, b) };
            lo += floor_int(&a);
            hi += ceil_int(&b);
        }
        if lo.is_positive() {
            return Ordering::Greater;
        }
        if hi.is_negative() {
            return Ordering::Less;
        }
        if lo == hi || p >= MAX_PREC {
            return Ordering::Equal;
        }
        p *= 2;
    }
}

/// Compares `ln x` against the rational `t`.
pub fn cmp_ln(x: &BigRational, t: &BigRational) -> Ordering {
    cmp_ln_sum(&[(BigRational::one(), x.clone())], t)
}

fn floor_int(x: &BigRational) -> BigInt {
    x.floor().to_integer()
}

fn ceil_int(x: &BigRational) -> BigInt {
    x.ceil().to_integer()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{rat, ratio_of};
    use num_traits::ToPrimitive;

    #[test]
    fn enclosures_contain_float_log() {
        for (n, d) in [(1, 1), (2, 1), (3, 7), (10, 1), (1_000_003, 17), (1, 1_000_000)] {
            let x = ratio_of(n, d);
            let (lo, hi) = ln_enclosure(&x, 80);
            let f = (n as f64 / d as f64).ln();
            assert!(lo.to_f64().unwrap() <= f + 1e-12 && f - 1e-12 <= hi.to_f64().unwrap());
            assert!(&hi - &lo < ratio_of(1, 1 << 40));
        }
    }

    #[test]
    fn comparisons() {
        // ln 10 = 2.302585...
        assert_eq!(cmp_ln(&rat(10), &ratio_of(2302585, 1_000_000)), Ordering::Greater);
        assert_eq!(cmp_ln(&rat(10), &ratio_of(2302586, 1_000_000)), Ordering::Less);
        assert_eq!(cmp_ln(&rat(1), &rat(0)), Ordering::Equal);
        // 3 ln 2 = ln 8
        let t = [(rat(3), rat(2)), (rat(-1), rat(8))];
        assert_eq!(cmp_ln_sum(&t, &rat(0)), Ordering::Equal);
        // 10^50 > 2^166
        let t = [(rat(50), rat(10)), (rat(-166), rat(2))];
        assert_eq!(cmp_ln_sum(&t, &rat(0)), Ordering::Greater);
        let t = [(rat(50), rat(10)), (rat(-167), rat(2))];
        assert_eq!(cmp_ln_sum(&t, &rat(0)), Ordering::Less);
    }
}
