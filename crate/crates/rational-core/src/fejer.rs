use crate::arith::floor_u64;
use crate::primes::factor_u64;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;

/// Empirical sup of `|fejer_a(t) - (t - 1)| * t` over the sweep `t = 1, 1.5, ..., 1000`.
/// Writing `t = J + phi` the deviation times `t` is exactly `phi (1 - phi)`, so the
/// sweep attains the value at every half-integer.
pub const FEJER_A_CONSTANT: (i64, i64) = (1, 4);

fn check_t(t: &BigRational) {
    assert!(*t >= BigRational::from_integer(1.into()), "Fejer sums need t >= 1");
}

/// sum over 1 <= |j| <= t of (1 - |j|/t).
pub fn fejer_a(t: &BigRational) -> BigRational {
    check_t(t);
    let j = BigInt::from(floor_u64(t));
    let two_j = BigRational::from_integer(&j * 2);
    two_j - BigRational::from_integer(&j * (&j + 1)) / t
}

/// The same sum restricted to gcd(j, q) = 1.
pub fn fejer_b(t: &BigRational, q: u64) -> BigRational {
    check_t(t);
    assert!(q >= 1);
    let jmax = floor_u64(t);
    let (mut cnt, mut sum) = (0u64, 0u128);
    for j in 1..=jmax {
        if j.gcd(&q) == 1 {
            cnt += 1;
            sum += j as u128;
        }
    }
    let cnt = BigRational::from_integer(BigInt::from(cnt));
    (cnt - BigRational::from_integer(BigInt::from(sum)) / t) * BigRational::from_integer(2.into())
}

/// sum over 1 <= |j| <= t, gcd(j, q) = 1, of prod_{p | j, p > 2} (p-1)/(p-2).
pub fn fejer_c(t: &BigRational, q: u64) -> BigRational {
    check_t(t);
    assert!(q >= 1);
    let jmax = floor_u64(t);
    let mut acc = BigRational::zero();
    for j in 1..=jmax {
        if j.gcd(&q) != 1 {
            continue;
        }
        let (mut n, mut d) = (BigInt::from(1), BigInt::from(1));
        for (p, _) in factor_u64(j) {
            if p > 2 {
                n *= p - 1;
                d *= p - 2;
            }
        }
        acc += BigRational::new(n, d);
    }
    acc * BigRational::from_integer(2.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{rat, ratio_of};

    #[test]
    fn examples() {
        assert_eq!(fejer_a(&rat(1)), rat(0));
        assert_eq!(fejer_a(&rat(2)), rat(1));
        assert_eq!(fejer_b(&rat(4), 2), rat(2));
        assert_eq!(fejer_b(&rat(7), 1), fejer_a(&rat(7)));
    }

    #[test]
    fn fejer_a_brute_force() {
        for (n, d) in [(7, 2), (10, 3), (1, 1), (25, 7)] {
            let t = ratio_of(n, d);
            let jmax = floor_u64(&t) as i64;
            let mut s = rat(0);
            for j in -jmax..=jmax {
                if j != 0 {
                    s += rat(1) - rat(j.abs()) / &t;
                }
            }
            assert_eq!(fejer_a(&t), s);
        }
    }

    #[test]
    fn fejer_a_constant_sweep() {
        let c = ratio_of(FEJER_A_CONSTANT.0, FEJER_A_CONSTANT.1);
        let mut worst = rat(0);
        for k in 2..=2000 {
            let t = ratio_of(k, 2);
            let dev = (fejer_a(&t) - (&t - rat(1))) * &t;
            let dev = if dev < rat(0) { -dev } else { dev };
            if dev > worst {
                worst = dev;
            }
        }
        assert_eq!(worst, c);
    }

    #[test]
    fn fejer_c_small() {
        // j = 1, 2, 3, 4, 5 coprime to 1: weights 1, 1, 2, 1, 4/3
        assert_eq!(fejer_c(&rat(5), 1), ratio_of(2 * (3 * 5 + 4), 3));
        // q = 3 drops j = 3
        assert_eq!(fejer_c(&rat(5), 3), ratio_of(2 * (3 * 3 + 4), 3));
    }
}
