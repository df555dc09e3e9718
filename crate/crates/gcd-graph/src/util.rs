use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rational_core::{cmp_ln_sum, BigRational, ReducedRational};
use std::cmp::Ordering;

pub(crate) fn big_ln(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    (n >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// ln x for x > 0; -inf for 0.
pub fn ln_f64(x: &BigRational) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    big_ln(x.numer().magnitude()) - big_ln(x.denom().magnitude())
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or_else(|| ln_f64(x).exp())
}

/// v_p(n) for n > 0.
pub(crate) fn val_big(n: &BigUint, p: u64) -> i64 {
    if n.is_zero() {
        return 0;
    }
    let pb = BigUint::from(p);
    let mut n = n.clone();
    let mut k = 0;
    loop {
        let (q, r) = n.div_rem(&pb);
        if !r.is_zero() {
            return k;
        }
        n = q;
        k += 1;
    }
}

/// e_p(v): the exponent of p in v, negative on the denominator side.
pub fn e_p(v: &ReducedRational, p: u64) -> i64 {
    val_big(v.num(), p) - val_big(v.den(), p)
}

pub(crate) fn pow_rat(x: &BigRational, e: u64) -> BigRational {
    num_traits::pow(x.clone(), e as usize)
}

pub(crate) fn upow(p: u64, e: u64) -> BigRational {
    BigRational::from_integer(num_traits::pow(BigInt::from(p), e as usize))
}

fn lcm_of_denoms(cs: &[&BigRational]) -> BigInt {
    cs.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()))
}

/// Sign of `sum_i c_i ln x_i - shift`.
///
/// Uses a float estimate when it is clearly separated, exact integer powers when
/// the shift is zero and the exponents are small, and enclosures otherwise.
pub fn cmp_log_form(terms: &[(BigRational, BigRational)], shift: &BigRational) -> Ordering {
    let mut est = -to_f64(shift);
    let mut scale = est.abs();
    for (c, x) in terms {
        let t = to_f64(c) * ln_f64(x);
        est += t;
        scale += t.abs();
    }
    if est.is_finite() && est.abs() > 1e-7 * (1.0 + scale) {
        return if est > 0.0 { Ordering::Greater } else { Ordering::Less };
    }
    if shift.is_zero() {
        let cs: Vec<&BigRational> = terms.iter().map(|t| &t.0).collect();
        let l = lcm_of_denoms(&cs);
        let small = l <= BigInt::from(100_000)
            && terms.iter().all(|(c, _)| (c * BigRational::from_integer(l.clone())).abs() <= BigRational::from_integer(BigInt::from(2_000_000)));
        if small {
            let mut lhs = BigRational::one();
            let mut rhs = BigRational::one();
            for (c, x) in terms {
                let k = (c * BigRational::from_integer(l.clone())).to_integer();
                let e = k.abs().to_u64().unwrap();
                if k.is_positive() {
                    lhs *= pow_rat(x, e);
                } else if k.is_negative() {
                    rhs *= pow_rat(x, e);
                }
            }
            return lhs.cmp(&rhs);
        }
    }
    cmp_ln_sum(terms, shift)
}

pub fn fmt_vertex(v: &ReducedRational) -> String {
    if v.is_integer() {
        v.num().to_string()
    } else {
        format!("{}/{}", v.num(), v.den())
    }
}
