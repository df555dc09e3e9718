use crate::util::{exact_sum, prime_sum};
use crate::{Error, PrimitiveSet, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use rational_core::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rational_core::{cmp_ln_sum, factor_u64, floor_u64, serde_rational, DefaultRule, MultSpec};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// Weighted sum over the window [z/y, z] compared against its predicted shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehrendReport {
    #[serde(with = "serde_rational")]
    pub lhs: BigRational,
    pub terms: usize,
    /// sum_{p <= y} f(p)/p (for the corollary, with f restricted to gcd(., q) = 1).
    pub l: f64,
    pub rhs_shape: f64,
    pub ratio: f64,
}

fn f64_of(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn window_sum(
    a: &PrimitiveSet,
    f: &MultSpec,
    y: &BigRational,
    z: &BigRational,
    keep: impl Fn(u64) -> bool,
) -> (BigRational, usize) {
    let terms: Vec<(BigInt, BigInt)> = a
        .elements()
        .iter()
        .copied()
        .filter(|&n| {
            let r = BigRational::from_integer(n.into());
            &r * y >= *z && &r <= z && keep(n)
        })
        .map(|n| {
            let v = f.eval(n);
            (v.numer().clone(), v.denom() * BigInt::from(n))
        })
        .collect();
    (exact_sum(&terms), terms.len())
}

/// sum_{a in A cap [z/y, z]} f(a)/a against (log y / sqrt(L + 1)) exp(sum_{p <= z} (f(p) - 1)/p),
/// where L = sum_{p <= y} f(p)/p.
pub fn behrend_weighted_sum(
    a: &PrimitiveSet,
    f: &MultSpec,
    y: &BigRational,
    z: &BigRational,
) -> Result<BehrendReport> {
    f.validate()?;
    if y < &rational_core::rat(2) || z < y {
        return Err(Error::Domain("need z >= y >= 2".into()));
    }
    let fp = |p: u64| f64_of(&f.at_prime_power(p, 1));
    let l = prime_sum(floor_u64(y), 0.0, fp);
    let e = prime_sum(floor_u64(z), 1.0, fp);
    let (lhs, terms) = window_sum(a, f, y, z, |_| true);
    let rhs_shape = f64_of(y).ln() / (l + 1.0).sqrt() * e.exp();
    Ok(BehrendReport { ratio: f64_of(&lhs) / rhs_shape, lhs, terms, l, rhs_shape })
}

/// The coprime-to-q variant: requires 1 <= f <= tau_k, y >= 3 and q <= y^C; the shape is
/// (phi(q)/q) (log y / sqrt(log log y)) exp(sum_{p <= z} (f(p) - 1)/p).
pub fn corollary_sum(
    a: &PrimitiveSet,
    f: &MultSpec,
    y: &BigRational,
    z: &BigRational,
    q: u64,
    c: &BigRational,
) -> Result<BehrendReport> {
    f.validate()?;
    if f.default == DefaultRule::Zero || f.values.0.values().any(|v| v < &BigRational::one()) {
        return Err(rational_core::Error::Contract("f must be at least 1".into()).into());
    }
    if y < &rational_core::rat(3) || z < y {
        return Err(Error::Domain("need z >= y >= 3".into()));
    }
    if q == 0 || c < &BigRational::one() {
        return Err(Error::Domain("need q >= 1 and C >= 1".into()));
    }
    let q_big = BigRational::from_integer(q.into());
    if cmp_ln_sum(&[(BigRational::one(), q_big), (-c.clone(), y.clone())], &BigRational::zero())
        == Ordering::Greater
    {
        return Err(Error::Domain(format!("q = {q} exceeds y^C")));
    }
    let qp: Vec<u64> = factor_u64(q).into_iter().map(|(p, _)| p).collect();
    let phi_ratio: f64 = qp.iter().map(|&p| 1.0 - 1.0 / p as f64).product();
    let fp = |p: u64| if qp.contains(&p) { 0.0 } else { f64_of(&f.at_prime_power(p, 1)) };
    let l = prime_sum(floor_u64(y), 0.0, fp);
    let e = prime_sum(floor_u64(z), 1.0, |p| f64_of(&f.at_prime_power(p, 1)));
    let (lhs, terms) = window_sum(a, f, y, z, |n| n.gcd(&q) == 1);
    let ly = f64_of(y).ln();
    let rhs_shape = phi_ratio * ly / ly.ln().sqrt() * e.exp();
    Ok(BehrendReport { ratio: f64_of(&lhs) / rhs_shape, lhs, terms, l, rhs_shape })
}

struct Lattice {
    n: usize,
    comparable: Vec<u64>,
}

impl Lattice {
    /// Divisors of a product of k distinct primes, as subsets of {0..k}.
    fn boolean(k: u32) -> Self {
        let n = 1usize << k;
        let comparable = (0..n)
            .map(|i| {
                (0..n).filter(|&j| i & j == i || i & j == j).fold(0u64, |m, j| m | 1 << j)
            })
            .collect();
        Self { n, comparable }
    }

    /// Visits every antichain; returns (count, largest size).
    fn walk(&self) -> (u64, u64) {
        fn rec(l: &Lattice, cand: u64, size: u64, acc: &mut (u64, u64)) {
            acc.0 += 1;
            acc.1 = acc.1.max(size);
            let mut c = cand;
            while c != 0 {
                let e = c.trailing_zeros() as usize;
                c &= c - 1;
                rec(l, c & !l.comparable[e], size + 1, acc);
            }
        }
        let all = if self.n == 64 { u64::MAX } else { (1u64 << self.n) - 1 };
        let mut acc = (0, 0);
        rec(self, all, 0, &mut acc);
        acc
    }
}

fn check_k(k: u32) -> Result<()> {
    if k > 6 {
        return Err(Error::Domain(format!("k = {k} is beyond exhaustive range (k <= 6)")));
    }
    Ok(())
}

/// Largest antichain in the divisor lattice of a product of k distinct primes, by exhaustive
/// enumeration of all antichains.
pub fn sperner_max_antichain(k: u32) -> Result<u64> {
    check_k(k)?;
    Ok(Lattice::boolean(k).walk().1)
}

/// Number of antichains (including the empty one) in the same lattice.
pub fn count_antichains(k: u32) -> Result<u64> {
    check_k(k)?;
    Ok(Lattice::boolean(k).walk().0)
}
