use num_integer::Integer;
use rational_core::{BigRational, ReducedRational, RoughSieve};
use serde::{Deserialize, Serialize};

use crate::union::IntervalUnion;
use crate::{Error, Result};

/// Which family of dilates: all multiples (`M`) or alpha-rough multiples only (`N`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    M,
    N,
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "M" | "m" => Ok(Variant::M),
            "N" | "n" => Ok(Variant::N),
            _ => Err(Error::Input(format!("variant must be M or N, got {s}"))),
        }
    }
}

/// Floor and ceiling division on i128.
pub(crate) trait DivRound {
    fn fdiv(self, d: i128) -> i128;
    fn cdiv(self, d: i128) -> i128;
}

impl DivRound for i128 {
    fn fdiv(self, d: i128) -> i128 {
        Integer::div_floor(&self, &d)
    }
    fn cdiv(self, d: i128) -> i128 {
        -Integer::div_floor(&-self, &d)
    }
}

/// Machine-size parts of a rational parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Frac {
    pub n: i128,
    pub d: i128,
}

impl Frac {
    pub fn of(x: &ReducedRational) -> Result<Self> {
        match (x.num_u64(), x.den_u64()) {
            (Some(n), Some(d)) if n < (1 << 40) && d < (1 << 40) => Ok(Self { n: n as i128, d: d as i128 }),
            _ => Err(Error::Overflow(format!("{x} is too large for interval arithmetic"))),
        }
    }

    pub fn of_big(x: &BigRational) -> Result<Self> {
        if *x <= BigRational::from_integer(0.into()) {
            return Err(Error::Input("T must be positive".into()));
        }
        let n: i128 = x.numer().try_into().map_err(|_| Error::Overflow("T".into()))?;
        let d: i128 = x.denom().try_into().map_err(|_| Error::Overflow("T".into()))?;
        if n >= (1 << 50) || d >= (1 << 40) {
            return Err(Error::Overflow("T".into()));
        }
        Ok(Self { n, d })
    }

    pub fn floor(&self) -> i128 {
        self.n.fdiv(self.d)
    }
}

pub(crate) fn check_alpha(alpha: &ReducedRational) -> Result<()> {
    if *alpha < ReducedRational::one() {
        return Err(Error::Input(format!("alpha = {alpha} must be at least 1")));
    }
    Ok(())
}

/// Largest n with n*alpha - 1/2 < T, i.e. 2 n a < (2T + 1) q.
pub(crate) fn max_multiple(alpha: Frac, t: Frac) -> i128 {
    // n < (2 Tn + Td) q / (2 a Td)
    let num = (2 * t.n + t.d) * alpha.d;
    let den = 2 * alpha.n * t.d;
    (num - 1).fdiv(den)
}

fn build_impl(alpha: &ReducedRational, t: &BigRational, rough: bool) -> Result<IntervalUnion> {
    check_alpha(alpha)?;
    let a = Frac::of(alpha)?;
    let tf = Frac::of_big(t)?;
    let nmax = max_multiple(a, tf).max(0);
    // scale 2q: centers 2na, half-width q
    let scale = 2 * a.d;
    let sieve = rough.then(|| RoughSieve::new(a.floor() as u64, nmax as u64));
    let ivs = (1..=nmax)
        .filter(|&n| sieve.as_ref().map_or(true, |s| s.is_rough(n as u64)))
        .map(|n| (2 * n * a.n - a.d, 2 * n * a.n + a.d))
        .collect();
    Ok(IntervalUnion::from_sorted_disjoint(scale, ivs))
}

/// M_alpha truncated to the centers n*alpha with n*alpha - 1/2 < T.
pub fn build_m(alpha: &ReducedRational, t: &BigRational) -> Result<IntervalUnion> {
    build_impl(alpha, t, false)
}

/// N_alpha truncated as in [`build_m`], keeping only n with P^-(n) > alpha.
pub fn build_n(alpha: &ReducedRational, t: &BigRational) -> Result<IntervalUnion> {
    build_impl(alpha, t, true)
}

pub fn build(variant: Variant, alpha: &ReducedRational, t: &BigRational) -> Result<IntervalUnion> {
    match variant {
        Variant::M => build_m(alpha, t),
        Variant::N => build_n(alpha, t),
    }
}

/// P_T(U).
pub fn measure_pt(u: &IntervalUnion, t: &BigRational) -> Result<BigRational> {
    u.measure_pt(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rational_core::{rat, ratio_of};

    fn r(n: u64, d: u64) -> ReducedRational {
        ReducedRational::new(n, d)
    }

    fn centers(u: &IntervalUnion) -> Vec<BigRational> {
        u.intervals().into_iter().map(|(a, b)| (a + b) / rat(2)).collect()
    }

    #[test]
    fn examples() {
        let m = build_m(&r(2, 1), &rat(10)).unwrap();
        assert_eq!(centers(&m), [2, 4, 6, 8, 10].map(rat).to_vec());
        let n = build_n(&r(2, 1), &rat(20)).unwrap();
        assert_eq!(centers(&n), [2, 6, 10, 14, 18].map(rat).to_vec());
        let one = build_n(&r(1, 1), &rat(5)).unwrap();
        assert_eq!(one.len(), 5);
        assert_eq!(measure_pt(&m, &rat(10)).unwrap(), ratio_of(9, 20));
        assert_eq!(measure_pt(&n, &rat(20)).unwrap(), ratio_of(1, 4));
        assert_eq!(measure_pt(&n, &rat(20)).unwrap(), rational_core::kappa(&r(2, 1)));
    }

    #[test]
    fn truncation_boundary() {
        // 10.5 - 1/2 = 10 is not < 10, so the centre 10.5 is excluded
        let m = build_m(&r(21, 2), &rat(10)).unwrap();
        assert!(m.is_empty());
        let m = build_m(&r(21, 2), &ratio_of(1001, 100)).unwrap();
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn unit_alpha_touching() {
        let m = build_m(&r(1, 1), &rat(3)).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.measure_pt(&rat(3)).unwrap(), ratio_of(5, 6));
    }
}
