use crate::util::{exact_sum, fsum};
use crate::{Error, PrimitiveSet, Result};
use num_bigint::BigInt;
use rational_core::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rational_core::serde_rational;
use serde::{Deserialize, Serialize};

/// An exact reciprocal sum over a window, its bounding shape and their ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSum {
    #[serde(with = "serde_rational")]
    pub sum: BigRational,
    pub terms: usize,
    pub shape: f64,
    pub ratio: f64,
}

fn log_shape(x: f64) -> f64 {
    x.ln() / x.ln().ln().sqrt()
}

fn reciprocals(xs: impl Iterator<Item = u64>) -> (BigRational, usize) {
    let t: Vec<_> = xs.map(|a| (BigInt::one(), BigInt::from(a))).collect();
    (exact_sum(&t), t.len())
}

/// sum_{a in A} 1/(a log a).
pub fn erdos_sum(a: &PrimitiveSet) -> Result<f64> {
    if a.elements().first() == Some(&1) {
        return Err(Error::Domain("1 in A: log 1 = 0".into()));
    }
    Ok(fsum(a.elements().iter().map(|&n| 1.0 / (n as f64 * (n as f64).ln()))))
}

/// sum_{a in A, a <= x} 1/a, with shape log x / sqrt(log log x).
pub fn behrend_log_sum(a: &PrimitiveSet, x: &BigRational) -> Result<WindowSum> {
    if x < &rational_core::rat(3) {
        return Err(Error::Domain("x must be at least 3".into()));
    }
    let (sum, terms) = reciprocals(
        a.elements().iter().copied().take_while(|&n| BigRational::from_integer(n.into()) <= *x),
    );
    let shape = log_shape(x.to_f64().unwrap_or(f64::INFINITY));
    Ok(WindowSum { ratio: sum.to_f64().unwrap_or(f64::NAN) / shape, sum, terms, shape })
}

/// sum_{a in A, y <= a <= yx} 1/a, with shape log x / sqrt(log log x).
pub fn aks_window_sum(a: &PrimitiveSet, y: &BigRational, x: &BigRational) -> Result<WindowSum> {
    if x < &rational_core::rat(3) || y < &BigRational::one() || !y.is_positive() {
        return Err(Error::Domain("need x >= 3 and y >= 1".into()));
    }
    let hi = y * x;
    let (sum, terms) = reciprocals(a.elements().iter().copied().filter(|&n| {
        let n = BigRational::from_integer(n.into());
        &n >= y && n <= hi
    }));
    let shape = log_shape(x.to_f64().unwrap_or(f64::INFINITY));
    Ok(WindowSum { ratio: sum.to_f64().unwrap_or(f64::NAN) / shape, sum, terms, shape })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rational_core::{prime_harmonic, rat};
    use num_traits::Zero;

    #[test]
    fn erdos_single_and_domain() {
        let s = PrimitiveSet::new(vec![2]).unwrap();
        assert!((erdos_sum(&s).unwrap() - 1.0 / (2.0 * 2f64.ln())).abs() < 1e-15);
        assert!(erdos_sum(&PrimitiveSet::new(vec![1]).unwrap()).is_err());
    }

    #[test]
    fn prime_and_interval_oracles() {
        let p = PrimitiveSet::primes(100);
        assert_eq!(behrend_log_sum(&p, &rat(100)).unwrap().sum, prime_harmonic(&rat(100)));
        let iv = PrimitiveSet::interval(50, 100).unwrap();
        let direct = (51..=100).fold(BigRational::zero(), |s, n| s + rational_core::ratio_of(1, n));
        let w = aks_window_sum(&iv, &rat(1), &rat(100)).unwrap();
        assert_eq!(w.sum, direct);
        assert_eq!(w.terms, 50);
        assert!(behrend_log_sum(&iv, &rat(2)).is_err());
    }
}
