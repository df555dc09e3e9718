//! The weighted count of qualifying pairs in a rational family.

use crate::{Error, Result};
use gcd_graph::util::to_f64;
use num_traits::Zero;
use primitive_sets::RationalFamily;
use rational_core::{bracket, height, l_z, ratio, rat, serde_rational, BigRational, ReducedRational};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyPropReport {
    pub pairs: usize,
    /// sum of 1/(alpha beta) over qualifying ordered pairs.
    #[serde(with = "serde_rational")]
    pub lhs: BigRational,
    /// y e^(-z) (ln x)^2.
    pub shape: f64,
    /// lhs / shape, diagnostic only.
    pub ratio: f64,
}

/// (alpha, beta) qualifies when H(alpha/beta) <= x^3, y < [alpha, beta] <= 2y
/// and L(alpha/beta; z) > 1.
pub fn qualifies(a: &ReducedRational, b: &ReducedRational, x3: &BigRational, y: &BigRational, z: &BigRational) -> Result<bool> {
    let rho = ratio(a, b);
    if &BigRational::from_integer(height(&rho).into()) > x3 {
        return Ok(false);
    }
    let br = bracket(a, b).to_big_rational();
    if &br <= y || br > y * rat(2) {
        return Ok(false);
    }
    Ok(l_z(&rho, z)? > rat(1))
}

/// Sums 1/(alpha beta) over the qualifying ordered pairs of related elements of B.
pub fn key_prop_quantity(b: &RationalFamily, x: &BigRational, y: &BigRational, z: &BigRational) -> Result<KeyPropReport> {
    if let Some((p, q)) = b.spacing_violation() {
        return Err(Error::Input(format!("family is not 1-spaced: {p} and {q}")));
    }
    if let Some((p, q)) = b.primitivity_violation() {
        return Err(Error::Input(format!("integer ratio between {p} and {q}")));
    }
    if let Some(v) = b.values().find(|v| v.num() < v.den() || &v.to_big_rational() > x) {
        return Err(Error::Input(format!("{v} lies outside [1, x]")));
    }
    let x3 = x * x * x;
    let els = &b.elements;
    let per_row: Vec<(usize, BigRational)> = els
        .par_iter()
        .map(|a| -> Result<(usize, BigRational)> {
            let mut n = 0;
            let mut s = BigRational::zero();
            for c in els.iter().filter(|c| b.related(a, c)) {
                if qualifies(&a.value, &c.value, &x3, y, z)? {
                    n += 1;
                    s += a.value.mul(&c.value).recip().to_big_rational();
                }
            }
            Ok((n, s))
        })
        .collect::<Result<_>>()?;
    let pairs = per_row.iter().map(|r| r.0).sum();
    let lhs = per_row.into_iter().fold(BigRational::zero(), |acc, r| acc + r.1);
    let shape = to_f64(y) * (-to_f64(z)).exp() * to_f64(x).ln().powi(2);
    let ratio = to_f64(&lhs) / shape;
    Ok(KeyPropReport { pairs, lhs, shape, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use primitive_sets::FamilyElement;

    /// k + 1/7 for k in [100, 200): 1-spaced, numerators in (700, 1400).
    fn sevenths() -> RationalFamily {
        let els = (100..200u64).map(|k| FamilyElement::new(ReducedRational::new(7 * k + 1, 7)));
        RationalFamily::new(None, els.collect(), true, true).unwrap()
    }

    #[test]
    fn empty_family_gives_zero() {
        let b = RationalFamily::from_values(Vec::new());
        let r = key_prop_quantity(&b, &rat(10), &rat(1), &rat(1)).unwrap();
        assert_eq!((r.pairs, r.lhs), (0, BigRational::zero()));
    }

    #[test]
    fn matches_double_loop() {
        let b = sevenths();
        let (x, y, z) = (rat(200), rat(2), rat(1));
        let r = key_prop_quantity(&b, &x, &y, &z).unwrap();
        let mut n = 0;
        let mut s = BigRational::zero();
        for a in b.values() {
            for c in b.values() {
                let rho = ratio(a, c);
                let h = BigRational::from_integer(height(&rho).into());
                let br = bracket(a, c).to_big_rational();
                if h <= &x * &x * &x && br > y && br <= &y * rat(2) && l_z(&rho, &z).unwrap() > rat(1) {
                    n += 1;
                    s += (a.to_big_rational() * c.to_big_rational()).recip();
                }
            }
        }
        assert!(n > 0);
        assert_eq!((r.pairs, r.lhs), (n, s));
    }

    #[test]
    fn large_z_zeroes_the_sum() {
        let b = sevenths();
        let r = key_prop_quantity(&b, &rat(200), &rat(2), &rat(1000)).unwrap();
        assert!(r.lhs.is_zero());
    }

    #[test]
    fn rejects_integer_ratios() {
        let b = RationalFamily::from_values([ReducedRational::new(2, 1), ReducedRational::new(6, 1)]);
        assert!(key_prop_quantity(&b, &rat(10), &rat(1), &rat(1)).is_err());
    }
}
