use crate::{Error, Result};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;
use rational_core::{factor_u64, ReducedRational};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};

/// A finite set of naturals in which no element divides another.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimitiveSet {
    elements: Vec<u64>,
}

impl PrimitiveSet {
    /// Sorts and deduplicates, then rejects 0 and any divisibility between elements.
    pub fn new(mut elements: Vec<u64>) -> Result<Self> {
        elements.sort_unstable();
        elements.dedup();
        if elements.first() == Some(&0) {
            return Err(Error::Input("0 is not a natural number".into()));
        }
        if let Some((a, b)) = first_divisor_pair(&elements) {
            return Err(Error::Input(format!("not primitive: {a} divides {b}")));
        }
        Ok(Self { elements })
    }

    /// The integers in (lo, hi]; primitive whenever 2 lo >= hi.
    pub fn interval(lo: u64, hi: u64) -> Result<Self> {
        Self::new((lo + 1..=hi).collect())
    }

    /// The primes in [2, x].
    pub fn primes(x: u64) -> Self {
        let t = rational_core::prime_table(x.max(2));
        Self { elements: t.upto(x).to_vec() }
    }

    /// The n <= x with exactly m prime factors counted with multiplicity.
    pub fn big_omega_slice(m: u32, x: u64) -> Self {
        let elements = (2..=x)
            .filter(|&n| factor_u64(n).iter().map(|&(_, e)| e).sum::<u32>() == m)
            .collect();
        Self { elements }
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

impl<'de> Deserialize<'de> for PrimitiveSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            elements: Vec<u64>,
        }
        let r = Raw::deserialize(d)?;
        PrimitiveSet::new(r.elements).map_err(serde::de::Error::custom)
    }
}

fn divisors_of(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factor_u64(n) {
        let len = ds.len();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                ds.push(ds[i] * pk);
            }
        }
    }
    ds
}

/// Finds some a | b with a != b, both in the sorted deduplicated list.
fn first_divisor_pair(xs: &[u64]) -> Option<(u64, u64)> {
    let set: HashSet<u64> = xs.iter().copied().collect();
    xs.par_iter()
        .find_map_first(|&b| {
            divisors_of(b)
                .into_iter()
                .find(|&d| d != b && set.contains(&d))
                .map(|a| (a, b))
        })
}

/// True when no element of `a` divides a different element.
/// Duplicates count as one element; a set containing 0 is rejected.
pub fn is_primitive(a: &[u64]) -> bool {
    let mut v = a.to_vec();
    v.sort_unstable();
    v.dedup();
    v.first() != Some(&0) && first_divisor_pair(&v).is_none()
}

fn is_primitive_big(a: &[BigUint]) -> bool {
    let mut v = a.to_vec();
    v.sort();
    v.dedup();
    if v.first().is_some_and(|x| x.is_zero()) {
        return false;
    }
    (0..v.len()).into_par_iter().all(|j| (0..j).all(|i| !v[j].is_multiple_of(&v[i])))
}

/// For each denominator q, the numerators a with a/q in `r` form a primitive set.
pub fn is_primitive_numerators(r: &[ReducedRational]) -> bool {
    let mut groups: BTreeMap<&BigUint, Vec<BigUint>> = BTreeMap::new();
    for x in r {
        groups.entry(x.den()).or_default().push(x.num().clone());
    }
    groups.values().all(|nums| {
        let small: Option<Vec<u64>> = nums.iter().map(|n| u64::try_from(n).ok()).collect();
        match small {
            Some(s) => is_primitive(&s),
            None => is_primitive_big(nums),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert!(is_primitive(&[6, 10, 15]));
        assert!(!is_primitive(&[2, 4]));
        assert!(is_primitive(&[1]));
        assert!(!is_primitive(&[1, 7]));
        assert!(!is_primitive(&[0, 3]));
        let r = [ReducedRational::new(3, 2), ReducedRational::new(9, 2), ReducedRational::new(5, 4)];
        assert!(!is_primitive_numerators(&r));
        let r = [ReducedRational::new(3, 2), ReducedRational::new(9, 4), ReducedRational::new(5, 4)];
        assert!(is_primitive_numerators(&r));
    }

    #[test]
    fn constructors() {
        assert!(PrimitiveSet::interval(50, 100).is_ok());
        assert!(PrimitiveSet::interval(40, 100).is_err());
        assert_eq!(PrimitiveSet::primes(30).len(), 10);
        let s = PrimitiveSet::big_omega_slice(2, 30);
        assert_eq!(s.elements(), &[4, 6, 9, 10, 14, 15, 21, 22, 25, 26]);
        assert!(is_primitive(s.elements()));
        assert!(PrimitiveSet::new(vec![3, 5, 15]).is_err());
    }

    #[test]
    fn json_rejects_non_primitive() {
        assert!(serde_json::from_str::<PrimitiveSet>(r#"{"elements":[6,10,15]}"#).is_ok());
        assert!(serde_json::from_str::<PrimitiveSet>(r#"{"elements":[3,6]}"#).is_err());
    }

    #[test]
    fn big_numerators() {
        let big = BigUint::from(u64::MAX) * 3u32;
        let a = ReducedRational::from_big_rational(&rational_core::BigRational::from_integer(
            big.clone().into(),
        ))
        .unwrap();
        let b = ReducedRational::from_big_rational(&rational_core::BigRational::from_integer(
            (big * 2u32).into(),
        ))
        .unwrap();
        assert!(!is_primitive_numerators(&[a.clone(), b]));
        assert!(is_primitive_numerators(&[a, ReducedRational::new(7, 1)]));
    }
}
