use num_bigint::BigInt;
use num_integer::Integer;
use rational_core::{fmt_rational, BigRational};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A finite union of disjoint open intervals `(lo/scale, hi/scale)`, sorted by `lo`.
///
/// Overlapping intervals are merged; intervals that only touch (`hi_i == lo_{i+1}`)
/// stay separate since their union misses the common endpoint. The representation is
/// normalized so that equal sets compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalUnion {
    scale: i128,
    ivs: Vec<(i128, i128)>,
}

fn lcm(a: i128, b: i128) -> Result<i128> {
    let g = a.gcd(&b);
    (a / g).checked_mul(b).ok_or_else(|| Error::Overflow("common denominator".into()))
}

impl IntervalUnion {
    pub fn empty() -> Self {
        Self { scale: 1, ivs: Vec::new() }
    }

    /// Canonicalizes an arbitrary list of integer endpoint pairs over `scale`.
    pub fn from_scaled(scale: i128, mut ivs: Vec<(i128, i128)>) -> Self {
        assert!(scale > 0, "scale must be positive");
        ivs.retain(|&(lo, hi)| lo < hi);
        ivs.sort_unstable();
        let mut out: Vec<(i128, i128)> = Vec::with_capacity(ivs.len());
        for (lo, hi) in ivs {
            match out.last_mut() {
                Some(last) if lo < last.1 => last.1 = last.1.max(hi),
                _ => out.push((lo, hi)),
            }
        }
        let mut u = Self { scale, ivs: out };
        u.normalize();
        u
    }

    /// Builds from already sorted, pairwise disjoint intervals without re-sorting.
    pub(crate) fn from_sorted_disjoint(scale: i128, ivs: Vec<(i128, i128)>) -> Self {
        debug_assert!(ivs.windows(2).all(|w| w[0].1 <= w[1].0));
        let mut u = Self { scale, ivs };
        u.normalize();
        u
    }

    pub fn from_rationals(ivs: &[(BigRational, BigRational)]) -> Result<Self> {
        let mut scale: i128 = 1;
        for (a, b) in ivs {
            for x in [a, b] {
                let d: i128 = x.denom().try_into().map_err(|_| Error::Overflow("denominator".into()))?;
                scale = lcm(scale, d)?;
            }
        }
        let big_scale = BigInt::from(scale);
        let conv = |x: &BigRational| -> Result<i128> {
            let v = x.numer() * (&big_scale / x.denom());
            v.try_into().map_err(|_| Error::Overflow("endpoint".into()))
        };
        let pairs = ivs.iter().map(|(a, b)| Ok((conv(a)?, conv(b)?))).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_scaled(scale, pairs))
    }

    fn normalize(&mut self) {
        let mut g = self.scale;
        for &(lo, hi) in &self.ivs {
            if g == 1 {
                break;
            }
            g = g.gcd(&lo).gcd(&hi);
        }
        if g > 1 {
            self.scale /= g;
            for iv in &mut self.ivs {
                iv.0 /= g;
                iv.1 /= g;
            }
        }
        if self.ivs.is_empty() {
            self.scale = 1;
        }
    }

    pub fn scale(&self) -> i128 {
        self.scale
    }

    pub fn scaled(&self) -> &[(i128, i128)] {
        &self.ivs
    }

    pub fn len(&self) -> usize {
        self.ivs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ivs.is_empty()
    }

    pub fn intervals(&self) -> Vec<(BigRational, BigRational)> {
        let s = BigInt::from(self.scale);
        self.ivs
            .iter()
            .map(|&(lo, hi)| (BigRational::new(lo.into(), s.clone()), BigRational::new(hi.into(), s.clone())))
            .collect()
    }

    fn rescaled(&self, scale: i128) -> Result<Vec<(i128, i128)>> {
        debug_assert_eq!(scale % self.scale, 0);
        let f = scale / self.scale;
        self.ivs
            .iter()
            .map(|&(lo, hi)| match (lo.checked_mul(f), hi.checked_mul(f)) {
                (Some(a), Some(b)) => Ok((a, b)),
                _ => Err(Error::Overflow("rescale".into())),
            })
            .collect()
    }

    fn common(&self, other: &Self) -> Result<(i128, Vec<(i128, i128)>, Vec<(i128, i128)>)> {
        let s = lcm(self.scale, other.scale)?;
        Ok((s, self.rescaled(s)?, other.rescaled(s)?))
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        let (s, mut a, b) = self.common(other)?;
        a.extend(b);
        Ok(Self::from_scaled(s, a))
    }

    pub fn union_all(sets: &[Self]) -> Result<Self> {
        let mut s = 1i128;
        for u in sets {
            s = lcm(s, u.scale)?;
        }
        let mut all = Vec::new();
        for u in sets {
            all.extend(u.rescaled(s)?);
        }
        Ok(Self::from_scaled(s, all))
    }

    /// Intersection by a two-pointer sweep.
    pub fn intersect(&self, other: &Self) -> Result<Self> {
        let (s, a, b) = self.common(other)?;
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            let lo = a[i].0.max(b[j].0);
            let hi = a[i].1.min(b[j].1);
            if lo < hi {
                out.push((lo, hi));
            }
            if a[i].1 < b[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Ok(Self::from_sorted_disjoint(s, out))
    }

    /// Intersection with the closed interval `[lo, hi]`; measure-wise the same as the open one.
    pub fn clip(&self, lo: &BigRational, hi: &BigRational) -> Result<Self> {
        let num = |x: &BigRational| -> Result<(i128, i128)> {
            let n: i128 = x.numer().try_into().map_err(|_| Error::Overflow("clip".into()))?;
            let d: i128 = x.denom().try_into().map_err(|_| Error::Overflow("clip".into()))?;
            Ok((n, d))
        };
        let (ln, ld) = num(lo)?;
        let (hn, hd) = num(hi)?;
        let s = lcm(lcm(self.scale, ld)?, hd)?;
        let a = self.rescaled(s)?;
        let l = ln * (s / ld);
        let h = hn * (s / hd);
        let out = a
            .into_iter()
            .filter_map(|(x, y)| {
                let (x, y) = (x.max(l), y.min(h));
                (x < y).then_some((x, y))
            })
            .collect();
        Ok(Self::from_sorted_disjoint(s, out))
    }

    /// Lebesgue measure.
    pub fn measure(&self) -> BigRational {
        let total: i128 = self.ivs.iter().map(|&(lo, hi)| hi - lo).sum();
        BigRational::new(total.into(), self.scale.into())
    }

    /// P_T(U) = meas(U ∩ [0, T]) / T.
    pub fn measure_pt(&self, t: &BigRational) -> Result<BigRational> {
        Ok(self.clip(&BigRational::from_integer(0.into()), t)?.measure() / t)
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        self.ivs.iter().any(|&(lo, hi)| {
            let s = BigInt::from(self.scale);
            let v = x * BigRational::from_integer(s);
            v > BigRational::from_integer(lo.into()) && v < BigRational::from_integer(hi.into())
        })
    }
}

#[derive(Serialize, Deserialize)]
struct Wire {
    intervals: Vec<(String, String)>,
}

impl Serialize for IntervalUnion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let w = Wire {
            intervals: self.intervals().iter().map(|(a, b)| (fmt_rational(a), fmt_rational(b))).collect(),
        };
        w.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntervalUnion {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = Wire::deserialize(d)?;
        let ivs = w
            .intervals
            .iter()
            .map(|(a, b)| Ok((rational_core::parse_rational(a)?, rational_core::parse_rational(b)?)))
            .collect::<rational_core::Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        IntervalUnion::from_rationals(&ivs).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rational_core::{rat, ratio_of};

    #[test]
    fn canonical_merging() {
        let u = IntervalUnion::from_scaled(2, vec![(4, 6), (0, 2), (1, 3), (6, 8)]);
        assert_eq!(u.scaled(), &[(0, 3), (4, 6), (6, 8)]);
        assert_eq!(u.scale(), 2);
        let v = IntervalUnion::from_scaled(4, vec![(0, 6), (8, 12), (12, 16)]);
        assert_eq!(u, v);
        assert_eq!(u.measure(), ratio_of(7, 2));
    }

    #[test]
    fn touching_intervals_stay_open() {
        let u = IntervalUnion::from_scaled(1, vec![(0, 1), (1, 2)]);
        assert_eq!(u.len(), 2);
        assert!(!u.contains(&rat(1)));
        assert!(u.contains(&ratio_of(1, 2)));
        let v = IntervalUnion::from_scaled(1, vec![(1, 2)]);
        let w = IntervalUnion::from_scaled(1, vec![(0, 1)]);
        assert!(v.intersect(&w).unwrap().is_empty());
    }

    #[test]
    fn intersect_and_clip() {
        let a = IntervalUnion::from_scaled(2, vec![(1, 5), (7, 11)]);
        let b = IntervalUnion::from_scaled(3, vec![(0, 4), (9, 30)]);
        let c = a.intersect(&b).unwrap();
        assert_eq!(c.intervals(), vec![(ratio_of(1, 2), ratio_of(4, 3)), (ratio_of(7, 2), ratio_of(11, 2))]);
        let d = c.clip(&rat(1), &rat(4)).unwrap();
        assert_eq!(d.measure(), ratio_of(1, 3) + ratio_of(1, 2));
        assert_eq!(IntervalUnion::empty().measure_pt(&rat(5)).unwrap(), rat(0));
    }

    #[test]
    fn json_roundtrip() {
        let a = IntervalUnion::from_scaled(6, vec![(1, 5), (7, 11)]);
        let s = serde_json::to_string(&a).unwrap();
        let b: IntervalUnion = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
    }
}
