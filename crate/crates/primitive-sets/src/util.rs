use num_bigint::BigInt;
use rational_core::BigRational;
use num_traits::{One, Zero};
use rational_core::{prime_table, ReducedRational};

/// Exact sum of fractions `n_i / d_i` by binary splitting, reduced once at the end.
pub(crate) fn exact_sum(terms: &[(BigInt, BigInt)]) -> BigRational {
    fn split(t: &[(BigInt, BigInt)]) -> (BigInt, BigInt) {
        match t.len() {
            0 => (BigInt::zero(), BigInt::one()),
            1 => t[0].clone(),
            n => {
                let (a, b) = split(&t[..n / 2]);
                let (c, d) = split(&t[n / 2..]);
                (a * &d + c * &b, b * d)
            }
        }
    }
    let (n, d) = split(terms);
    BigRational::new(n, d)
}

/// sum 1/alpha over the given rationals.
pub(crate) fn reciprocal_sum<'a>(xs: impl IntoIterator<Item = &'a ReducedRational>) -> BigRational {
    let t: Vec<_> = xs
        .into_iter()
        .map(|x| (BigInt::from(x.den().clone()), BigInt::from(x.num().clone())))
        .collect();
    exact_sum(&t)
}

/// Compensated summation of floats.
pub(crate) fn fsum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

/// kappa(alpha) = (1/alpha) prod_{p <= alpha} (1 - 1/p) in floating point.
pub fn kappa_f64(alpha: &ReducedRational) -> f64 {
    let a = alpha.to_f64();
    let t = prime_table((a.floor() as u64).max(2));
    let lp = fsum(t.upto(a.floor() as u64).iter().map(|&p| (1.0 - 1.0 / p as f64).ln()));
    lp.exp() / a
}

/// sum_{p <= x} (g(p) - shift)/p.
pub(crate) fn prime_sum(x: u64, shift: f64, g: impl Fn(u64) -> f64) -> f64 {
    let t = prime_table(x.max(2));
    fsum(t.upto(x).iter().map(|&p| (g(p) - shift) / p as f64))
}

pub(crate) mod serde_biguint {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }

    pub mod opt {
        use super::*;

        pub fn serialize<S: Serializer>(x: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
            match x {
                Some(v) => s.serialize_some(&v.to_string()),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigUint>, D::Error> {
            Option::<String>::deserialize(d)?
                .map(|s| s.parse().map_err(serde::de::Error::custom))
                .transpose()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rational_core::{kappa, ratio_of};
    use num_traits::ToPrimitive;

    #[test]
    fn exact_sum_matches_fold() {
        let t: Vec<_> = (1..=30).map(|n| (BigInt::one(), BigInt::from(n))).collect();
        let fold = (1..=30).fold(BigRational::zero(), |a, n| a + ratio_of(1, n));
        assert_eq!(exact_sum(&t), fold);
    }

    #[test]
    fn kappa_float_matches_exact() {
        for a in [ReducedRational::new(2, 1), ReducedRational::new(97, 3), ReducedRational::new(1000, 1)] {
            let e = kappa(&a).to_f64().unwrap();
            assert!((kappa_f64(&a) / e - 1.0).abs() < 1e-12);
        }
    }
}
