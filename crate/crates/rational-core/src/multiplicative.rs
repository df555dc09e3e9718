//! Multiplicative functions given by their values on prime powers.

use crate::arith::floor_u64;
use crate::error::{Error, Result};
use crate::primes::{is_prime_u64, prime_table};
use crate::{fmt_rational, parse_rational};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;

/// Value taken on prime powers that are not listed explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefaultRule {
    /// f(p^j) = 1.
    One,
    /// f(p^j) = tau_k(p^j).
    Tau,
    /// f(p^j) = 0.
    Zero,
}

/// Explicit prime-power values keyed by `(p, j)`; serialized as `{"p^j": "num/den"}`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MultValues(pub BTreeMap<(u64, u32), BigRational>);

impl Serialize for MultValues {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m: BTreeMap<String, String> = self
            .0
            .iter()
            .map(|((p, j), v)| (format!("{p}^{j}"), fmt_rational(v)))
            .collect();
        m.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultValues {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let m = BTreeMap::<String, String>::deserialize(d)?;
        let mut out = BTreeMap::new();
        for (k, v) in m {
            let (p, j) = k.split_once('^').ok_or_else(|| D::Error::custom(format!("bad key {k}")))?;
            let p: u64 = p.trim().parse().map_err(D::Error::custom)?;
            let j: u32 = j.trim().parse().map_err(D::Error::custom)?;
            out.insert((p, j), parse_rational(&v).map_err(D::Error::custom)?);
        }
        Ok(MultValues(out))
    }
}

/// A multiplicative function with 0 <= f <= tau_k, described by its prime-power values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultSpec {
    pub k: u32,
    #[serde(default)]
    pub values: MultValues,
    #[serde(default = "default_one")]
    pub default: DefaultRule,
}

fn default_one() -> DefaultRule {
    DefaultRule::One
}

/// tau_k(p^j) = C(j + k - 1, k - 1).
pub fn tau_k_prime_power(k: u32, j: u32) -> BigInt {
    if k == 0 {
        return BigInt::zero();
    }
    let mut c = BigInt::one();
    for i in 1..k as u64 {
        c = c * (j as u64 + i) / i;
    }
    c
}

impl MultSpec {
    pub fn one() -> Self {
        Self { k: 1, values: MultValues::default(), default: DefaultRule::One }
    }

    pub fn tau(k: u32) -> Self {
        Self { k, values: MultValues::default(), default: DefaultRule::Tau }
    }

    /// f(n) = 1 for n coprime to q, 0 otherwise; exact on all n <= x.
    pub fn coprime_to(q: u64) -> Self {
        let mut m = BTreeMap::new();
        for (p, _) in crate::factor_u64(q) {
            for j in 1..64 {
                if (p as u128).pow(j) > u64::MAX as u128 {
                    break;
                }
                m.insert((p, j), BigRational::zero());
            }
        }
        Self { k: 1, values: MultValues(m), default: DefaultRule::One }
    }

    /// Value on p^j (j >= 1).
    pub fn at_prime_power(&self, p: u64, j: u32) -> BigRational {
        if let Some(v) = self.values.0.get(&(p, j)) {
            return v.clone();
        }
        match self.default {
            DefaultRule::One => BigRational::one(),
            DefaultRule::Zero => BigRational::zero(),
            DefaultRule::Tau => BigRational::from_integer(tau_k_prime_power(self.k, j)),
        }
    }

    /// Checks primality of keys and 0 <= f(p^j) <= tau_k(p^j) for listed values and the default rule.
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Contract("k must be at least 1".into()));
        }
        for ((p, j), v) in &self.values.0 {
            if !is_prime_u64(*p) || *j == 0 {
                return Err(Error::Contract(format!("key {p}^{j} is not a prime power")));
            }
            let cap = BigRational::from_integer(tau_k_prime_power(self.k, *j));
            if *v < BigRational::zero() || *v > cap {
                return Err(Error::Contract(format!(
                    "f({p}^{j}) = {} outside [0, tau_{}({p}^{j}) = {}]",
                    fmt_rational(v),
                    self.k,
                    fmt_rational(&cap)
                )));
            }
        }
        Ok(())
    }

    /// f(n) for every n in [1, x] via a smallest-prime-factor sieve. Index 0 is unused.
    pub fn table(&self, x: u64) -> Result<Vec<BigRational>> {
        self.validate()?;
        let n = x as usize;
        let mut spf = vec![0u32; n + 1];
        let t = prime_table((x as f64).sqrt() as u64 + 2);
        for &p in t.primes() {
            let p = p as usize;
            if p * p > n {
                break;
            }
            let mut m = p * p;
            while m <= n {
                if spf[m] == 0 {
                    spf[m] = p as u32;
                }
                m += p;
            }
        }
        let mut f = vec![BigRational::zero(); n + 1];
        if n >= 1 {
            f[1] = BigRational::one();
        }
        for m in 2..=n {
            let p = if spf[m] == 0 { m } else { spf[m] as usize };
            let (mut rest, mut j) = (m, 0u32);
            while rest % p == 0 {
                rest /= p;
                j += 1;
            }
            f[m] = &f[rest] * self.at_prime_power(p as u64, j);
        }
        Ok(f)
    }

    /// f(n) for a single n.
    pub fn eval(&self, n: u64) -> BigRational {
        crate::factor_u64(n)
            .into_iter()
            .map(|(p, j)| self.at_prime_power(p, j))
            .fold(BigRational::one(), |a, b| a * b)
    }
}

/// An exact sum together with its Euler-product comparator and their ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparator {
    #[serde(with = "crate::serde_rational")]
    pub sum: BigRational,
    pub comparator: f64,
    pub ratio: f64,
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn prime_sum(f: &MultSpec, x: u64, shift: f64) -> f64 {
    let t = prime_table(x.max(2));
    t.upto(x).iter().map(|&p| (to_f64(&f.at_prime_power(p, 1)) - shift) / p as f64).sum()
}

/// sum_{n <= x} f(n), with comparator x exp(sum_{p <= x} (f(p) - 1)/p).
pub fn mult_sum(f: &MultSpec, x: &BigRational) -> Result<Comparator> {
    let xf = floor_u64(x);
    let tab = f.table(xf)?;
    let sum: BigRational = tab.iter().skip(1).fold(BigRational::zero(), |a, b| a + b);
    let comparator = to_f64(x) * prime_sum(f, xf, 1.0).exp();
    Ok(Comparator { ratio: to_f64(&sum) / comparator, sum, comparator })
}

/// sum_{n <= x} f(n)/n, with comparator exp(sum_{p <= x} f(p)/p).
pub fn mult_harmonic_sum(f: &MultSpec, x: &BigRational) -> Result<Comparator> {
    let xf = floor_u64(x);
    let tab = f.table(xf)?;
    // accumulate over a common denominator: lcm of 1..x times the value denominators
    let mut den = BigInt::one();
    for (n, v) in tab.iter().enumerate().skip(1) {
        if v.is_zero() {
            continue;
        }
        let d = v.denom() * BigInt::from(n);
        den = num_integer::lcm(den, d);
    }
    let mut num = BigInt::zero();
    for (n, v) in tab.iter().enumerate().skip(1) {
        if v.is_zero() {
            continue;
        }
        num += v.numer() * (&den / (v.denom() * BigInt::from(n)));
    }
    let sum = BigRational::new(num, den);
    let comparator = prime_sum(f, xf, 0.0).exp();
    Ok(Comparator { ratio: to_f64(&sum) / comparator, sum, comparator })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{rat, ratio_of};

    #[test]
    fn examples() {
        assert_eq!(mult_sum(&MultSpec::one(), &rat(10)).unwrap().sum, rat(10));
        assert_eq!(mult_sum(&MultSpec::tau(2), &rat(6)).unwrap().sum, rat(14));
        assert_eq!(mult_harmonic_sum(&MultSpec::one(), &rat(4)).unwrap().sum, ratio_of(25, 12));
    }

    #[test]
    fn tau_values() {
        assert_eq!(tau_k_prime_power(2, 3), 4.into());
        assert_eq!(tau_k_prime_power(3, 2), 6.into());
        assert_eq!(tau_k_prime_power(1, 9), 1.into());
    }

    #[test]
    fn contract_violation() {
        let mut f = MultSpec::one();
        f.values.0.insert((2, 1), rat(2));
        assert!(matches!(mult_sum(&f, &rat(10)), Err(Error::Contract(_))));
        f.k = 2;
        assert!(mult_sum(&f, &rat(10)).is_ok());
        f.values.0.insert((2, 1), rat(-1));
        assert!(f.validate().is_err());
        let mut g = MultSpec::one();
        g.values.0.insert((4, 1), rat(1));
        assert!(g.validate().is_err());
    }

    #[test]
    fn table_matches_eval() {
        let mut f = MultSpec::tau(3);
        f.values.0.insert((3, 1), ratio_of(1, 2));
        let tab = f.table(500).unwrap();
        for n in 1..=500u64 {
            assert_eq!(tab[n as usize], f.eval(n), "{n}");
        }
    }

    #[test]
    fn json_format() {
        let s = r#"{"k": 2, "values": {"2^1": "1/2", "3^2": "3"}, "default": "one"}"#;
        let f: MultSpec = serde_json::from_str(s).unwrap();
        assert_eq!(f.at_prime_power(2, 1), ratio_of(1, 2));
        assert_eq!(f.at_prime_power(3, 2), rat(3));
        assert_eq!(f.at_prime_power(5, 1), rat(1));
        let back: MultSpec = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn coprime_indicator() {
        let f = MultSpec::coprime_to(6);
        let s = mult_sum(&f, &rat(30)).unwrap().sum;
        assert_eq!(s, rat((1..=30).filter(|n| n % 2 != 0 && n % 3 != 0).count() as i64));
    }
}
