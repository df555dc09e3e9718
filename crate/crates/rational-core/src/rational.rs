use crate::error::{domain, Error, Result};
use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

/// A positive rational `num/den` in lowest terms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ReducedRational {
    num: BigUint,
    den: BigUint,
}

/// Lowest-terms representative of `n/d`. Both must be positive.
pub fn reduce(n: &BigInt, d: &BigInt) -> Result<ReducedRational> {
    if n.sign() != Sign::Plus || d.sign() != Sign::Plus {
        return domain(format!("reduce needs positive integers, got {n}/{d}"));
    }
    Ok(ReducedRational::from_parts(n.magnitude().clone(), d.magnitude().clone()))
}

impl ReducedRational {
    /// Builds `n/d` from positive machine integers, panicking on zero.
    pub fn new(n: u64, d: u64) -> Self {
        assert!(n >= 1 && d >= 1, "ReducedRational::new needs positive parts");
        Self::from_parts(BigUint::from(n), BigUint::from(d))
    }

    pub fn try_new(n: i128, d: i128) -> Result<Self> {
        reduce(&BigInt::from(n), &BigInt::from(d))
    }

    pub fn integer(n: u64) -> Self {
        Self::new(n, 1)
    }

    pub fn one() -> Self {
        Self::new(1, 1)
    }

    pub(crate) fn from_parts(n: BigUint, d: BigUint) -> Self {
        debug_assert!(!n.is_zero() && !d.is_zero());
        let g = n.gcd(&d);
        if g.is_one() {
            Self { num: n, den: d }
        } else {
            Self { num: n / &g, den: d / &g }
        }
    }

    pub fn from_big_rational(x: &BigRational) -> Result<Self> {
        reduce(x.numer(), x.denom())
    }

    pub fn num(&self) -> &BigUint {
        &self.num
    }

    pub fn den(&self) -> &BigUint {
        &self.den
    }

    pub fn num_u64(&self) -> Option<u64> {
        self.num.to_u64()
    }

    pub fn den_u64(&self) -> Option<u64> {
        self.den.to_u64()
    }

    pub fn to_big_rational(&self) -> BigRational {
        BigRational::new_raw(BigInt::from(self.num.clone()), BigInt::from(self.den.clone()))
    }

    pub fn is_integer(&self) -> bool {
        self.den.is_one()
    }

    pub fn recip(&self) -> Self {
        Self { num: self.den.clone(), den: self.num.clone() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::from_parts(&self.num * &o.num, &self.den * &o.den)
    }

    pub fn div(&self, o: &Self) -> Self {
        Self::from_parts(&self.num * &o.den, &self.den * &o.num)
    }

    pub fn to_f64(&self) -> f64 {
        ratio_f64(&self.num, &self.den)
    }

    /// Natural logarithm, accurate for arbitrarily large parts.
    pub fn ln(&self) -> f64 {
        big_ln(&self.num) - big_ln(&self.den)
    }
}

pub(crate) fn big_ln(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

fn ratio_f64(n: &BigUint, d: &BigUint) -> f64 {
    match (n.to_f64(), d.to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
        _ => (big_ln(n) - big_ln(d)).exp(),
    }
}

impl Ord for ReducedRational {
    fn cmp(&self, o: &Self) -> Ordering {
        (&self.num * &o.den).cmp(&(&o.num * &self.den))
    }
}

impl PartialOrd for ReducedRational {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Display for ReducedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl fmt::Debug for ReducedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for ReducedRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let x = parse_big_rational(s)?;
        Self::from_big_rational(&x)
    }
}

/// Accepts `a/b`, plain integers, decimals (`2.5`) and scientific notation (`1e4`, `2.5e-3`).
pub(crate) fn parse_big_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let n = BigInt::from_str(a.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(b.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let digits = if digits == "-" || digits == "+" || digits.is_empty() { return Err(bad()) } else { digits };
    let n = BigInt::from_str(&digits).map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-scale) as usize))
    })
}

#[derive(Serialize, Deserialize)]
struct Wire {
    num: String,
    den: String,
}

impl Serialize for ReducedRational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Wire { num: self.num.to_string(), den: self.den.to_string() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ReducedRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Either {
            Obj(Wire),
            Str(String),
            Int(u64),
        }
        let parsed = match Either::deserialize(d)? {
            Either::Obj(w) => {
                let n = BigInt::from_str(&w.num).map_err(serde::de::Error::custom)?;
                let dd = BigInt::from_str(&w.den).map_err(serde::de::Error::custom)?;
                reduce(&n, &dd)
            }
            Either::Str(s) => ReducedRational::from_str(&s),
            Either::Int(n) => reduce(&BigInt::from(n), &BigInt::one()),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: u64, d: u64) -> ReducedRational {
        ReducedRational::new(n, d)
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(reduce(&6.into(), &4.into()).unwrap(), r(3, 2));
        assert_eq!(reduce(&7.into(), &1.into()).unwrap(), r(7, 1));
        assert_eq!(reduce(&30.into(), &12.into()).unwrap(), r(5, 2));
        assert!(reduce(&0.into(), &3.into()).is_err());
        assert!(reduce(&(-2).into(), &3.into()).is_err());
        assert!(reduce(&2.into(), &0.into()).is_err());
    }

    #[test]
    fn ordering_is_numeric() {
        assert!(r(3, 2) < r(5, 3));
        assert!(r(7, 1) > r(13, 2));
        assert_eq!(r(4, 6).cmp(&r(2, 3)), Ordering::Equal);
    }

    #[test]
    fn parsing() {
        assert_eq!("9/2".parse::<ReducedRational>().unwrap(), r(9, 2));
        assert_eq!("2.5".parse::<ReducedRational>().unwrap(), r(5, 2));
        assert_eq!("1e4".parse::<ReducedRational>().unwrap(), r(10000, 1));
        assert!("abc".parse::<ReducedRational>().is_err());
        assert!("0".parse::<ReducedRational>().is_err());
        assert_eq!(parse_big_rational("2.5e-1").unwrap(), BigRational::new(1.into(), 4.into()));
    }

    #[test]
    fn json_roundtrip() {
        let x = r(35, 8);
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"num":"35","den":"8"}"#);
        let y: ReducedRational = serde_json::from_str(&s).unwrap();
        assert_eq!(x, y);
        let z: ReducedRational = serde_json::from_str("\"70/16\"").unwrap();
        assert_eq!(x, z);
    }

    #[test]
    fn ln_of_huge() {
        let big = ReducedRational::from_parts(BigUint::from(10u32).pow(400), BigUint::one());
        assert!((big.ln() - 400.0 * 10f64.ln()).abs() < 1e-9);
    }
}
