use crate::util::{cmp_log_form, ln_f64, to_f64};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rational_core::{fmt_rational, parse_rational, rat, ratio_of, serde_rational, BigRational};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;

/// ln F = sum_i c_i ln x_i + shift.
#[derive(Clone, Debug, PartialEq)]
pub struct LogForm {
    pub terms: Vec<(BigRational, BigRational)>,
    pub shift: BigRational,
}

impl LogForm {
    pub fn rational(x: BigRational) -> Self {
        Self { terms: vec![(BigRational::one(), x)], shift: BigRational::zero() }
    }

    /// e^s.
    pub fn e_pow(s: BigRational) -> Self {
        Self { terms: Vec::new(), shift: s }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        Self { terms, shift: &self.shift + &o.shift }
    }

    pub fn pow(&self, c: &BigRational) -> Self {
        Self {
            terms: self.terms.iter().map(|(a, x)| (a * c, x.clone())).collect(),
            shift: &self.shift * c,
        }
    }

    pub fn ln_approx(&self) -> f64 {
        self.terms.iter().map(|(c, x)| to_f64(c) * ln_f64(x)).sum::<f64>() + to_f64(&self.shift)
    }

    /// The value as a rational when it is one and stays below 2^256.
    pub fn value(&self) -> Option<BigRational> {
        if !self.shift.is_zero() || !self.terms.iter().all(|(c, _)| c.is_integer()) {
            return None;
        }
        if self.ln_approx() > 256.0 * std::f64::consts::LN_2 + 1.0 {
            return None;
        }
        let mut v = BigRational::one();
        for (c, x) in &self.terms {
            let e = c.to_integer();
            let p = num_traits::pow(x.clone(), e.abs().to_usize()?);
            v = if e.is_negative() { v / p } else { v * p };
        }
        (v < BigRational::from_integer(BigInt::one() << 256)).then_some(v)
    }
}

/// A positive constant, held exactly as a [`LogForm`] when possible and always
/// through floating logs. `ln` is absent when ln C overflows f64 (C7 under `ConstantsMode::Paper`).
#[derive(Clone, Debug, PartialEq)]
pub struct Constant {
    pub exact: Option<LogForm>,
    pub ln: Option<f64>,
    pub ln_ln: Option<f64>,
    /// Integer or rational form, when the value is rational and below 2^256.
    pub value: Option<BigRational>,
}

impl Constant {
    pub fn from_form(form: LogForm) -> Self {
        let ln = form.ln_approx();
        Self { value: form.value(), exact: Some(form), ln: Some(ln), ln_ln: (ln > 0.0).then(|| ln.ln()) }
    }

    pub fn rational(x: BigRational) -> Self {
        Self::from_form(LogForm::rational(x))
    }

    pub fn approx(ln: Option<f64>, ln_ln: Option<f64>) -> Self {
        Self { exact: None, ln, ln_ln, value: None }
    }

    pub fn ln_f64(&self) -> f64 {
        self.ln.unwrap_or(f64::INFINITY)
    }

    pub fn mul(&self, o: &Self) -> Option<Self> {
        Some(Self::from_form(self.exact.as_ref()?.mul(o.exact.as_ref()?)))
    }

    pub fn pow(&self, c: &BigRational) -> Option<Self> {
        Some(Self::from_form(self.exact.as_ref()?.pow(c)))
    }

    /// Orders C against the rational x > 0.
    pub fn cmp_rational(&self, x: &BigRational) -> Ordering {
        if let Some(v) = &self.value {
            return v.cmp(x);
        }
        if let Some(f) = &self.exact {
            let mut t = f.terms.clone();
            t.push((-BigRational::one(), x.clone()));
            return cmp_log_form(&t, &-f.shift.clone());
        }
        self.ln_f64().total_cmp(&ln_f64(x))
    }

    pub fn cmp_const(&self, o: &Self) -> Ordering {
        if let (Some(a), Some(b)) = (&self.exact, &o.exact) {
            let mut t = a.terms.clone();
            t.extend(b.terms.iter().map(|(c, x)| (-c.clone(), x.clone())));
            return cmp_log_form(&t, &(&b.shift - &a.shift));
        }
        match (self.ln, o.ln) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            _ => self.ln_ln.unwrap_or(f64::NEG_INFINITY).total_cmp(&o.ln_ln.unwrap_or(f64::NEG_INFINITY)),
        }
    }

    /// ratio >= 1 - C/p, decided exactly when C is exact.
    pub fn concentrated(&self, p: u64, ratio: &BigRational) -> bool {
        // ratio >= 1 - C/p  <=>  C >= p (1 - ratio)
        let rhs = rat(p as i64) * (BigRational::one() - ratio);
        if !rhs.is_positive() {
            return true;
        }
        self.cmp_rational(&rhs) != Ordering::Less
    }
}

#[derive(Serialize, Deserialize)]
struct ConstantWire {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    terms: Option<Vec<[String; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    shift: Option<String>,
    ln: Option<f64>,
    ln_ln: Option<f64>,
    value: Option<String>,
}

impl Serialize for Constant {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ConstantWire {
            terms: self
                .exact
                .as_ref()
                .map(|f| f.terms.iter().map(|(c, x)| [fmt_rational(c), fmt_rational(x)]).collect()),
            shift: self.exact.as_ref().map(|f| fmt_rational(&f.shift)),
            ln: self.ln,
            ln_ln: self.ln_ln,
            value: self.value.as_ref().map(fmt_rational),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Constant {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = ConstantWire::deserialize(d)?;
        let p = |s: &str| parse_rational(s).map_err(serde::de::Error::custom);
        let exact = match (w.terms, w.shift) {
            (Some(t), Some(sh)) => Some(LogForm {
                terms: t.iter().map(|[c, x]| Ok((p(c)?, p(x)?))).collect::<std::result::Result<_, D::Error>>()?,
                shift: p(&sh)?,
            }),
            _ => None,
        };
        Ok(Constant { exact, ln: w.ln, ln_ln: w.ln_ln, value: w.value.as_deref().map(p).transpose()? })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantsMode {
    /// C1..C8 from their defining formulas for the given theta and M.
    Formula,
    /// theta = 2.001, M = e^4.
    Paper,
    /// Freely chosen values for desk-scale experiments.
    Toy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsSet {
    pub mode: ConstantsMode,
    #[serde(with = "serde_rational")]
    pub theta: BigRational,
    #[serde(with = "serde_rational")]
    pub tau: BigRational,
    pub m: Constant,
    /// C1..C8.
    pub c: Vec<Constant>,
}

impl ConstantsSet {
    /// C_i for i in 1..=8.
    pub fn c(&self, i: usize) -> &Constant {
        &self.c[i - 1]
    }
}

fn by_formula(theta: &BigRational, m: Constant, mode: ConstantsMode) -> ConstantsSet {
    let tau = theta - rat(2);
    let k = |x: i64| Constant::rational(rat(x));
    let pw = |c: &Constant, e: i64| c.pow(&rat(e)).expect("exact");
    let mul = |a: &Constant, b: &Constant| a.mul(b).expect("exact");

    let c1 = Constant::rational(rat(10_000) / &tau);
    let c2 = mul(&mul(&k(10), &m), &pw(&c1, 3));
    let c3 = mul(&k(1000), &pw(&c1, 3));
    let c4 = mul(&mul(&k(10_000_000_000), &pw(&m, 2)), &pw(&c2, 2));
    let t_ln = 3.0 * (50.0 * c4.ln_f64()).ln();
    let c5 = if c3.ln_f64() >= t_ln { c3.clone() } else { Constant::approx(Some(t_ln), Some(t_ln.ln())) };
    let cands = [c4.clone(), mul(&mul(&k(10_000), &m), &c2), c2.pow(&(rat(10) / &tau)).expect("exact")];
    let c6 = cands.iter().max_by(|a, b| a.cmp_const(b)).unwrap().clone();
    let ln5 = c5.ln_f64();
    let c7_ln = c6.ln.filter(|l| *l < 700.0).map(|l| l.exp() * ln5);
    let c7 = Constant::approx(c7_ln, c6.ln.map(|l| l + ln5.ln()));
    let c8 = mul(&mul(&k(100), &m), &c2);
    ConstantsSet { mode, theta: theta.clone(), tau, m, c: vec![c1, c2, c3, c4, c5, c6, c7, c8] }
}

/// The constants C1..C8 for theta in (2, 3] and rational M >= 2.
pub fn compute_constants(theta: &BigRational, m: &BigRational) -> Result<ConstantsSet> {
    if theta <= &rat(2) || theta > &rat(3) {
        return Err(Error::Domain(format!("theta must lie in (2, 3], got {theta}")));
    }
    if m < &rat(2) {
        return Err(Error::Domain(format!("M must be at least 2, got {m}")));
    }
    Ok(by_formula(theta, Constant::rational(m.clone()), ConstantsMode::Formula))
}

/// theta = 2.001 and M = e^4, the latter held as the exact form e^4.
pub fn paper_constants() -> ConstantsSet {
    let m = Constant::from_form(LogForm::e_pow(rat(4)));
    by_formula(&ratio_of(2001, 1000), m, ConstantsMode::Paper)
}

/// Arbitrary positive values for theta, M and C1..C8.
pub fn toy_constants(theta: &BigRational, m: &BigRational, c: [BigRational; 8]) -> Result<ConstantsSet> {
    if theta <= &rat(2) {
        return Err(Error::Domain(format!("theta must exceed 2, got {theta}")));
    }
    if !m.is_positive() || c.iter().any(|x| !x.is_positive()) {
        return Err(Error::Domain("toy constants must be positive".into()));
    }
    Ok(ConstantsSet {
        mode: ConstantsMode::Toy,
        theta: theta.clone(),
        tau: theta - rat(2),
        m: Constant::rational(m.clone()),
        c: c.into_iter().map(Constant::rational).collect(),
    })
}

/// The toy preset used by the bundled pipeline instances: theta = 21/10, M = 2,
/// C2 = C3 = 1 and C6 = 2, so every odd prime counts as large.
pub fn default_toy_constants() -> ConstantsSet {
    toy_constants(&ratio_of(21, 10), &rat(2), [rat(1), rat(1), rat(1), rat(2), rat(4), rat(2), rat(16), rat(200)])
        .expect("valid toy constants")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_three_m_two() {
        let c = compute_constants(&rat(3), &rat(2)).unwrap();
        assert_eq!(c.c(1).value, Some(rat(10_000)));
        assert_eq!(c.c(2).value, Some(rat(20_000_000_000_000)));
        assert_eq!(c.c(3).value, Some(rat(1_000_000_000_000_000)));
        assert_eq!(c.c(8).value, Some(rat(4_000_000_000_000_000)));
        // C4 = 10^10 * 4 * (2 * 10^13)^2 = 1.6 * 10^37
        assert_eq!(c.c(4).value, Some(rat(16) * BigRational::from_integer(num_traits::pow(BigInt::from(10), 36))));
        // (50 log C4)^3 ~ 7.9e10 < C3
        assert_eq!(c.c(5), c.c(3));
        // C2^10 ~ 1e134 dominates, beyond the 2^256 integer form
        assert!((c.c(6).ln_f64() - 10.0 * c.c(2).ln_f64()).abs() < 1e-9);
        assert!(c.c(6).value.is_none());
        assert!(c.c(7).value.is_none() && c.c(7).ln.is_some());
    }

    #[test]
    fn paper_mode() {
        let c = paper_constants();
        assert_eq!(c.c(1).value, Some(rat(10_000_000)));
        assert_eq!(c.m.cmp_rational(&rat(54)), Ordering::Greater);
        assert_eq!(c.m.cmp_rational(&rat(55)), Ordering::Less);
        assert!(c.c(2).value.is_none());
        assert!(c.c(7).ln.is_none());
        let js = serde_json::to_string(&c).unwrap();
        let back: ConstantsSet = serde_json::from_str(&js).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn domain_errors() {
        assert!(compute_constants(&rat(2), &rat(2)).is_err());
        assert!(compute_constants(&ratio_of(5, 2), &rat(1)).is_err());
        assert!(compute_constants(&ratio_of(201, 100), &rat(2)).is_ok());
    }

    #[test]
    fn threshold_test() {
        let c = Constant::rational(rat(3));
        // 1 - 3/7 = 4/7
        assert!(c.concentrated(7, &ratio_of(4, 7)));
        assert!(!c.concentrated(7, &(ratio_of(4, 7) - ratio_of(1, 1000))));
        assert!(c.concentrated(2, &rat(0)));
    }
}
