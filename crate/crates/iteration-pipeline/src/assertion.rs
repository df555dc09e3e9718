use gcd_graph::{Constant, QualityValue};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use rational_core::{rat, BigRational};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt::Display;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// An exact identity between integers or rationals.
    Identity,
    /// A structural property guaranteed by the construction.
    Structural,
    /// An inequality whose truth depends on the configured constants.
    Bound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Held,
    Violated,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub kind: Kind,
    pub status: Status,
    pub lhs: String,
    pub rhs: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
}

impl Assertion {
    pub fn new(name: &str, kind: Kind, ok: bool, lhs: impl Display, rhs: impl Display) -> Self {
        Self {
            name: name.to_string(),
            kind,
            status: if ok { Status::Held } else { Status::Violated },
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
            subject: None,
        }
    }

    pub fn identity(name: &str, ok: bool, lhs: impl Display, rhs: impl Display) -> Self {
        Self::new(name, Kind::Identity, ok, lhs, rhs)
    }

    pub fn structural(name: &str, ok: bool, lhs: impl Display, rhs: impl Display) -> Self {
        Self::new(name, Kind::Structural, ok, lhs, rhs)
    }

    pub fn skipped(name: &str, kind: Kind, reason: &str) -> Self {
        Self { name: name.to_string(), kind, status: Status::Skipped, lhs: reason.to_string(), rhs: String::new(), subject: None }
    }

    pub fn on(mut self, subject: impl Display) -> Self {
        self.subject = Some(subject.to_string());
        self
    }

    pub fn held(&self) -> bool {
        self.status != Status::Violated
    }

    /// Identities and structural facts must never be violated.
    pub fn is_failure(&self) -> bool {
        self.status == Status::Violated && self.kind != Kind::Bound
    }
}

/// ln q as text, or "0" for the zero quality.
pub fn fmt_quality(q: &QualityValue) -> String {
    if q.is_zero() {
        "0".to_string()
    } else {
        format!("exp({:.12})", q.log_value)
    }
}

fn fmt_ln(ln: f64) -> String {
    format!("exp({ln:.12})")
}

pub fn const_pow(c: &Constant, e: i64) -> Constant {
    c.pow(&rat(e)).unwrap_or_else(|| Constant::approx(c.ln.map(|l| l * e as f64), None))
}

pub fn const_mul(a: &Constant, b: &Constant) -> Constant {
    a.mul(b).unwrap_or_else(|| {
        let ln = match (a.ln, b.ln) {
            (Some(x), Some(y)) => Some(x + y),
            _ => None,
        };
        Constant::approx(ln, None)
    })
}

/// q_new >= C q_old, or q_new >= q_old / C when `inverse`.
pub fn constant_bound(name: &str, q_new: &QualityValue, q_old: &QualityValue, c: &Constant, inverse: bool) -> Assertion {
    let ok = q_new.cmp_constant(q_old, c, inverse) != Ordering::Less;
    let l = if inverse { -c.ln_f64() } else { c.ln_f64() };
    let rhs = if q_old.is_zero() { "0".to_string() } else { fmt_ln(q_old.log_value + l) };
    Assertion::new(name, Kind::Bound, ok, fmt_quality(q_new), rhs)
}

/// Rational bounds lo <= p^s <= hi, with hi - lo <= 10^-digits.
pub fn pow_enclosure(p: u64, s: &BigRational, digits: u32) -> (BigRational, BigRational) {
    let a = s.numer().magnitude().clone();
    let b = s.denom().magnitude().clone();
    let b_u32 = b.to_u32().expect("small exponent denominator");
    let scale = BigUint::from(10u32).pow(digits);
    let target = BigUint::from(p).pow(a) * scale.clone().pow(b_u32);
    let m = target.nth_root(b_u32);
    let den = BigInt::from(scale);
    let lo = BigRational::new(BigInt::from(m.clone()), den.clone());
    if m.clone().pow(b_u32) == target {
        return (lo.clone(), lo);
    }
    let hi = BigRational::new(BigInt::from(m + 1u32), den);
    (lo, hi)
}

/// One factor (1 - [flag]/p)^2 (1 - p^{-s}) of a quality-loss bound.
#[derive(Clone, Debug)]
pub struct LossFactor {
    pub p: u64,
    pub balanced: bool,
}

fn loss_enclosure(factors: &[LossFactor], s: &BigRational, digits: u32) -> (BigRational, BigRational) {
    let one = BigRational::one();
    let mut lo = one.clone();
    let mut hi = one.clone();
    for f in factors {
        let pr = rat(f.p as i64);
        let sq = if f.balanced { (&one - one.clone() / &pr).pow(2i32) } else { one.clone() };
        let (plo, phi) = pow_enclosure(f.p, s, digits);
        lo *= &sq * (&one - one.clone() / plo);
        hi *= &sq * (&one - one.clone() / phi);
    }
    (lo, hi)
}

/// q_new >= q_old prod (1 - [balanced]/p)^2 (1 - p^{-s}), decided with rational
/// enclosures of p^s, refined until the comparison separates.
pub fn loss_bound(name: &str, q_new: &QualityValue, q_old: &QualityValue, factors: &[LossFactor], s: &BigRational) -> Assertion {
    let mut status = None;
    let mut shown = BigRational::zero();
    for digits in [24u32, 64, 160] {
        let (lo, hi) = loss_enclosure(factors, s, digits);
        shown = hi.clone();
        if q_new.cmp_scaled(q_old, &hi) != Ordering::Less {
            status = Some(true);
            break;
        }
        if lo.is_positive() && q_new.cmp_scaled(q_old, &lo) == Ordering::Less {
            status = Some(false);
            break;
        }
    }
    let ok = status.unwrap_or_else(|| {
        let (lo, _) = loss_enclosure(factors, s, 24);
        q_new.log_value >= q_old.log_value + gcd_graph::util::ln_f64(&lo)
    });
    let rhs = if q_old.is_zero() {
        "0".to_string()
    } else {
        fmt_ln(q_old.log_value + gcd_graph::util::ln_f64(&shown))
    };
    Assertion::new(name, Kind::Bound, ok, fmt_quality(q_new), rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rational_core::ratio_of;

    #[test]
    fn enclosures_bracket_the_power() {
        let (lo, hi) = pow_enclosure(4, &ratio_of(1, 2), 10);
        assert_eq!(lo, rat(2));
        assert_eq!(hi, rat(2));
        let (lo, hi) = pow_enclosure(7, &ratio_of(41, 40), 20);
        assert!(lo < hi);
        let x = 7f64.powf(41.0 / 40.0);
        assert!(rational_core::BigRational::from_float(x - 1e-9).unwrap() < lo);
        assert!(hi < rational_core::BigRational::from_float(x + 1e-9).unwrap());
    }

    #[test]
    fn statuses() {
        let a = Assertion::identity("x", false, 1, 2);
        assert!(a.is_failure());
        let b = Assertion::new("y", Kind::Bound, false, 1, 2);
        assert!(!b.is_failure() && !b.held());
    }
}
