use crate::constants::Constant;
use crate::graph::GcdGraph;
use crate::util::{cmp_log_form, ln_f64, pow_rat, to_f64, upow};
use crate::{Error, Result};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rational_core::{serde_rational, BigRational};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;

/// `exact_power` is available while the numerator of theta stays below this.
pub const MAX_EXACT_NUMERATOR: u64 = 100_000;

/// A theta-weight or theta-quality, kept as the measures it is built from.
///
/// The value is mu(E)^theta / (mu(V) mu(W))^(theta - 1) * factor. Comparisons go
/// through log forms in these rationals, so they are exact: when theta = a/b they
/// reduce to comparing integer powers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityValue {
    #[serde(with = "serde_rational")]
    pub theta: BigRational,
    #[serde(with = "serde_rational")]
    pub mu_e: BigRational,
    #[serde(with = "serde_rational")]
    pub mu_v: BigRational,
    #[serde(with = "serde_rational")]
    pub mu_w: BigRational,
    #[serde(with = "serde_rational")]
    pub factor: BigRational,
    /// ln of the value; null for zero.
    #[serde(with = "log_serde")]
    pub log_value: f64,
}

mod log_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_some(x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }
}

/// (a, b) with theta = a/b, theta >= 1.
pub fn theta_parts(theta: &BigRational) -> Result<(u64, u64)> {
    if theta < &BigRational::one() {
        return Err(Error::Domain(format!("theta must be >= 1, got {theta}")));
    }
    let a = theta.numer().to_u64().ok_or_else(|| Error::Domain("theta numerator too large".into()))?;
    let b = theta.denom().to_u64().ok_or_else(|| Error::Domain("theta denominator too large".into()))?;
    Ok((a, b))
}

/// delta(G) = mu(E) / (mu(V) mu(W)), and 0 for a trivial graph.
pub fn edge_density(g: &GcdGraph) -> BigRational {
    if g.is_trivial() {
        return BigRational::zero();
    }
    g.mu_e() / (g.mu_v() * g.mu_w())
}

/// Folds sum c_i ln x_i into one term per distinct |c_i|, dropping x = 1.
fn merge_terms(terms: impl IntoIterator<Item = (BigRational, BigRational)>) -> Vec<(BigRational, BigRational)> {
    let mut by_coef: BTreeMap<BigRational, BigRational> = BTreeMap::new();
    for (c, x) in terms {
        if c.is_zero() {
            continue;
        }
        let (c, x) = if c.is_negative() { (-c, x.recip()) } else { (c, x) };
        *by_coef.entry(c).or_insert_with(BigRational::one) *= x;
    }
    by_coef.into_iter().filter(|(_, x)| !x.is_one()).collect()
}

impl QualityValue {
    pub fn zero(theta: &BigRational) -> Self {
        Self {
            theta: theta.clone(),
            mu_e: BigRational::zero(),
            mu_v: BigRational::zero(),
            mu_w: BigRational::zero(),
            factor: BigRational::one(),
            log_value: f64::NEG_INFINITY,
        }
    }

    /// Builds the value delta^theta mu(V) mu(W) * factor from its measures.
    pub fn from_measures(
        me: &BigRational,
        mv: &BigRational,
        mw: &BigRational,
        factor: &BigRational,
        theta: &BigRational,
    ) -> Result<Self> {
        theta_parts(theta)?;
        if me.is_zero() {
            return Ok(Self::zero(theta));
        }
        let t = to_f64(theta);
        let log_value = t * ln_f64(me) - (t - 1.0) * (ln_f64(mv) + ln_f64(mw)) + ln_f64(factor);
        Ok(Self {
            theta: theta.clone(),
            mu_e: me.clone(),
            mu_v: mv.clone(),
            mu_w: mw.clone(),
            factor: factor.clone(),
            log_value,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.mu_e.is_zero()
    }

    /// b, where theta = a/b.
    pub fn power(&self) -> u64 {
        self.theta.denom().to_u64().unwrap_or(1)
    }

    /// The rational value^b, when a stays within MAX_EXACT_NUMERATOR.
    pub fn exact_power(&self) -> Option<BigRational> {
        let (a, b) = theta_parts(&self.theta).ok()?;
        if self.is_zero() {
            return Some(BigRational::zero());
        }
        if a > MAX_EXACT_NUMERATOR {
            return None;
        }
        Some(pow_rat(&self.mu_e, a) / pow_rat(&(&self.mu_v * &self.mu_w), a - b) * pow_rat(&self.factor, b))
    }

    pub fn to_f64(&self) -> f64 {
        self.log_value.exp()
    }

    /// ln of the value as sum c_i ln x_i; empty for zero.
    pub fn ln_terms(&self) -> Vec<(BigRational, BigRational)> {
        if self.is_zero() {
            return Vec::new();
        }
        let one = BigRational::one();
        vec![
            (self.theta.clone(), self.mu_e.clone()),
            (&one - &self.theta, &self.mu_v * &self.mu_w),
            (one, self.factor.clone()),
        ]
    }

    /// Sign of ln(prod num) - ln(prod den) - (sum c_i ln x_i + shift), all values non-zero.
    pub fn cmp_products(
        num: &[&Self],
        den: &[&Self],
        terms: &[(BigRational, BigRational)],
        shift: &BigRational,
    ) -> Ordering {
        let nz = |xs: &[&Self]| xs.iter().any(|q| q.is_zero());
        match (nz(num), nz(den)) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let mut all: Vec<(BigRational, BigRational)> = Vec::new();
        for q in num {
            all.extend(q.ln_terms());
        }
        for q in den {
            all.extend(q.ln_terms().into_iter().map(|(c, x)| (-c, x)));
        }
        all.extend(terms.iter().map(|(c, x)| (-c.clone(), x.clone())));
        cmp_log_form(&merge_terms(all), shift)
    }

    pub fn cmp_value(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => Self::cmp_products(&[self], &[other], &[], &BigRational::zero()),
        }
    }

    /// Compares self against F * base, where ln F = sum c_i ln x_i + shift.
    pub fn cmp_scaled_form(
        &self,
        base: &Self,
        terms: &[(BigRational, BigRational)],
        shift: &BigRational,
    ) -> Ordering {
        match (self.is_zero(), base.is_zero()) {
            (true, true) => Ordering::Equal,
            (false, true) => Ordering::Greater,
            (true, false) => Ordering::Less,
            _ => Self::cmp_products(&[self], &[base], terms, shift),
        }
    }

    /// Compares self against k * base for a rational k > 0.
    pub fn cmp_scaled(&self, base: &Self, k: &BigRational) -> Ordering {
        self.cmp_scaled_form(base, &[(BigRational::one(), k.clone())], &BigRational::zero())
    }

    /// Compares self against C * base (`inverse`: against base / C).
    pub fn cmp_constant(&self, base: &Self, c: &Constant, inverse: bool) -> Ordering {
        if let Some(form) = &c.exact {
            let sign = if inverse { -BigRational::one() } else { BigRational::one() };
            let terms: Vec<_> = form.terms.iter().map(|(a, x)| (a * &sign, x.clone())).collect();
            return self.cmp_scaled_form(base, &terms, &(&form.shift * &sign));
        }
        match (self.is_zero(), base.is_zero()) {
            (true, true) => return Ordering::Equal,
            (false, true) => return Ordering::Greater,
            (true, false) => return Ordering::Less,
            _ => {}
        }
        let l = c.ln_f64();
        let target = if inverse { -l } else { l };
        (self.log_value - base.log_value).total_cmp(&target)
    }
}

/// mu^(theta)(G) = delta^theta mu(V) mu(W).
pub fn theta_weight(g: &GcdGraph, theta: &BigRational) -> Result<QualityValue> {
    QualityValue::from_measures(&g.mu_e(), &g.mu_v(), &g.mu_w(), &BigRational::one(), theta)
}

/// q^(theta)(G) = mu^(theta)(G) prod_{p in P} p^{|f(p) - g(p)|}.
pub fn quality(g: &GcdGraph, theta: &BigRational) -> Result<QualityValue> {
    QualityValue::from_measures(&g.mu_e(), &g.mu_v(), &g.mu_w(), &g.prime_factor(), theta)
}

/// Both sides of the quality variation identity for G_{p^k,p^l}, raised to the power b
/// where theta = a/b.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationReport {
    #[serde(with = "serde_rational")]
    pub theta: BigRational,
    pub p: u64,
    pub k: i64,
    pub l: i64,
    /// (q(G_{p^k,p^l}) / q(G))^b from the two qualities.
    #[serde(with = "serde_rational")]
    pub lhs: BigRational,
    /// The product of measure ratios and p^{|k-l|}, raised to the power b.
    #[serde(with = "serde_rational")]
    pub rhs: BigRational,
    pub equal: bool,
}

pub fn quality_variation(g: &GcdGraph, p: u64, k: i64, l: i64, theta: &BigRational) -> Result<VariationReport> {
    let (a, b) = theta_parts(theta)?;
    if a > MAX_EXACT_NUMERATOR {
        return Err(Error::Domain(format!("theta = {theta} has no exact power form")));
    }
    if g.is_trivial() {
        return Err(Error::Domain("quality variation needs a non-trivial graph".into()));
    }
    let sub = crate::structure::special(g, p, k, l)?;
    let (mv_k, mw_l) = (sub.mu_v(), sub.mu_w());
    if mv_k.is_zero() || mw_l.is_zero() {
        return Err(Error::Domain(format!("V_{{{p}^{k}}} or W_{{{p}^{l}}} has zero measure")));
    }
    let q_sub = quality(&sub, theta)?.exact_power().expect("power form");
    let q_g = quality(g, theta)?.exact_power().expect("power form");
    let lhs = q_sub / q_g;

    let (me, mv, mw) = (g.mu_e(), g.mu_v(), g.mu_w());
    let rhs = pow_rat(&(sub.mu_e() / me), a)
        * pow_rat(&(mv / mv_k), a - b)
        * pow_rat(&(mw / mw_l), a - b)
        * upow(p, b * (k - l).unsigned_abs());
    Ok(VariationReport { theta: theta.clone(), p, k, l, equal: lhs == rhs, lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Vertex;
    use rational_core::{rat, ratio_of, ReducedRational};

    fn r(n: u64) -> Vertex {
        ReducedRational::integer(n)
    }

    #[test]
    fn identity_case() {
        let g = GcdGraph::bipartite([r(1)], [r(1)], [(r(1), r(1))]).unwrap();
        for t in [rat(1), ratio_of(5, 2), rat(3)] {
            assert_eq!(edge_density(&g), rat(1));
            assert_eq!(theta_weight(&g, &t).unwrap().exact_power(), Some(rat(1)));
            assert_eq!(quality(&g, &t).unwrap().log_value, 0.0);
        }
    }

    #[test]
    fn two_by_two_with_two_edges() {
        let g = GcdGraph::bipartite([r(1), r(2)], [r(1), r(2)], [(r(1), r(1)), (r(2), r(2))])
            .unwrap()
            .reweighted(|_| rat(1))
            .unwrap();
        assert_eq!(edge_density(&g), ratio_of(1, 2));
        // 2^{2 - theta}
        assert_eq!(theta_weight(&g, &rat(3)).unwrap().exact_power(), Some(ratio_of(1, 2)));
        assert_eq!(theta_weight(&g, &ratio_of(5, 2)).unwrap().exact_power(), Some(ratio_of(1, 2)));
        assert_eq!(theta_weight(&g, &rat(1)).unwrap().exact_power(), Some(rat(2)));
    }

    #[test]
    fn asymmetric_prime_multiplies_by_p() {
        let g = GcdGraph::bipartite([r(6)], [r(3)], [(r(6), r(3))]).unwrap();
        let q0 = quality(&g, &rat(3)).unwrap();
        let h = g.with_prime(2, 1, 0);
        let q1 = quality(&h, &rat(3)).unwrap();
        assert_eq!(q1.cmp_scaled(&q0, &rat(2)), Ordering::Equal);
        assert_eq!(q1.exact_power().unwrap(), q0.exact_power().unwrap() * rat(2));
    }

    #[test]
    fn trivial_graph_is_zero() {
        let g = GcdGraph::bipartite([r(1)], [r(2)], []).unwrap();
        let q = quality(&g, &rat(3)).unwrap();
        assert!(q.is_zero());
        assert_eq!(edge_density(&g), rat(0));
        let back: QualityValue = serde_json_roundtrip(&q);
        assert_eq!(back, q);
    }

    fn serde_json_roundtrip(q: &QualityValue) -> QualityValue {
        serde_json::from_str(&serde_json::to_string(q).unwrap()).unwrap()
    }

    #[test]
    fn theta_below_one_rejected() {
        let g = GcdGraph::bipartite([r(1)], [r(1)], [(r(1), r(1))]).unwrap();
        assert!(theta_weight(&g, &ratio_of(1, 2)).is_err());
    }
}
