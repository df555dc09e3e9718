use std::collections::BTreeMap;

use num_integer::Integer;
use rational_core::{floor_u64, l_z, omega_z, prime_table, BigRational, ReducedRational};
use serde::{Deserialize, Serialize};

use crate::overlap::SjParams;
use crate::Result;

/// Largest |j| range for which the overlap report evaluates the predictor exactly.
pub const PREDICTOR_R_LIMIT: u64 = 20_000;

/// The arithmetic data behind the main term: Q1, Q2 and the per-j weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictorSetup {
    pub params: SjParams,
    /// floor(beta), floor(alpha)
    pub beta_floor: u64,
    pub alpha_floor: u64,
    /// Q1 = prod of p <= beta dividing s t; Q2 = prod of beta < p <= alpha dividing t.
    pub q1: u64,
    pub q2: u64,
}

fn rq(n: i128, d: i128) -> BigRational {
    BigRational::new(n.into(), d.into())
}

impl PredictorSetup {
    pub fn new(alpha: &ReducedRational, beta: &ReducedRational) -> Result<Self> {
        let params = SjParams::new(alpha, beta)?;
        let bf = floor_u64(&beta.to_big_rational());
        let af = floor_u64(&alpha.to_big_rational());
        let t = prime_table(af.max(2));
        let (s, tt) = (params.s as u64, params.t as u64);
        let q1 = t.upto(bf).iter().filter(|&&p| s % p == 0 || tt % p == 0).product();
        let q2 = t.upto(af).iter().filter(|&&p| p > bf && tt % p == 0).product();
        Ok(Self { params, beta_floor: bf, alpha_floor: af, q1, q2 })
    }

    /// True when the structure forces S_j = 0: gcd(j, Q1 Q2) > 1 or 2 ∤ j Q1.
    pub fn excluded(&self, j: i64) -> bool {
        let j = j.unsigned_abs();
        j.gcd(&self.q1) > 1 || j.gcd(&self.q2) > 1 || (j % 2 == 1 && self.q1 % 2 == 1)
    }

    /// prod over 3 <= p <= beta with p | j of (p-1)/(p-2).
    pub fn weight(&self, j: i64) -> BigRational {
        let mut w = rq(1, 1);
        for (p, _) in rational_core::factor_u64(j.unsigned_abs().max(1)) {
            if p >= 3 && p <= self.beta_floor {
                w *= rq(p as i128 - 1, p as i128 - 2);
            }
        }
        w
    }

    /// (1 - |j|/R) * weight(j), or zero when excluded.
    pub fn term(&self, j: i64) -> BigRational {
        if self.excluded(j) {
            return rq(0, 1);
        }
        let r = self.params.r.to_big_rational();
        (rq(1, 1) - rq(j.unsigned_abs() as i128, 1) / r) * self.weight(j)
    }

    /// C = prod over 3 <= p <= beta of (1 - 2/p) / (1 - 1/p)^2.
    pub fn c(&self) -> BigRational {
        let t = prime_table(self.beta_floor.max(2));
        t.upto(self.beta_floor)
            .iter()
            .filter(|&&p| p >= 3)
            .map(|&p| {
                let p = p as i128;
                rq(p * (p - 2), (p - 1) * (p - 1))
            })
            .fold(rq(1, 1), |a, b| a * b)
    }

    /// S = sum over 1 <= |j| <= R of term(j), grouped by the odd small-prime kernel of j.
    pub fn s_sum(&self) -> BigRational {
        let r = self.params.r.to_big_rational();
        let jmax = floor_u64(&r);
        let mut groups: BTreeMap<u64, (u64, u128)> = BTreeMap::new();
        for j in 1..=jmax {
            if self.excluded(j as i64) {
                continue;
            }
            let key: u64 = rational_core::factor_u64(j)
                .into_iter()
                .filter(|&(p, _)| p >= 3 && p <= self.beta_floor)
                .map(|(p, _)| p)
                .product();
            let e = groups.entry(key).or_default();
            e.0 += 1;
            e.1 += j as u128;
        }
        let mut s = rq(0, 1);
        for (key, (cnt, sum)) in groups {
            let w = self.weight(key as i64);
            let lin = rq(cnt as i128, 1) - BigRational::from_integer((sum as i128).into()) / &r;
            s += w * lin;
        }
        s * rq(2, 1)
    }

    /// prod over odd p | Q1 of (p-1)/(p-2), times prod over p | Q2 of p/(p-1).
    pub fn local_factors(&self) -> BigRational {
        let mut f = rq(1, 1);
        for (p, _) in rational_core::factor_u64(self.q1.max(1)) {
            if p > 2 {
                f *= rq(p as i128 - 1, p as i128 - 2);
            }
        }
        for (p, _) in rational_core::factor_u64(self.q2.max(1)) {
            f *= rq(p as i128, p as i128 - 1);
        }
        f
    }
}

/// Main term (2 C S / R) * local factors of the normalized overlap.
pub(crate) fn predictor_main_term(alpha: &ReducedRational, beta: &ReducedRational) -> Result<BigRational> {
    let s = PredictorSetup::new(alpha, beta)?;
    Ok(rq(2, 1) * s.c() * s.s_sum() / s.params.r.to_big_rational() * s.local_factors())
}

/// Main term together with the separately reported error-size diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorReport {
    pub alpha: ReducedRational,
    pub beta: ReducedRational,
    #[serde(with = "rational_core::serde_rational")]
    pub y: BigRational,
    pub s: i128,
    pub t: i128,
    pub r: ReducedRational,
    pub q1: u64,
    pub q2: u64,
    #[serde(with = "rational_core::serde_rational")]
    pub c: BigRational,
    #[serde(with = "rational_core::serde_rational")]
    pub s_sum: BigRational,
    #[serde(with = "rational_core::serde_rational")]
    pub main_term: BigRational,
    /// log(2 beta) / (alpha / beta)
    pub o_term: f64,
    /// 3^{L(alpha/beta; y)}
    pub upper_factor: f64,
    /// min{2^beta R^{-1/2}, 3^{omega(alpha/beta; y)} (1 + log R) / R}
    pub eta: f64,
}

/// Exact main term of the predicted ratio P_T(N_a ∩ N_b) / (P_T(N_a) P_T(N_b)).
pub fn predictor(alpha: &ReducedRational, beta: &ReducedRational, y: &BigRational) -> Result<PredictorReport> {
    if *y < BigRational::from_integer(100.into()) {
        return Err(crate::Error::Domain("predictor needs y >= 100".into()));
    }
    let setup = PredictorSetup::new(alpha, beta)?;
    let c = setup.c();
    let s_sum = setup.s_sum();
    let r = setup.params.r.clone();
    let main_term = rq(2, 1) * &c * &s_sum / r.to_big_rational() * setup.local_factors();
    let ratio = ReducedRational::try_new(setup.params.s, setup.params.t)?;
    let rf = r.to_f64();
    let bf = beta.to_f64();
    let l = l_z(&ratio, y)?;
    let w = omega_z(&ratio, y)?;
    let l_f = num_traits::ToPrimitive::to_f64(&l).unwrap_or(f64::INFINITY);
    let eta = (2f64.powf(bf) / rf.sqrt()).min(3f64.powi(w as i32) * (1.0 + rf.ln()) / rf);
    Ok(PredictorReport {
        alpha: alpha.clone(),
        beta: beta.clone(),
        y: y.clone(),
        s: setup.params.s,
        t: setup.params.t,
        r,
        q1: setup.q1,
        q2: setup.q2,
        c,
        s_sum,
        main_term,
        o_term: (2.0 * bf).ln() / ratio.to_f64(),
        upper_factor: 3f64.powf(l_f),
        eta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::overlap::sj_counts;
    use rational_core::{rat, ratio_of};

    fn r(n: u64, d: u64) -> ReducedRational {
        ReducedRational::new(n, d)
    }

    #[test]
    fn grouped_sum_matches_termwise() {
        for (a, b) in [((97, 2), (7, 1)), ((101, 3), (13, 2)), ((1001, 10), (5, 1))] {
            let s = PredictorSetup::new(&r(a.0, a.1), &r(b.0, b.1)).unwrap();
            let jmax = floor_u64(&s.params.r.to_big_rational()) as i64;
            let direct: BigRational = (1..=jmax).map(|j| s.term(j) * rat(2)).fold(rat(0), |x, y| x + y);
            assert_eq!(direct, s.s_sum());
        }
    }

    #[test]
    fn c_value() {
        let s = PredictorSetup::new(&r(31, 2), &r(7, 1)).unwrap();
        // p = 3, 5, 7
        assert_eq!(s.c(), ratio_of(3, 4) * ratio_of(15, 16) * ratio_of(35, 36));
    }

    #[test]
    fn exclusions_match_zero_sj() {
        let t = rat(20_000);
        for (a, b) in [((45, 2), (4, 1)), ((35, 3), (5, 2)), ((77, 4), (9, 2)), ((91, 1), (6, 1))] {
            let (al, be) = (r(a.0, a.1), r(b.0, b.1));
            let setup = PredictorSetup::new(&al, &be).unwrap();
            for (j, c) in sj_counts(&al, &be, &t).unwrap() {
                if j != 0 && setup.excluded(j) {
                    assert_eq!(c, 0, "{al} {be} j={j}");
                    assert_eq!(setup.term(j), rat(0));
                }
            }
        }
    }

    #[test]
    fn large_primes_near_one() {
        // s, t with only large prime factors and large R
        let rep = predictor(&r(20014, 1009), &r(2, 1), &rat(100)).unwrap();
        let m = num_traits::ToPrimitive::to_f64(&rep.main_term).unwrap();
        assert!((m - 1.0).abs() < 0.1, "{m}");
    }

    #[test]
    fn o_term_decreases() {
        let beta = r(3, 1);
        let mut last = f64::INFINITY;
        for s in [7u64, 17, 37, 77, 157] {
            let rep = predictor(&r(s, 2), &beta, &rat(100)).unwrap();
            assert!(rep.o_term < last);
            last = rep.o_term;
        }
    }
}
