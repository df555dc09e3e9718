use num_integer::Integer;
use rational_core::{bracket, fmt_rational, BigRational, ReducedRational, RoughSieve};
use serde::{Deserialize, Serialize};

use crate::predictor::{predictor_main_term, PREDICTOR_R_LIMIT};
use crate::sets::{build, build_n, check_alpha, DivRound, Frac, Variant};
use crate::{Error, Result};

/// P_T(X_alpha ∩ X_beta) from the interval unions themselves.
pub fn overlap_direct(alpha: &ReducedRational, beta: &ReducedRational, t: &BigRational, variant: Variant) -> Result<BigRational> {
    check_alpha(alpha)?;
    check_alpha(beta)?;
    let a = build(variant, alpha, t)?;
    let b = build(variant, beta, t)?;
    a.intersect(&b)?.measure_pt(t)
}

/// (1/T) * sum over n with n beta <= T, and all m, of (1 - |m alpha - n beta|)^+,
/// restricted to rough m, n for the `N` variant. The condition m alpha <= T is not imposed.
pub fn overlap_sum_formula(alpha: &ReducedRational, beta: &ReducedRational, t: &BigRational, variant: Variant) -> Result<BigRational> {
    check_alpha(alpha)?;
    check_alpha(beta)?;
    if variant == Variant::N && alpha <= beta {
        return Err(Error::Domain("the N-variant sum formula takes alpha > beta".into()));
    }
    let (a, b, tf) = (Frac::of(alpha)?, Frac::of(beta)?, Frac::of_big(t)?);
    // n b / r <= Tn / Td
    let nmax = (tf.n * b.d).fdiv(b.n * tf.d);
    let mmax = ((tf.n + 2 * tf.d) * a.d).fdiv(a.n * tf.d) + 1;
    let rough = variant == Variant::N;
    let sn = rough.then(|| RoughSieve::new(b.floor() as u64, nmax.max(0) as u64));
    let sm = rough.then(|| RoughSieve::new(a.floor() as u64, mmax.max(0) as u64));
    let d = a.d * b.d;
    let ar = a.n * b.d;
    let mut total: i128 = 0;
    for n in 1..=nmax {
        if let Some(s) = &sn {
            if !s.is_rough(n as u64) {
                continue;
            }
        }
        let x = n * b.n * a.d;
        let m0 = x.fdiv(ar);
        for m in (m0 - 1).max(1)..=m0 + 2 {
            let gap = (m * ar - x).abs();
            if gap >= d {
                continue;
            }
            if let Some(s) = &sm {
                if !s.is_rough(m as u64) {
                    continue;
                }
            }
            total += d - gap;
        }
    }
    Ok(BigRational::new(total.into(), d.into()) / t)
}

/// Reduced data for the S_j decomposition of an admissible pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SjParams {
    /// alpha / beta = s / t in lowest terms.
    pub s: i128,
    pub t: i128,
    /// u t = 1 + v s with u in [0, s).
    pub u: i128,
    pub v: i128,
    /// R = [alpha, beta] = s / alpha.
    pub r: ReducedRational,
}

impl SjParams {
    /// Validates alpha > beta >= 2 and alpha/beta not an integer.
    pub fn new(alpha: &ReducedRational, beta: &ReducedRational) -> Result<Self> {
        if alpha <= beta {
            return Err(Error::Domain(format!("need alpha > beta, got {alpha}, {beta}")));
        }
        if *beta < ReducedRational::integer(2) {
            return Err(Error::Domain(format!("need beta >= 2, got {beta}")));
        }
        let (a, b) = (Frac::of(alpha)?, Frac::of(beta)?);
        let (sn, td) = (a.n * b.d, a.d * b.n);
        let g = sn.gcd(&td);
        let (s, t) = (sn / g, td / g);
        if t == 1 {
            return Err(Error::Input(format!("alpha/beta = {s} is an integer")));
        }
        let u = mod_inverse(t, s);
        let v = (u * t - 1) / s;
        debug_assert_eq!(u * t, 1 + v * s);
        Ok(Self { s, t, u, v, r: bracket(alpha, beta) })
    }

    /// Largest |j| with |j| < R.
    pub fn j_max(&self) -> i128 {
        let rn = self.r.num_u64().unwrap() as i128;
        let rd = self.r.den_u64().unwrap() as i128;
        (rn - 1) / rd
    }
}

fn mod_inverse(t: i128, s: i128) -> i128 {
    let e = t.extended_gcd(&s);
    debug_assert_eq!(e.gcd, 1);
    e.x.rem_euclid(s)
}

/// Per-pair overlap data across the three algorithms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub alpha: ReducedRational,
    pub beta: ReducedRational,
    #[serde(rename = "T", with = "rational_core::serde_rational")]
    pub t: BigRational,
    pub params: Option<SjParams>,
    /// True when [alpha, beta] <= 1, where the N-sets are disjoint.
    pub disjoint: bool,
    #[serde(with = "rational_core::serde_rational")]
    pub direct: BigRational,
    #[serde(with = "rational_core::serde_rational")]
    pub sum_formula: BigRational,
    #[serde(with = "rational_core::serde_rational")]
    pub sj_formula: BigRational,
    /// Number of diagonal solutions (j = 0) counted directly and via the indicator product.
    pub s0_direct: u64,
    pub s0_gated: u64,
    #[serde(with = "rational_core::serde_rational")]
    pub p_alpha: BigRational,
    #[serde(with = "rational_core::serde_rational")]
    pub p_beta: BigRational,
    /// Main term of the predicted normalized overlap; omitted when R is above the exact-evaluation limit.
    #[serde(with = "rational_core::serde_rational::opt")]
    pub predictor: Option<BigRational>,
    /// (direct / (p_alpha p_beta)) / predictor.
    #[serde(with = "rational_core::serde_rational::opt")]
    pub ratio_to_predictor: Option<BigRational>,
}

impl OverlapReport {
    pub fn agreement_exact(&self) -> bool {
        self.direct == self.sj_formula
    }

    pub fn boundary_ok(&self) -> bool {
        let diff = &self.direct - &self.sum_formula;
        let diff = if diff < BigRational::from_integer(0.into()) { -diff } else { diff };
        diff <= BigRational::from_integer(2.into()) / &self.t
    }

    pub fn s0_gating_ok(&self) -> bool {
        self.s0_direct == self.s0_gated
    }

    pub fn csv_header() -> &'static str {
        "alpha,beta,T,R,disjoint,direct,sum_formula,sj_formula,agreement,boundary_ok,predictor,ratio_to_predictor"
    }

    pub fn csv_row(&self) -> String {
        let opt = |x: &Option<BigRational>| x.as_ref().map(fmt_rational).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.alpha,
            self.beta,
            fmt_rational(&self.t),
            bracket(&self.alpha, &self.beta),
            self.disjoint,
            fmt_rational(&self.direct),
            fmt_rational(&self.sum_formula),
            fmt_rational(&self.sj_formula),
            if self.agreement_exact() { "exact" } else { "MISMATCH" },
            self.boundary_ok(),
            opt(&self.predictor),
            opt(&self.ratio_to_predictor),
        )
    }
}

struct Grid {
    /// nβ·S = n * nb, mα·S = m * ma, T·S = ts, half-width·S = half
    nb: i128,
    ma: i128,
    ts: i128,
    half: i128,
    /// largest n with n beta < T + 1/2
    n_hi: i128,
    /// largest n with n beta <= T
    n_top: i128,
}

impl Grid {
    fn new(a: Frac, b: Frac, tf: Frac) -> Self {
        let l = a.d.lcm(&b.d);
        let s2 = 2 * tf.d;
        Grid {
            nb: b.n * (l / b.d) * s2,
            ma: a.n * (l / a.d) * s2,
            ts: tf.n * 2 * l,
            half: l * tf.d,
            n_hi: ((2 * tf.n + tf.d) * b.d - 1).fdiv(2 * b.n * tf.d),
            n_top: (tf.n * b.d).fdiv(b.n * tf.d),
        }
    }

    fn scale(&self) -> i128 {
        2 * self.half
    }

    /// Length of ((c1 ∨ c2) - 1/2, (c1 ∧ c2) + 1/2) ∩ [0, T], scaled.
    fn weight(&self, n: i128, m: i128) -> i128 {
        let (cn, cm) = (n * self.nb, m * self.ma);
        let lo = cn.max(cm) - self.half;
        let hi = (cn.min(cm) + self.half).min(self.ts);
        (hi - lo.max(0)).max(0)
    }
}

/// Exact S_j counts in the ranges -uj/s < k <= T/(beta s) - uj/s, for |j| < R.
pub fn sj_counts(alpha: &ReducedRational, beta: &ReducedRational, t: &BigRational) -> Result<Vec<(i64, u64)>> {
    let p = SjParams::new(alpha, beta)?;
    let (a, b, tf) = (Frac::of(alpha)?, Frac::of(beta)?, Frac::of_big(t)?);
    let g = Grid::new(a, b, tf);
    let sn = RoughSieve::new(b.floor() as u64, g.n_hi.max(1) as u64);
    let sm = RoughSieve::new(a.floor() as u64, (g.n_hi * p.t / p.s + 2).max(1) as u64);
    let jm = p.j_max();
    let mut out = Vec::new();
    for j in -jm..=jm {
        let k_lo = (1 - p.u * j).cdiv(p.s);
        let k_hi = (g.n_top - p.u * j).fdiv(p.s);
        let mut c = 0u64;
        for k in k_lo..=k_hi {
            let (n, m) = (k * p.s + p.u * j, k * p.t + p.v * j);
            if m >= 1 && sn.is_rough(n as u64) && sm.is_rough(m as u64) {
                c += 1;
            }
        }
        out.push((j as i64, c));
    }
    Ok(out)
}

/// The S_j route to P_T(N_alpha ∩ N_beta), with every pair weight clipped to [0, T] so
/// that the result coincides with [`overlap_direct`] exactly.
pub fn overlap_sj(alpha: &ReducedRational, beta: &ReducedRational, t: &BigRational) -> Result<OverlapReport> {
    let params = SjParams::new(alpha, beta)?;
    let direct = overlap_direct(alpha, beta, t, Variant::N)?;
    let sum_formula = overlap_sum_formula(alpha, beta, t, Variant::N)?;
    let p_alpha = build_n(alpha, t)?.measure_pt(t)?;
    let p_beta = build_n(beta, t)?.measure_pt(t)?;
    let zero = BigRational::from_integer(0.into());
    let mut report = OverlapReport {
        alpha: alpha.clone(),
        beta: beta.clone(),
        t: t.clone(),
        params: Some(params.clone()),
        disjoint: params.r <= ReducedRational::one(),
        direct,
        sum_formula,
        sj_formula: zero.clone(),
        s0_direct: 0,
        s0_gated: 0,
        p_alpha,
        p_beta,
        predictor: None,
        ratio_to_predictor: None,
    };
    if report.disjoint {
        return Ok(report);
    }
    let p = &params;
    let (a, b, tf) = (Frac::of(alpha)?, Frac::of(beta)?, Frac::of_big(t)?);
    let g = Grid::new(a, b, tf);
    let sn = RoughSieve::new(b.floor() as u64, g.n_hi.max(1) as u64);
    let sm = RoughSieve::new(a.floor() as u64, (g.n_hi * p.t / p.s + 2).max(1) as u64);
    let jm = p.j_max();
    let mut total: i128 = 0;
    for j in -jm..=jm {
        let k_lo = (1 - p.u * j).cdiv(p.s);
        let k_hi = (g.n_hi - p.u * j).fdiv(p.s);
        for k in k_lo..=k_hi {
            let (n, m) = (k * p.s + p.u * j, k * p.t + p.v * j);
            if m < 1 || !sn.is_rough(n as u64) || !sm.is_rough(m as u64) {
                continue;
            }
            total += g.weight(n, m);
        }
    }
    report.sj_formula = BigRational::new(total.into(), g.scale().into()) / t;

    // j = 0: n = ks, m = kt
    let k_hi = g.n_hi / p.s;
    report.s0_direct = (1..=k_hi).filter(|&k| sn.is_rough((k * p.s) as u64) && sm.is_rough((k * p.t) as u64)).count() as u64;
    let ratio = ReducedRational::try_new(p.s, p.t)?;
    let gate = sn.is_rough(p.s as u64) && sm.is_rough(p.t as u64) && p.r > ratio;
    report.s0_gated = if gate { (1..=k_hi).filter(|&k| sm.is_rough(k as u64)).count() as u64 } else { 0 };

    if p.j_max() <= PREDICTOR_R_LIMIT as i128 {
        let main = predictor_main_term(alpha, beta)?;
        let prod = &report.p_alpha * &report.p_beta;
        if main != zero && prod != zero {
            report.ratio_to_predictor = Some(&report.direct / prod / &main);
        }
        report.predictor = Some(main);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;
    use rational_core::{rat, ratio_of};

    fn r(n: u64, d: u64) -> ReducedRational {
        ReducedRational::new(n, d)
    }

    #[test]
    fn direct_examples() {
        assert_eq!(overlap_direct(&r(2, 1), &r(3, 1), &rat(60), Variant::M).unwrap(), ratio_of(19, 120));
        assert_eq!(overlap_direct(&r(3, 1), &r(2, 1), &rat(10_000), Variant::N).unwrap(), rat(0));
        let a = r(7, 3);
        let self_overlap = overlap_direct(&a, &a, &rat(500), Variant::M).unwrap();
        assert_eq!(self_overlap, build(Variant::M, &a, &rat(500)).unwrap().measure_pt(&rat(500)).unwrap());
    }

    #[test]
    fn sum_formula_examples() {
        let t = rat(60);
        let d = overlap_direct(&r(2, 1), &r(3, 1), &t, Variant::M).unwrap();
        let s = overlap_sum_formula(&r(2, 1), &r(3, 1), &t, Variant::M).unwrap();
        assert!((d - s).abs() <= rat(2) / &t);
        let t = rat(1000);
        let d = overlap_direct(&r(9, 2), &r(2, 1), &t, Variant::N).unwrap();
        let s = overlap_sum_formula(&r(9, 2), &r(2, 1), &t, Variant::N).unwrap();
        assert!((d - s).abs() <= rat(2) / &t);
    }

    #[test]
    fn sj_examples() {
        let t = rat(10_000);
        let rep = overlap_sj(&r(9, 2), &r(2, 1), &t).unwrap();
        let p = rep.params.clone().unwrap();
        assert_eq!((p.s, p.t), (9, 4));
        assert_eq!(p.r, r(2, 1));
        assert_eq!(p.u * p.t, 1 + p.v * p.s);
        assert!(p.u >= 0 && p.u < p.s);
        assert!(rep.agreement_exact());
        assert!(rep.boundary_ok());
        assert!(rep.s0_gating_ok());

        let rep = overlap_sj(&r(5, 2), &r(2, 1), &t).unwrap();
        assert_eq!(rep.params.as_ref().unwrap().r, r(2, 1));
        assert!(rep.agreement_exact());
    }

    #[test]
    fn sj_disjoint_and_errors() {
        let rep = overlap_sj(&r(3, 1), &r(2, 1), &rat(1000)).unwrap();
        assert!(rep.disjoint);
        assert_eq!(rep.sj_formula, rat(0));
        assert_eq!(rep.direct, rat(0));
        assert!(matches!(overlap_sj(&r(4, 1), &r(2, 1), &rat(100)), Err(Error::Input(_))));
        assert!(overlap_sj(&r(2, 1), &r(3, 1), &rat(100)).is_err());
    }

    #[test]
    fn sj_agrees_on_small_grid() {
        let t = ratio_of(3001, 7);
        for a in 2..40u64 {
            for q in 1..6u64 {
                for b in 2..25u64 {
                    for rr in 1..4u64 {
                        let (al, be) = (r(a, q), r(b, rr));
                        if al <= be || be < r(2, 1) || al.div(&be).is_integer() {
                            continue;
                        }
                        let rep = overlap_sj(&al, &be, &t).unwrap();
                        assert!(rep.agreement_exact(), "{al} {be}");
                        assert!(rep.boundary_ok(), "{al} {be}");
                        assert!(rep.s0_gating_ok(), "{al} {be}");
                    }
                }
            }
        }
    }
}
