//! Level construction of a subfamily whose levels are far apart.
//!
//! Quantities of size 10^alpha are never formed; every comparison against
//! them goes through [`rational_core::cmp_ln_sum`], with a float fast path
//! when the float margin is unambiguous.

use crate::family::{FamilyElement, RationalFamily};
use crate::util::{fsum, kappa_f64, reciprocal_sum, serde_biguint};
use crate::{Error, Result};
use num_bigint::{BigInt, BigUint};
use rational_core::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rational_core::{cmp_ln, cmp_ln_sum, height, ratio, serde_rational, ReducedRational};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeSet;

/// Empirical constants for the measure-sum check: the sum of kappa over the
/// subfamily must lie in [LEMMA_A_LOWER * c J, LEMMA_A_UPPER * J log(1/c)].
pub const LEMMA_A_LOWER: f64 = 0.1;
pub const LEMMA_A_UPPER: f64 = 4.0;

const LN10: f64 = std::f64::consts::LN_10;
const MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct AprimeOptions {
    pub c: BigRational,
    pub levels: usize,
    /// Lower end of the search for x_1; defaults to the smallest integer >= e^{1/c}.
    pub x1_start: Option<BigUint>,
}

/// Q_j = 10^alpha * mult with mult = alpha H(alpha / gamma_alpha), kept in factored form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QValue {
    pub alpha: ReducedRational,
    pub mult: ReducedRational,
    pub ln_approx: f64,
}

impl QValue {
    fn new(alpha: &ReducedRational, h: &BigUint) -> Self {
        let mult = alpha.mul(&ReducedRational::from_big_rational(&BigRational::from_integer(
            BigInt::from(h.clone()),
        )).expect("positive"));
        let ln_approx = alpha.to_f64() * LN10 + mult.ln();
        Self { alpha: alpha.clone(), mult, ln_approx }
    }

    fn cmp(&self, o: &Self) -> Ordering {
        let d = self.ln_approx - o.ln_approx;
        if d.abs() > MARGIN * (1.0 + self.ln_approx.abs()) {
            return d.partial_cmp(&0.0).expect("finite");
        }
        // (a1 - a2) ln 10 + ln(m1 / m2) vs 0
        let da = self.alpha.to_big_rational() - o.alpha.to_big_rational();
        let m = self.mult.div(&o.mult).to_big_rational();
        cmp_ln_sum(&[(da, rational_core::rat(10)), (BigRational::one(), m)], &BigRational::zero())
    }

    /// True when n <= Q.
    fn bounds(&self, n: &BigUint) -> bool {
        let ln_n = ReducedRational::from_big_rational(&BigRational::from_integer(n.clone().into()))
            .expect("positive")
            .ln();
        let d = ln_n - self.ln_approx;
        if d.abs() > MARGIN * (1.0 + self.ln_approx.abs()) {
            return d < 0.0;
        }
        let terms = [
            (BigRational::one(), BigRational::from_integer(n.clone().into())),
            (-BigRational::one(), self.mult.to_big_rational()),
            (-self.alpha.to_big_rational(), rational_core::rat(10)),
        ];
        cmp_ln_sum(&terms, &BigRational::zero()) != Ordering::Greater
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AprimeLevel {
    pub j: usize,
    #[serde(with = "serde_biguint")]
    pub x: BigUint,
    /// A cap [x^c, x].
    pub a: RationalFamily,
    /// The retained part of the level.
    pub a_prime: RationalFamily,
    pub lambda_a: f64,
    pub lambda_prime: f64,
    /// lambda(A'_j) >= c log x_j, decided exactly.
    pub lower_bound_ok: bool,
    pub q: Option<QValue>,
    /// log S_j = 2 log Q_j + log(sum_{gamma <= x_j} 1/gamma).
    pub s_ln: Option<f64>,
    #[serde(with = "serde_rational::opt", default)]
    pub gamma_sum: Option<BigRational>,
    /// Elements excluded from all later levels.
    pub b: Option<RationalFamily>,
    #[serde(with = "serde_biguint::opt", default)]
    pub y: Option<BigUint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AprimeTrace {
    #[serde(with = "serde_rational")]
    pub c: BigRational,
    pub levels_requested: usize,
    #[serde(with = "serde_biguint")]
    pub x1_start: BigUint,
    pub family: RationalFamily,
    /// Minimal representative of each equivalence class.
    pub gamma: Vec<FamilyElement>,
    pub levels: Vec<AprimeLevel>,
    /// Set when fewer levels than requested could be built.
    pub partial: Option<String>,
}

/// Construction with the default start for x_1.
pub fn construct_aprime(a: &RationalFamily, c: &BigRational, levels: usize) -> Result<AprimeTrace> {
    construct_aprime_with(a, &AprimeOptions { c: c.clone(), levels, x1_start: None })
}

fn big(n: &BigUint) -> BigRational {
    BigRational::from_integer(n.clone().into())
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Smallest integer x >= 1 with ln x >= t.
fn ceil_exp(t: &BigRational) -> BigUint {
    let ge = |x: &BigUint| cmp_ln(&big(x), t) != Ordering::Less;
    let one = BigUint::one();
    if ge(&one) {
        return one;
    }
    let bits = (to_f64(t) / std::f64::consts::LN_2).max(0.0);
    let mut lo = BigUint::one() << (bits as u64).saturating_sub(2);
    let mut hi = BigUint::one() << (bits as u64 + 2);
    while ge(&lo) {
        lo >>= 1;
    }
    while !ge(&hi) {
        hi <<= 1;
    }
    // invariant: !ge(lo), ge(hi)
    while &hi - &lo > one {
        let mid: BigUint = (&lo + &hi) >> 1;
        if ge(&mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn ceil_of(r: &ReducedRational) -> BigUint {
    let (q, rem) = (r.num() / r.den(), r.num() % r.den());
    if rem.is_zero() {
        q
    } else {
        q + 1u32
    }
}

struct Builder<'a> {
    fam: &'a RationalFamily,
    vals: Vec<ReducedRational>,
    recip: Vec<f64>,
    prefix: Vec<f64>,
    gamma_of: Vec<usize>,
    cp: u32,
    cq: u32,
    c: BigRational,
    cf: f64,
}

impl<'a> Builder<'a> {
    fn new(fam: &'a RationalFamily, c: &BigRational) -> Result<Self> {
        let vals: Vec<ReducedRational> = fam.values().cloned().collect();
        let recip: Vec<f64> = vals.iter().map(|v| 1.0 / v.to_f64()).collect();
        let mut prefix = vec![0.0];
        for r in &recip {
            prefix.push(prefix.last().unwrap() + r);
        }
        let mut gamma_of = vec![0; vals.len()];
        for (i, e) in fam.elements.iter().enumerate() {
            gamma_of[i] = fam
                .elements
                .iter()
                .position(|g| fam.related(g, e))
                .expect("element is related to itself");
        }
        let cp = c.numer().to_u32().ok_or_else(|| Error::Domain("c numerator too large".into()))?;
        let cq = c.denom().to_u32().ok_or_else(|| Error::Domain("c denominator too large".into()))?;
        Ok(Self { fam, vals, recip, prefix, gamma_of, cp, cq, c: c.clone(), cf: to_f64(c) })
    }

    /// Index range of elements in [x^c, x].
    fn window(&self, x: &BigUint) -> (usize, usize) {
        let xp = x.pow(self.cp);
        let hi = self.vals.partition_point(|v| v.num() <= &(x * v.den()));
        let lo = self.vals.partition_point(|v| v.num().pow(self.cq) < &xp * v.den().pow(self.cq));
        (lo, hi.max(lo))
    }

    /// Decides lambda >= k ln x, where lambda is the exact reciprocal sum over `idx`.
    fn lambda_ge(&self, idx: &[usize], lf: f64, k: &BigRational, x: &BigUint) -> bool {
        let rhs = to_f64(k) * x.to_f64().unwrap_or(f64::INFINITY).ln();
        let d = lf - rhs;
        if d.abs() > MARGIN * (1.0 + rhs.abs()) {
            return d > 0.0;
        }
        let l = reciprocal_sum(idx.iter().map(|&i| &self.vals[i]));
        cmp_ln(&big(x), &(l / k)) != Ordering::Greater
    }

    /// The log-sum lower bound lambda(A cap [x^c, x]) >= 2c log x.
    fn lb(&self, x: &BigUint) -> bool {
        let (lo, hi) = self.window(x);
        let idx: Vec<usize> = (lo..hi).collect();
        let lf = self.prefix[hi] - self.prefix[lo];
        self.lambda_ge(&idx, lf, &(&self.c * rational_core::rat(2)), x)
    }

    /// Smallest integer x >= start satisfying the lower bound.
    fn find_x(&self, start: &BigUint) -> Option<BigUint> {
        if self.lb(start) {
            return Some(start.clone());
        }
        let mut seen = BTreeSet::new();
        for v in &self.vals {
            let x = ceil_of(v);
            if &x > start && seen.insert(x.clone()) && self.lb(&x) {
                return Some(x);
            }
        }
        None
    }

    fn subfamily(&self, idx: &[usize]) -> RationalFamily {
        RationalFamily {
            scale_tag: self.fam.scale_tag.clone(),
            elements: idx.iter().map(|&i| self.fam.elements[i].clone()).collect(),
            one_spaced: false,
            primitivity: false,
        }
    }

    /// Smallest integer y with lambda(B cap [1, x]) <= c log x for all x >= y.
    fn threshold(&self, b: &[usize]) -> BigUint {
        let mut cum = Vec::with_capacity(b.len());
        let mut s = 0.0;
        for &i in b {
            s += self.recip[i];
            cum.push(s);
        }
        // the worst point of each constant stretch is its left end, an element of B
        for k in (0..b.len()).rev() {
            let v = &self.vals[b[k]];
            let lf = cum[k];
            let rhs = self.cf * v.ln();
            let d = lf - rhs;
            let violating = if d.abs() > MARGIN * (1.0 + rhs.abs()) {
                d > 0.0
            } else {
                let l = reciprocal_sum(b[..=k].iter().map(|&i| &self.vals[i]));
                cmp_ln(&v.to_big_rational(), &(l / &self.c)) == Ordering::Less
            };
            if violating {
                let l = reciprocal_sum(b[..=k].iter().map(|&i| &self.vals[i]));
                return ceil_exp(&(l / &self.c)).max(ceil_of(v));
            }
        }
        BigUint::one()
    }

    /// floor(x^{1/c}) + 1.
    fn next_power(&self, x: &BigUint) -> BigUint {
        x.pow(self.cq).nth_root(self.cp) + 1u32
    }
}

/// Builds the levels x_1 < x_2 < ... and the retained sets A'_j.
pub fn construct_aprime_with(a: &RationalFamily, opts: &AprimeOptions) -> Result<AprimeTrace> {
    let c = &opts.c;
    if c <= &BigRational::zero() || c >= &rational_core::ratio_of(1, 10) {
        return Err(Error::Domain("c must lie in (0, 1/10)".into()));
    }
    if opts.levels == 0 {
        return Err(Error::Domain("at least one level is required".into()));
    }
    let two = ReducedRational::integer(2);
    if a.values().any(|v| v < &two) {
        return Err(Error::Domain("elements must be at least 2".into()));
    }
    if let Some((x, y)) = a.spacing_violation() {
        return Err(Error::Input(format!("family is not 1-spaced: {x} and {y}")));
    }
    let bld = Builder::new(a, c)?;
    let n = bld.vals.len();
    let gamma: Vec<FamilyElement> = (0..n)
        .filter(|&i| bld.gamma_of[i] == i)
        .map(|i| a.elements[i].clone())
        .collect();
    let heights: Vec<BigUint> =
        (0..n).map(|i| height(&ratio(&bld.vals[i], &bld.vals[bld.gamma_of[i]]))).collect();

    let x1_start = opts.x1_start.clone().unwrap_or_else(|| ceil_exp(&c.recip()));
    let mut levels: Vec<AprimeLevel> = Vec::new();
    let mut partial = None;
    let mut start = x1_start.clone();
    let mut seen_a: BTreeSet<usize> = BTreeSet::new();
    let mut excluded: BTreeSet<usize> = BTreeSet::new();

    for j in 1..=opts.levels {
        let Some(x) = bld.find_x(&start) else {
            partial = Some(format!(
                "level {j}: no x >= {start} satisfies the log-sum lower bound"
            ));
            break;
        };
        let (lo, hi) = bld.window(&x);
        let a_idx: Vec<usize> = (lo..hi).collect();
        let ap_idx: Vec<usize> = a_idx.iter().copied().filter(|i| !excluded.contains(i)).collect();
        let lambda_a = fsum(a_idx.iter().map(|&i| bld.recip[i]));
        let lambda_prime = fsum(ap_idx.iter().map(|&i| bld.recip[i]));
        let lower_bound_ok = bld.lambda_ge(&ap_idx, lambda_prime, c, &x);
        seen_a.extend(a_idx.iter().copied());

        let mut level = AprimeLevel {
            j,
            x: x.clone(),
            a: bld.subfamily(&a_idx),
            a_prime: bld.subfamily(&ap_idx),
            lambda_a,
            lambda_prime,
            lower_bound_ok,
            q: None,
            s_ln: None,
            gamma_sum: None,
            b: None,
            y: None,
        };

        if j < opts.levels {
            let q = seen_a
                .iter()
                .map(|&i| QValue::new(&bld.vals[i], &heights[i]))
                .max_by(|u, v| u.cmp(v))
                .ok_or_else(|| Error::Input("empty level".into()))?;
            let xr = big(&x);
            let gam_idx: Vec<usize> = (0..n)
                .filter(|&i| bld.gamma_of[i] == i && bld.vals[i].to_big_rational() <= xr)
                .collect();
            let gamma_sum = reciprocal_sum(gam_idx.iter().map(|&i| &bld.vals[i]));
            let s_ln = 2.0 * q.ln_approx + to_f64(&gamma_sum).ln();
            let b_idx: Vec<usize> = (0..n)
                .filter(|&i| {
                    let g = bld.gamma_of[i];
                    bld.vals[g].to_big_rational() <= xr
                        && q.bounds(ratio(&bld.vals[i], &bld.vals[g]).den())
                })
                .collect();
            let y = bld.threshold(&b_idx);
            excluded = b_idx.iter().copied().collect();
            start = bld.next_power(&x).max(&y + 1u32);
            level.q = Some(q);
            level.s_ln = Some(s_ln);
            level.gamma_sum = Some(gamma_sum);
            level.b = Some(bld.subfamily(&b_idx));
            level.y = Some(y);
        }
        levels.push(level);
    }

    Ok(AprimeTrace {
        c: c.clone(),
        levels_requested: opts.levels,
        x1_start,
        family: a.clone(),
        gamma,
        levels,
        partial,
    })
}

impl AprimeTrace {
    /// The retained elements with their level index.
    pub fn aprime(&self) -> Vec<(usize, &FamilyElement)> {
        self.levels
            .iter()
            .flat_map(|l| l.a_prime.elements.iter().map(move |e| (l.j, e)))
            .collect()
    }

    /// Exact structural checks: growth of x_j, disjointness of A'_{j+1} and B_j,
    /// and the lower bound on every level.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let (cp, cq) = (self.c.numer().to_u32().unwrap_or(1), self.c.denom().to_u32().unwrap_or(1));
        for w in self.levels.windows(2) {
            let (prev, cur) = (&w[0], &w[1]);
            // x_j > x_{j-1}^{1/c}  <=>  x_j^p > x_{j-1}^q for c = p/q
            if cur.x.pow(cp) <= prev.x.pow(cq) {
                out.push(format!("x_{} does not exceed x_{}^(1/c)", cur.j, prev.j));
            }
            if let Some(b) = &prev.b {
                let bs: std::collections::HashSet<_> = b.elements.iter().collect();
                if cur.a_prime.elements.iter().any(|e| bs.contains(e)) {
                    out.push(format!("A'_{} meets B_{}", cur.j, prev.j));
                }
            }
        }
        for l in &self.levels {
            if !l.lower_bound_ok {
                out.push(format!("lambda(A'_{}) < c log x_{}", l.j, l.j));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub levels: usize,
    pub kappa_sum: f64,
    /// c J and J log(1/c).
    pub lower_scale: f64,
    pub upper_scale: f64,
    pub part_a_ok: bool,
    /// sum over A'_j of 1/(alpha log alpha), per level.
    pub level_log_weights: Vec<f64>,
    pub cross_pairs_checked: usize,
    pub part_b_violations: Vec<(String, String)>,
    pub invariant_violations: Vec<String>,
}

impl LemmaReport {
    pub fn holds(&self) -> bool {
        self.part_a_ok && self.part_b_violations.is_empty() && self.invariant_violations.is_empty()
    }
}

/// True when [alpha, beta] <= 10^beta.
fn bracket_small(alpha: &ReducedRational, beta: &ReducedRational) -> bool {
    let br = rational_core::bracket(alpha, beta);
    let d = br.ln() - beta.to_f64() * LN10;
    if d.abs() > MARGIN * (1.0 + d.abs()) {
        return d < 0.0;
    }
    let terms = [
        (BigRational::one(), br.to_big_rational()),
        (-beta.to_big_rational(), rational_core::rat(10)),
    ];
    cmp_ln_sum(&terms, &BigRational::zero()) != Ordering::Greater
}

/// Checks the measure-sum bounds and that every related pair with a small bracket
/// sits inside a single level.
pub fn check_aprime_lemma(trace: &AprimeTrace) -> LemmaReport {
    let levels = trace.levels.len();
    let cf = to_f64(&trace.c);
    let ap = trace.aprime();
    let kappa_sum = fsum(ap.iter().map(|(_, e)| kappa_f64(&e.value)));
    let lower_scale = cf * levels as f64;
    let upper_scale = levels as f64 * (1.0 / cf).ln();
    let part_a_ok = levels == 0
        || (kappa_sum >= LEMMA_A_LOWER * lower_scale && kappa_sum <= LEMMA_A_UPPER * upper_scale);
    let level_log_weights = trace
        .levels
        .iter()
        .map(|l| fsum(l.a_prime.values().map(|v| 1.0 / (v.to_f64() * v.ln()))))
        .collect();

    let fam = &trace.family;
    let mut cross_pairs_checked = 0;
    let mut part_b_violations = Vec::new();
    for (i, &(ja, ea)) in ap.iter().enumerate() {
        for &(jb, eb) in &ap[..i] {
            if ja == jb || !fam.related(ea, eb) {
                continue;
            }
            let (hi, lo) = if ea.value > eb.value { (ea, eb) } else { (eb, ea) };
            cross_pairs_checked += 1;
            if bracket_small(&hi.value, &lo.value) {
                part_b_violations.push((hi.value.to_string(), lo.value.to_string()));
            }
        }
    }
    LemmaReport {
        levels,
        kappa_sum,
        lower_scale,
        upper_scale,
        part_a_ok,
        level_log_weights,
        cross_pairs_checked,
        part_b_violations,
        invariant_violations: trace.invariant_violations(),
    }
}
