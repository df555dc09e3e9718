//! Integers read off the final structured graph and the identities relating
//! them to every edge.

use crate::assertion::{Assertion, Kind};
use crate::{Error, Result};
use gcd_graph::util::{e_p, fmt_vertex};
use gcd_graph::{is_structured, r_of, ConstantsSet, GcdGraph, Vertex};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rational_core::primes::factor_big;
use rational_core::{bracket, fmt_rational, l_z, ratio, rat, serde_rational, BigRational};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

pub(crate) mod serde_big {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// d, e, j built from the positive or negative parts of (f, g) over a prime set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedParts {
    #[serde(with = "serde_big")]
    pub d: BigUint,
    #[serde(with = "serde_big")]
    pub e: BigUint,
    #[serde(with = "serde_big")]
    pub j: BigUint,
}

/// The factors of one vertex a/q: A+, A- and the cofactors a', q'.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexFactors {
    pub vertex: Vertex,
    #[serde(with = "serde_big")]
    pub plus: BigUint,
    #[serde(with = "serde_big")]
    pub minus: BigUint,
    #[serde(with = "serde_big")]
    pub num_cofactor: BigUint,
    #[serde(with = "serde_big")]
    pub den_cofactor: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub v: Vertex,
    pub w: Vertex,
    /// [v, w] / y.
    #[serde(with = "serde_rational")]
    pub bracket_over_y: BigRational,
    /// 4z times the sum of 1/p over p > z dividing A+, A-, B+, B-, a', q', b', r'.
    #[serde(with = "serde_rational")]
    pub h_exponent: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spread {
    #[serde(with = "serde_rational")]
    pub min: BigRational,
    #[serde(with = "serde_rational")]
    pub max: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extraction {
    /// d+, e+, j+ over P2.
    pub plus: SignedParts,
    /// d-, e-, j- over P2.
    pub minus: SignedParts,
    /// D+, E+, J+ over P3 \ P2.
    pub new_plus: SignedParts,
    /// D-, E-, J- over P3 \ P2.
    pub new_minus: SignedParts,
    /// N in factored form, p -> k_p.
    pub n_factored: BTreeMap<u64, i64>,
    #[serde(with = "serde_big")]
    pub n: BigUint,
    #[serde(with = "serde_big")]
    pub n_star: BigUint,
    pub u: usize,
    pub v_factors: Vec<VertexFactors>,
    pub w_factors: Vec<VertexFactors>,
    pub edges: Vec<EdgeRecord>,
    pub anchor: (Vertex, Vertex),
    #[serde(with = "serde_big")]
    pub x_value: BigUint,
    #[serde(with = "serde_big")]
    pub y_value: BigUint,
    /// q'A- / X over V4.
    pub spread_x: Spread,
    /// r'B- / Y over W4.
    pub spread_y: Spread,
}

/// Inputs for [`extract`]: the stage graphs and the instance parameters.
pub struct ExtractionInput<'a> {
    pub g1: &'a GcdGraph,
    pub g2: &'a GcdGraph,
    pub g3: &'a GcdGraph,
    pub g4: &'a GcdGraph,
    pub x: &'a BigRational,
    pub y: &'a BigRational,
    pub z: &'a BigRational,
    pub u: usize,
    pub constants: &'a ConstantsSet,
}

fn upow(p: u64, e: i64) -> BigUint {
    BigUint::from(p).pow(e.unsigned_abs() as u32)
}

fn parts(primes: &BTreeSet<u64>, f: &BTreeMap<u64, i64>, g: &BTreeMap<u64, i64>, sign: i64) -> SignedParts {
    let mut d = BigUint::one();
    let mut e = BigUint::one();
    for &p in primes {
        d *= upow(p, (sign * f[&p]).max(0));
        e *= upow(p, (sign * g[&p]).max(0));
    }
    let j = d.gcd(&e);
    SignedParts { d, e, j }
}

fn big(x: &BigUint) -> BigRational {
    BigRational::from_integer(x.clone().into())
}

/// x / y when y divides x, else None.
fn exact_div(x: &BigUint, y: &BigUint) -> Option<BigUint> {
    let (q, r) = x.div_rem(y);
    r.is_zero().then_some(q)
}

fn sum_inv_above(n: &BigUint, z: &BigRational) -> Result<BigRational> {
    Ok(factor_big(n)?
        .into_iter()
        .filter(|&(p, _)| &rat(p as i64) > z)
        .fold(BigRational::zero(), |s, (p, _)| s + BigRational::new(1.into(), p.into())))
}

fn pairwise_coprime(xs: &[&BigUint]) -> bool {
    (0..xs.len()).all(|i| (i + 1..xs.len()).all(|j| xs[i].gcd(xs[j]).is_one()))
}

struct Frame<'a> {
    n: &'a BigUint,
    k: &'a BTreeMap<u64, i64>,
    /// d+ (for V) or e+ (for W).
    plus_part: &'a BigUint,
    /// d-D- (for V) or e-E- (for W).
    minus_part: BigUint,
}

fn factor_vertex(x: &Vertex, fr: &Frame, side: &str, out: &mut Vec<Assertion>) -> VertexFactors {
    let mut plus = BigUint::one();
    let mut minus = BigUint::one();
    for (&p, &kp) in fr.k {
        let e = e_p(x, p);
        if e == kp + 1 {
            plus *= p;
        } else if e == kp - 1 {
            minus *= p;
        }
    }
    let subject = format!("{side} {}", fmt_vertex(x));
    let lead = exact_div(&(fr.n * &plus), &minus).map(|m| fr.plus_part * m);
    let a1 = lead.as_ref().and_then(|l| exact_div(x.num(), l));
    out.push(
        Assertion::identity(
            "numerator = (d+ or e+) (N A+/A-) a'",
            a1.is_some(),
            x.num(),
            lead.map(|l| l.to_string()).unwrap_or_else(|| "non-integral".into()),
        )
        .on(&subject),
    );
    let q1 = exact_div(x.den(), &fr.minus_part);
    out.push(
        Assertion::identity("denominator = (d-D- or e-E-) q'", q1.is_some(), x.den(), &fr.minus_part).on(&subject),
    );
    let (a1, q1) = (a1.unwrap_or_default(), q1.unwrap_or_default());
    let ok = a1.gcd(&q1).is_one();
    out.push(Assertion::identity("gcd(a', q') = 1", ok, a1.gcd(&q1), 1).on(&subject));
    let ok = pairwise_coprime(&[&plus, &minus]);
    out.push(Assertion::structural("A+, A- coprime", ok, format!("{plus}, {minus}"), 1).on(&subject));
    let g = (&a1 * &q1).gcd(fr.n);
    out.push(Assertion::identity("(b) gcd(a'q', N) = 1", g.is_one(), &g, 1).on(&subject));
    let g = a1.gcd(&fr.minus_part);
    out.push(Assertion::identity("(c) gcd(a', d-D-) = 1", g.is_one(), &g, 1).on(&subject));
    let g = a1.gcd(fr.plus_part);
    out.push(Assertion::structural("(d) gcd(a', d+) = 1", g.is_one(), &g, 1).on(&subject));
    VertexFactors { vertex: x.clone(), plus, minus, num_cofactor: a1, den_cofactor: q1 }
}

fn spread(xs: impl Iterator<Item = BigRational>) -> Spread {
    let v: Vec<BigRational> = xs.collect();
    Spread {
        min: v.iter().min().cloned().unwrap_or_else(BigRational::zero),
        max: v.iter().max().cloned().unwrap_or_else(BigRational::zero),
    }
}

/// Extracts d±, e±, j±, D±, E±, J±, N, A±, B±, X, Y from G3 and G4 and checks
/// every identity relating them on the edges of G3.
pub fn extract(inp: &ExtractionInput) -> Result<(Extraction, Vec<Assertion>)> {
    let (g1, g2, g3, g4) = (inp.g1, inp.g2, inp.g3, inp.g4);
    let (z, y, x) = (inp.z, inp.y, inp.x);
    let mut out = Vec::new();
    let anchor = g3.e.iter().next().cloned().ok_or_else(|| Error::Domain("G3 has no edges".into()))?;

    let p2 = g2.p.clone();
    let p_new: BTreeSet<u64> = g3.p.difference(&p2).copied().collect();
    let plus = parts(&p2, &g3.f, &g3.g, 1);
    let minus = parts(&p2, &g3.f, &g3.g, -1);
    let new_plus = parts(&p_new, &g3.f, &g3.g, 1);
    let new_minus = parts(&p_new, &g3.f, &g3.g, -1);

    let st = is_structured(g3)?;
    out.push(Assertion::structural("G3 structured", st.structured, format!("{:?}", st.failing), "[]"));
    let r3 = r_of(g3)?;
    let k: BTreeMap<u64, i64> = st.k.iter().filter(|(p, _)| r3.contains(p)).map(|(&p, &kp)| (p, kp)).collect();
    let nonpos: Vec<u64> = k.iter().filter(|(_, &kp)| kp <= 0).map(|(&p, _)| p).collect();
    out.push(Assertion::structural("k_p > 0 on R(G3)", nonpos.is_empty(), format!("{nonpos:?}"), "[]"));
    let n = k.iter().fold(BigUint::one(), |acc, (&p, &kp)| acc * upow(p, kp.max(0)));
    let n_star = k.keys().fold(BigUint::one(), |acc, &p| acc * p);

    for (name, val) in [("D+ = 1", &new_plus.d), ("E+ = 1", &new_plus.e), ("J+ = 1", &new_plus.j)] {
        out.push(Assertion::identity(name, val.is_one(), val, 1));
    }
    let g = n.gcd(&new_minus.j);
    out.push(Assertion::identity("gcd(N, J-) = 1", g.is_one(), &g, 1));
    let ok = big(&new_minus.j) <= *x;
    out.push(Assertion::structural("J- <= x", ok, &new_minus.j, fmt_rational(x)));
    let lhs = g3.prime_factor();
    let num = &plus.d * &new_plus.d * &plus.e * &new_plus.e * &minus.d * &new_minus.d * &minus.e * &new_minus.e;
    let den = (&plus.j * &new_plus.j * &minus.j * &new_minus.j).pow(2);
    let rhs = big(&num) / big(&den);
    out.push(Assertion::identity(
        "prod p^|f3-g3| = d+D+e+E+d-D-e-E- / (j+J+j-J-)^2",
        lhs == rhs,
        fmt_rational(&lhs),
        fmt_rational(&rhs),
    ));

    let vf = Frame { n: &n, k: &k, plus_part: &plus.d, minus_part: &minus.d * &new_minus.d };
    let wf = Frame { n: &n, k: &k, plus_part: &plus.e, minus_part: &minus.e * &new_minus.e };
    let v_factors: Vec<VertexFactors> = g3.v.iter().map(|v| factor_vertex(v, &vf, "v", &mut out)).collect();
    let w_factors: Vec<VertexFactors> = g3.w.iter().map(|w| factor_vertex(w, &wf, "w", &mut out)).collect();
    let vmap: BTreeMap<&Vertex, &VertexFactors> = v_factors.iter().map(|f| (&f.vertex, f)).collect();
    let wmap: BTreeMap<&Vertex, &VertexFactors> = w_factors.iter().map(|f| (&f.vertex, f)).collect();

    for f in v_factors.iter().chain(&w_factors) {
        let h = big(&(&n / &f.minus * &f.plus * &f.num_cofactor));
        let ok = h <= *x;
        out.push(Assertion::structural("(N A+/A-) a' <= x", ok, fmt_rational(&h), fmt_rational(x)).on(fmt_vertex(&f.vertex)));
    }

    // Constant prefactor (d-D-e-E-)/(j+j-J-N) of the bracket.
    let pref = big(&(&minus.d * &new_minus.d * &minus.e * &new_minus.e))
        / big(&(&plus.j * &minus.j * &new_minus.j * &n));
    let z_gt_c6 = inp.constants.c(6).cmp_rational(z) == Ordering::Less;
    let r1 = r_of(g1)?;
    let carry_bound = r1
        .iter()
        .filter(|&&p| &rat(p as i64) > z)
        .fold(BigRational::zero(), |s, &p| s + BigRational::new(1.into(), (p * p).into()));
    let u_over_z = rat(inp.u as i64) / z;
    let mut edges = Vec::new();
    for (v, w) in &g3.e {
        let (fv, fw) = (vmap[v], wmap[w]);
        let subject = format!("({}, {})", fmt_vertex(v), fmt_vertex(w));
        let four: Vec<&BigUint> = vec![&fv.plus, &fv.minus, &fw.plus, &fw.minus];
        out.push(Assertion::structural("A+, A-, B+, B- mutually coprime", pairwise_coprime(&four), format!("{four:?}"), 1).on(&subject));
        let prod = &fv.plus * &fv.minus * &fw.plus * &fw.minus;
        let ok = (&n_star % &prod).is_zero();
        out.push(Assertion::identity("(a) A-A+B-B+ | N*", ok, &prod, &n_star).on(&subject));
        let gab = v.num().gcd(w.num());
        let want = exact_div(&(&plus.j * &n), &(&fv.minus * &fw.minus));
        let ok = want.as_ref() == Some(&gab);
        out.push(
            Assertion::identity("(e) gcd(a, b) = j+ N/(A-B-)", ok, &gab, want.map(|x| x.to_string()).unwrap_or_default())
                .on(&subject),
        );
        let gqr = v.den().gcd(w.den());
        let want = &minus.j * &new_minus.j;
        out.push(Assertion::identity("(e) gcd(q, r) = j-J-", gqr == want, &gqr, &want).on(&subject));
        let br = bracket(v, w).to_big_rational();
        let rhs = &pref * big(&(&fv.den_cofactor * &fv.minus * &fw.den_cofactor * &fw.minus));
        out.push(
            Assertion::identity("[v,w] = (d-D-e-E-)/(j+j-J-N) q'A- r'B-", br == rhs, fmt_rational(&br), fmt_rational(&rhs))
                .on(&subject),
        );
        let by = &br / y;
        let ok = by > BigRational::one() && by <= rat(2);
        out.push(Assertion::structural("1 < [v,w]/y <= 2", ok, fmt_rational(&by), "(1, 2]").on(&subject));

        let ns = [&fv.plus, &fv.minus, &fw.plus, &fw.minus, &fv.num_cofactor, &fv.den_cofactor, &fw.num_cofactor, &fw.den_cofactor];
        let mut h_sum = BigRational::zero();
        for m in ns {
            h_sum += sum_inv_above(m, z)?;
        }
        let rho = ratio(v, w);
        let carry = p_new
            .iter()
            .filter(|&&p| &rat(p as i64) > z && e_p(&rho, p) != 0)
            .fold(BigRational::zero(), |s, &p| s + BigRational::new(1.into(), p.into()));
        let ok = crate::steps::below_c8(inp.constants.c(8), &carry, &carry_bound);
        out.push(
            Assertion::structural("sum over P3\\P2 of 1/p <= C8 sum_{R(G1), p>z} 1/p^2", ok, fmt_rational(&carry), fmt_rational(&carry_bound))
                .on(&subject),
        );
        if z_gt_c6 {
            let lhs = l_z(&rho, z)?;
            let rhs = &u_over_z + &carry + &h_sum;
            out.push(
                Assertion::structural("L(v/w; z) <= U/z + carry + sum_n sum_{p|n, p>z} 1/p", lhs <= rhs, fmt_rational(&lhs), fmt_rational(&rhs))
                    .on(&subject),
            );
        } else {
            out.push(Assertion::skipped("L(v/w; z) <= U/z + carry + sum_n sum_{p|n, p>z} 1/p", Kind::Structural, "z <= C6").on(&subject));
        }
        edges.push(EdgeRecord { v: v.clone(), w: w.clone(), bracket_over_y: by, h_exponent: rat(4) * z * h_sum });
    }

    let (v0, w0) = &anchor;
    let x_value = &vmap[v0].den_cofactor * &vmap[v0].minus;
    let y_value = &wmap[w0].den_cofactor * &wmap[w0].minus;
    let lhs = big(&(&x_value * &y_value)) * &pref;
    let br = bracket(v0, w0).to_big_rational();
    out.push(Assertion::identity("XY (d-D-e-E-)/(j+j-J-N) = [v0, w0]", lhs == br, fmt_rational(&lhs), fmt_rational(&br)));
    let bx = big(&x_value);
    let by_ = big(&y_value);
    let spread_x = spread(g4.v.iter().filter_map(|v| vmap.get(v)).map(|f| big(&(&f.den_cofactor * &f.minus)) / &bx));
    let spread_y = spread(g4.w.iter().filter_map(|w| wmap.get(w)).map(|f| big(&(&f.den_cofactor * &f.minus)) / &by_));
    let pos = spread_x.min.is_positive() && spread_y.min.is_positive();
    out.push(Assertion::structural("q'A-/X and r'B-/Y positive on G4", pos, fmt_rational(&spread_x.min), fmt_rational(&spread_y.min)));

    Ok((
        Extraction {
            plus,
            minus,
            new_plus,
            new_minus,
            n_factored: k,
            n,
            n_star,
            u: inp.u,
            v_factors,
            w_factors,
            edges,
            anchor,
            x_value,
            y_value,
            spread_x,
            spread_y,
        },
        out,
    ))
}
