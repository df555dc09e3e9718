use crate::util::{e_p, fmt_vertex};
use crate::{Error, Result};
use num_traits::{One, Signed, Zero};
use rational_core::{fmt_rational, is_prime_u64, parse_rational, BigRational, ReducedRational};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::{BTreeMap, BTreeSet};

pub type Vertex = ReducedRational;
pub type Edge = (Vertex, Vertex);

/// A weighted bipartite graph on positive rationals with multiplicative data (P, f, g).
///
/// `weights` holds mu for every vertex of V and W; a graph with P empty is just a
/// weighted bipartite graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GcdGraph {
    pub weights: BTreeMap<Vertex, BigRational>,
    pub v: BTreeSet<Vertex>,
    pub w: BTreeSet<Vertex>,
    pub e: BTreeSet<Edge>,
    pub p: BTreeSet<u64>,
    pub f: BTreeMap<u64, i64>,
    pub g: BTreeMap<u64, i64>,
}

/// The default weight 1/alpha.
pub fn default_weight(x: &Vertex) -> BigRational {
    x.recip().to_big_rational()
}

impl GcdGraph {
    /// Bipartite graph with the default weights 1/alpha and no primes.
    pub fn bipartite(
        v: impl IntoIterator<Item = Vertex>,
        w: impl IntoIterator<Item = Vertex>,
        e: impl IntoIterator<Item = Edge>,
    ) -> Result<Self> {
        let v: BTreeSet<_> = v.into_iter().collect();
        let w: BTreeSet<_> = w.into_iter().collect();
        let weights = v.iter().chain(w.iter()).map(|x| (x.clone(), default_weight(x))).collect();
        Self::new(weights, v, w, e.into_iter().collect(), BTreeMap::new(), BTreeMap::new())
    }

    /// Full constructor. `f` and `g` must share their key set, which becomes P.
    pub fn new(
        weights: BTreeMap<Vertex, BigRational>,
        v: BTreeSet<Vertex>,
        w: BTreeSet<Vertex>,
        e: BTreeSet<Edge>,
        f: BTreeMap<u64, i64>,
        g: BTreeMap<u64, i64>,
    ) -> Result<Self> {
        let p: BTreeSet<u64> = f.keys().copied().collect();
        if g.keys().copied().collect::<BTreeSet<_>>() != p {
            return Err(Error::Input("f and g must be defined on the same primes".into()));
        }
        if let Some(q) = p.iter().find(|&&q| !is_prime_u64(q)) {
            return Err(Error::Input(format!("{q} is not prime")));
        }
        for (a, b) in &e {
            if !v.contains(a) || !w.contains(b) {
                return Err(Error::Input(format!("edge ({a}, {b}) is not in V x W")));
            }
        }
        let mut ws = BTreeMap::new();
        for x in v.iter().chain(w.iter()) {
            let m = weights.get(x).cloned().unwrap_or_else(|| default_weight(x));
            if !m.is_positive() {
                return Err(Error::Input(format!("weight of {x} must be positive")));
            }
            ws.insert(x.clone(), m);
        }
        Ok(Self { weights: ws, v, w, e, p, f, g })
    }

    /// Same graph with arbitrary positive weights given by `mu`.
    pub fn reweighted(&self, mu: impl Fn(&Vertex) -> BigRational) -> Result<Self> {
        let weights = self.weights.keys().map(|x| (x.clone(), mu(x))).collect();
        Self::new(weights, self.v.clone(), self.w.clone(), self.e.clone(), self.f.clone(), self.g.clone())
    }

    pub fn mu(&self, x: &Vertex) -> BigRational {
        self.weights.get(x).cloned().unwrap_or_else(|| default_weight(x))
    }

    pub fn mu_of<'a>(&self, xs: impl IntoIterator<Item = &'a Vertex>) -> BigRational {
        xs.into_iter().fold(BigRational::zero(), |s, x| s + self.mu(x))
    }

    pub fn mu_edges<'a>(&self, es: impl IntoIterator<Item = &'a Edge>) -> BigRational {
        es.into_iter().fold(BigRational::zero(), |s, (a, b)| s + self.mu(a) * self.mu(b))
    }

    pub fn mu_v(&self) -> BigRational {
        self.mu_of(&self.v)
    }

    pub fn mu_w(&self) -> BigRational {
        self.mu_of(&self.w)
    }

    pub fn mu_e(&self) -> BigRational {
        self.mu_edges(&self.e)
    }

    pub fn is_trivial(&self) -> bool {
        self.e.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.v.len() + self.w.len()
    }

    /// Gamma(v) for v in V.
    pub fn neighbours_of_v(&self, x: &Vertex) -> BTreeSet<Vertex> {
        self.e.iter().filter(|(a, _)| a == x).map(|(_, b)| b.clone()).collect()
    }

    /// Gamma(w) for w in W.
    pub fn neighbours_of_w(&self, y: &Vertex) -> BTreeSet<Vertex> {
        self.e.iter().filter(|(_, b)| b == y).map(|(a, _)| a.clone()).collect()
    }

    /// The subgraph induced by V' and W', keeping the multiplicative data.
    pub fn induced(&self, v: &BTreeSet<Vertex>, w: &BTreeSet<Vertex>) -> Self {
        let e = self.e.iter().filter(|(a, b)| v.contains(a) && w.contains(b)).cloned().collect();
        self.with_parts(v.clone(), w.clone(), e)
    }

    /// Same vertices and data, edge set intersected with `e`.
    pub fn with_edges(&self, e: BTreeSet<Edge>) -> Self {
        let e = e.into_iter().filter(|x| self.e.contains(x)).collect();
        self.with_parts(self.v.clone(), self.w.clone(), e)
    }

    fn with_parts(&self, v: BTreeSet<Vertex>, w: BTreeSet<Vertex>, e: BTreeSet<Edge>) -> Self {
        let weights = v.iter().chain(w.iter()).map(|x| (x.clone(), self.mu(x))).collect();
        Self { weights, v, w, e, p: self.p.clone(), f: self.f.clone(), g: self.g.clone() }
    }

    /// Adds a prime to the multiplicative data without touching the vertex sets.
    pub fn with_prime(&self, p: u64, fp: i64, gp: i64) -> Self {
        let mut out = self.clone();
        out.p.insert(p);
        out.f.insert(p, fp);
        out.g.insert(p, gp);
        out
    }

    /// V_{p^k}.
    pub fn v_at(&self, p: u64, k: i64) -> BTreeSet<Vertex> {
        self.v.iter().filter(|x| e_p(x, p) == k).cloned().collect()
    }

    /// W_{p^l}.
    pub fn w_at(&self, p: u64, l: i64) -> BTreeSet<Vertex> {
        self.w.iter().filter(|x| e_p(x, p) == l).cloned().collect()
    }

    /// Valuations e_p present in V and in W.
    pub fn valuations(&self, p: u64) -> (BTreeSet<i64>, BTreeSet<i64>) {
        (self.v.iter().map(|x| e_p(x, p)).collect(), self.w.iter().map(|x| e_p(x, p)).collect())
    }

    /// Valuation pairs (e_p(v), e_p(w)) occurring on edges.
    pub fn edge_valuations(&self, p: u64) -> BTreeSet<(i64, i64)> {
        self.e.iter().map(|(a, b)| (e_p(a, p), e_p(b, p))).collect()
    }

    /// prod_{p in P} p^{|f(p) - g(p)|}.
    pub fn prime_factor(&self) -> BigRational {
        self.p.iter().fold(BigRational::one(), |acc, &q| {
            acc * crate::util::upow(q, (self.f[&q] - self.g[&q]).unsigned_abs())
        })
    }
}

#[derive(Serialize, Deserialize)]
struct Wire {
    #[serde(default)]
    weights: BTreeMap<String, String>,
    #[serde(rename = "V")]
    v: Vec<String>,
    #[serde(rename = "W")]
    w: Vec<String>,
    #[serde(rename = "E", default)]
    e: Vec<[String; 2]>,
    #[serde(rename = "P", default)]
    p: Vec<u64>,
    #[serde(default)]
    f: BTreeMap<String, i64>,
    #[serde(default)]
    g: BTreeMap<String, i64>,
}

impl Serialize for GcdGraph {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let wire = Wire {
            weights: self.weights.iter().map(|(k, m)| (fmt_vertex(k), fmt_rational(m))).collect(),
            v: self.v.iter().map(fmt_vertex).collect(),
            w: self.w.iter().map(fmt_vertex).collect(),
            e: self.e.iter().map(|(a, b)| [fmt_vertex(a), fmt_vertex(b)]).collect(),
            p: self.p.iter().copied().collect(),
            f: self.f.iter().map(|(k, x)| (k.to_string(), *x)).collect(),
            g: self.g.iter().map(|(k, x)| (k.to_string(), *x)).collect(),
        };
        wire.serialize(s)
    }
}

fn parse_vertex(s: &str) -> Result<Vertex> {
    s.parse::<Vertex>().map_err(|e| Error::Input(format!("vertex {s:?}: {e}")))
}

impl<'de> Deserialize<'de> for GcdGraph {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = Wire::deserialize(d)?;
        let conv = || -> Result<GcdGraph> {
            let mut weights = BTreeMap::new();
            for (k, m) in &wire.weights {
                weights.insert(parse_vertex(k)?, parse_rational(m)?);
            }
            let v = wire.v.iter().map(|s| parse_vertex(s)).collect::<Result<BTreeSet<_>>>()?;
            let w = wire.w.iter().map(|s| parse_vertex(s)).collect::<Result<BTreeSet<_>>>()?;
            let e = wire
                .e
                .iter()
                .map(|[a, b]| Ok((parse_vertex(a)?, parse_vertex(b)?)))
                .collect::<Result<BTreeSet<_>>>()?;
            let keys = |m: &BTreeMap<String, i64>| -> Result<BTreeMap<u64, i64>> {
                m.iter()
                    .map(|(k, x)| {
                        k.parse::<u64>().map(|k| (k, *x)).map_err(|_| Error::Input(format!("prime key {k:?}")))
                    })
                    .collect()
            };
            let (f, g) = (keys(&wire.f)?, keys(&wire.g)?);
            if f.keys().copied().collect::<BTreeSet<_>>() != wire.p.iter().copied().collect() {
                return Err(Error::Input("f must be defined exactly on P".into()));
            }
            if let Some(x) = weights.keys().find(|x| !v.contains(*x) && !w.contains(*x)) {
                return Err(Error::Input(format!("weight given for {x}, which is not a vertex")));
            }
            GcdGraph::new(weights, v, w, e, f, g)
        };
        conv().map_err(serde::de::Error::custom)
    }
}
