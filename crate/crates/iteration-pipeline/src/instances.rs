//! Pipeline inputs and the bundled toy instances.

use crate::{Error, Result};
use gcd_graph::{default_toy_constants, toy_constants, ConstantsSet, Edge, GcdGraph, Vertex};
use primitive_sets::is_primitive_numerators;
use rational_core::{bracket, height, l_z, ratio, rat, serde_rational, BigRational};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

pub const INSTANCE_SCHEMA: &str = "pipeline-instance/1";

/// Toy values for theta, M and C1..C8 carried by an instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToyConstants {
    #[serde(with = "serde_rational")]
    pub theta: BigRational,
    #[serde(with = "serde_rational")]
    pub m: BigRational,
    #[serde(with = "serde_rational::vec")]
    pub c: Vec<BigRational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineInput {
    pub schema: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(rename = "R")]
    pub r: Vec<Vertex>,
    #[serde(rename = "S")]
    pub s: Vec<Vertex>,
    /// Absent or null means every admissible pair.
    #[serde(rename = "E", default)]
    pub e: Option<Vec<Edge>>,
    #[serde(with = "serde_rational")]
    pub x: BigRational,
    #[serde(with = "serde_rational")]
    pub y: BigRational,
    #[serde(with = "serde_rational")]
    pub z: BigRational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<ToyConstants>,
}

impl PipelineInput {
    pub fn from_json(s: &str) -> Result<Self> {
        let inp: Self = serde_json::from_str(s).map_err(|e| Error::Input(e.to_string()))?;
        if inp.schema != INSTANCE_SCHEMA {
            return Err(Error::Input(format!("unknown schema {:?}", inp.schema)));
        }
        Ok(inp)
    }

    /// The instance's own toy constants, or the default toy preset.
    pub fn toy_constants(&self) -> Result<ConstantsSet> {
        match &self.constants {
            None => Ok(default_toy_constants()),
            Some(t) => {
                let c: [BigRational; 8] =
                    t.c.clone().try_into().map_err(|_| Error::Input("constants.c must list C1..C8".into()))?;
                Ok(toy_constants(&t.theta, &t.m, c)?)
            }
        }
    }

    /// (rho, sigma) is admissible when y < [rho, sigma] <= 2y and L(rho/sigma; z) > 1.
    pub fn admissible(&self, rho: &Vertex, sigma: &Vertex) -> Result<bool> {
        let b = bracket(rho, sigma).to_big_rational();
        Ok(b > self.y && b <= &self.y * rat(2) && l_z(&ratio(rho, sigma), &self.z)? > rat(1))
    }

    /// Checks the domain and builds the input graph with weights 1/alpha.
    pub fn graph(&self) -> Result<GcdGraph> {
        if self.x < rat(3) || self.y < rat(1) || self.z < rat(1) {
            return Err(Error::Input("need x >= 3, y >= 1 and z >= 1".into()));
        }
        for (name, set) in [("R", &self.r), ("S", &self.s)] {
            if set.is_empty() {
                return Err(Error::Input(format!("{name} is empty")));
            }
            let distinct: BTreeSet<&Vertex> = set.iter().collect();
            if distinct.len() != set.len() {
                return Err(Error::Input(format!("{name} has repeated elements")));
            }
            for a in set {
                if a.num() < a.den() {
                    return Err(Error::Input(format!("{a} in {name} is below 1")));
                }
                if BigRational::from_integer(height(a).into()) > self.x {
                    return Err(Error::Input(format!("{a} in {name} has height above x")));
                }
            }
            if !is_primitive_numerators(set) {
                return Err(Error::Input(format!("the numerators of {name} are not primitive")));
            }
        }
        let e: Vec<Edge> = match &self.e {
            Some(e) => {
                for (a, b) in e {
                    if !self.r.contains(a) || !self.s.contains(b) {
                        return Err(Error::Input(format!("edge ({a}, {b}) is not in R x S")));
                    }
                    if !self.admissible(a, b)? {
                        return Err(Error::Input(format!("edge ({a}, {b}) is not admissible")));
                    }
                }
                e.clone()
            }
            None => {
                let mut all = Vec::new();
                for a in &self.r {
                    for b in &self.s {
                        if self.admissible(a, b)? {
                            all.push((a.clone(), b.clone()));
                        }
                    }
                }
                all
            }
        };
        Ok(GcdGraph::bipartite(self.r.clone(), self.s.clone(), e)?)
    }
}

const BUNDLED: [(&str, &str); 6] = [
    ("shared-seven", include_str!("../instances/shared-seven.json")),
    ("small-two", include_str!("../instances/small-two.json")),
    ("gcd-thirteen", include_str!("../instances/gcd-thirteen.json")),
    ("mixed-seven-thirteen", include_str!("../instances/mixed-seven-thirteen.json")),
    ("remove-l", include_str!("../instances/remove-l.json")),
    ("wide", include_str!("../instances/wide.json")),
];

/// The toy instances shipped with the crate.
pub fn bundled_instances() -> Vec<PipelineInput> {
    BUNDLED.iter().map(|(_, s)| PipelineInput::from_json(s).expect("bundled instance parses")).collect()
}

pub fn bundled_instance(name: &str) -> Option<PipelineInput> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, s)| PipelineInput::from_json(s).expect("bundled instance parses"))
}
