//! Weighted bipartite GCD graphs on reduced rationals: measures, qualities,
//! structural predicates and the constants used by the iteration.

pub mod constants;
pub mod graph;
pub mod quality;
pub mod sample;
pub mod structure;
pub mod util;

pub use constants::{compute_constants, default_toy_constants, paper_constants, toy_constants, Constant, ConstantsMode, ConstantsSet};
pub use graph::{default_weight, Edge, GcdGraph, Vertex};
pub use quality::{edge_density, quality, quality_variation, theta_weight, QualityValue, VariationReport};
pub use structure::{
    exactness, is_structured, r_of, r_plus_minus, special, split_r, subgraph_relation, validate, ExactnessFlags,
    SplitR, StructureReport, SubgraphFlags, ValidationReport, Violation,
};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Core(#[from] rational_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
