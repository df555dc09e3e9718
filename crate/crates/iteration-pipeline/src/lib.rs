//! Executable forms of the GCD graph iteration steps and the reduction
//! pipeline that chains them.
//!
//! Every step returns the graph it selects together with a [`StepRecord`]
//! listing the checks made on it. Checks come in three kinds: identities and
//! structural facts, which must always hold, and constant-dependent bounds,
//! which are reported as held or violated. A [`PipelineTrace`] can be
//! re-verified from its serialized form with [`verify_trace`].

pub mod assertion;
pub mod dichotomy;
pub mod extraction;
pub mod instances;
pub mod key_prop;
pub mod pipeline;
pub mod steps;

pub use assertion::{Assertion, Kind, Status};
pub use dichotomy::{main_dichotomy, maximal_of, unbalanced_dichotomy, Branch, DichotomyOutcome, Orientation, Witness};
pub use extraction::{extract, Extraction, ExtractionInput};
pub use instances::{bundled_instance, bundled_instances, PipelineInput, ToyConstants, INSTANCE_SCHEMA};
pub use key_prop::{key_prop_quantity, KeyPropReport};
pub use pipeline::{run_pipeline, verify_trace, FinalBound, PipelineTrace, Stage, StageFlags, VerifyReport, TRACE_SCHEMA};
pub use steps::{
    check_step, maximal_step, prop_iter1, prop_iter2, prop_small_primes, prop_structure, small_prime_step, structured_step, Op,
    Progress, Sign, Step, StepRecord, WeightRow,
};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dichotomy failed under strict constants: {0}")]
    Dichotomy(String),
    #[error(transparent)]
    Graph(#[from] gcd_graph::Error),
    #[error(transparent)]
    Search(#[from] graph_search::Error),
    #[error(transparent)]
    Core(#[from] rational_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
