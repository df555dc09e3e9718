//! Exact measures of the unions
//! `M_alpha = U_n (n alpha - 1/2, n alpha + 1/2)` and its alpha-rough restriction `N_alpha`,
//! truncated at a horizon `T`, together with three independent overlap computations,
//! the main-term predictor for rational ratios and the second-moment lower bound.

mod moments;
mod overlap;
mod predictor;
mod sets;
mod union;

pub use moments::{check_no_diagonal, second_moment_lb, union_experiment, UnionReport};
pub use overlap::{overlap_direct, overlap_sj, overlap_sum_formula, sj_counts, OverlapReport, SjParams};
pub use predictor::{predictor, PredictorReport, PredictorSetup, PREDICTOR_R_LIMIT};
pub use sets::{build, build_m, build_n, measure_pt, Variant};
pub use union::IntervalUnion;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("precondition violated: {0}")]
    Domain(String),
    #[error("value too large for exact interval arithmetic: {0}")]
    Overflow(String),
    #[error(transparent)]
    Core(#[from] rational_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
