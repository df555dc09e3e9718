//! Primitive sets of naturals and of rational numerators, the classical
//! reciprocal sums over them, a weighted Behrend-type sum with its
//! comparison shape, and the level construction that extracts a
//! well-separated subfamily from a 1-spaced rational family.

mod aprime;
mod behrend;
pub mod corpus;
mod family;
mod primitive;
mod sums;
mod util;

pub use aprime::{
    check_aprime_lemma, construct_aprime, construct_aprime_with, AprimeLevel, AprimeOptions,
    AprimeTrace, LemmaReport, QValue, LEMMA_A_LOWER, LEMMA_A_UPPER,
};
pub use behrend::{
    count_antichains, corollary_sum, behrend_weighted_sum, sperner_max_antichain, BehrendReport,
};
pub use family::{FamilyElement, RationalFamily};
pub use primitive::{is_primitive, is_primitive_numerators, PrimitiveSet};
pub use sums::{aks_window_sum, behrend_log_sum, erdos_sum, WindowSum};
pub use util::kappa_f64;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error(transparent)]
    Core(#[from] rational_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
