//! Maximal subgraphs of weighted bipartite graphs, by exhaustive enumeration or
//! greedy deletion, and executable checks of the structural lemmas that
//! maximality implies.

pub mod lemmas;
pub mod maximal;

pub use lemmas::{
    check_connectivity, common_neighbor, lemma_suite, small_set_edges, small_set_sweep, weight_monotonicity,
    CommonNeighborReport, ConnectivityReport, LemmaSuiteReport, MonotonicityReport, SmallSetReport,
};
pub use maximal::{
    certify_maximal, maximal_subgraph, maximal_subgraph_with, replay, Certificate, MaximalSearchResult, Method,
    ReplayReport, Side, DEFAULT_EXHAUSTIVE_CAP,
};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Limit(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Graph(#[from] gcd_graph::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
