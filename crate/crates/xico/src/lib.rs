//! Rank-based Azadkia-Chatterjee correlation coefficient.
//!
//! The dependence coefficient `xi_n` measures how strongly a response `Y`
//! depends on a covariate vector `X` in `R^d`. It is built from the directed
//! nearest-neighbor graph of the coordinate-wise rank vectors of the sample,
//! which makes it invariant under strictly increasing transforms of each
//! covariate. The original graph-based coefficient `xi_n_ac` (nearest
//! neighbors of the raw covariates) is provided for comparison.
//!
//! The crate also evaluates the asymptotic null variance `sigma_d^2` of
//! `sqrt(n) * xi_n` (exact special-function and quadrature work in
//! [`asymptotics`]), exposes an asymptotic independence test
//! ([`inference`]), and ships a Monte Carlo harness ([`sim`]) that
//! regenerates the published mean/RMSE/rejection-frequency tables at desk
//! scale.
//!
//! See the `examples/` directory for one runnable program per capability;
//! the `xico` binary exposes the same operations as subcommands.

pub mod asymptotics;
pub mod data;
pub mod estimator;
pub mod inference;
pub mod nng;
pub mod ranks;
pub mod sim;

pub use data::{load_csv, validate, DataError, Dataset};
pub use estimator::{xi_ac, xi_batch, xi_rank, Variant, XiEstimate};
pub use inference::{independence_test, normal_cdf, TestResult};
pub use nng::{build_nng, graph_functionals, GraphFunctionals, MetricSpace, NngGraph};
pub use ranks::{rank_matrix, response_ecdf, EmpiricalCdf, RankVectors};

use thiserror::Error;

/// Crate-level error uniting the per-module error types.
#[derive(Debug, Error)]
pub enum XicoError {
    #[error(transparent)]
    Data(#[from] data::DataError),
    #[error(transparent)]
    Nng(#[from] nng::NngError),
    #[error(transparent)]
    Asymptotics(#[from] asymptotics::AsymptoticsError),
    #[error(transparent)]
    Sim(#[from] sim::SimError),
}
