//! The dependence coefficient itself.
//!
//! `xi = sum_i { F_n(Y_i) ^ F_n(Y_{N(i)}) - G_n(Y_i)^2 } / sum_i G_n(Y_i)(1 - G_n(Y_i))`
//!
//! where `N(i)` is the nearest-neighbor index, built either on the
//! coordinate-wise rank vectors (`xi_rank`) or on the raw covariates
//! (`xi_ac`). Both sums are accumulated in integer arithmetic (ECDF
//! counts) with a single final division, so results are bit-stable
//! under any summation order.

use crate::data::{validate, DataError, Dataset};
use crate::nng::{build_nng, MetricSpace};
use crate::ranks::{rank_matrix, response_ecdf, EmpiricalCdf};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Which nearest-neighbor space produced the estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    RankAc,
    Ac,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::RankAc => write!(f, "rank_ac"),
            Variant::Ac => write!(f, "ac"),
        }
    }
}

/// A computed coefficient with its numerator/denominator diagnostics.
///
/// `q_n` and `p_n` are the per-sample means of the numerator and
/// denominator terms, so `xi = q_n / p_n` whenever `p_n > 0`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct XiEstimate {
    pub xi: f64,
    pub q_n: f64,
    pub p_n: f64,
    pub variant: Variant,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
}

/// Tie-break uniforms: `n` draws in `[0, 1)` from the ChaCha stream
/// `(seed, stream)`. Distinct streams never overlap, which is the whole
/// substream discipline used by [`xi_batch`] and the sim module.
pub fn tie_uniforms(seed: u64, stream: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..n).map(|_| rng.gen::<f64>()).collect()
}

/// Exact integer evaluation of the statistic given the response counts
/// and the neighbor map.
pub(crate) fn xi_from_counts(ecdf: &EmpiricalCdf, nn: &[usize]) -> (f64, f64, f64) {
    let n = ecdf.n() as i128;
    let mut num: i128 = 0;
    let mut den: i128 = 0;
    for (i, &j) in nn.iter().enumerate() {
        let fi = ecdf.f_count(i) as i128;
        let fj = ecdf.f_count(j) as i128;
        let gi = ecdf.g_count(i) as i128;
        num += n * fi.min(fj) - gi * gi;
        den += gi * (n - gi);
    }
    let n3 = (n * n * n) as f64;
    let xi = num as f64 / den as f64;
    (xi, num as f64 / n3, den as f64 / n3)
}

fn xi_impl(ds: &Dataset, seed: u64, stream: u64, variant: Variant) -> Result<XiEstimate, DataError> {
    // cheap revalidation so a degenerate response cannot reach the division
    let ds = validate(ds.clone())?;
    let n = ds.n();
    let d = ds.d();
    let ecdf = response_ecdf(ds.y());
    let draws = tie_uniforms(seed, stream, n);
    let graph = match variant {
        Variant::RankAc => {
            let pts = rank_matrix(&ds).points_scaled();
            build_nng(&pts, n, d, &draws, MetricSpace::Rank)
        }
        Variant::Ac => build_nng(ds.x_data(), n, d, &draws, MetricSpace::Raw),
    }
    .expect("graph preconditions hold for a validated dataset");
    let (xi, q_n, p_n) = xi_from_counts(&ecdf, &graph.nn);
    Ok(XiEstimate { xi, q_n, p_n, variant, n, d, seed })
}

/// The rank-based coefficient: nearest neighbors of the coordinate-wise
/// rank vectors, tie draws from `seed`. Deterministic given `(ds, seed)`.
pub fn xi_rank(ds: &Dataset, seed: u64) -> Result<XiEstimate, DataError> {
    xi_impl(ds, seed, 0, Variant::RankAc)
}

/// The original coefficient: nearest neighbors of the raw covariates.
pub fn xi_ac(ds: &Dataset, seed: u64) -> Result<XiEstimate, DataError> {
    xi_impl(ds, seed, 0, Variant::Ac)
}

/// Element-wise [`xi_rank`] over a sequence of datasets with independent
/// per-dataset tie-draw substreams `(seed, 0), (seed, 1), ...`.
/// Errors are collected per element; the output order matches the input.
pub fn xi_batch<I>(datasets: I, seed: u64) -> Vec<Result<XiEstimate, DataError>>
where
    I: IntoIterator<Item = Dataset>,
{
    datasets
        .into_iter()
        .enumerate()
        .map(|(k, ds)| xi_impl(&ds, seed, k as u64, Variant::RankAc))
        .collect()
}
