//! Empirical CDF images of the sample.
//!
//! Coordinate-wise ranks follow the right-closed indicator convention:
//! `F_{n,j}(X_i) = (1/n) #{k : X_{k,j} <= X_{i,j}}`, so tied raw values
//! share the maximum rank of their tie group. All counting is done in
//! integers; the single division by `n` is deferred to the accessors.

use crate::data::Dataset;

/// Coordinate-wise rank counts: entry `(i, j)` holds
/// `#{k : X_{k,j} <= X_{i,j}}`, an integer in `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankVectors {
    counts: Vec<u32>,
    n: usize,
    d: usize,
}

impl RankVectors {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Integer count for entry `(i, j)`.
    pub fn count(&self, i: usize, j: usize) -> u32 {
        self.counts[i * self.d + j]
    }

    /// `F_{n,j}(X_i)` as a real number in `[1/n, 1]`.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.count(i, j) as f64 / self.n as f64
    }

    /// Rank vectors as row-major `f64` points scaled by `n` (integer-valued
    /// coordinates). Squared Euclidean distances between these points are
    /// exact in `f64`, which makes nearest-neighbor tie detection exact.
    pub fn points_scaled(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }
}

/// Response ECDF and survival counts: `f[i] = #{k : Y_k <= Y_i}`,
/// `g[i] = #{k : Y_k >= Y_i}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalCdf {
    f: Vec<u32>,
    g: Vec<u32>,
    n: usize,
}

impl EmpiricalCdf {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn f_count(&self, i: usize) -> u32 {
        self.f[i]
    }

    pub fn g_count(&self, i: usize) -> u32 {
        self.g[i]
    }

    /// `F_n(Y_i)`.
    pub fn f_value(&self, i: usize) -> f64 {
        self.f[i] as f64 / self.n as f64
    }

    /// `G_n(Y_i)`.
    pub fn g_value(&self, i: usize) -> f64 {
        self.g[i] as f64 / self.n as f64
    }
}

/// Computes the coordinate-wise rank counts by per-column sort plus
/// tie-group scan, O(n log n) per column.
pub fn rank_matrix(ds: &Dataset) -> RankVectors {
    let n = ds.n();
    let d = ds.d();
    let mut counts = vec![0u32; n * d];
    let mut order: Vec<u32> = (0..n as u32).collect();
    for j in 0..d {
        order.sort_unstable_by(|&a, &b| {
            ds.x(a as usize, j).partial_cmp(&ds.x(b as usize, j)).unwrap()
        });
        // assign the maximum rank of each tie group
        let mut start = 0;
        while start < n {
            let v = ds.x(order[start] as usize, j);
            let mut end = start + 1;
            while end < n && ds.x(order[end] as usize, j) == v {
                end += 1;
            }
            for &i in &order[start..end] {
                counts[i as usize * d + j] = end as u32;
            }
            start = end;
        }
    }
    RankVectors { counts, n, d }
}

/// Computes `F_n(Y_i)` and `G_n(Y_i)` by sorting once and binary-searching
/// the tie-group boundaries.
pub fn response_ecdf(y: &[f64]) -> EmpiricalCdf {
    let n = y.len();
    assert!(n >= 2, "response_ecdf needs at least 2 values");
    let mut sorted = y.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let mut f = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    for &v in y {
        let le = sorted.partition_point(|&s| s <= v);
        let lt = sorted.partition_point(|&s| s < v);
        f.push(le as u32);
        g.push((n - lt) as u32);
    }
    EmpiricalCdf { f, g, n }
}
