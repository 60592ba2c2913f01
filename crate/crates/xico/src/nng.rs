//! Directed nearest-neighbor graph with exact tie handling.
//!
//! Each point gets one outgoing edge to its Euclidean nearest neighbor
//! among the other points. When several candidates attain the minimum
//! distance exactly, one pre-drawn uniform per point selects uniformly
//! from the candidate list sorted by point index, so the result is
//! deterministic given `(points, tie_draws)` and independent of
//! traversal or scheduling order.
//!
//! Tie detection compares squared distances. For rank points the
//! coordinates are integers, so `f64` squared distances are exact and
//! ties are detected exactly; for raw coordinates equality of `f64`
//! squared distances is used as-is (duplicated points are the realistic
//! tie source there).

use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NngError {
    #[error("points buffer length {len} is not n * d = {n} * {d}")]
    DimensionMismatch { len: usize, n: usize, d: usize },
    #[error("need at least 2 points, got {0}")]
    FewerThanTwoPoints(usize),
    #[error("tie_draws length {got} != point count {n}")]
    TieDrawsLength { got: usize, n: usize },
    #[error("tie draw {value} at index {index} is outside [0, 1)")]
    TieDrawRange { index: usize, value: f64 },
}

/// Which space the graph was built in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricSpace {
    /// Coordinate-wise rank vectors (scale-invariant graph).
    Rank,
    /// Raw covariates (the original graph-based coefficient).
    Raw,
}

/// The directed nearest-neighbor map `N(i)` plus the tie bookkeeping.
#[derive(Debug, Clone)]
pub struct NngGraph {
    /// `nn[i]` is the 0-based index of the nearest neighbor of point `i`.
    pub nn: Vec<usize>,
    /// The uniform draws used for tie-breaking.
    pub tie_draws: Vec<f64>,
    /// Size of the exact argmin candidate set for each point.
    pub tie_counts: Vec<usize>,
    pub metric_space: MetricSpace,
}

/// Mutual-pair and shared-neighbor counts of a graph.
///
/// `t_sum` counts ordered pairs `(i, j)` with `N(i) = j` and `N(j) = i`
/// (each mutual pair contributes 2). `c_sum` counts ordered pairs of
/// distinct sources `(i, j)` with `N(i) = N(j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphFunctionals {
    pub t_sum: u64,
    pub c_sum: u64,
    pub n: usize,
}

const BRUTE_FORCE_MAX_D: usize = 16;
const PARALLEL_MIN_N: usize = 4096;

struct KdTree<'a> {
    data: &'a [f64],
    d: usize,
    /// Point indices arranged so that every subrange's midpoint is the
    /// median along its splitting axis (axis = depth mod d).
    order: Vec<u32>,
}

impl<'a> KdTree<'a> {
    fn build(data: &'a [f64], n: usize, d: usize) -> Self {
        let mut order: Vec<u32> = (0..n as u32).collect();
        let mut stack: Vec<(usize, usize, usize)> = vec![(0, n, 0)];
        while let Some((lo, hi, axis)) = stack.pop() {
            if hi - lo <= 1 {
                continue;
            }
            let mid = (lo + hi) / 2;
            order[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| {
                data[a as usize * d + axis]
                    .partial_cmp(&data[b as usize * d + axis])
                    .unwrap()
            });
            let next = (axis + 1) % d;
            stack.push((lo, mid, next));
            stack.push((mid + 1, hi, next));
        }
        KdTree { data, d, order }
    }

    /// Exact nearest-neighbor query excluding `skip`, returning the full
    /// argmin candidate set (unsorted) and the squared distance.
    fn query(&self, q: &[f64], skip: usize, ties: &mut Vec<usize>) -> f64 {
        ties.clear();
        let mut best = f64::INFINITY;
        self.search(0, self.order.len(), 0, q, skip, &mut best, ties);
        best
    }

    fn search(
        &self,
        lo: usize,
        hi: usize,
        axis: usize,
        q: &[f64],
        skip: usize,
        best: &mut f64,
        ties: &mut Vec<usize>,
    ) {
        if lo >= hi {
            return;
        }
        let mid = (lo + hi) / 2;
        let p = self.order[mid] as usize;
        if p != skip {
            let d2 = sq_dist(q, &self.data[p * self.d..(p + 1) * self.d]);
            if d2 < *best {
                *best = d2;
                ties.clear();
                ties.push(p);
            } else if d2 == *best {
                ties.push(p);
            }
        }
        if hi - lo == 1 {
            return;
        }
        let diff = q[axis] - self.data[p * self.d + axis];
        let next = (axis + 1) % self.d;
        let (near, far) = if diff < 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(near.0, near.1, next, q, skip, best, ties);
        // ties on the splitting plane must still be found, so prune
        // only when the plane is strictly farther than the current best
        if diff * diff <= *best {
            self.search(far.0, far.1, next, q, skip, best, ties);
        }
    }
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let t = x - y;
        s += t * t;
    }
    s
}

fn brute_candidates(data: &[f64], n: usize, d: usize, i: usize, ties: &mut Vec<usize>) {
    ties.clear();
    let q = &data[i * d..(i + 1) * d];
    let mut best = f64::INFINITY;
    for k in 0..n {
        if k == i {
            continue;
        }
        let d2 = sq_dist(q, &data[k * d..(k + 1) * d]);
        if d2 < best {
            best = d2;
            ties.clear();
            ties.push(k);
        } else if d2 == best {
            ties.push(k);
        }
    }
}

fn pick(ties: &mut Vec<usize>, u: f64) -> (usize, usize) {
    let m = ties.len();
    debug_assert!(m >= 1);
    if m == 1 {
        return (ties[0], 1);
    }
    ties.sort_unstable();
    let k = ((u * m as f64).floor() as usize).min(m - 1);
    (ties[k], m)
}

/// Builds the directed nearest-neighbor graph of `n` points in `R^d`
/// (row-major buffer), with the tie rule described at module level.
pub fn build_nng(
    data: &[f64],
    n: usize,
    d: usize,
    tie_draws: &[f64],
    metric_space: MetricSpace,
) -> Result<NngGraph, NngError> {
    if n < 2 {
        return Err(NngError::FewerThanTwoPoints(n));
    }
    if data.len() != n * d || d == 0 {
        return Err(NngError::DimensionMismatch { len: data.len(), n, d });
    }
    if tie_draws.len() != n {
        return Err(NngError::TieDrawsLength { got: tie_draws.len(), n });
    }
    for (i, &u) in tie_draws.iter().enumerate() {
        if !(0.0..1.0).contains(&u) {
            return Err(NngError::TieDrawRange { index: i, value: u });
        }
    }

    let use_brute = d > BRUTE_FORCE_MAX_D || n <= 64;
    let tree = if use_brute { None } else { Some(KdTree::build(data, n, d)) };

    let one = |i: usize, ties: &mut Vec<usize>| -> (usize, usize) {
        match &tree {
            Some(t) => {
                t.query(&data[i * d..(i + 1) * d], i, ties);
            }
            None => brute_candidates(data, n, d, i, ties),
        }
        pick(ties, tie_draws[i])
    };

    let results: Vec<(usize, usize)> = if n >= PARALLEL_MIN_N {
        (0..n)
            .into_par_iter()
            .map_init(Vec::new, |ties, i| one(i, ties))
            .collect()
    } else {
        let mut ties = Vec::new();
        (0..n).map(|i| one(i, &mut ties)).collect()
    };

    let mut nn = Vec::with_capacity(n);
    let mut tie_counts = Vec::with_capacity(n);
    for (j, m) in results {
        nn.push(j);
        tie_counts.push(m);
    }
    Ok(NngGraph { nn, tie_draws: tie_draws.to_vec(), tie_counts, metric_space })
}

/// Exact mutual-pair and shared-neighbor counts.
pub fn graph_functionals(g: &NngGraph) -> GraphFunctionals {
    let n = g.nn.len();
    let t_sum = (0..n).filter(|&i| g.nn[g.nn[i]] == i).count() as u64;
    let mut indeg = vec![0u64; n];
    for &j in &g.nn {
        indeg[j] += 1;
    }
    let c_sum: u64 = indeg.iter().map(|&k| k * k.saturating_sub(1)).sum();
    GraphFunctionals { t_sum, c_sum, n }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn zeros(n: usize) -> Vec<f64> {
        vec![0.0; n]
    }

    #[test]
    fn two_points() {
        let g = build_nng(&[0.0, 5.0], 2, 1, &zeros(2), MetricSpace::Raw).unwrap();
        assert_eq!(g.nn, vec![1, 0]);
        assert_eq!(g.tie_counts, vec![1, 1]);
    }

    #[test]
    fn three_points_unique_minimizers() {
        let g = build_nng(&[0.0, 1.0, 3.0], 3, 1, &zeros(3), MetricSpace::Raw).unwrap();
        assert_eq!(g.nn, vec![1, 0, 1]);
    }

    #[test]
    fn tie_rule_selects_by_floor_of_u_times_m() {
        // middle point is equidistant from both ends; U = 0.7 picks the
        // second candidate of the index-sorted tie set {0, 2}
        let g = build_nng(&[0.0, 1.0, 2.0], 3, 1, &[0.0, 0.7, 0.0], MetricSpace::Raw).unwrap();
        assert_eq!(g.nn[1], 2);
        assert_eq!(g.tie_counts[1], 2);
        let g = build_nng(&[0.0, 1.0, 2.0], 3, 1, &[0.0, 0.3, 0.0], MetricSpace::Raw).unwrap();
        assert_eq!(g.nn[1], 0);
    }

    #[test]
    fn duplicates_are_nearest() {
        let data = vec![1.0, 1.0, 1.0, 1.0, 9.0, 9.0];
        let g = build_nng(&data, 3, 2, &zeros(3), MetricSpace::Raw).unwrap();
        assert_eq!(g.nn[0], 1);
        assert_eq!(g.nn[1], 0);
        assert_eq!(g.nn[2], 0); // ties {0, 1}, U = 0 -> lowest index
        assert_eq!(g.tie_counts[2], 2);
    }

    #[test]
    fn functionals_pair() {
        let g = build_nng(&[0.0, 5.0], 2, 1, &zeros(2), MetricSpace::Raw).unwrap();
        let f = graph_functionals(&g);
        assert_eq!((f.t_sum, f.c_sum), (2, 0));
    }

    #[test]
    fn functionals_three_points() {
        let g = build_nng(&[0.0, 1.0, 3.0], 3, 1, &zeros(3), MetricSpace::Raw).unwrap();
        let f = graph_functionals(&g);
        // nn = (1, 0, 1): one mutual pair, and sources {0, 2} share neighbor 1
        assert_eq!((f.t_sum, f.c_sum), (2, 2));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            build_nng(&[0.0], 1, 1, &zeros(1), MetricSpace::Raw),
            Err(NngError::FewerThanTwoPoints(1))
        ));
        assert!(matches!(
            build_nng(&[0.0, 1.0, 2.0], 2, 2, &zeros(2), MetricSpace::Raw),
            Err(NngError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            build_nng(&[0.0, 1.0], 2, 1, &[0.0, 1.0], MetricSpace::Raw),
            Err(NngError::TieDrawRange { index: 1, .. })
        ));
    }

    /// Brute-force oracle returning the full sorted tie set per point.
    fn brute_tie_sets(data: &[f64], n: usize, d: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut ties = Vec::new();
            brute_candidates(data, n, d, i, &mut ties);
            ties.sort_unstable();
            out.push(ties);
        }
        out
    }

    #[test]
    fn kd_tree_matches_brute_force_including_tie_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for trial in 0..60 {
            let d = 1 + trial % 6;
            let n = 65 + rng.gen_range(0..235); // force the kd path
            // integer grid coordinates produce plenty of exact ties
            let data: Vec<f64> =
                (0..n * d).map(|_| rng.gen_range(0..12) as f64).collect();
            let tree = KdTree::build(&data, n, d);
            let oracle = brute_tie_sets(&data, n, d);
            let mut ties = Vec::new();
            for i in 0..n {
                tree.query(&data[i * d..(i + 1) * d], i, &mut ties);
                ties.sort_unstable();
                assert_eq!(ties, oracle[i], "trial {trial}, point {i}");
            }
        }
    }

    #[test]
    fn out_degree_one_in_degree_sums_to_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 500;
        let d = 3;
        let data: Vec<f64> = (0..n * d).map(|_| rng.gen::<f64>()).collect();
        let draws: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let g = build_nng(&data, n, d, &draws, MetricSpace::Raw).unwrap();
        assert_eq!(g.nn.len(), n);
        assert!(g.nn.iter().enumerate().all(|(i, &j)| i != j && j < n));
        let mut indeg = vec![0usize; n];
        for &j in &g.nn {
            indeg[j] += 1;
        }
        assert_eq!(indeg.iter().sum::<usize>(), n);
    }

    #[test]
    fn d1_exact_finite_n_laws_by_monte_carlo() {
        // rank NNG of continuous d=1 data, n > 3: E[c_sum/n] = 1/2 exactly
        // and E[t_sum/n] = (n+1)/(2n): boundary pairs (1,2), (n-1,n) are
        // mutual with probability 1/2, the n-3 interior pairs with 1/4, so
        // E[t_sum] = 2 (2/2 + (n-3)/4) = (n+1)/2
        let n = 30;
        let reps = 20_000;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (mut tm, mut cm) = (0.0f64, 0.0f64);
        let (mut t2, mut c2) = (0.0f64, 0.0f64);
        for _ in 0..reps {
            let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let ds = crate::data::Dataset::from_parts(
                raw,
                (0..n).map(|i| i as f64).collect(),
                1,
            )
            .unwrap();
            let pts = crate::ranks::rank_matrix(&ds).points_scaled();
            let draws: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let g = build_nng(&pts, n, 1, &draws, MetricSpace::Rank).unwrap();
            let f = graph_functionals(&g);
            let (t, c) = (f.t_sum as f64 / n as f64, f.c_sum as f64 / n as f64);
            tm += t;
            cm += c;
            t2 += t * t;
            c2 += c * c;
        }
        let m = reps as f64;
        let (tm, cm) = (tm / m, cm / m);
        let t_se = ((t2 / m - tm * tm) / m).sqrt();
        let c_se = ((c2 / m - cm * cm) / m).sqrt();
        let t_exact = (n as f64 + 1.0) / (2.0 * n as f64);
        assert!(
            (tm - t_exact).abs() < 3.0 * t_se,
            "t mean {tm} vs exact {t_exact} (se {t_se})"
        );
        assert!((cm - 0.5).abs() < 3.0 * c_se, "c mean {cm} vs 1/2 (se {c_se})");
    }

    #[test]
    fn rank_graph_ignores_column_scaling_end_to_end() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 120;
        let d = 2;
        let raw: Vec<f64> = (0..n * d).map(|_| rng.gen::<f64>()).collect();
        let mut scaled = raw.clone();
        for i in 0..n {
            scaled[i * d] *= 1000.0;
        }
        let y: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let draws: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let p1 = crate::ranks::rank_matrix(
            &crate::data::Dataset::from_parts(raw, y.clone(), d).unwrap(),
        )
        .points_scaled();
        let p2 = crate::ranks::rank_matrix(
            &crate::data::Dataset::from_parts(scaled, y, d).unwrap(),
        )
        .points_scaled();
        assert_eq!(p1, p2);
        let g1 = build_nng(&p1, n, d, &draws, MetricSpace::Rank).unwrap();
        let g2 = build_nng(&p2, n, d, &draws, MetricSpace::Rank).unwrap();
        assert_eq!(g1.nn, g2.nn);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn nng_matches_brute_force_scan(
            seed in 0u64..10_000,
            n in 2usize..300,
            d in 1usize..7,
            dup in proptest::bool::ANY,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut data: Vec<f64> = (0..n * d)
                .map(|_| if dup { rng.gen_range(0..6) as f64 } else { rng.gen() })
                .collect();
            if dup && n >= 4 {
                // exact duplicated rows
                for j in 0..d { data[j] = data[d + j]; }
            }
            let draws: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
            let g = build_nng(&data, n, d, &draws, MetricSpace::Raw).unwrap();
            let oracle = brute_tie_sets(&data, n, d);
            for i in 0..n {
                let m = oracle[i].len();
                let k = ((draws[i] * m as f64).floor() as usize).min(m - 1);
                prop_assert_eq!(g.nn[i], oracle[i][k]);
                prop_assert_eq!(g.tie_counts[i], m);
            }
        }
    }
}
