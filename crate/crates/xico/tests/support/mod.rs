//! Independent reference implementations for the acceptance suite.
//!
//! Everything here is written from the definitions with O(n^2) pairwise
//! counting and shares no code with the library: rank vectors by direct
//! counting, nearest neighbors by exhaustive scan with exact tie sets,
//! and the statistic accumulated in integer arithmetic.

/// `#{k : x_k <= x_i}` for every i and coordinate, by direct counting.
pub fn oracle_ranks(x: &[f64], n: usize, d: usize) -> Vec<i64> {
    let mut r = vec![0i64; n * d];
    for j in 0..d {
        for i in 0..n {
            r[i * d + j] = (0..n).filter(|&k| x[k * d + j] <= x[i * d + j]).count() as i64;
        }
    }
    r
}

/// Exhaustive nearest-neighbor scan over integer-valued points with the
/// shared tie rule: collect the full argmin set (ascending indices),
/// pick entry `floor(u * m)`.
pub fn oracle_nn_integer(pts: &[i64], n: usize, d: usize, draws: &[f64]) -> Vec<usize> {
    let mut nn = Vec::with_capacity(n);
    for i in 0..n {
        let mut best = i64::MAX;
        let mut ties: Vec<usize> = Vec::new();
        for k in 0..n {
            if k == i {
                continue;
            }
            let mut dist = 0i64;
            for j in 0..d {
                let diff = pts[i * d + j] - pts[k * d + j];
                dist += diff * diff;
            }
            if dist < best {
                best = dist;
                ties.clear();
                ties.push(k);
            } else if dist == best {
                ties.push(k);
            }
        }
        let m = ties.len();
        let pick = ((draws[i] * m as f64).floor() as usize).min(m - 1);
        nn.push(ties[pick]);
    }
    nn
}

/// Same scan over raw f64 coordinates (exact equality ties).
pub fn oracle_nn_raw(pts: &[f64], n: usize, d: usize, draws: &[f64]) -> Vec<usize> {
    let mut nn = Vec::with_capacity(n);
    for i in 0..n {
        let mut best = f64::INFINITY;
        let mut ties: Vec<usize> = Vec::new();
        for k in 0..n {
            if k == i {
                continue;
            }
            let mut dist = 0.0;
            for j in 0..d {
                let diff = pts[i * d + j] - pts[k * d + j];
                dist += diff * diff;
            }
            if dist < best {
                best = dist;
                ties.clear();
                ties.push(k);
            } else if dist == best {
                ties.push(k);
            }
        }
        let m = ties.len();
        let pick = ((draws[i] * m as f64).floor() as usize).min(m - 1);
        nn.push(ties[pick]);
    }
    nn
}

/// The full statistic from scratch: counting ECDFs, the requested NN
/// scan, and exact integer accumulation of numerator and denominator.
pub fn oracle_xi(x: &[f64], y: &[f64], n: usize, d: usize, draws: &[f64], rank_space: bool) -> f64 {
    let nn = if rank_space {
        oracle_nn_integer(&oracle_ranks(x, n, d), n, d, draws)
    } else {
        oracle_nn_raw(x, n, d, draws)
    };
    let f: Vec<i128> = (0..n)
        .map(|i| (0..n).filter(|&k| y[k] <= y[i]).count() as i128)
        .collect();
    let g: Vec<i128> = (0..n)
        .map(|i| (0..n).filter(|&k| y[k] >= y[i]).count() as i128)
        .collect();
    let nc = n as i128;
    let mut num = 0i128;
    let mut den = 0i128;
    for i in 0..n {
        num += nc * f[i].min(f[nn[i]]) - g[i] * g[i];
        den += g[i] * (nc - g[i]);
    }
    num as f64 / den as f64
}
