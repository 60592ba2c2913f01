//! Convergence of the nearest-neighbor-graph functionals t_sum/n (mutual
//! pairs) and c_sum/n (shared neighbors) toward their limits.
//!
//! Run with: cargo run --release --example graph_functionals

use xico::sim::functional_convergence_study;

fn main() {
    println!("d = 1 (exact finite-n laws available):");
    for n in [10usize, 30, 100] {
        let r = functional_convergence_study(1, n, 4000, 1).expect("study");
        println!(
            "  n = {n:>4}: t/n = {:.4} (exact {:.4}), c/n = {:.4} (exact {:.4})",
            r.t_mean,
            r.t_exact.unwrap(),
            r.c_mean,
            r.c_exact.unwrap()
        );
    }

    println!("d = 3 (limits t/n -> q_3, c/n -> o_3):");
    for n in [50usize, 200, 1000] {
        let r = functional_convergence_study(3, n, 400, 2).expect("study");
        println!(
            "  n = {n:>4}: t/n = {:.4} (limit {:.4}), c/n = {:.4} (limit {:.4})",
            r.t_mean,
            r.t_limit.unwrap(),
            r.c_mean,
            r.c_limit.unwrap()
        );
    }
}
