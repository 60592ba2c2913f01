//! Empirical variance of sqrt(n) * xi_n under independence, compared to
//! the theoretical sigma_d^2.
//!
//! Run with: cargo run --release --example null_variance

use xico::asymptotics::sigma_sq;
use xico::sim::null_variance_study;

fn main() {
    let (n, reps) = (100, 3000);
    println!("n = {n}, {reps} replications");
    println!("{:>3} {:>12} {:>12} {:>8}", "d", "empirical", "theoretical", "stderr");
    for d in [1usize, 2, 3, 5] {
        let (var, se) = null_variance_study(d, n, reps, 7).expect("study");
        let theory = sigma_sq(d).expect("constants").sigma_sq;
        println!("{d:>3} {var:>12.3} {theory:>12.3} {se:>8.3}");
    }
}
