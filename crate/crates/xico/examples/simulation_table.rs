//! One row group of the mean/RMSE/rejection-frequency study, showing the
//! scale-invariance contrast between the two estimators.
//!
//! Run with: cargo run --release --example simulation_table

use xico::sim::{table_study, SimConfig};

fn main() {
    // d = 2, n = 100, rho = 0.5: the covariate scalings alpha = 1, 10, 500
    // leave the rank-based columns untouched while degrading the raw one
    let cfg = SimConfig::new(2, 100, 0.5, vec![1.0, 10.0, 500.0], 500, 1);
    let report = table_study(&cfg).expect("study");
    print!("{}", report.to_text());
}
