//! Table of the asymptotic null-variance constants sigma_d^2 with their
//! q_d and o_d components, d = 1..10.
//!
//! Run with: cargo run --release --example variance_constants

use xico::asymptotics::sigma_sq;

fn main() {
    println!("{:>3} {:>10} {:>10} {:>10}  note", "d", "q_d", "o_d", "sigma_d^2");
    for d in 1..=10 {
        let c = sigma_sq(d).expect("constants");
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.6}"));
        let note = if c.conjectured { "(limit law conjectured)" } else { "" };
        println!(
            "{:>3} {:>10} {:>10} {:>10.6}  {}",
            d,
            opt(c.q),
            opt(c.o),
            c.sigma_sq,
            note
        );
    }
}
