//! Crossing probabilities and the torus variant. A 2-regular configuration
//! can never cross a square both left-right and up-down; the two
//! probabilities are equal and drift toward 1/2. On the torus, a doubly
//! periodic configuration carries a noncontractible cycle unless both
//! period walks balance.
//!
//! ```bash
//! cargo run --release --example crossing_and_torus
//! ```

use cornerlab::mc::{estimate_crossing, estimate_torus};

fn main() {
    println!("left-right crossing probability of n x n windows:");
    for (n, samples) in [
        (16, 4000u64),
        (32, 4000),
        (64, 2000),
        (128, 1000),
        (256, 500),
    ] {
        let (r, v) = estimate_crossing(n, samples, 9, 0.5);
        assert_eq!(v.both_crossings, 0);
        println!(
            "  n = {:>3}: LR = {:.4} +- {:.4}   UD = {:.4}   (both ways: {})",
            n,
            r.estimate,
            r.stderr,
            r.extras["p_up_down"].as_f64().unwrap(),
            v.both_crossings,
        );
    }

    println!("\nnoncontractible cycles on the 2n x 2n torus:");
    for n in [1i64, 2, 4, 8, 16] {
        let r = estimate_torus(n, 3000, 10);
        println!(
            "  n = {:>2}: P = {:.4}   avoidance = {:.4} <= balance cap {:.4}",
            n,
            r.estimate,
            r.extras["avoidance_fraction"].as_f64().unwrap(),
            r.extras["balance_probability"].as_f64().unwrap(),
        );
    }
}
