//! Monte Carlo tails of the origin cycle: the height tail P(h) ~ h^(-2 gamma)
//! and the diameter tail ~ n^(-gamma), with gamma = (5 - sqrt 17)/4.
//! Desk-scale estimates sit below the asymptotic exponent because the tail
//! carries slowly-decaying logarithmic corrections.
//!
//! ```bash
//! cargo run --release --example tail_exponents
//! ```

use cornerlab::mc::{estimate_diam_tail, estimate_p, TailParams};

fn main() {
    let samples = 4_000;
    let p = estimate_p(
        &TailParams {
            values: vec![1, 2, 4, 8, 16, 32, 64],
            samples,
            max_half: 1 << 13,
            bias: 0.5,
        },
        2024,
    );
    println!("height tail of the origin cycle ({samples} samples):");
    for pt in &p.points {
        println!("  P(height > {:>3}) = {:.4}", pt.x, pt.y);
    }
    println!(
        "fitted 2 gamma = {:.4} +- {:.4}  (asymptotic value {:.4}); censored draws: {}",
        p.exponent, p.exponent_stderr, p.target, p.extras["censored"]
    );

    let d = estimate_diam_tail(
        &TailParams {
            values: vec![4, 8, 16, 32, 64, 128, 256],
            samples,
            max_half: 1 << 13,
            bias: 0.5,
        },
        2025,
    );
    println!("\ndiameter tail ({samples} samples):");
    for (pt, psn) in d
        .points
        .iter()
        .zip(d.extras["p_sqrt_n"].as_array().unwrap())
    {
        println!(
            "  P(diam > {:>4}) = {:.4}   P sqrt(n) = {:.3}",
            pt.x,
            pt.y,
            psn.as_f64().unwrap()
        );
    }
    println!(
        "fitted gamma = {:.4} +- {:.4}  (asymptotic value {:.4})",
        d.exponent, d.exponent_stderr, d.target
    );
    println!(
        "truncated diameter means (diverging expectation): {:?}",
        d.extras["truncated_means"]
    );
}
