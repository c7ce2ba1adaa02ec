//! The scaling relation gamma + delta = 3/2: the total level-0 contour
//! length in a box of half-width N grows like N^(3/2), and the two cycle
//! exponents measured independently add up to it.
//!
//! ```bash
//! cargo run --release --example scaling_relation
//! ```

use cornerlab::mc::{
    estimate_length_by_diameter, estimate_level0_total, estimate_p, LengthByDiameterParams,
    TailParams,
};

fn main() -> cornerlab::Result<()> {
    let l0 = estimate_level0_total(&[32, 64, 128, 256], 60, 11)?;
    println!("total level-0 contour edges per box half-width:");
    for pt in &l0.points {
        println!("  N = {:>4}: {:>10.1} +- {:.1}", pt.x, pt.y, pt.stderr);
    }
    println!(
        "fitted exponent {:.4} +- {:.4} (target 3/2)\n",
        l0.exponent, l0.exponent_stderr
    );

    let p = estimate_p(
        &TailParams {
            values: vec![1, 2, 4, 8, 16, 32, 64],
            samples: 4_000,
            max_half: 1 << 13,
            bias: 0.5,
        },
        21,
    );
    let gamma_hat = p.exponent / 2.0;
    let d = estimate_length_by_diameter(
        &LengthByDiameterParams {
            h_max: 32,
            samples_per_h: 600,
            fit_lo: 8.0,
            fit_hi: 1024.0,
        },
        22,
    );
    println!("gamma from the height tail:     {:.4}", gamma_hat);
    println!("delta from length by diameter:  {:.4}", d.exponent);
    println!(
        "gamma + delta = {:.4}   (relation value 1.5)",
        gamma_hat + d.exponent
    );
    println!(
        "\nsecond-moment ratios E L^2 / (E L)^2 by height (conjectured bounded; reported only): {}",
        d.extras["second_moment_ratios"]
    );
    Ok(())
}
