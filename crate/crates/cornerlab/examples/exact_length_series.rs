//! The exact recursion for the expected cycle length L(h) and the growth
//! exponent it converges to, 2 delta = (1 + sqrt 17) / 2.
//!
//! ```bash
//! cargo run --release --example exact_length_series
//! ```

use cornerlab::series::{fit_exponent, indicial_poly, indicial_roots, l_sequence, two_delta};

fn main() -> cornerlab::Result<()> {
    let series = l_sequence(512, 16)?;
    println!("first values (exact rationals up to the cutoff):");
    for h in 1..=8 {
        let exact = series
            .l_exact(h)
            .map(|r| format!("{}/{}", r.numer(), r.denom()))
            .unwrap_or_default();
        println!("  L({h}) = {:>12.6}  = {exact}", series.l(h));
    }
    assert_eq!(series.l(1), 4.0);
    assert!(series.is_nondecreasing());

    let fit = fit_exponent(&series, 8, 512)?;
    println!("\nlocal log-log slopes over dyadic steps:");
    for (h, s) in &fit.slopes {
        println!("  slope at h = {h:>4}: {s:.5}");
    }
    println!("raw slope:          {:.5}", fit.raw);
    println!("extrapolated:       {:.5}", fit.extrapolated);
    println!("limit 2 delta:      {:.5}", two_delta());

    println!("\nindicial polynomial at its roots:");
    for mu in indicial_roots() {
        println!("  p({mu:.6}) = {:+.2e}", indicial_poly(mu));
    }
    Ok(())
}
