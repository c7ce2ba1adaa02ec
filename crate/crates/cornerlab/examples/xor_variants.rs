//! The linear-entropy variants: 2-xor bonds on the square lattice, and the
//! trixor / 4-xor site models on the triangular lattice with their cluster
//! exponents.
//!
//! ```bash
//! cargo run --release --example xor_variants
//! ```

use cornerlab::lattice::Edge;
use cornerlab::xor::{
    four_xor_families, gen_trixor, odd_neighborhood_count, trixor_families, variant_cluster_stats,
    variant_exponents, TwoXorField,
};

fn main() -> cornerlab::Result<()> {
    // 2-xor: neighboring parallel lines agree or complement along their
    // whole length, yet edge states are pairwise independent.
    let f = TwoXorField::new(7);
    let row: String = (0..40)
        .map(|x| {
            if f.edge_open(Edge::H { x, y: 0 }) {
                '-'
            } else {
                '.'
            }
        })
        .collect();
    let row_above: String = (0..40)
        .map(|x| {
            if f.edge_open(Edge::H { x, y: 1 }) {
                '-'
            } else {
                '.'
            }
        })
        .collect();
    println!("2-xor horizontal edges on two adjacent rows:");
    println!("  {row}\n  {row_above}");

    // trixor: every interior vertex sees an even number of 0-labeled
    // neighbors, exactly, on every sample.
    let field = gen_trixor(64, 3)?;
    println!(
        "\ntrixor 64x64: odd neighborhoods = {}",
        odd_neighborhood_count(&field)
    );
    let stats = variant_cluster_stats(&field);
    println!(
        "cluster count {}, largest {} sites (boundary {} edges)",
        stats.clusters, stats.sizes[0], stats.boundary_lengths[0]
    );

    for (name, fams, gband, dband) in [
        ("trixor", trixor_families(), (0.16, 0.2), (1.3, 1.34)),
        ("four_xor", four_xor_families(), (0.93, 1.05), (1.74, 1.76)),
    ] {
        let (gamma, delta) = variant_exponents(fams, name, 1024, 800, 13, gband, dband)?;
        println!(
            "\n{name}: gamma_hat = {:.3} +- {:.3} (reference band {:?})",
            gamma.exponent, gamma.exponent_stderr, gband
        );
        println!(
            "{name}: delta_hat = {:.3} +- {:.3} (reference band {:?})",
            delta.exponent, delta.exponent_stderr, dband
        );
    }
    Ok(())
}
