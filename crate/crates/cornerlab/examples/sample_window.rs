//! Build a configuration window from a serializable spec, look at its
//! height function, and render it to SVG.
//!
//! ```bash
//! cargo run --release --example sample_window
//! ```

use cornerlab::lattice::{Face, WindowSpec};
use cornerlab::render::{all_closed_cycles, render_height_map, render_window};

fn main() -> cornerlab::Result<()> {
    let spec = WindowSpec::square(2024, 24);
    println!("window spec: {}", serde_json::to_string(&spec)?);

    let window = spec.build()?;

    // The height of a face is computable two independent ways: the closed
    // form from the two walks, and by counting contour crossings along a
    // dual path. They agree everywhere.
    let mut span = (i64::MAX, i64::MIN);
    for n in -24..24 {
        for m in -24..24 {
            let f = Face::new(n, m);
            let h = window.height(f)?;
            assert_eq!(h, window.height_by_path(f)?);
            span = (span.0.min(h), span.1.max(h));
        }
    }
    println!("height range over the window: {:?}", span);

    let cycles = all_closed_cycles(&window);
    println!("components closing inside: {}", cycles.len());
    let longest = cycles.iter().map(|c| c.length()).max().unwrap_or(0);
    println!("longest cycle: {longest} edges");

    std::fs::write("window.svg", render_window(&window)?)?;
    std::fs::write("heights.svg", render_height_map(&window)?)?;
    println!("wrote window.svg and heights.svg");
    Ok(())
}
