//! Find the cycle through the origin by adaptively growing the window,
//! classify it, and inspect its passages.
//!
//! ```bash
//! cargo run --release --example origin_cycle
//! ```

use cornerlab::contour::{cycle_of_origin, passages, CycleRecord};
use cornerlab::lattice::WindowSpec;
use cornerlab::render::render_cycle;

fn main() -> cornerlab::Result<()> {
    for seed in 0..6 {
        let spec = WindowSpec::square(seed, 32);
        let oc = cycle_of_origin(&spec, 1 << 14)?;
        let window = spec.with_half(oc.window_half).build()?;
        let ps = passages(&window, &oc.cycle)?;
        let record = CycleRecord::new(seed, &oc.cycle, oc.classification, ps, false);
        println!(
            "seed {seed}: length {:>5}  diameter {:>4}  height {:>2}  {:?} level {:+}  passages {:>2}  (window half {})",
            record.length,
            record.diameter,
            oc.height,
            record.direction,
            record.level,
            record.passages.len(),
            oc.window_half,
        );
        if seed == 0 {
            std::fs::write("origin_cycle.svg", render_cycle(&oc.cycle)?)?;
            println!("         wrote origin_cycle.svg");
        }
    }
    Ok(())
}
