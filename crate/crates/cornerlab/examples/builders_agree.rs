//! Construct the contour cycle of a compatible excursion pair two
//! independent ways and compare edge for edge: the positive-set boundary
//! construction against the deterministic skirting-path rule.
//!
//! ```bash
//! cargo run --release --example builders_agree
//! ```

use cornerlab::builder::{cycle_from_pair_hikers, cycle_from_pair_trace};
use cornerlab::excursion::{CompatiblePair, Direction, Excursion};
use cornerlab::mc::sample_pair;
use cornerlab::rng::CounterRng;

fn main() -> cornerlab::Result<()> {
    // The minimal height-2 pair: two tents. Its cycle is the boundary of a
    // plus-pentomino, 12 edges spanning the 4x4 rectangle.
    let tent = |base: i64| {
        Excursion::from_values(0, vec![base, base + 1, base + 2, base + 1, base]).unwrap()
    };
    let pair = CompatiblePair::new(tent(0), tent(-2))?;
    let a = cycle_from_pair_trace(&pair)?;
    let b = cycle_from_pair_hikers(&pair)?;
    assert_eq!(a, b);
    println!("tent pair: {} edges, rect {:?}", a.length(), a.rect);
    println!("vertices: {:?}", a.vertices);

    // Random pairs, both directions.
    let mut rng = CounterRng::new(1, 0);
    let mut checked = 0;
    for h in 1..=16 {
        for _ in 0..200 {
            for direction in [Direction::Up, Direction::Down] {
                let pair = sample_pair(h, direction, &mut rng);
                let t = cycle_from_pair_trace(&pair)?;
                let k = cycle_from_pair_hikers(&pair)?;
                assert_eq!(t.edge_set(), k.edge_set());
                checked += 1;
            }
        }
    }
    println!("{checked} random pairs: the two constructions agree edge for edge");
    Ok(())
}
