//! The two-leg sampler for a walk excursion conditioned to have exact
//! height h, checked against its closed-form hitting probabilities and the
//! subexcursion restriction property.
//!
//! ```bash
//! cargo run --release --example excursion_sampler
//! ```

use cornerlab::excursion::{
    hit_prob_back, hit_prob_there, sample_excursion, subexcursion_distribution_check, Direction,
};
use cornerlab::rng::CounterRng;
use num_traits::ToPrimitive;

fn main() -> cornerlab::Result<()> {
    let mut rng = CounterRng::new(7, 0);
    let h = 4;
    println!("a few height-{h} excursions:");
    for _ in 0..4 {
        let e = sample_excursion(h, Direction::Up, &mut rng);
        println!("  {:?}", e.values);
    }

    // Empirical frequency of hitting i before h from j under the first leg,
    // against the exact rational (h - j) i / ((h - i) j).
    let (i, j) = (1, 2);
    let exact = hit_prob_there(j, i, h)?;
    let runs = 200_000;
    let mut hits = 0u64;
    for _ in 0..runs {
        let mut pos = j;
        while pos != i && pos != h {
            let p_up = (pos + 1) as f64 / (2 * pos) as f64;
            pos += if rng.bernoulli(p_up) { 1 } else { -1 };
        }
        if pos == i {
            hits += 1;
        }
    }
    let freq = hits as f64 / runs as f64;
    println!(
        "\nfirst leg from {j}: hit {i} before {h} with frequency {freq:.5}, exactly {}/{} = {:.5}",
        exact.numer(),
        exact.denom(),
        exact.to_f64().unwrap()
    );
    println!(
        "second leg from 1: reach 2 before 0 with probability {} (exact)",
        hit_prob_back(1, 2, 2)?
    );

    // The q-th sub-excursion of type i -> j -> i, conditioned to exist, is
    // distributed as a fresh excursion of height j - i.
    let mut host = CounterRng::new(7, 1);
    let mut direct = CounterRng::new(7, 2);
    let rep = subexcursion_distribution_check(4, 1, 3, 1, 50_000, 3.0, &mut host, &mut direct)?;
    println!(
        "\nsubexcursion law check (h=4, 1->3->1, q=1): mean length {:.4} vs {:.4}, chi2 {:.2} (dof {}), pass = {}",
        rep.extracted_mean_len, rep.direct_mean_len, rep.chi2, rep.chi2_dof, rep.pass
    );
    Ok(())
}
