//! Linear-entropy xor variants: the 2-xor bond model on the square lattice
//! and the trixor / k-xor site models on the triangular lattice, with
//! union-find cluster statistics and informational exponent fits.

use crate::error::{Error, Result};
use crate::lattice::Edge;
use crate::report::{
    binomial_stderr, fit_loglog, mean_stderr, FitPoint, FitReport, SCHEMA_VERSION,
};
use crate::rng::RngKey;
use rayon::prelude::*;
use serde_json::json;

fn zigzag(n: i64) -> u64 {
    ((n << 1) ^ (n >> 63)) as u64
}

/// A deterministic lazy bit line: bit `n` is a pure function of
/// `(seed, family, n)`. `Zero` supplies the all-closed fixture.
#[derive(Debug, Clone, Copy)]
pub enum BitLine {
    Keyed { seed: u64, family: u64 },
    Zero,
}

impl BitLine {
    #[inline]
    pub fn bit(&self, n: i64) -> bool {
        match *self {
            BitLine::Keyed { seed, family } => {
                RngKey::new(seed).substream(0x0b17 + family).word(zigzag(n)) & 1 == 1
            }
            BitLine::Zero => false,
        }
    }
}

/// 2-xor bond states on the square lattice: an edge is open iff the bits of
/// the two half-integer lines through its midpoint disagree. Doubling the
/// midpoint coordinates keeps all indices integral: a horizontal edge at
/// `{(x, y), (x+1, y)}` has midpoint `(x + 1/2, y)`, so it reads bit
/// `2x + 1` of the vertical-line sequence and bit `2y` of the horizontal
/// one.
#[derive(Debug, Clone, Copy)]
pub struct TwoXorField {
    pub xi: BitLine,
    pub eta: BitLine,
}

impl TwoXorField {
    pub fn new(seed: u64) -> Self {
        TwoXorField {
            xi: BitLine::Keyed { seed, family: 0 },
            eta: BitLine::Keyed { seed, family: 1 },
        }
    }

    pub fn zero() -> Self {
        TwoXorField {
            xi: BitLine::Zero,
            eta: BitLine::Zero,
        }
    }

    #[inline]
    pub fn edge_open(&self, e: Edge) -> bool {
        let (mx2, my2) = match e {
            Edge::H { x, y } => (2 * x + 1, 2 * y),
            Edge::V { x, y } => (2 * x, 2 * y + 1),
        };
        self.xi.bit(mx2) ^ self.eta.bit(my2)
    }
}

/// A family of parallel lines indexed by `(a u + b v + c) / d` over the
/// axial coordinates of the triangular lattice. The divisor must divide
/// every coefficient, otherwise some vertex would get a fractional line
/// index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineFamily {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl LineFamily {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidGeometry("zero divisor in line family".into()));
        }
        if a % d != 0 || b % d != 0 || c % d != 0 {
            return Err(Error::InvalidGeometry(format!(
                "family ({a} u + {b} v + {c}) / {d} has non-integral indices"
            )));
        }
        Ok(LineFamily { a, b, c, d })
    }

    #[inline]
    pub fn index(&self, u: i64, v: i64) -> i64 {
        (self.a * u + self.b * v + self.c) / self.d
    }
}

/// The three trixor families: lines of constant `u`, constant `v` and
/// constant `u + v`.
pub fn trixor_families() -> Vec<LineFamily> {
    vec![
        LineFamily {
            a: 1,
            b: 0,
            c: 0,
            d: 1,
        },
        LineFamily {
            a: 0,
            b: 1,
            c: 0,
            d: 1,
        },
        LineFamily {
            a: 1,
            b: 1,
            c: 0,
            d: 1,
        },
    ]
}

/// The 4-xor families: trixor plus the vertical lines. A vertex at axial
/// `(u, v)` has x-coordinate `u + v/2`, so vertical lines are indexed by the
/// doubled coordinate `2u + v`.
pub fn four_xor_families() -> Vec<LineFamily> {
    let mut fams = trixor_families();
    fams.push(LineFamily {
        a: 2,
        b: 1,
        c: 0,
        d: 1,
    });
    fams
}

/// A vertex-state field on the triangular lattice in axial coordinates:
/// the state is the xor of one bit per line family.
#[derive(Debug, Clone)]
pub struct KxorField {
    pub families: Vec<LineFamily>,
    lines: Vec<BitLine>,
    pub size: i64,
}

impl KxorField {
    pub fn generate(families: Vec<LineFamily>, size: i64, seed: u64) -> Result<Self> {
        if size < 1 {
            return Err(Error::InvalidArgument(format!("size {size} < 1")));
        }
        for f in &families {
            LineFamily::new(f.a, f.b, f.c, f.d)?;
        }
        let lines = (0..families.len())
            .map(|i| BitLine::Keyed {
                seed,
                family: 16 + i as u64,
            })
            .collect();
        Ok(KxorField {
            families,
            lines,
            size,
        })
    }

    pub fn zero(families: Vec<LineFamily>, size: i64) -> Self {
        let lines = vec![BitLine::Zero; families.len()];
        KxorField {
            families,
            lines,
            size,
        }
    }

    #[inline]
    pub fn state(&self, u: i64, v: i64) -> bool {
        self.families
            .iter()
            .zip(&self.lines)
            .fold(false, |acc, (f, line)| acc ^ line.bit(f.index(u, v)))
    }

    pub fn contains(&self, u: i64, v: i64) -> bool {
        u >= 0 && u < self.size && v >= 0 && v < self.size
    }
}

pub fn gen_trixor(size: i64, seed: u64) -> Result<KxorField> {
    KxorField::generate(trixor_families(), size, seed)
}

/// Axial neighbors on the triangular lattice.
pub const TRI_NEIGHBORS: [(i64, i64); 6] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)];

/// Number of interior vertices whose count of 0-labeled neighbors is odd.
/// The xor construction forces this to be zero everywhere.
pub fn odd_neighborhood_count(field: &KxorField) -> u64 {
    let mut bad = 0;
    for u in 1..field.size - 1 {
        for v in 1..field.size - 1 {
            let zeros = TRI_NEIGHBORS
                .iter()
                .filter(|(du, dv)| !field.state(u + du, v + dv))
                .count();
            if zeros % 2 != 0 {
                bad += 1;
            }
        }
    }
    bad
}

/// Run-length encode the field's window rows: each row lists the leading
/// bit and the run lengths, e.g. `0:3,5,1` for `000111110`.
pub fn rle_encode(field: &KxorField) -> Vec<String> {
    (0..field.size)
        .map(|v| {
            let first = field.state(0, v);
            let mut runs = Vec::new();
            let mut cur = first;
            let mut len = 0u32;
            for u in 0..field.size {
                if field.state(u, v) == cur {
                    len += 1;
                } else {
                    runs.push(len.to_string());
                    cur = !cur;
                    len = 1;
                }
            }
            runs.push(len.to_string());
            format!("{}:{}", u8::from(first), runs.join(","))
        })
        .collect()
}

/// Decode rows produced by [`rle_encode`] back into a bit grid.
pub fn rle_decode(rows: &[String]) -> Result<Vec<Vec<bool>>> {
    rows.iter()
        .map(|row| {
            let (head, runs) = row
                .split_once(':')
                .ok_or_else(|| Error::InvalidArgument(format!("bad RLE row {row}")))?;
            let mut bit = head == "1";
            let mut out = Vec::new();
            for r in runs.split(',') {
                let n: u32 = r
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad RLE run {r}")))?;
                out.extend(std::iter::repeat(bit).take(n as usize));
                bit = !bit;
            }
            Ok(out)
        })
        .collect()
}

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut i: u32) -> u32 {
        while self.parent[i as usize] != i {
            self.parent[i as usize] = self.parent[self.parent[i as usize] as usize];
            i = self.parent[i as usize];
        }
        i
    }

    fn union(&mut self, a: u32, b: u32) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return;
        }
        let (big, small) = if self.size[ra as usize] >= self.size[rb as usize] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
    }
}

/// Connected-component statistics of a monochromatic cluster decomposition:
/// equal-state neighbors are joined.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ClusterStats {
    pub clusters: usize,
    /// cluster sizes, descending
    pub sizes: Vec<u32>,
    /// per-cluster boundary length: edges to a differing neighbor inside
    /// the window
    pub boundary_lengths: Vec<u32>,
}

pub fn variant_cluster_stats(field: &KxorField) -> ClusterStats {
    let s = field.size;
    let idx = |u: i64, v: i64| (u * s + v) as u32;
    let mut uf = UnionFind::new((s * s) as usize);
    for u in 0..s {
        for v in 0..s {
            for (du, dv) in [(1, 0), (0, 1), (1, -1)] {
                let (uu, vv) = (u + du, v + dv);
                if field.contains(uu, vv) && field.state(u, v) == field.state(uu, vv) {
                    uf.union(idx(u, v), idx(uu, vv));
                }
            }
        }
    }
    let mut sizes: std::collections::HashMap<u32, u32> = std::collections::HashMap::new();
    let mut boundary: std::collections::HashMap<u32, u32> = std::collections::HashMap::new();
    for u in 0..s {
        for v in 0..s {
            let root = uf.find(idx(u, v));
            *sizes.entry(root).or_default() += 1;
            let b = TRI_NEIGHBORS
                .iter()
                .filter(|(du, dv)| {
                    field.contains(u + du, v + dv)
                        && field.state(u + du, v + dv) != field.state(u, v)
                })
                .count() as u32;
            *boundary.entry(root).or_default() += b;
        }
    }
    let mut pairs: Vec<(u32, u32)> = sizes.iter().map(|(&r, &sz)| (sz, boundary[&r])).collect();
    pairs.sort_unstable_by(|a, b| b.cmp(a));
    ClusterStats {
        clusters: pairs.len(),
        sizes: pairs.iter().map(|p| p.0).collect(),
        boundary_lengths: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Diameter (bounding-box span in axial coordinates) and volume of the
/// cluster containing the origin vertex. The bit lines are lazy, so the
/// exploration is bounded only by the cap: `None` means the cluster
/// escaped a centered box of half-width `max_half` and is censored.
fn center_cluster(field: &KxorField, max_half: i64) -> Option<(i64, u64)> {
    let target = field.state(0, 0);
    let mut stack = vec![(0i64, 0i64)];
    let mut seen = std::collections::HashSet::new();
    seen.insert((0i64, 0i64));
    let (mut min_u, mut max_u, mut min_v, mut max_v) = (0i64, 0i64, 0i64, 0i64);
    while let Some((u, v)) = stack.pop() {
        min_u = min_u.min(u);
        max_u = max_u.max(u);
        min_v = min_v.min(v);
        max_v = max_v.max(v);
        if u.abs() >= max_half || v.abs() >= max_half {
            return None;
        }
        for (du, dv) in TRI_NEIGHBORS {
            let (uu, vv) = (u + du, v + dv);
            if field.state(uu, vv) == target && seen.insert((uu, vv)) {
                stack.push((uu, vv));
            }
        }
    }
    Some(((max_u - min_u).max(max_v - min_v), seen.len() as u64))
}

/// Informational cluster-exponent report for a variant model: the tail of
/// the origin cluster's diameter (fit target band from the reference
/// simulations) and the volume-by-diameter growth. `size` caps the
/// exploration half-width; clusters that escape it are censored, counted
/// as exceedances and reported.
pub fn variant_exponents(
    families: Vec<LineFamily>,
    name: &str,
    size: i64,
    samples: u64,
    seed: u64,
    gamma_band: (f64, f64),
    delta_band: (f64, f64),
) -> Result<(FitReport, FitReport)> {
    let draws: Vec<Option<(i64, u64)>> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let field = KxorField::generate(
                families.clone(),
                size,
                RngKey::new(seed).substream(0xeb).word(k),
            )
            .expect("validated families");
            center_cluster(&field, size)
        })
        .collect();
    let censored = draws.iter().filter(|d| d.is_none()).count() as u64;
    // tail over dyadic n
    let mut n_values = Vec::new();
    let mut n = 2i64;
    while n <= size / 2 {
        n_values.push(n);
        n *= 2;
    }
    let tail_points: Vec<FitPoint> = n_values
        .iter()
        .map(|&n| {
            let hits = draws
                .iter()
                .filter(|d| match d {
                    Some((diam, _)) => *diam > n,
                    None => true,
                })
                .count() as u64;
            let p = hits as f64 / samples as f64;
            FitPoint {
                x: n as f64,
                y: p,
                stderr: binomial_stderr(p, samples),
                n: hits,
            }
        })
        .collect();
    let (slope, slope_err) = fit_loglog(&tail_points, 0.5)
        .ok_or_else(|| Error::InsufficientData("variant tail fit".into()))?;
    let gamma_hat = -slope;
    let gamma = FitReport {
        schema_version: SCHEMA_VERSION,
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        estimator: format!("{name}_gamma"),
        params: json!({"size": size, "samples": samples}),
        seed,
        points: tail_points,
        exponent: gamma_hat,
        exponent_stderr: slope_err,
        exponent_ci95: (gamma_hat - 1.96 * slope_err, gamma_hat + 1.96 * slope_err),
        target: (gamma_band.0 + gamma_band.1) / 2.0,
        target_label: format!("{name}_gamma_band_{}_{}", gamma_band.0, gamma_band.1),
        wall_time_ms: None,
        extras: json!({"censored": censored}),
    };

    // volume by diameter in dyadic bins
    let mut bins = vec![(0i128, 0i128, 0u64, 0i128); 24];
    for d in draws.iter().flatten() {
        let (diam, vol) = *d;
        if diam >= 1 {
            let b = (63 - (diam as u64).leading_zeros()) as usize;
            bins[b].0 += vol as i128;
            bins[b].1 += (vol as i128) * (vol as i128);
            bins[b].2 += 1;
            bins[b].3 += diam as i128;
        }
    }
    let vol_points: Vec<FitPoint> = bins
        .iter()
        .filter(|b| b.2 >= 20)
        .map(|&(vs, vsq, n, ds)| {
            let (mean, se) = mean_stderr(vs, vsq, n);
            FitPoint {
                x: ds as f64 / n as f64,
                y: mean,
                stderr: se,
                n,
            }
        })
        .collect();
    let (vslope, vslope_err) = fit_loglog(&vol_points, 0.3)
        .ok_or_else(|| Error::InsufficientData("variant volume fit".into()))?;
    let delta = FitReport {
        schema_version: SCHEMA_VERSION,
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        estimator: format!("{name}_delta"),
        params: json!({"size": size, "samples": samples}),
        seed,
        points: vol_points,
        exponent: vslope,
        exponent_stderr: vslope_err,
        exponent_ci95: (vslope - 1.96 * vslope_err, vslope + 1.96 * vslope_err),
        target: (delta_band.0 + delta_band.1) / 2.0,
        target_label: format!("{name}_delta_band_{}_{}", delta_band.0, delta_band.1),
        wall_time_ms: None,
        extras: json!({"censored": censored}),
    };
    Ok((gamma, delta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;

    #[test]
    fn zero_two_xor_is_all_closed() {
        let f = TwoXorField::zero();
        for x in -5..5 {
            for y in -5..5 {
                assert!(!f.edge_open(Edge::H { x, y }));
                assert!(!f.edge_open(Edge::V { x, y }));
            }
        }
    }

    #[test]
    fn two_xor_edge_frequency_near_half() {
        let mut open = 0u32;
        let n = 100_000;
        for seed in 0..n {
            if TwoXorField::new(seed as u64).edge_open(Edge::H { x: 3, y: -2 }) {
                open += 1;
            }
        }
        let p = open as f64 / n as f64;
        assert!(
            (p - 0.5).abs() < 3.0 * binomial_stderr(0.5, n as u64),
            "p = {p}"
        );
    }

    #[test]
    fn two_xor_adjacent_lines_agree_or_complement() {
        for seed in 0..40 {
            let f = TwoXorField::new(seed);
            // horizontal edges along rows y and y+1
            let same: Vec<bool> = (-30..30)
                .map(|x| f.edge_open(Edge::H { x, y: 4 }) == f.edge_open(Edge::H { x, y: 5 }))
                .collect();
            assert!(same.iter().all(|&b| b) || same.iter().all(|&b| !b));
            // vertical edges along columns x and x+1
            let same: Vec<bool> = (-30..30)
                .map(|y| f.edge_open(Edge::V { x: -2, y }) == f.edge_open(Edge::V { x: -1, y }))
                .collect();
            assert!(same.iter().all(|&b| b) || same.iter().all(|&b| !b));
        }
    }

    #[test]
    fn two_xor_pairwise_independence() {
        // distinct edges, including pairs sharing a line, have product
        // frequency ~ 1/4
        let pairs = [
            (Edge::H { x: 0, y: 0 }, Edge::H { x: 5, y: 0 }),
            (Edge::H { x: 0, y: 0 }, Edge::V { x: 3, y: 7 }),
            (Edge::V { x: 2, y: 1 }, Edge::V { x: 2, y: 9 }),
        ];
        let n = 40_000u64;
        for (e1, e2) in pairs {
            let both = (0..n)
                .filter(|&s| {
                    let f = TwoXorField::new(s);
                    f.edge_open(e1) && f.edge_open(e2)
                })
                .count() as f64;
            let p = both / n as f64;
            assert!(
                (p - 0.25).abs() < 3.0 * binomial_stderr(0.25, n),
                "{e1:?} {e2:?}: {p}"
            );
        }
    }

    #[test]
    fn trixor_all_zero_lines_give_zero_field() {
        let f = KxorField::zero(trixor_families(), 8);
        for u in 0..8 {
            for v in 0..8 {
                assert!(!f.state(u, v));
            }
        }
    }

    #[test]
    fn trixor_even_neighborhood_holds_exactly() {
        for seed in 0..50 {
            let f = gen_trixor(40, seed).unwrap();
            assert_eq!(odd_neighborhood_count(&f), 0, "seed {seed}");
        }
    }

    #[test]
    fn trixor_single_state_frequency() {
        let n = 100_000u64;
        let ones = (0..n)
            .filter(|&s| gen_trixor(4, s).unwrap().state(1, 2))
            .count() as f64;
        let p = ones / n as f64;
        assert!((p - 0.5).abs() < 3.0 * binomial_stderr(0.5, n), "p = {p}");
    }

    #[test]
    fn kxor_with_three_families_is_trixor() {
        let a = gen_trixor(16, 9).unwrap();
        let b = KxorField::generate(trixor_families(), 16, 9).unwrap();
        for u in 0..16 {
            for v in 0..16 {
                assert_eq!(a.state(u, v), b.state(u, v));
            }
        }
    }

    #[test]
    fn four_xor_geometry_is_integral() {
        let f = KxorField::generate(four_xor_families(), 8, 3).unwrap();
        // well-defined over a fundamental domain; nothing to assert beyond
        // evaluation not panicking and the family validation passing
        let mut ones = 0;
        for u in 0..8 {
            for v in 0..8 {
                if f.state(u, v) {
                    ones += 1;
                }
            }
        }
        assert!(ones > 0 && ones < 64);
    }

    #[test]
    fn fractional_family_is_rejected() {
        // x-coordinate itself: (2u + v) / 2 is non-integral for odd v
        assert!(matches!(
            LineFamily::new(2, 1, 0, 2),
            Err(Error::InvalidGeometry(_))
        ));
        assert!(KxorField::generate(
            vec![LineFamily {
                a: 2,
                b: 1,
                c: 0,
                d: 2
            }],
            4,
            0
        )
        .is_err());
    }

    #[test]
    fn flipping_one_line_bit_flips_exactly_that_line() {
        // compare two keyed fields differing in one eta line by xoring with
        // a delta mask: equivalent check via the zero field plus manual xor
        let fams = trixor_families();
        let size = 12;
        let f = KxorField::generate(fams.clone(), size, 5).unwrap();
        // flip line v = 3 of family 1: states change exactly on that line
        for u in 0..size {
            for v in 0..size {
                let flipped = f.state(u, v) ^ (fams[1].index(u, v) == 3);
                assert_eq!(flipped != f.state(u, v), v == 3);
            }
        }
    }

    #[test]
    fn rle_round_trip() {
        let f = gen_trixor(20, 4).unwrap();
        let rows = rle_encode(&f);
        let grid = rle_decode(&rows).unwrap();
        for v in 0..20 {
            for u in 0..20 {
                assert_eq!(grid[v as usize][u as usize], f.state(u, v));
            }
        }
        assert!(rle_decode(&["junk".to_string()]).is_err());
    }

    #[test]
    fn all_equal_field_is_one_cluster() {
        let f = KxorField::zero(trixor_families(), 10);
        let stats = variant_cluster_stats(&f);
        assert_eq!(stats.clusters, 1);
        assert_eq!(stats.sizes[0], 100);
        assert_eq!(stats.boundary_lengths[0], 0);
    }

    #[test]
    fn cluster_stats_cover_the_window() {
        let mut rng = CounterRng::new(8, 0);
        for _ in 0..10 {
            let f = gen_trixor(24, rng.next_u64()).unwrap();
            let stats = variant_cluster_stats(&f);
            assert_eq!(stats.sizes.iter().map(|&s| s as u64).sum::<u64>(), 24 * 24);
        }
    }

    #[test]
    fn variant_exponent_report_shapes() {
        let (gamma, delta) = variant_exponents(
            trixor_families(),
            "trixor",
            128,
            400,
            6,
            (0.16, 0.2),
            (1.3, 1.34),
        )
        .unwrap();
        assert!(gamma.exponent.is_finite());
        assert!(
            delta.exponent > 1.0 && delta.exponent < 2.5,
            "{}",
            delta.exponent
        );
        assert!(!gamma.points.is_empty() && !delta.points.is_empty());
    }
}
