//! Walk excursions, compatibility, closed-form hitting probabilities for the
//! conditioned chains, and the two-leg sampler for an excursion conditioned
//! to have exact height `h`.

use crate::error::{Error, Result};
use crate::lattice::Walk;
use crate::rng::CounterRng;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
        }
    }
}

/// A finite excursion segment: endpoints at the base value, interior
/// strictly above (up) or below (down) it, with `height = max |deviation|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Excursion {
    pub direction: Direction,
    /// index of the left endpoint in the host walk
    pub offset: i64,
    /// value at both endpoints
    pub base: i64,
    /// the `2k + 1` values including both endpoints
    pub values: Vec<i64>,
}

impl Excursion {
    /// Validate and wrap a value window. Returns `None` if it is not an
    /// excursion in either direction.
    pub fn from_values(offset: i64, values: Vec<i64>) -> Option<Self> {
        if values.len() < 3 || values.len() % 2 == 0 {
            return None;
        }
        let base = values[0];
        if *values.last().unwrap() != base {
            return None;
        }
        let interior = &values[1..values.len() - 1];
        let direction = if interior.iter().all(|&v| v > base) {
            Direction::Up
        } else if interior.iter().all(|&v| v < base) {
            Direction::Down
        } else {
            return None;
        };
        Some(Excursion {
            direction,
            offset,
            base,
            values,
        })
    }

    pub fn height(&self) -> i64 {
        self.values
            .iter()
            .map(|&v| (v - self.base).abs())
            .max()
            .unwrap()
    }

    /// Edge count `2k`.
    pub fn length(&self) -> i64 {
        self.values.len() as i64 - 1
    }

    /// index of the right endpoint
    pub fn end(&self) -> i64 {
        self.offset + self.length()
    }

    #[inline]
    pub fn value_at(&self, index: i64) -> i64 {
        self.values[(index - self.offset) as usize]
    }

    /// Indices of the extreme value (maxima for up, minima for down),
    /// in increasing order.
    pub fn extreme_indices(&self) -> Vec<i64> {
        let extreme = match self.direction {
            Direction::Up => self.base + self.height(),
            Direction::Down => self.base - self.height(),
        };
        self.values
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v == extreme)
            .map(|(i, _)| self.offset + i as i64)
            .collect()
    }

    /// Mirror an up-excursion into a down-excursion (and back) around the
    /// base value.
    pub fn reflected(&self) -> Self {
        Excursion {
            direction: self.direction.flip(),
            offset: self.offset,
            base: self.base,
            values: self.values.iter().map(|&v| 2 * self.base - v).collect(),
        }
    }

    /// Same shape re-anchored at a new offset and base.
    pub fn translated(&self, offset: i64, base: i64) -> Self {
        Excursion {
            direction: self.direction,
            offset,
            base,
            values: self.values.iter().map(|&v| v - self.base + base).collect(),
        }
    }
}

/// Compatibility rule for a pair of same-direction, same-height excursions:
/// `X_a + Y_b + h` must be even for up pairs and odd for down pairs.
pub fn is_compatible(e1: &Excursion, e2: &Excursion) -> bool {
    if e1.direction != e2.direction {
        return false;
    }
    let h = e1.height();
    if h != e2.height() {
        return false;
    }
    let parity = (e1.base + e2.base + h).rem_euclid(2);
    match e1.direction {
        Direction::Up => parity == 0,
        Direction::Down => parity == 1,
    }
}

/// A compatible pair; `first` plays the horizontal marginal, `second` the
/// vertical one.
#[derive(Debug, Clone, Serialize)]
pub struct CompatiblePair {
    pub first: Excursion,
    pub second: Excursion,
}

impl CompatiblePair {
    pub fn new(first: Excursion, second: Excursion) -> Result<Self> {
        if !is_compatible(&first, &second) {
            return Err(Error::InvalidArgument(
                "excursions do not form a compatible pair".into(),
            ));
        }
        Ok(CompatiblePair { first, second })
    }

    pub fn height(&self) -> i64 {
        self.first.height()
    }

    pub fn direction(&self) -> Direction {
        self.first.direction
    }

    /// Translate both excursions to offsets matching their base-value
    /// parity, the positions at which the pair can occur on the lattice
    /// (walk values satisfy `X_n = n (mod 2)`).
    pub fn aligned(&self) -> CompatiblePair {
        let shift =
            |e: &Excursion| e.translated(e.offset + (e.base - e.offset).rem_euclid(2), e.base);
        CompatiblePair {
            first: shift(&self.first),
            second: shift(&self.second),
        }
    }
}

/// All maximal excursions (both directions) of `walk` restricted to
/// `[lo, hi]`: excursions not strictly contained in another excursion within
/// the range. Nested subexcursions can be enumerated by calling this again
/// on an excursion's interior.
pub fn detect_excursions(walk: &Walk, lo: i64, hi: i64) -> Result<Vec<Excursion>> {
    if lo < walk.lo || hi > walk.hi || lo > hi {
        return Err(Error::OutOfRange(format!(
            "range [{lo}, {hi}] outside walk [{}, {}]",
            walk.lo, walk.hi
        )));
    }
    let mut all = excursions_in(walk, lo, hi);
    // Excursion intervals are nested or disjoint; keep the outermost ones.
    all.sort_by_key(|e| (e.offset, -e.length()));
    let mut maximal: Vec<Excursion> = Vec::new();
    let mut reach = lo - 1;
    for e in all {
        if e.offset > reach || e.end() > reach {
            // not contained in the previous maximal one
            if e.offset >= reach {
                reach = e.end();
                maximal.push(e);
            }
        }
    }
    Ok(maximal)
}

/// Every excursion interval of `walk` within `[lo, hi]`, nested ones
/// included.
pub fn all_excursions(walk: &Walk, lo: i64, hi: i64) -> Result<Vec<Excursion>> {
    if lo < walk.lo || hi > walk.hi || lo > hi {
        return Err(Error::OutOfRange(format!(
            "range [{lo}, {hi}] outside walk [{}, {}]",
            walk.lo, walk.hi
        )));
    }
    Ok(excursions_in(walk, lo, hi))
}

fn excursions_in(walk: &Walk, lo: i64, hi: i64) -> Vec<Excursion> {
    let mut out = Vec::new();
    // Monotone stacks of open indices: ascents open potential up-excursions,
    // closed at the first return to the base value.
    let mut up_stack: Vec<i64> = Vec::new();
    let mut down_stack: Vec<i64> = Vec::new();
    for n in lo..hi {
        let step = walk.get(n + 1) - walk.get(n);
        if step == 1 {
            up_stack.push(n);
            // a rise closes the most recent down opening at this value
            if let Some(&a) = down_stack.last() {
                if walk.get(a) == walk.get(n + 1) {
                    down_stack.pop();
                    let values = walk.slice(a, n + 1).to_vec();
                    out.push(Excursion {
                        direction: Direction::Down,
                        offset: a,
                        base: walk.get(a),
                        values,
                    });
                }
            }
        } else {
            down_stack.push(n);
            if let Some(&a) = up_stack.last() {
                if walk.get(a) == walk.get(n + 1) {
                    up_stack.pop();
                    let values = walk.slice(a, n + 1).to_vec();
                    out.push(Excursion {
                        direction: Direction::Up,
                        offset: a,
                        base: walk.get(a),
                        values,
                    });
                }
            }
        }
    }
    out.sort_by_key(|e| (e.offset, e.length()));
    out
}

fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(big(num), big(den))
}

/// Hitting probability `P_x(T_a < T_b)` for a birth-and-death chain on
/// `{1, 2, ...}` via the phi-martingale: `phi(x) = sum_{m=1}^{x-1}
/// prod_{i=2}^{m} q_i/p_i` with `phi(1) = 0`, and
/// `P_x(T_a < T_b) = (phi(b) - phi(x)) / (phi(b) - phi(a))`.
///
/// `up[i]`/`down[i]` give `p_i`/`q_i` for the interior states; the slice is
/// indexed so that `up[i]` is the probability of stepping from state `i` to
/// `i + 1` (entries outside `(a, b)` are ignored).
pub fn birth_death_hitting(
    up: &dyn Fn(i64) -> BigRational,
    down: &dyn Fn(i64) -> BigRational,
    x: i64,
    a: i64,
    b: i64,
) -> Result<BigRational> {
    if !(a <= x && x <= b && a >= 1) {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= a <= x <= b, got a={a}, x={x}, b={b}"
        )));
    }
    if a == b {
        return Ok(BigRational::one());
    }
    let phi = |t: i64| -> Result<BigRational> {
        let mut acc = BigRational::zero();
        let mut prod = BigRational::one();
        for m in 1..t {
            if m >= 2 {
                let p = up(m);
                if p.is_zero() {
                    return Err(Error::InvalidArgument(format!(
                        "interior up-probability vanishes at state {m}"
                    )));
                }
                prod *= down(m) / p;
            }
            acc += prod.clone();
        }
        Ok(acc)
    };
    let pa = phi(a)?;
    let pb = phi(b)?;
    let px = phi(x)?;
    Ok((pb.clone() - px) / (pb - pa))
}

/// `there` chain transitions: the first leg of the conditioned excursion,
/// a walk from 1 conditioned to reach `h` before 0. The values do not depend
/// on `h`; only the stopping level does.
pub fn p_there_up(i: i64) -> BigRational {
    ratio(i + 1, 2 * i)
}

pub fn p_there_down(i: i64) -> BigRational {
    ratio(i - 1, 2 * i)
}

/// `back` chain transitions for height `h`: a walk from `h` conditioned to
/// hit 0 before `h + 1`.
pub fn p_back_down(h: i64, j: i64) -> BigRational {
    ratio(h + 2 - j, 2 * (h + 1 - j))
}

pub fn p_back_up(h: i64, j: i64) -> BigRational {
    ratio(h - j, 2 * (h + 1 - j))
}

/// `P_j^there(T_i < T_h) = (h-j) i / ((h-i) j)` for `1 <= i <= j <= h`.
pub fn hit_prob_there(j: i64, i: i64, h: i64) -> Result<BigRational> {
    if !(1 <= i && i <= j && j <= h) {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= i <= j <= h, got i={i}, j={j}, h={h}"
        )));
    }
    if i == h {
        // only possible when i == j == h
        return Ok(BigRational::one());
    }
    Ok(ratio((h - j) * i, (h - i) * j))
}

/// `P_i^back(T_j < T_0) = (h+1-j) i / ((h+1-i) j)` for `0 <= i <= j <= h`.
pub fn hit_prob_back(i: i64, j: i64, h: i64) -> Result<BigRational> {
    if !(0 <= i && i <= j && j <= h) {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= i <= j <= h, got i={i}, j={j}, h={h}"
        )));
    }
    if i == j {
        return Ok(BigRational::one());
    }
    Ok(ratio((h + 1 - j) * i, (h + 1 - i) * j))
}

/// Sample one conditioned excursion of exact height `h`, base 0, both base
/// endpoints included. The two legs are the Doob-transformed chains above;
/// down-excursions are up-samples reflected through the base.
pub fn sample_excursion(h: i64, direction: Direction, rng: &mut CounterRng) -> Excursion {
    assert!(h >= 1, "height must be positive");
    let mut values = vec![0i64, 1];
    let mut pos = 1i64;
    // there: from 1, conditioned to reach h before 0
    while pos < h {
        // p(i, i+1) = (i+1)/(2i)
        let p_up = (pos + 1) as f64 / (2 * pos) as f64;
        pos += if rng.bernoulli(p_up) { 1 } else { -1 };
        values.push(pos);
    }
    // back: from h, conditioned to hit 0 before h+1
    while pos > 0 {
        let p_down = (h + 2 - pos) as f64 / (2 * (h + 1 - pos)) as f64;
        pos += if rng.bernoulli(p_down) { -1 } else { 1 };
        values.push(pos);
    }
    let e = Excursion {
        direction: Direction::Up,
        offset: 0,
        base: 0,
        values,
    };
    debug_assert_eq!(e.height(), h);
    match direction {
        Direction::Up => e,
        Direction::Down => e.reflected(),
    }
}

/// Sub-up-excursions of type `i -> j -> i` inside a height-`h` up-excursion:
/// maximal step intervals forming an up-excursion with base exactly `i` and
/// maximum exactly `j`.
pub fn sub_up_excursions(e: &Excursion, i: i64, j: i64) -> Vec<Excursion> {
    debug_assert_eq!(e.direction, Direction::Up);
    let v = &e.values;
    let mut out = Vec::new();
    let base = e.base + i;
    let top = e.base + j;
    let mut start: Option<usize> = None;
    let mut max_seen = i64::MIN;
    for (idx, &val) in v.iter().enumerate() {
        match start {
            None => {
                if val == base {
                    start = Some(idx);
                    max_seen = val;
                }
            }
            Some(s) => {
                if val == base {
                    // closing the excursion started at s
                    if idx > s && max_seen == top {
                        out.push(Excursion {
                            direction: Direction::Up,
                            offset: e.offset + s as i64,
                            base,
                            values: v[s..=idx].to_vec(),
                        });
                    }
                    start = Some(idx);
                    max_seen = val;
                } else if val < base {
                    start = None;
                } else {
                    max_seen = max_seen.max(val);
                }
            }
        }
    }
    out
}

/// Sub-down-excursions of type `j -> i -> j` inside a height-`h`
/// up-excursion: maximal step intervals forming a down-excursion with base
/// exactly `j` and minimum exactly `i`.
pub fn sub_down_excursions(e: &Excursion, i: i64, j: i64) -> Vec<Excursion> {
    debug_assert_eq!(e.direction, Direction::Up);
    let v = &e.values;
    let mut out = Vec::new();
    let base = e.base + j;
    let bottom = e.base + i;
    let mut start: Option<usize> = None;
    let mut min_seen = i64::MAX;
    for (idx, &val) in v.iter().enumerate() {
        match start {
            None => {
                if val == base {
                    start = Some(idx);
                    min_seen = val;
                }
            }
            Some(s) => {
                if val == base {
                    if idx > s && min_seen == bottom {
                        out.push(Excursion {
                            direction: Direction::Down,
                            offset: e.offset + s as i64,
                            base,
                            values: v[s..=idx].to_vec(),
                        });
                    }
                    start = Some(idx);
                    min_seen = val;
                } else if val > base {
                    start = None;
                } else {
                    min_seen = min_seen.min(val);
                }
            }
        }
    }
    out
}

/// Report of a two-sample comparison between extracted q-th subexcursions of
/// type `i -> j -> i` in sampled height-`h` excursions and directly sampled
/// height-`(j-i)` excursions.
#[derive(Debug, Clone, Serialize)]
pub struct SubexcursionReport {
    pub h: i64,
    pub i: i64,
    pub j: i64,
    pub q: usize,
    pub samples: u64,
    pub found: u64,
    /// mean length of the extracted q-th subexcursions
    pub extracted_mean_len: f64,
    /// mean length of directly sampled height-(j-i) excursions
    pub direct_mean_len: f64,
    /// z-score of the mean-length difference
    pub mean_z: f64,
    /// chi-square statistic over pooled length bins
    pub chi2: f64,
    pub chi2_dof: usize,
    /// critical value at the configured significance
    pub chi2_critical: f64,
    pub pass: bool,
}

/// Wilson-Hilferty approximation to the chi-square upper quantile.
fn chi2_quantile(dof: usize, z: f64) -> f64 {
    let k = dof as f64;
    let t = 1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt();
    k * t * t * t
}

/// Extract the `q`-th (1-indexed) `i -> j -> i` sub-up-excursion from many
/// sampled height-`h` excursions and compare its empirical law with directly
/// sampled height-`(j - i)` excursions. `z_sig` is the normal significance
/// point used for both the mean test and the chi-square critical value
/// (e.g. 3.0 for a three-sigma gate).
pub fn subexcursion_distribution_check(
    h: i64,
    i: i64,
    j: i64,
    q: usize,
    samples: u64,
    z_sig: f64,
    rng_host: &mut CounterRng,
    rng_direct: &mut CounterRng,
) -> Result<SubexcursionReport> {
    if !(0 <= i && i < j && j <= h) || q == 0 {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= i < j <= h and q >= 1, got i={i}, j={j}, h={h}, q={q}"
        )));
    }
    let mut extracted: Vec<i64> = Vec::new();
    for _ in 0..samples {
        let e = sample_excursion(h, Direction::Up, rng_host);
        let subs = if i == 0 && j == h {
            vec![e]
        } else {
            sub_up_excursions(&e, i, j)
        };
        if subs.len() >= q {
            extracted.push(subs[q - 1].length());
        }
    }
    if extracted.len() < 100 {
        return Err(Error::InsufficientData(format!(
            "only {} samples contained a {q}-th {i}->{j}->{i} subexcursion",
            extracted.len()
        )));
    }
    let direct: Vec<i64> = (0..extracted.len())
        .map(|_| sample_excursion(j - i, Direction::Up, rng_direct).length())
        .collect();

    let mean = |v: &[i64]| v.iter().sum::<i64>() as f64 / v.len() as f64;
    let var = |v: &[i64], m: f64| {
        v.iter()
            .map(|&x| (x as f64 - m) * (x as f64 - m))
            .sum::<f64>()
            / (v.len() - 1) as f64
    };
    let (m1, m2) = (mean(&extracted), mean(&direct));
    let (v1, v2) = (var(&extracted, m1), var(&direct, m2));
    let n1 = extracted.len() as f64;
    let n2 = direct.len() as f64;
    let mean_z = if v1 + v2 > 0.0 {
        (m1 - m2) / (v1 / n1 + v2 / n2).sqrt()
    } else {
        0.0
    };

    // Pooled dyadic length bins: 2, 4..6, 8..14, ...
    let bin_of = |len: i64| ((len / 2) as f64).log2().floor() as usize;
    let n_bins = bin_of(*extracted.iter().chain(direct.iter()).max().unwrap()) + 1;
    let mut c1 = vec![0f64; n_bins];
    let mut c2 = vec![0f64; n_bins];
    for &l in &extracted {
        c1[bin_of(l)] += 1.0;
    }
    for &l in &direct {
        c2[bin_of(l)] += 1.0;
    }
    let mut chi2 = 0.0;
    let mut dof = 0usize;
    for b in 0..n_bins {
        let tot = c1[b] + c2[b];
        if tot < 10.0 {
            continue;
        }
        // expected split is even: equal sample sizes
        let e1 = tot * n1 / (n1 + n2);
        let e2 = tot * n2 / (n1 + n2);
        chi2 += (c1[b] - e1) * (c1[b] - e1) / e1 + (c2[b] - e2) * (c2[b] - e2) / e2;
        dof += 1;
    }
    let dof = dof.saturating_sub(1).max(1);
    let chi2_critical = chi2_quantile(dof, z_sig);
    let pass = mean_z.abs() <= z_sig && chi2 <= chi2_critical;
    Ok(SubexcursionReport {
        h,
        i,
        j,
        q,
        samples,
        found: extracted.len() as u64,
        extracted_mean_len: m1,
        direct_mean_len: m2,
        mean_z,
        chi2,
        chi2_dof: dof,
        chi2_critical,
        pass,
    })
}

/// Exact mean length of the conditioned height-`h` excursion, by summing the
/// expected crossing counts of every `{i, i+1}` pair.
pub fn exact_mean_length(h: i64) -> BigRational {
    (0..h)
        .map(|i| crate::series::u_crossings(h, i).unwrap())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Axis, SignSequence};
    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    fn walk_of(values: Vec<i64>) -> Walk {
        Walk::from_values(0, values)
    }

    #[test]
    fn minimal_up_excursion() {
        let w = walk_of(vec![0, 1, 0]);
        let found = detect_excursions(&w, 0, 2).unwrap();
        assert_eq!(found.len(), 1);
        let e = &found[0];
        assert_eq!(e.direction, Direction::Up);
        assert_eq!(e.height(), 1);
        assert_eq!(e.length(), 2);
    }

    #[test]
    fn tent_has_no_height_two_proper_sub() {
        let w = walk_of(vec![0, 1, 2, 1, 0]);
        let found = detect_excursions(&w, 0, 4).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].height(), 2);
        // proper subexcursions all have height 1
        let nested = all_excursions(&w, 1, 3).unwrap();
        assert!(nested.iter().all(|e| e.height() < 2));
    }

    #[test]
    fn mixed_walk_maximal_set() {
        // 0 1 0 -1 0 1 2 1 0 : up[0,2], down[2,4], up[4,8]; also nested up[5,7]
        let w = walk_of(vec![0, 1, 0, -1, 0, 1, 2, 1, 0]);
        let found = detect_excursions(&w, 0, 8).unwrap();
        let spans: Vec<(i64, i64)> = found.iter().map(|e| (e.offset, e.end())).collect();
        assert_eq!(spans, vec![(0, 2), (2, 4), (4, 8)]);
        let all = all_excursions(&w, 0, 8).unwrap();
        assert!(all.iter().any(|e| (e.offset, e.end()) == (5, 7)));
    }

    /// Bracket transform of the signs driving an excursion: the bracket
    /// type comes from the raw sign (`+` parentheses, `-` square brackets)
    /// and a bracket opens on steps moving away from the base. Matched
    /// steps of an excursion always carry equal raw signs, so the string
    /// is meaningful exactly when the window is an excursion.
    fn bracket_string(signs: &[i8], steps: &[i8], away: i8) -> String {
        signs
            .iter()
            .zip(steps)
            .map(|(&s, &st)| match (s == 1, st == away) {
                (true, true) => '(',
                (true, false) => ')',
                (false, true) => '[',
                (false, false) => ']',
            })
            .collect()
    }

    fn well_formed(s: &str) -> bool {
        let mut stack = Vec::new();
        for c in s.chars() {
            match c {
                '(' | '[' => stack.push(c),
                ')' => {
                    if stack.pop() != Some('(') {
                        return false;
                    }
                }
                ']' => {
                    if stack.pop() != Some('[') {
                        return false;
                    }
                }
                _ => unreachable!(),
            }
        }
        stack.is_empty()
    }

    proptest! {
        /// Signs inside any detected excursion form a meaningful bracketing.
        #[test]
        fn excursion_brackets_are_balanced(raw in proptest::collection::vec(proptest::bool::ANY, 8..200)) {
            let signs: Vec<i8> = raw.iter().map(|&b| if b { 1 } else { -1 }).collect();
            let seq = SignSequence::from_values(Axis::Xi, 0, signs.clone());
            let w = Walk::from_signs(&seq).unwrap();
            for e in detect_excursions(&w, 0, w.hi).unwrap() {
                // signs and steps driving offset+1 .. end
                let window: Vec<i8> = (e.offset + 1..=e.end()).map(|n| seq.get(n)).collect();
                let steps: Vec<i8> = (e.offset + 1..=e.end())
                    .map(|n| (w.get(n) - w.get(n - 1)) as i8)
                    .collect();
                let away = match e.direction { Direction::Up => 1, Direction::Down => -1 };
                let s = bracket_string(&window, &steps, away);
                prop_assert!(well_formed(&s),
                    "excursion {:?} gave brackets {}", (e.offset, e.end()), s);
            }
        }

        /// Detected excursions satisfy their defining invariants.
        #[test]
        fn detected_excursions_are_valid(raw in proptest::collection::vec(proptest::bool::ANY, 8..200)) {
            let signs: Vec<i8> = raw.iter().map(|&b| if b { 1 } else { -1 }).collect();
            let seq = SignSequence::from_values(Axis::Xi, 0, signs);
            let w = Walk::from_signs(&seq).unwrap();
            for e in detect_excursions(&w, 0, w.hi).unwrap() {
                prop_assert!(e.length() % 2 == 0 && e.length() >= 2);
                prop_assert!(e.height() >= 1);
                prop_assert_eq!(e.values[0], e.base);
                prop_assert_eq!(*e.values.last().unwrap(), e.base);
                let strict = match e.direction {
                    Direction::Up => e.values[1..e.values.len()-1].iter().all(|&v| v > e.base),
                    Direction::Down => e.values[1..e.values.len()-1].iter().all(|&v| v < e.base),
                };
                prop_assert!(strict);
            }
        }
    }

    #[test]
    fn compatibility_rules() {
        let up = |offset, base, vals: Vec<i64>| Excursion {
            direction: Direction::Up,
            offset,
            base,
            values: vals,
        };
        // up, h=2, bases 0 and -2: 0 - 2 + 2 = 0 even -> compatible
        let a = up(0, 0, vec![0, 1, 2, 1, 0]);
        let b = up(0, -2, vec![-2, -1, 0, -1, -2]);
        assert!(is_compatible(&a, &b));
        // bases 0 and -1: parity flips
        let c = up(0, -1, vec![-1, 0, 1, 0, -1]);
        assert!(!is_compatible(&a, &c));
        // differing heights
        let d = up(0, 0, vec![0, 1, 0]);
        assert!(!is_compatible(&a, &d));
        // down pairs need odd parity
        let e = a.reflected();
        let f = up(0, 1, vec![1, 2, 3, 2, 1]).reflected();
        assert_eq!((e.base + f.base + 2).rem_euclid(2), 1);
        assert!(is_compatible(&e, &f));
    }

    #[test]
    fn birth_death_symmetric_is_linear() {
        let half = |_: i64| ratio(1, 2);
        for (x, a, b) in [(3, 1, 6), (1, 1, 6), (6, 1, 6), (4, 2, 9)] {
            let p = birth_death_hitting(&half, &half, x, a, b).unwrap();
            assert_eq!(p, ratio(b - x, b - a));
        }
    }

    #[test]
    fn birth_death_absorbing_endpoints() {
        let up = |i: i64| p_there_up(i);
        let down = |i: i64| p_there_down(i);
        assert_eq!(
            birth_death_hitting(&up, &down, 2, 2, 7).unwrap(),
            BigRational::one()
        );
        assert_eq!(
            birth_death_hitting(&up, &down, 7, 2, 7).unwrap(),
            BigRational::zero()
        );
    }

    #[test]
    fn there_chain_phi_closed_form() {
        // phi_there(x) = 2 (1 - 1/x): check through the hitting formula
        // P_x(T_a < T_b) = (phi(b) - phi(x)) / (phi(b) - phi(a)).
        let up = |i: i64| p_there_up(i);
        let down = |i: i64| p_there_down(i);
        let phi = |x: i64| ratio(2 * (x - 1), x);
        for (x, a, b) in [(2, 1, 5), (3, 2, 8), (5, 1, 9)] {
            let got = birth_death_hitting(&up, &down, x, a, b).unwrap();
            let want = (phi(b) - phi(x)) / (phi(b) - phi(a));
            assert_eq!(got, want);
        }
    }

    #[test]
    fn hitting_formula_matches_martingale_route() {
        // Lemma formula vs the generic chain computation: two algebraic routes.
        for h in 2..=9i64 {
            for j in 1..=h {
                for i in 1..=j {
                    let direct = hit_prob_there(j, i, h).unwrap();
                    if j == h && i < h {
                        assert_eq!(direct, BigRational::zero());
                        continue;
                    }
                    let up = |s: i64| p_there_up(s);
                    let down = |s: i64| p_there_down(s);
                    // states shifted by +... chain lives on 1..; T_i vs T_h from j
                    let via_phi = birth_death_hitting(&up, &down, j, i, h).unwrap();
                    assert_eq!(direct, via_phi, "h={h} j={j} i={i}");
                }
            }
        }
    }

    #[test]
    fn hit_prob_spot_values() {
        assert_eq!(hit_prob_there(2, 2, 4).unwrap(), BigRational::one());
        assert_eq!(hit_prob_there(2, 1, 4).unwrap(), ratio(1, 3));
        // back: h=2, i=1, j=2 -> 1/4
        assert_eq!(hit_prob_back(1, 2, 2).unwrap(), ratio(1, 4));
        assert!(hit_prob_there(5, 1, 4).is_err());
        assert!(hit_prob_back(3, 2, 4).is_err());
    }

    #[test]
    fn height_one_excursion_is_forced() {
        let mut rng = CounterRng::new(1, 0);
        for _ in 0..50 {
            let e = sample_excursion(1, Direction::Up, &mut rng);
            assert_eq!(e.values, vec![0, 1, 0]);
        }
    }

    #[test]
    fn height_two_length_four_probability() {
        let mut rng = CounterRng::new(7, 1);
        let n = 100_000;
        let short = (0..n)
            .filter(|_| sample_excursion(2, Direction::Up, &mut rng).length() == 4)
            .count();
        let p = short as f64 / n as f64;
        let sigma = (0.75 * 0.25 / n as f64).sqrt();
        assert!((p - 0.75).abs() < 3.0 * sigma, "p = {p}");
    }

    #[test]
    fn height_two_mean_length() {
        let mut rng = CounterRng::new(11, 2);
        let n = 100_000u64;
        let total: i64 = (0..n)
            .map(|_| sample_excursion(2, Direction::Up, &mut rng).length())
            .sum();
        let mean = total as f64 / n as f64;
        // length = 4 + 2 G, G geometric(3/4): mean 14/3, var of length = 4 Var G = 4 * (1/4)/(9/16)
        let var = 4.0 * (0.25 / (0.75 * 0.75));
        let sigma = (var / n as f64).sqrt();
        assert!((mean - 14.0 / 3.0).abs() < 3.0 * sigma, "mean = {mean}");
    }

    #[test]
    fn sampled_invariants_and_reflection() {
        let mut rng = CounterRng::new(3, 9);
        for h in 1..=12 {
            for _ in 0..200 {
                let e = sample_excursion(h, Direction::Up, &mut rng);
                assert_eq!(e.height(), h);
                assert_eq!(e.length() % 2, 0);
                assert!(e.values[1..e.values.len() - 1].iter().all(|&v| v > 0));
                let d = sample_excursion(h, Direction::Down, &mut rng);
                assert_eq!(d.height(), h);
                assert!(d.values[1..d.values.len() - 1].iter().all(|&v| v < 0));
            }
        }
    }

    #[test]
    fn exact_mean_length_small_h() {
        assert_eq!(exact_mean_length(1), ratio(2, 1));
        assert_eq!(exact_mean_length(2), ratio(14, 3));
    }

    #[test]
    fn mean_total_visits_is_mean_length_plus_one() {
        // positions vs steps accounting, checked against the sampler
        let mut rng = CounterRng::new(5, 4);
        let h = 5;
        let n = 50_000;
        let total_positions: i64 = (0..n)
            .map(|_| sample_excursion(h, Direction::Up, &mut rng).values.len() as i64)
            .sum();
        let mean_positions = total_positions as f64 / n as f64;
        let want = exact_mean_length(h).to_f64().unwrap() + 1.0;
        assert!(
            (mean_positions - want).abs() < 0.15,
            "{mean_positions} vs {want}"
        );
    }

    #[test]
    fn subexcursion_check_trivial_heights() {
        // h=3, i=1, j=2: all extracted subexcursions have length 2
        let mut host = CounterRng::new(21, 0);
        let mut direct = CounterRng::new(21, 1);
        let rep = subexcursion_distribution_check(3, 1, 2, 1, 20_000, 3.0, &mut host, &mut direct)
            .unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.extracted_mean_len, 2.0);
        assert_eq!(rep.direct_mean_len, 2.0);
    }

    #[test]
    fn subexcursion_check_identity_case() {
        // h=2, i=0, j=2: the whole excursion
        let mut host = CounterRng::new(22, 0);
        let mut direct = CounterRng::new(22, 1);
        let rep = subexcursion_distribution_check(2, 0, 2, 1, 20_000, 3.0, &mut host, &mut direct)
            .unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.found, rep.samples);
    }

    #[test]
    fn subexcursion_check_height_two_law() {
        // h=4, i=1, j=3: length law must match a direct height-2 excursion
        let mut host = CounterRng::new(23, 0);
        let mut direct = CounterRng::new(23, 1);
        let rep = subexcursion_distribution_check(4, 1, 3, 1, 100_000, 3.0, &mut host, &mut direct)
            .unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!((rep.direct_mean_len - 14.0 / 3.0).abs() < 0.1);
    }

    #[test]
    fn sub_up_excursion_extraction() {
        let e = Excursion {
            direction: Direction::Up,
            offset: 0,
            base: 0,
            values: vec![0, 1, 2, 1, 2, 3, 2, 1, 0],
        };
        // 1 -> 2 -> 1 intervals with max exactly 2: [1,3]
        let subs = sub_up_excursions(&e, 1, 2);
        assert_eq!(subs.len(), 1);
        assert_eq!(subs[0].values, vec![1, 2, 1]);
        // 1 -> 3 -> 1: [3,7]
        let subs = sub_up_excursions(&e, 1, 3);
        assert_eq!(subs.len(), 1);
        assert_eq!(subs[0].values, vec![1, 2, 3, 2, 1]);
        // 2 -> 1 -> 2 down intervals: [2,4]
        let subs = sub_down_excursions(&e, 1, 2);
        assert_eq!(subs.len(), 1);
        assert_eq!(subs[0].values, vec![2, 1, 2]);
        assert_eq!(subs[0].direction, Direction::Down);
        assert!(sub_down_excursions(&e, 2, 3).is_empty());
    }

    #[test]
    fn subexcursion_check_reports_insufficient_data() {
        // asking for the 40th subexcursion of a rare type
        let mut host = CounterRng::new(30, 0);
        let mut direct = CounterRng::new(30, 1);
        let err = subexcursion_distribution_check(3, 2, 3, 40, 500, 3.0, &mut host, &mut direct)
            .unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)));
    }
}
