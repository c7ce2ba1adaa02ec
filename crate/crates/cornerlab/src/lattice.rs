//! Sign sequences, the derived walks, the corner edge rule, and the height
//! function computed two independent ways.
//!
//! A configuration is determined by two +/-1 sequences xi (columns) and eta
//! (rows). Column `n` keeps its "even" vertical edges `{(n,2k),(n,2k+1)}`
//! when `xi(n) = +1` and the odd ones otherwise; rows work the same way from
//! eta. Every vertex then has exactly one vertical and one horizontal edge,
//! so the configuration is 2-regular and splits into cycles.

use crate::error::{Error, Result};
use crate::rng::RngKey;
use serde::{Deserialize, Serialize};

/// Which of the two sign sequences an index refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    /// xi: governs vertical edges, one sign per column.
    Xi,
    /// eta: governs horizontal edges, one sign per row.
    Eta,
}

impl Axis {
    fn stream(self) -> u64 {
        match self {
            Axis::Xi => 0x5849, // "Xi"
            Axis::Eta => 0x4554,
        }
    }
}

/// How the per-index probability of a `+1` sign is derived.
///
/// `Sign(p)` biases the raw signs themselves. `WalkStep(p)` biases the
/// derived walk steps instead: the step at index `n` is `(-1)^(n+1) sign(n)`,
/// so a walk with upward drift `p` corresponds to signs whose bias alternates
/// between `p` (odd index) and `1-p` (even index). At `p = 1/2` the two modes
/// generate bit-identical sequences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BiasMode {
    Sign(f64),
    WalkStep(f64),
}

impl BiasMode {
    pub fn p(self) -> f64 {
        match self {
            BiasMode::Sign(p) | BiasMode::WalkStep(p) => p,
        }
    }

    fn plus_probability_at(self, index: i64) -> f64 {
        match self {
            BiasMode::Sign(p) => p,
            BiasMode::WalkStep(p) => {
                if index.rem_euclid(2) == 1 {
                    p
                } else {
                    1.0 - p
                }
            }
        }
    }
}

/// Map an i64 index into the RNG counter domain.
#[inline]
fn zigzag(n: i64) -> u64 {
    ((n << 1) ^ (n >> 63)) as u64
}

/// A window of +/-1 signs over an integer interval, generated index-keyed so
/// that enlarging the range never changes previously generated values.
#[derive(Debug, Clone)]
pub struct SignSequence {
    pub axis: Axis,
    pub lo: i64,
    pub hi: i64,
    pub bias: BiasMode,
    pub seed: u64,
    values: Vec<i8>,
}

impl SignSequence {
    pub fn generate(axis: Axis, lo: i64, hi: i64, bias: BiasMode, seed: u64) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidArgument(format!(
                "empty sign range [{lo}, {hi}]"
            )));
        }
        let p = bias.p();
        if !(p > 0.0 && p < 1.0) {
            // The degenerate endpoints are allowed only exactly.
            if p != 0.0 && p != 1.0 {
                return Err(Error::InvalidArgument(format!("bias {p} outside [0, 1]")));
            }
        }
        let key = RngKey::new(seed).substream(axis.stream());
        let values = (lo..=hi)
            .map(|n| {
                if key.unit(zigzag(n)) < bias.plus_probability_at(n) {
                    1
                } else {
                    -1
                }
            })
            .collect();
        Ok(SignSequence {
            axis,
            lo,
            hi,
            bias,
            seed,
            values,
        })
    }

    /// Constant sequence, mostly for tests and small fixtures.
    pub fn constant(axis: Axis, lo: i64, hi: i64, sign: i8) -> Self {
        assert!(sign == 1 || sign == -1);
        SignSequence {
            axis,
            lo,
            hi,
            bias: BiasMode::Sign(if sign == 1 { 1.0 } else { 0.0 }),
            seed: 0,
            values: vec![sign; (hi - lo + 1) as usize],
        }
    }

    pub fn from_values(axis: Axis, lo: i64, values: Vec<i8>) -> Self {
        assert!(!values.is_empty());
        assert!(values.iter().all(|&v| v == 1 || v == -1));
        let hi = lo + values.len() as i64 - 1;
        SignSequence {
            axis,
            lo,
            hi,
            bias: BiasMode::Sign(0.5),
            seed: 0,
            values,
        }
    }

    #[inline]
    pub fn get(&self, n: i64) -> i8 {
        debug_assert!(n >= self.lo && n <= self.hi, "sign index {n} out of range");
        self.values[(n - self.lo) as usize]
    }

    pub fn contains(&self, n: i64) -> bool {
        n >= self.lo && n <= self.hi
    }

    /// The alternating transform `sign*(n) = (-1)^(n+1) sign(n)`; this is the
    /// walk step from `n-1` to `n`.
    #[inline]
    pub fn star(&self, n: i64) -> i64 {
        let s = self.get(n) as i64;
        if n.rem_euclid(2) == 1 {
            s
        } else {
            -s
        }
    }
}

/// An integer walk pinned to 0 at index 0, with +/-1 steps.
#[derive(Debug, Clone)]
pub struct Walk {
    pub lo: i64,
    pub hi: i64,
    values: Vec<i64>,
}

impl Walk {
    /// Build the walk from a sign window by the alternating-sign transform:
    /// `X_n = sum_{j=1..n} sign*(j)` for `n > 0` and the mirrored sum below 0.
    pub fn from_signs(signs: &SignSequence) -> Result<Self> {
        if !(signs.lo <= 0 && signs.hi >= 0) {
            return Err(Error::InvalidArgument(format!(
                "walk needs 0 in the sign range, got [{}, {}]",
                signs.lo, signs.hi
            )));
        }
        let len = (signs.hi - signs.lo + 1) as usize;
        let mut values = vec![0i64; len];
        let at = |n: i64| (n - signs.lo) as usize;
        for n in 1..=signs.hi {
            values[at(n)] = values[at(n - 1)] + signs.star(n);
        }
        // X_{n-1} = X_n - sign*(n), walking left from the origin.
        for n in (signs.lo..0).rev() {
            values[at(n)] = values[at(n + 1)] - signs.star(n + 1);
        }
        Ok(Walk {
            lo: signs.lo,
            hi: signs.hi,
            values,
        })
    }

    pub fn from_values(lo: i64, values: Vec<i64>) -> Self {
        let hi = lo + values.len() as i64 - 1;
        for w in values.windows(2) {
            assert_eq!((w[1] - w[0]).abs(), 1, "walk steps must be +/-1");
        }
        Walk { lo, hi, values }
    }

    #[inline]
    pub fn get(&self, n: i64) -> i64 {
        debug_assert!(n >= self.lo && n <= self.hi, "walk index {n} out of range");
        self.values[(n - self.lo) as usize]
    }

    pub fn contains(&self, n: i64) -> bool {
        n >= self.lo && n <= self.hi
    }

    pub fn slice(&self, a: i64, c: i64) -> &[i64] {
        &self.values[(a - self.lo) as usize..=(c - self.lo) as usize]
    }

    pub fn max_abs(&self) -> i64 {
        self.values.iter().map(|v| v.abs()).max().unwrap_or(0)
    }
}

/// A dual face. `(n, m)` stands for the unit square `[n, n+1] x [m, m+1]`,
/// i.e. the face centered at `(n + 1/2, m + 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Face {
    pub n: i64,
    pub m: i64,
}

impl Face {
    pub fn new(n: i64, m: i64) -> Self {
        Face { n, m }
    }

    /// Chessboard coloring: black iff `n + m` is even.
    pub fn is_black(self) -> bool {
        (self.n + self.m).rem_euclid(2) == 0
    }
}

/// A lattice vertex.
pub type Vertex = (i64, i64);

/// A unit lattice edge, named by its lower-left endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Edge {
    /// `{(x, y), (x, y+1)}`
    V { x: i64, y: i64 },
    /// `{(x, y), (x+1, y)}`
    H { x: i64, y: i64 },
}

impl Edge {
    pub fn endpoints(self) -> (Vertex, Vertex) {
        match self {
            Edge::V { x, y } => ((x, y), (x, y + 1)),
            Edge::H { x, y } => ((x, y), (x + 1, y)),
        }
    }

    pub fn between(a: Vertex, b: Vertex) -> Edge {
        if a.0 == b.0 {
            Edge::V {
                x: a.0,
                y: a.1.min(b.1),
            }
        } else {
            debug_assert_eq!(a.1, b.1);
            Edge::H {
                x: a.0.min(b.0),
                y: a.1,
            }
        }
    }

    /// The two faces this edge separates.
    pub fn faces(self) -> (Face, Face) {
        match self {
            // vertical edge at x: faces (x-1, y) and (x, y)
            Edge::V { x, y } => (Face::new(x - 1, y), Face::new(x, y)),
            // horizontal edge at y: faces (x, y-1) and (x, y)
            Edge::H { x, y } => (Face::new(x, y - 1), Face::new(x, y)),
        }
    }
}

/// Serializable description of a finite window; everything else is derived
/// deterministically from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub seed: u64,
    pub bias_xi: f64,
    pub bias_eta: f64,
    /// inclusive vertex range in x
    pub x_range: (i64, i64),
    /// inclusive vertex range in y
    pub y_range: (i64, i64),
    /// Bias the walk steps instead of the raw signs.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub walk_bias: bool,
}

impl WindowSpec {
    pub fn square(seed: u64, half: i64) -> Self {
        WindowSpec {
            seed,
            bias_xi: 0.5,
            bias_eta: 0.5,
            x_range: (-half, half),
            y_range: (-half, half),
            walk_bias: false,
        }
    }

    pub fn with_half(&self, half: i64) -> Self {
        let mut s = self.clone();
        s.x_range = (-half, half);
        s.y_range = (-half, half);
        s
    }

    pub fn build(&self) -> Result<LatticeWindow> {
        let mode = |p| {
            if self.walk_bias {
                BiasMode::WalkStep(p)
            } else {
                BiasMode::Sign(p)
            }
        };
        let xi = SignSequence::generate(
            Axis::Xi,
            self.x_range.0,
            self.x_range.1,
            mode(self.bias_xi),
            self.seed,
        )?;
        let eta = SignSequence::generate(
            Axis::Eta,
            self.y_range.0,
            self.y_range.1,
            mode(self.bias_eta),
            self.seed,
        )?;
        LatticeWindow::new(xi, eta)
    }
}

/// A finite window of a configuration: the two sign sequences with their
/// derived walks. Edges are never materialized; presence is computed on
/// demand from the signs.
#[derive(Debug, Clone)]
pub struct LatticeWindow {
    pub xi: SignSequence,
    pub eta: SignSequence,
    pub x: Walk,
    pub y: Walk,
}

impl LatticeWindow {
    pub fn new(xi: SignSequence, eta: SignSequence) -> Result<Self> {
        let x = Walk::from_signs(&xi)?;
        let y = Walk::from_signs(&eta)?;
        Ok(LatticeWindow { xi, eta, x, y })
    }

    pub fn x_lo(&self) -> i64 {
        self.x.lo
    }
    pub fn x_hi(&self) -> i64 {
        self.x.hi
    }
    pub fn y_lo(&self) -> i64 {
        self.y.lo
    }
    pub fn y_hi(&self) -> i64 {
        self.y.hi
    }

    pub fn contains_vertex(&self, v: Vertex) -> bool {
        self.x.contains(v.0) && self.y.contains(v.1)
    }

    /// Faces `(n, m)` with both corners in the window.
    pub fn contains_face(&self, f: Face) -> bool {
        f.n >= self.x_lo() && f.n < self.x_hi() && f.m >= self.y_lo() && f.m < self.y_hi()
    }

    fn check_edge(&self, e: Edge) -> Result<()> {
        let (a, b) = e.endpoints();
        if self.contains_vertex(a) && self.contains_vertex(b) {
            Ok(())
        } else {
            Err(Error::OutOfRange(format!("edge {e:?} outside window")))
        }
    }

    /// The corner rule. A vertical edge `{(x,y),(x,y+1)}` is kept iff
    /// `xi(x) = (-1)^y` (even edges for `+1` columns, odd edges for `-1`);
    /// horizontal edges follow eta the same way.
    pub fn edge_present(&self, e: Edge) -> Result<bool> {
        self.check_edge(e)?;
        Ok(self.edge_present_unchecked(e))
    }

    #[inline]
    pub fn edge_present_unchecked(&self, e: Edge) -> bool {
        match e {
            Edge::V { x, y } => {
                let want = if y.rem_euclid(2) == 0 { 1 } else { -1 };
                self.xi.get(x) == want
            }
            Edge::H { x, y } => {
                let want = if x.rem_euclid(2) == 0 { 1 } else { -1 };
                self.eta.get(y) == want
            }
        }
    }

    /// The unique vertical neighbor of `v` along a present edge.
    #[inline]
    pub fn vertical_neighbor(&self, v: Vertex) -> Vertex {
        // edge up from (x, y) present iff xi(x) = (-1)^y
        let up = if v.1.rem_euclid(2) == 0 { 1 } else { -1 };
        if self.xi.get(v.0) as i64 == up {
            (v.0, v.1 + 1)
        } else {
            (v.0, v.1 - 1)
        }
    }

    /// The unique horizontal neighbor of `v` along a present edge.
    #[inline]
    pub fn horizontal_neighbor(&self, v: Vertex) -> Vertex {
        let right = if v.0.rem_euclid(2) == 0 { 1 } else { -1 };
        if self.eta.get(v.1) as i64 == right {
            (v.0 + 1, v.1)
        } else {
            (v.0 - 1, v.1)
        }
    }

    /// Degree of a vertex counting only edges inside the window.
    pub fn degree_in_window(&self, v: Vertex) -> usize {
        let mut d = 0;
        let vn = self.vertical_neighbor(v);
        if self.contains_vertex(vn) {
            d += 1;
        }
        let hn = self.horizontal_neighbor(v);
        if self.contains_vertex(hn) {
            d += 1;
        }
        d
    }

    fn check_face(&self, f: Face) -> Result<()> {
        if self.contains_face(f) {
            Ok(())
        } else {
            Err(Error::OutOfRange(format!("face {f:?} outside window")))
        }
    }

    /// The doubled height `X_n + Y_m` of a face.
    pub fn tilde_height(&self, f: Face) -> Result<i64> {
        self.check_face(f)?;
        Ok(self.tilde_height_unchecked(f))
    }

    #[inline]
    pub fn tilde_height_unchecked(&self, f: Face) -> i64 {
        self.x.get(f.n) + self.y.get(f.m)
    }

    /// The canonical height of a face. The rounding convention is the
    /// ceiling; it is the one that agrees with `height_by_path`, which is
    /// pinned by a regression test.
    pub fn height(&self, f: Face) -> Result<i64> {
        self.check_face(f)?;
        Ok(self.height_unchecked(f))
    }

    #[inline]
    pub fn height_unchecked(&self, f: Face) -> i64 {
        // ceil(t / 2) for possibly negative t
        let t = self.tilde_height_unchecked(f);
        (t + 1).div_euclid(2)
    }

    /// Height by the defining rule: walk dual faces from `(0,0)` to `f`,
    /// adding 1 whenever a present edge is crossed from its black side to
    /// its white side and subtracting 1 the other way.
    pub fn height_by_path(&self, f: Face) -> Result<i64> {
        self.check_face(f)?;
        let origin = Face::new(0, 0);
        if !self.contains_face(origin) {
            return Err(Error::OutOfRange(
                "window does not contain the origin face".into(),
            ));
        }
        let mut h = 0i64;
        let mut cur = origin;
        // L-shaped monotone path: first along x, then along y.
        while cur.n != f.n {
            let step = (f.n - cur.n).signum();
            let next = Face::new(cur.n + step, cur.m);
            // crossing the vertical edge between cur and next
            let e = Edge::V {
                x: cur.n.max(next.n),
                y: cur.m,
            };
            if self.edge_present_unchecked(e) {
                h += if cur.is_black() { 1 } else { -1 };
            }
            cur = next;
        }
        while cur.m != f.m {
            let step = (f.m - cur.m).signum();
            let next = Face::new(cur.n, cur.m + step);
            let e = Edge::H {
                x: cur.n,
                y: cur.m.max(next.m),
            };
            if self.edge_present_unchecked(e) {
                h += if cur.is_black() { 1 } else { -1 };
            }
            cur = next;
        }
        Ok(h)
    }

    /// Same, but walking y first; used to exercise path independence.
    pub fn height_by_path_y_first(&self, f: Face) -> Result<i64> {
        self.check_face(f)?;
        let mut h = 0i64;
        let mut cur = Face::new(0, 0);
        while cur.m != f.m {
            let step = (f.m - cur.m).signum();
            let next = Face::new(cur.n, cur.m + step);
            let e = Edge::H {
                x: cur.n,
                y: cur.m.max(next.m),
            };
            if self.edge_present_unchecked(e) {
                h += if cur.is_black() { 1 } else { -1 };
            }
            cur = next;
        }
        while cur.n != f.n {
            let step = (f.n - cur.n).signum();
            let next = Face::new(cur.n + step, cur.m);
            let e = Edge::V {
                x: cur.n.max(next.n),
                y: cur.m,
            };
            if self.edge_present_unchecked(e) {
                h += if cur.is_black() { 1 } else { -1 };
            }
            cur = next;
        }
        Ok(h)
    }
}
