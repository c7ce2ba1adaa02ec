//! Build the contour cycle of a compatible pair two independent ways: as
//! the outer boundary of the positive face component spanned by the cross of
//! marginal extrema, and by the Two Cautious Hikers path rule run piecewise
//! between the passage touch points. The two constructions are checked
//! against each other edge for edge.

use crate::contour::{Cycle, Rect};
use crate::error::{Error, Result};
use crate::excursion::{CompatiblePair, Direction};
use crate::lattice::{Edge, Vertex};
use std::collections::{BTreeSet, HashMap, VecDeque};

/// Value segments of the pair in build coordinates, always in up form: a
/// down pair `(X, Y)` builds the same edge set as the up pair `(-X, 1-Y)`,
/// which swaps the below-level and above-level face sets without moving the
/// index grid.
struct UpForm {
    xs: Vec<i64>,
    ys: Vec<i64>,
    a: i64,
    b: i64,
    h: i64,
}

impl UpForm {
    fn new(pair: &CompatiblePair) -> Self {
        let (first, second) = (&pair.first, &pair.second);
        let h = pair.height();
        let (xs, ys) = match pair.direction() {
            Direction::Up => (first.values.clone(), second.values.clone()),
            Direction::Down => (
                first.values.iter().map(|&v| -v).collect(),
                second.values.iter().map(|&v| 1 - v).collect(),
            ),
        };
        UpForm {
            a: first.offset,
            b: second.offset,
            h,
            xs,
            ys,
        }
    }

    #[inline]
    fn x(&self, n: i64) -> i64 {
        self.xs[(n - self.a) as usize]
    }

    #[inline]
    fn y(&self, m: i64) -> i64 {
        self.ys[(m - self.b) as usize]
    }

    fn c(&self) -> i64 {
        self.a + self.xs.len() as i64 - 1
    }

    fn d(&self) -> i64 {
        self.b + self.ys.len() as i64 - 1
    }

    /// exterior level sum: faces with `x + y = tau` sit just outside the
    /// contour, `tau + 1` just inside
    fn tau(&self) -> i64 {
        self.x(self.a) + self.y(self.b) + self.h
    }

    fn x_maxima(&self) -> Vec<i64> {
        let top = self.x(self.a) + self.h;
        (self.a..=self.c()).filter(|&n| self.x(n) == top).collect()
    }

    fn y_maxima(&self) -> Vec<i64> {
        let top = self.y(self.b) + self.h;
        (self.b..=self.d()).filter(|&m| self.y(m) == top).collect()
    }
}

/// Expected enclosing rectangle of the built cycle.
pub fn pair_rect(pair: &CompatiblePair) -> Rect {
    Rect {
        a: pair.first.offset,
        c: pair.first.end(),
        b: pair.second.offset,
        d: pair.second.end(),
    }
}

/// Positive-set construction: flood the face component of the extremal
/// cross in `{(n, m) : X_n + Y_m > tau}` and return its outer boundary.
pub fn cycle_from_pair_trace(pair: &CompatiblePair) -> Result<Cycle> {
    let f = UpForm::new(pair);
    let tau = f.tau();
    let (a, b, c, d) = (f.a, f.b, f.c(), f.d());
    let w = (c - a - 1).max(0) as usize;
    let hgt = (d - b - 1).max(0) as usize;
    if w == 0 || hgt == 0 {
        return Err(Error::InvalidArgument("degenerate pair rectangle".into()));
    }
    // face (n, m) for n in [a+1, c-1], m in [b+1, d-1]
    let idx = |n: i64, m: i64| ((n - a - 1) as usize) * hgt + (m - b - 1) as usize;
    let positive = |n: i64, m: i64| f.x(n) + f.y(m) > tau;

    let seed_n = f.x_maxima()[0];
    let seed_m = b + 1;
    debug_assert!(positive(seed_n, seed_m));

    let mut in_comp = vec![false; w * hgt];
    let mut queue = VecDeque::new();
    in_comp[idx(seed_n, seed_m)] = true;
    queue.push_back((seed_n, seed_m));
    while let Some((n, m)) = queue.pop_front() {
        for (nn, mm) in [(n - 1, m), (n + 1, m), (n, m - 1), (n, m + 1)] {
            if nn > a && nn < c && mm > b && mm < d && positive(nn, mm) && !in_comp[idx(nn, mm)] {
                in_comp[idx(nn, mm)] = true;
                queue.push_back((nn, mm));
            }
        }
    }

    // Boundary edges: between a component face and a non-component
    // neighbor (or the rectangle frame).
    let mut edges: BTreeSet<Edge> = BTreeSet::new();
    let mut lowest: Option<(i64, i64)> = None; // (m, n) lexicographic
    for n in (a + 1)..c {
        for m in (b + 1)..d {
            if !in_comp[idx(n, m)] {
                continue;
            }
            if lowest.map_or(true, |(lm, ln)| (m, n) < (lm, ln)) {
                lowest = Some((m, n));
            }
            let inside =
                |nn: i64, mm: i64| nn > a && nn < c && mm > b && mm < d && in_comp[idx(nn, mm)];
            if !inside(n - 1, m) {
                edges.insert(Edge::V { x: n, y: m });
            }
            if !inside(n + 1, m) {
                edges.insert(Edge::V { x: n + 1, y: m });
            }
            if !inside(n, m - 1) {
                edges.insert(Edge::H { x: n, y: m });
            }
            if !inside(n, m + 1) {
                edges.insert(Edge::H { x: n, y: m + 1 });
            }
        }
    }

    let (lm, ln) = lowest.expect("component is nonempty");
    // the bottom edge of the lowest-leftmost face is on the outer boundary
    let start = Edge::H { x: ln, y: lm };
    let outer = walk_edge_cycle(&edges, start)?;
    Ok(Cycle::from_vertices(outer))
}

/// Walk the unique simple cycle through `start` inside an edge set whose
/// vertices all have degree at most two.
fn walk_edge_cycle(edges: &BTreeSet<Edge>, start: Edge) -> Result<Vec<Vertex>> {
    let mut at: HashMap<Vertex, Vec<Edge>> = HashMap::new();
    for &e in edges {
        let (u, v) = e.endpoints();
        at.entry(u).or_default().push(e);
        at.entry(v).or_default().push(e);
    }
    for (v, es) in &at {
        if es.len() > 2 {
            return Err(Error::CorruptConfiguration(format!(
                "vertex {v:?} carries {} boundary edges",
                es.len()
            )));
        }
    }
    let (v0, v1) = start.endpoints();
    let mut vertices = vec![v0];
    let mut prev = v0;
    let mut cur = v1;
    while cur != v0 {
        vertices.push(cur);
        let es = &at[&cur];
        if es.len() != 2 {
            return Err(Error::CorruptConfiguration(format!(
                "open boundary at {cur:?}"
            )));
        }
        let next = es
            .iter()
            .map(|e| {
                let (u, v) = e.endpoints();
                if u == cur {
                    v
                } else {
                    u
                }
            })
            .find(|&v| v != prev)
            .ok_or_else(|| Error::CorruptConfiguration("boundary dead end".into()))?;
        prev = cur;
        cur = next;
        if vertices.len() > edges.len() + 1 {
            return Err(Error::CorruptConfiguration("boundary walk ran away".into()));
        }
    }
    Ok(vertices)
}

/// One leg of the piecewise path: the restricted index rectangle and the
/// start and end pairs.
struct Piece {
    n_range: (i64, i64),
    m_range: (i64, i64),
    start: (i64, i64),
    end: (i64, i64),
}

/// Two Cautious Hikers construction: decompose both excursions at their
/// maxima, walk the level set between consecutive touch points with the
/// cautious path rule, and mark the boundary edges along each path.
pub fn cycle_from_pair_hikers(pair: &CompatiblePair) -> Result<Cycle> {
    let f = UpForm::new(pair);
    let (a, b, c, d) = (f.a, f.b, f.c(), f.d());
    let mx = f.x_maxima();
    let my = f.y_maxima();
    let (m1, ms) = (mx[0], *mx.last().unwrap());
    let (n1, nt) = (my[0], *my.last().unwrap());

    let mut pieces = Vec::new();
    // southwest corner: left touch row n1 down to bottom touch column m1
    pieces.push(Piece {
        n_range: (a, m1),
        m_range: (b, n1),
        start: (a, n1),
        end: (m1, b),
    });
    // bottom strip between consecutive passage columns
    for w in mx.windows(2) {
        pieces.push(Piece {
            n_range: (w[0], w[1]),
            m_range: (b, n1),
            start: (w[0], b),
            end: (w[1], b),
        });
    }
    // southeast corner
    pieces.push(Piece {
        n_range: (ms, c),
        m_range: (b, n1),
        start: (ms, b),
        end: (c, n1),
    });
    // right strip between consecutive passage rows
    for w in my.windows(2) {
        pieces.push(Piece {
            n_range: (ms, c),
            m_range: (w[0], w[1]),
            start: (c, w[0]),
            end: (c, w[1]),
        });
    }
    // northeast corner
    pieces.push(Piece {
        n_range: (ms, c),
        m_range: (nt, d),
        start: (c, nt),
        end: (ms, d),
    });
    // top strip, walked right to left
    for w in mx.windows(2).rev() {
        pieces.push(Piece {
            n_range: (w[0], w[1]),
            m_range: (nt, d),
            start: (w[1], d),
            end: (w[0], d),
        });
    }
    // northwest corner
    pieces.push(Piece {
        n_range: (a, m1),
        m_range: (nt, d),
        start: (m1, d),
        end: (a, nt),
    });
    // left strip, walked top to bottom
    for w in my.windows(2).rev() {
        pieces.push(Piece {
            n_range: (a, m1),
            m_range: (w[0], w[1]),
            start: (a, w[1]),
            end: (a, w[0]),
        });
    }

    let mut edges: BTreeSet<Edge> = BTreeSet::new();
    for piece in &pieces {
        let path = cautious_walk(&f, piece)?;
        mark_path_edges(&f, &path, &mut edges);
    }

    // The paths skirt the cycle from outside, so they also see the edges of
    // foreign same-level cycles sitting in bays of this one. Those fragments
    // are vertex-disjoint from the cycle (no lattice vertex carries more
    // than two level-boundary edges) and never close, so peeling dangling
    // vertices removes them.
    peel_open_arcs(&mut edges);

    // A guaranteed cycle edge: the left passage-row touch.
    let seed = Edge::V { x: a + 1, y: my[0] };
    if !edges.contains(&seed) {
        return Err(Error::AlgorithmViolation(
            "left touch edge missing from the marked set".into(),
        ));
    }
    let vertices = walk_edge_cycle(&edges, seed)
        .map_err(|e| Error::AlgorithmViolation(format!("marked edges do not close: {e}")))?;
    if vertices.len() != edges.len() {
        return Err(Error::AlgorithmViolation(format!(
            "marked edges form more than one cycle: walked {} of {}",
            vertices.len(),
            edges.len()
        )));
    }
    Ok(Cycle::from_vertices(vertices))
}

fn peel_open_arcs(edges: &mut BTreeSet<Edge>) {
    let mut degree: HashMap<Vertex, u32> = HashMap::new();
    for &e in edges.iter() {
        let (u, v) = e.endpoints();
        *degree.entry(u).or_default() += 1;
        *degree.entry(v).or_default() += 1;
    }
    let mut stack: Vec<Vertex> = degree
        .iter()
        .filter(|&(_, &d)| d == 1)
        .map(|(&v, _)| v)
        .collect();
    while let Some(v) = stack.pop() {
        if degree.get(&v) != Some(&1) {
            continue;
        }
        // the unique incident edge
        let incident = [
            Edge::V { x: v.0, y: v.1 },
            Edge::V { x: v.0, y: v.1 - 1 },
            Edge::H { x: v.0, y: v.1 },
            Edge::H { x: v.0 - 1, y: v.1 },
        ]
        .into_iter()
        .find(|e| edges.contains(e));
        if let Some(e) = incident {
            edges.remove(&e);
            let (u, w) = e.endpoints();
            for end in [u, w] {
                let d = degree.entry(end).or_default();
                *d = d.saturating_sub(1);
                if *d == 1 {
                    stack.push(end);
                }
            }
        }
    }
}

/// The mixed face of the step `p -> q` that lies one above the level: of
/// the two faces `(p.n, q.m)` and `(q.n, p.m)`, exactly one has sum
/// `tau + 1`.
#[inline]
fn face_above(f: &UpForm, tau: i64, p: (i64, i64), q: (i64, i64)) -> (i64, i64) {
    if f.x(p.0) + f.y(q.1) == tau + 1 {
        (p.0, q.1)
    } else {
        debug_assert_eq!(f.x(q.0) + f.y(p.1), tau + 1);
        (q.0, p.1)
    }
}

/// The deterministic path rule. Consecutive path vertices sit on the level
/// sum `tau`, and each step has exactly one flanking face one level above:
/// the face the hikers are skirting. At a degree-4 vertex (coincident
/// opposite extrema of the two profiles) the walk keeps skirting the face
/// it arrived along; this is the cautious choice on a first visit and the
/// unused edge on a revisit, in every orientation.
fn cautious_walk(f: &UpForm, piece: &Piece) -> Result<Vec<(i64, i64)>> {
    let tau = f.tau();
    let in_range = |n: i64, m: i64| {
        n >= piece.n_range.0 && n <= piece.n_range.1 && m >= piece.m_range.0 && m <= piece.m_range.1
    };
    let on_level = |n: i64, m: i64| f.x(n) + f.y(m) == tau;
    debug_assert!(on_level(piece.start.0, piece.start.1));
    debug_assert!(on_level(piece.end.0, piece.end.1));

    let cap = ((piece.n_range.1 - piece.n_range.0 + 1) * (piece.m_range.1 - piece.m_range.0 + 1))
        as usize
        * 4
        + 16;
    let mut path = vec![piece.start];
    let mut cur = piece.start;
    let mut prev: Option<(i64, i64)> = None;
    let mut skirted: Option<(i64, i64)> = None;

    while cur != piece.end {
        let mut cands = Vec::with_capacity(4);
        for dn in [-1i64, 1] {
            for dm in [-1i64, 1] {
                let nn = cur.0 + dn;
                let mm = cur.1 + dm;
                if in_range(nn, mm) && on_level(nn, mm) && Some((nn, mm)) != prev {
                    cands.push((nn, mm));
                }
            }
        }
        let next = match cands.len() {
            0 => {
                return Err(Error::AlgorithmViolation(format!(
                    "stuck at {cur:?} before reaching {:?}",
                    piece.end
                )));
            }
            1 => cands[0],
            3 => {
                let hug = skirted.ok_or_else(|| {
                    Error::AlgorithmViolation(format!("degree-4 vertex {cur:?} at piece start"))
                })?;
                *cands
                    .iter()
                    .find(|&&q| face_above(f, tau, cur, q) == hug)
                    .ok_or_else(|| {
                        Error::AlgorithmViolation(format!(
                            "no continuation skirting {hug:?} at {cur:?}"
                        ))
                    })?
            }
            n => {
                return Err(Error::AlgorithmViolation(format!(
                    "vertex {cur:?} has {n} fresh continuations"
                )));
            }
        };
        skirted = Some(face_above(f, tau, cur, next));
        prev = Some(cur);
        cur = next;
        path.push(cur);
        if path.len() > cap {
            return Err(Error::AlgorithmViolation("path exceeded its cap".into()));
        }
    }
    Ok(path)
}

/// Mark every edge separating a path face from a neighbor one level above.
/// This covers the two edges flanking each step plus the pinch and
/// fingertip edges the diagonal steps slide past.
fn mark_path_edges(f: &UpForm, path: &[(i64, i64)], edges: &mut BTreeSet<Edge>) {
    let tau = f.tau();
    let (a, b, c, d) = (f.a, f.b, f.c(), f.d());
    for &(n, m) in path {
        if n > a && f.x(n - 1) + f.y(m) == tau + 1 {
            edges.insert(Edge::V { x: n, y: m });
        }
        if n < c && f.x(n + 1) + f.y(m) == tau + 1 {
            edges.insert(Edge::V { x: n + 1, y: m });
        }
        if m > b && f.x(n) + f.y(m - 1) == tau + 1 {
            edges.insert(Edge::H { x: n, y: m });
        }
        if m < d && f.x(n) + f.y(m + 1) == tau + 1 {
            edges.insert(Edge::H { x: n, y: m + 1 });
        }
    }
}
