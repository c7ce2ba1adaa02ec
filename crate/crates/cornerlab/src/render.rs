//! Deterministic SVG output: configuration windows as edge segments,
//! cycles as closed polylines, and height maps as colored face grids with a
//! legend. Identical input produces byte-identical output; all coordinates
//! are integers.

use crate::contour::Cycle;
use crate::error::{Error, Result};
use crate::lattice::{Face, LatticeWindow, Vertex};

const SCALE: i64 = 10;
const MARGIN: i64 = 10;

/// Refuse anything beyond this many pixels per side.
pub const PIXEL_BUDGET: i64 = 8192;

fn check_budget(w_px: i64, h_px: i64) -> Result<()> {
    if w_px > PIXEL_BUDGET || h_px > PIXEL_BUDGET {
        return Err(Error::RenderRefused(format!(
            "{w_px}x{h_px} px exceeds the {PIXEL_BUDGET} px budget; render a window of at most {} vertices per side",
            (PIXEL_BUDGET - 2 * MARGIN) / SCALE
        )));
    }
    Ok(())
}

struct Svg {
    body: String,
    w: i64,
    h: i64,
    x0: i64,
    y0: i64,
}

impl Svg {
    fn new(x_lo: i64, x_hi: i64, y_lo: i64, y_hi: i64) -> Result<Self> {
        let w = (x_hi - x_lo) * SCALE + 2 * MARGIN;
        let h = (y_hi - y_lo) * SCALE + 2 * MARGIN;
        check_budget(w, h)?;
        Ok(Svg {
            body: String::new(),
            w,
            h,
            x0: x_lo,
            y0: y_hi,
        })
    }

    /// lattice point to pixel; the y axis points up
    fn px(&self, v: Vertex) -> (i64, i64) {
        (
            MARGIN + (v.0 - self.x0) * SCALE,
            MARGIN + (self.y0 - v.1) * SCALE,
        )
    }

    fn line(&mut self, a: Vertex, b: Vertex, stroke: &str) {
        let (x1, y1) = self.px(a);
        let (x2, y2) = self.px(b);
        self.body.push_str(&format!(
            "<line x1=\"{x1}\" y1=\"{y1}\" x2=\"{x2}\" y2=\"{y2}\" stroke=\"{stroke}\" stroke-width=\"2\"/>\n"
        ));
    }

    fn polyline(&mut self, pts: &[Vertex], closed: bool, stroke: &str) {
        let mut s = String::new();
        for &p in pts {
            let (x, y) = self.px(p);
            s.push_str(&format!("{x},{y} "));
        }
        if closed {
            if let Some(&first) = pts.first() {
                let (x, y) = self.px(first);
                s.push_str(&format!("{x},{y}"));
            }
        }
        self.body.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"2\"/>\n",
            s.trim_end()
        ));
    }

    fn rect_face(&mut self, f: Face, fill: &str) {
        let (x, y) = self.px((f.n, f.m + 1));
        self.body.push_str(&format!(
            "<rect x=\"{x}\" y=\"{y}\" width=\"{SCALE}\" height=\"{SCALE}\" fill=\"{fill}\"/>\n"
        ));
    }

    fn text(&mut self, x: i64, y: i64, msg: &str) {
        self.body.push_str(&format!(
            "<text x=\"{x}\" y=\"{y}\" font-size=\"10\">{msg}</text>\n"
        ));
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.w, self.h, self.w, self.h, self.body
        )
    }
}

/// All present edges of the window as segments, with every closed component
/// drawn as one polyline on top.
pub fn render_window(window: &LatticeWindow) -> Result<String> {
    let mut svg = Svg::new(window.x_lo(), window.x_hi(), window.y_lo(), window.y_hi())?;
    let cycles = all_closed_cycles(window);
    for cycle in &cycles {
        svg.polyline(&cycle.vertices, true, "black");
    }
    // open components touching the frame, drawn faint
    let mut on_cycles = std::collections::HashSet::new();
    for c in &cycles {
        on_cycles.extend(c.vertices.iter().copied());
    }
    for x in window.x_lo()..=window.x_hi() {
        for y in window.y_lo()..=window.y_hi() {
            let v = (x, y);
            if on_cycles.contains(&v) {
                continue;
            }
            for next in [window.horizontal_neighbor(v), window.vertical_neighbor(v)] {
                if window.contains_vertex(next) && next > v && !on_cycles.contains(&next) {
                    svg.line(v, next, "silver");
                }
            }
        }
    }
    Ok(svg.finish())
}

/// Every component that closes inside the window, in deterministic order.
pub fn all_closed_cycles(window: &LatticeWindow) -> Vec<Cycle> {
    let mut visited = std::collections::HashSet::new();
    let mut cycles = Vec::new();
    for x in window.x_lo()..=window.x_hi() {
        for y in window.y_lo()..=window.y_hi() {
            let v = (x, y);
            if visited.contains(&v) {
                continue;
            }
            match crate::contour::trace_cycle(window, v) {
                Ok(cycle) => {
                    visited.extend(cycle.vertices.iter().copied());
                    cycles.push(cycle);
                }
                Err(_) => {
                    visited.insert(v);
                }
            }
        }
    }
    cycles
}

/// A single cycle with its enclosing rectangle.
pub fn render_cycle(cycle: &Cycle) -> Result<String> {
    let r = cycle.rect;
    let mut svg = Svg::new(r.a, r.c + 1, r.b, r.d + 1)?;
    svg.polyline(
        &[
            (r.a + 1, r.b + 1),
            (r.c, r.b + 1),
            (r.c, r.d),
            (r.a + 1, r.d),
        ],
        true,
        "gainsboro",
    );
    svg.polyline(&cycle.vertices, true, "black");
    Ok(svg.finish())
}

/// Face heights as a colored grid with a small legend; adjacent colors
/// differ exactly across present edges.
pub fn render_height_map(window: &LatticeWindow) -> Result<String> {
    let mut svg = Svg::new(window.x_lo(), window.x_hi(), window.y_lo(), window.y_hi())?;
    let mut h_min = i64::MAX;
    let mut h_max = i64::MIN;
    for n in window.x_lo()..window.x_hi() {
        for m in window.y_lo()..window.y_hi() {
            let h = window.height_unchecked(Face::new(n, m));
            h_min = h_min.min(h);
            h_max = h_max.max(h);
        }
    }
    for n in window.x_lo()..window.x_hi() {
        for m in window.y_lo()..window.y_hi() {
            let f = Face::new(n, m);
            let h = window.height_unchecked(f);
            svg.rect_face(f, &height_color(h, h_min, h_max));
        }
    }
    // legend: one swatch per level, bottom-left corner
    let mut x = MARGIN;
    for h in h_min..=h_max {
        let color = height_color(h, h_min, h_max);
        svg.body.push_str(&format!(
            "<rect x=\"{x}\" y=\"{}\" width=\"{SCALE}\" height=\"{SCALE}\" fill=\"{color}\" stroke=\"black\"/>\n",
            svg.h - MARGIN,
        ));
        svg.text(x, svg.h - MARGIN - 2, &h.to_string());
        x += 3 * SCALE;
    }
    Ok(svg.finish())
}

/// Blue-to-red ramp over the window's height range, exact integers only.
fn height_color(h: i64, h_min: i64, h_max: i64) -> String {
    let span = (h_max - h_min).max(1);
    let t_num = h - h_min;
    let r = 40 + 215 * t_num / span;
    let b = 255 - 215 * t_num / span;
    let g = 64 + 128 * (span - (2 * t_num - span).abs()) / span;
    format!("rgb({r},{g},{b})")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Axis, Edge, SignSequence, WindowSpec};

    fn all_plus(lo: i64, hi: i64) -> LatticeWindow {
        LatticeWindow::new(
            SignSequence::constant(Axis::Xi, lo, hi, 1),
            SignSequence::constant(Axis::Eta, lo, hi, 1),
        )
        .unwrap()
    }

    #[test]
    fn all_plus_eight_window_has_sixteen_cycles() {
        let w = all_plus(0, 7);
        let cycles = all_closed_cycles(&w);
        assert_eq!(cycles.len(), 16);
        assert!(cycles.iter().all(|c| c.length() == 4));
        let svg = render_window(&w).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 16);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn minimal_cycle_renders_closed_path() {
        let w = all_plus(-2, 2);
        let c = crate::contour::trace_cycle(&w, (0, 0)).unwrap();
        let svg = render_cycle(&c).unwrap();
        // 4 corner points plus the closing repeat
        let poly = svg
            .lines()
            .find(|l| l.contains("stroke=\"black\""))
            .unwrap();
        assert_eq!(poly.matches(',').count(), 5);
    }

    #[test]
    fn output_is_byte_deterministic() {
        let spec = WindowSpec::square(5, 12);
        let a = render_window(&spec.build().unwrap()).unwrap();
        let b = render_window(&spec.build().unwrap()).unwrap();
        assert_eq!(a, b);
        let ha = render_height_map(&spec.build().unwrap()).unwrap();
        let hb = render_height_map(&spec.build().unwrap()).unwrap();
        assert_eq!(ha, hb);
    }

    #[test]
    fn height_map_colors_step_across_present_edges() {
        let spec = WindowSpec::square(3, 10);
        let w = spec.build().unwrap();
        for n in -10..9 {
            for m in -10..10 {
                let a = w.height_unchecked(Face::new(n, m));
                let b = w.height_unchecked(Face::new(n + 1, m));
                let differs = height_color(a, -5, 5) != height_color(b, -5, 5);
                let present = w.edge_present_unchecked(Edge::V { x: n + 1, y: m });
                assert_eq!(differs, present, "face ({n},{m})");
            }
        }
    }

    #[test]
    fn oversized_window_is_refused() {
        let spec = WindowSpec::square(1, 2000);
        let err = render_window(&spec.build().unwrap()).unwrap_err();
        assert!(matches!(err, Error::RenderRefused(_)));
        assert!(err.to_string().contains("budget"));
    }
}
