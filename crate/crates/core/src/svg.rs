//! Plot emission.  Plain SVG strings with fixed canvas, fixed palette, and
//! fixed numeric precision; no timestamps and no randomness, so identical
//! inputs give identical bytes.

use crate::geomset::GeomSet;
use crate::johnmetric::JohnEstimate;
use crate::whitney::WhitneyDecomposition;
use std::fmt::Write as _;

const CANVAS: f64 = 640.0;
const MARGIN: f64 = 40.0;
const PALETTE: [&str; 6] = ["#1b6ca8", "#d1495b", "#3d8361", "#8e5fa8", "#c8852c", "#5a5a5a"];

/// World-to-canvas map: uniform scale, y up.
struct Frame {
    x0: f64,
    y0: f64,
    scale: f64,
}

impl Frame {
    fn fit(lo: [f64; 2], hi: [f64; 2]) -> Frame {
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        let scale = (CANVAS - 2.0 * MARGIN) / span;
        // Center the shorter axis.
        let cx = 0.5 * (lo[0] + hi[0]);
        let cy = 0.5 * (lo[1] + hi[1]);
        Frame { x0: cx - 0.5 * CANVAS / scale, y0: cy + 0.5 * CANVAS / scale, scale }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.x0) * self.scale, (self.y0 - y) * self.scale)
    }
}

fn open_svg(out: &mut String) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {CANVAS} {CANVAS}\" \
         width=\"{CANVAS}\" height=\"{CANVAS}\">\n\
         <rect width=\"{CANVAS}\" height=\"{CANVAS}\" fill=\"white\"/>\n"
    );
}

fn poly_path(frame: &Frame, pts: impl Iterator<Item = (f64, f64)>, close: bool) -> String {
    let mut d = String::new();
    for (i, (x, y)) in pts.enumerate() {
        let (px, py) = frame.map(x, y);
        let _ = write!(d, "{}{px:.3} {py:.3} ", if i == 0 { "M" } else { "L" });
    }
    if close {
        d.push('Z');
    }
    d
}

fn set_bbox(set: &GeomSet) -> ([f64; 2], [f64; 2]) {
    match set {
        GeomSet::Polygon(sys) => {
            let b = sys.bbox();
            ([b.lo.x, b.lo.y], [b.hi.x, b.hi.y])
        }
        GeomSet::Voxels(g) => (
            [g.origin[0], g.origin[1]],
            [
                g.origin[0] + g.h * g.dims[0] as f64,
                g.origin[1] + g.h * g.dims[1] as f64,
            ],
        ),
    }
}

fn draw_outline(out: &mut String, frame: &Frame, set: &GeomSet, color: &str, width: f64) {
    match set {
        GeomSet::Polygon(sys) => {
            for lp in sys.loops() {
                let d = poly_path(frame, lp.iter().map(|p| (p.x, p.y)), true);
                let _ = write!(
                    out,
                    "<path d=\"{d}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"{width}\"/>\n"
                );
            }
        }
        GeomSet::Voxels(_) => {
            for f in &set.boundary_mesh().facets {
                let d = poly_path(frame, f.points.iter().map(|v| (v[0], v[1])), false);
                let _ = write!(
                    out,
                    "<path d=\"{d}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"{width}\"/>\n"
                );
            }
        }
    }
}

/// Overlay of labeled sets, one palette color each.
pub fn render_sets(layers: &[(&str, &GeomSet)]) -> String {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for (_, set) in layers {
        let (l, h) = set_bbox(set);
        for a in 0..2 {
            lo[a] = lo[a].min(l[a]);
            hi[a] = hi[a].max(h[a]);
        }
    }
    let frame = Frame::fit(lo, hi);
    let mut out = String::new();
    open_svg(&mut out);
    for (i, (label, set)) in layers.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        draw_outline(&mut out, &frame, set, color, 1.5);
        let _ = write!(
            out,
            "<text x=\"12\" y=\"{:.0}\" font-family=\"monospace\" font-size=\"14\" \
             fill=\"{color}\">{label}</text>\n",
            20.0 * (i + 1) as f64
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Cube rendering: one rect per cube, color keyed to dyadic level, domain
/// outline on top.
pub fn render_whitney(domain: &GeomSet, w: &WhitneyDecomposition) -> String {
    let (lo, hi) = set_bbox(domain);
    let frame = Frame::fit(lo, hi);
    let mut out = String::new();
    open_svg(&mut out);
    for c in &w.cubes {
        let s = w.side(c.level);
        let x = w.origin[0] + c.idx[0] as f64 * s;
        let y = w.origin[1] + c.idx[1] as f64 * s;
        let (px, py) = frame.map(x, y + s);
        let color = PALETTE[c.level as usize % PALETTE.len()];
        let _ = write!(
            out,
            "<rect x=\"{px:.3}\" y=\"{py:.3}\" width=\"{:.3}\" height=\"{:.3}\" \
             fill=\"{color}\" fill-opacity=\"0.35\" stroke=\"{color}\" stroke-width=\"0.4\"/>\n",
            s * frame.scale,
            s * frame.scale
        );
    }
    draw_outline(&mut out, &frame, domain, "#111111", 1.5);
    out.push_str("</svg>\n");
    out
}

/// Domain with the worst witness curve and its attach point.
pub fn render_john(domain: &GeomSet, est: &JohnEstimate) -> String {
    let (lo, hi) = set_bbox(domain);
    let frame = Frame::fit(lo, hi);
    let mut out = String::new();
    open_svg(&mut out);
    draw_outline(&mut out, &frame, domain, "#111111", 1.5);
    if let Some(worst) = est.witnesses.first() {
        let d = poly_path(&frame, worst.polyline.iter().map(|p| (p[0], p[1])), false);
        let _ = write!(
            out,
            "<path d=\"{d}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n",
            PALETTE[1]
        );
    }
    let (sx, sy) = frame.map(est.worst_start[0], est.worst_start[1]);
    let (cx, cy) = frame.map(est.center[0], est.center[1]);
    let _ = write!(
        out,
        "<circle cx=\"{sx:.3}\" cy=\"{sy:.3}\" r=\"4\" fill=\"{}\"/>\n\
         <circle cx=\"{cx:.3}\" cy=\"{cy:.3}\" r=\"4\" fill=\"{}\"/>\n\
         <text x=\"12\" y=\"20\" font-family=\"monospace\" font-size=\"14\" fill=\"#111111\">\
         J = {:.4} at level {}</text>\n",
        PALETTE[1], PALETTE[0], est.j_value, est.resolution
    );
    out.push_str("</svg>\n");
    out
}

/// Scatter of (x, y) rows with min/max axis labels.
pub fn render_scatter(rows: &[(f64, f64)], xlabel: &str, ylabel: &str) -> String {
    let mut out = String::new();
    open_svg(&mut out);
    let (mut xlo, mut xhi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ylo, mut yhi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in rows {
        xlo = xlo.min(x);
        xhi = xhi.max(x);
        ylo = ylo.min(y);
        yhi = yhi.max(y);
    }
    if rows.is_empty() {
        (xlo, xhi, ylo, yhi) = (0.0, 1.0, 0.0, 1.0);
    }
    let xspan = (xhi - xlo).max(1e-12);
    let yspan = (yhi - ylo).max(1e-12);
    let plot = CANVAS - 2.0 * MARGIN;
    let _ = write!(
        out,
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{plot}\" height=\"{plot}\" \
         fill=\"none\" stroke=\"#999999\"/>\n"
    );
    for &(x, y) in rows {
        let px = MARGIN + (x - xlo) / xspan * plot;
        let py = CANVAS - MARGIN - (y - ylo) / yspan * plot;
        let _ = write!(
            out,
            "<circle cx=\"{px:.3}\" cy=\"{py:.3}\" r=\"4\" fill=\"{}\" fill-opacity=\"0.8\"/>\n",
            PALETTE[0]
        );
    }
    let _ = write!(
        out,
        "<text x=\"{MARGIN}\" y=\"{:.0}\" font-family=\"monospace\" font-size=\"12\">\
         {xlabel}: {xlo:.6} .. {xhi:.6}</text>\n\
         <text x=\"{MARGIN}\" y=\"{:.0}\" font-family=\"monospace\" font-size=\"12\">\
         {ylabel}: {ylo:.6} .. {yhi:.6}</text>\n",
        CANVAS - 14.0,
        CANVAS - 28.0
    );
    out.push_str("</svg>\n");
    out
}
