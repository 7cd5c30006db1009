//! Polygon systems: finite unions of simple loops with holes.
//!
//! Orientation carries the set structure.  Outer loops run counterclockwise
//! and contribute positive area, holes run clockwise and contribute
//! negative area, so the measure of the set is the plain signed-area sum
//! and no containment tree is ever needed.
//!
//! Intersection measures come in two routes.  Against a convex clipper we
//! run Sutherland-Hodgman half-plane passes; the output chain may carry
//! degenerate bridge edges for non-convex subjects, but every bridge lies
//! on a clip line and a cycle supported on a line integrates x dy to zero,
//! so the shoelace value is still the exact intersection measure.  Against
//! a general system we decompose both sides into signed origin-fans of
//! triangles and sum pairwise convex intersections; that identity holds in
//! the winding-number sense and is immune to boundary degeneracy.

use crate::error::{Error, Result};
use crate::geom::{orient2d, point_segment_dist_sq, project_on_segment, v2, Box2, Vec2};
use serde::{Deserialize, Serialize};

/// Coordinates are snapped to this grid at construction so that repeated
/// boolean passes see stable vertex data.
pub const SNAP_GRID: f64 = 1e-12;

fn snap(x: f64) -> f64 {
    // Above 2^52 * grid the rounding is the identity, which is what we
    // want: snapping only disambiguates near-coincident small coordinates.
    (x / SNAP_GRID).round() * SNAP_GRID
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolygonSystem {
    loops: Vec<Vec<Vec2>>,
}

impl PolygonSystem {
    /// Build from loops; orientation is taken as given (outer loops
    /// counterclockwise, holes clockwise).  Vertices are snapped and
    /// consecutive duplicates dropped.
    pub fn new(loops: Vec<Vec<Vec2>>) -> Result<PolygonSystem> {
        let mut cleaned = Vec::with_capacity(loops.len());
        for lp in loops {
            if lp.len() < 3 {
                return Err(Error::BadInput("polygon loop with fewer than 3 vertices".into()));
            }
            let mut c: Vec<Vec2> = Vec::with_capacity(lp.len());
            for p in lp {
                if !p.x.is_finite() || !p.y.is_finite() {
                    return Err(Error::BadInput("non-finite vertex".into()));
                }
                let q = v2(snap(p.x), snap(p.y));
                if c.last().map_or(true, |&l| l != q) {
                    c.push(q);
                }
            }
            while c.len() >= 2 && c[0] == *c.last().unwrap() {
                c.pop();
            }
            if c.len() < 3 {
                return Err(Error::BadInput("degenerate loop after snapping".into()));
            }
            cleaned.push(c);
        }
        if cleaned.is_empty() {
            return Err(Error::BadInput("empty polygon system".into()));
        }
        Ok(PolygonSystem { loops: cleaned })
    }

    pub fn single(outer: Vec<Vec2>) -> Result<PolygonSystem> {
        Self::new(vec![outer])
    }

    pub fn loops(&self) -> &[Vec<Vec2>] {
        &self.loops
    }

    pub fn area(&self) -> f64 {
        self.loops.iter().map(|lp| signed_area(lp)).sum()
    }

    pub fn boundary_length(&self) -> f64 {
        self.loops
            .iter()
            .map(|lp| {
                (0..lp.len())
                    .map(|i| (lp[(i + 1) % lp.len()] - lp[i]).norm())
                    .sum::<f64>()
            })
            .sum()
    }

    pub fn bbox(&self) -> Box2 {
        Box2::hull_of(self.loops.iter().flatten().copied()).expect("nonempty system")
    }

    /// Area centroid.
    pub fn barycenter(&self) -> Vec2 {
        let mut c = Vec2::ZERO;
        let mut a = 0.0;
        for lp in &self.loops {
            for i in 0..lp.len() {
                let j = (i + 1) % lp.len();
                let w = lp[i].cross(lp[j]);
                c = c + (lp[i] + lp[j]) * w;
                a += w;
            }
        }
        c / (3.0 * a)
    }

    pub fn translated(&self, t: Vec2) -> PolygonSystem {
        PolygonSystem {
            loops: self
                .loops
                .iter()
                .map(|lp| lp.iter().map(|&p| p + t).collect())
                .collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> PolygonSystem {
        PolygonSystem {
            loops: self
                .loops
                .iter()
                .map(|lp| lp.iter().map(|&p| p * s).collect())
                .collect(),
        }
    }

    /// Winding number of the system boundary around `p`.
    pub fn winding(&self, p: Vec2) -> i32 {
        let mut w = 0;
        for lp in &self.loops {
            for i in 0..lp.len() {
                let a = lp[i];
                let b = lp[(i + 1) % lp.len()];
                if a.y <= p.y {
                    if b.y > p.y && orient2d(a, b, p) > 0 {
                        w += 1;
                    }
                } else if b.y <= p.y && orient2d(a, b, p) < 0 {
                    w -= 1;
                }
            }
        }
        w
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.winding(p) != 0
    }

    /// Unsigned distance from `p` to the boundary.
    pub fn dist_to_boundary(&self, p: Vec2) -> f64 {
        let mut best = f64::INFINITY;
        for lp in &self.loops {
            for i in 0..lp.len() {
                let d = point_segment_dist_sq(p, lp[i], lp[(i + 1) % lp.len()]);
                best = best.min(d);
            }
        }
        best.sqrt()
    }

    /// Closest boundary point to `p`.
    pub fn nearest_boundary_point(&self, p: Vec2) -> Vec2 {
        let mut best = f64::INFINITY;
        let mut arg = p;
        for lp in &self.loops {
            for i in 0..lp.len() {
                let q = project_on_segment(p, lp[i], lp[(i + 1) % lp.len()]);
                let d = (q - p).norm_sq();
                if d < best {
                    best = d;
                    arg = q;
                }
            }
        }
        arg
    }

    /// Distance from an axis box to the boundary (zero on contact).
    pub fn box_dist_to_boundary(&self, bx: Box2) -> f64 {
        let mut best = f64::INFINITY;
        for lp in &self.loops {
            for i in 0..lp.len() {
                let d = crate::geom::box_segment_dist(bx, lp[i], lp[(i + 1) % lp.len()]);
                if d < best {
                    best = d;
                    if best == 0.0 {
                        return 0.0;
                    }
                }
            }
        }
        best
    }

    /// Does the open segment (a, b) cross the boundary?
    pub fn segment_crosses_boundary(&self, a: Vec2, b: Vec2) -> bool {
        for lp in &self.loops {
            for i in 0..lp.len() {
                if crate::geom::segments_intersect(a, b, lp[i], lp[(i + 1) % lp.len()]) {
                    return true;
                }
            }
        }
        false
    }

    /// Length of boundary inside the closed disc B_r(x), exact per edge.
    pub fn boundary_length_in_ball(&self, x: Vec2, r: f64) -> f64 {
        let mut total = 0.0;
        for lp in &self.loops {
            for i in 0..lp.len() {
                let a = lp[i];
                let b = lp[(i + 1) % lp.len()];
                total += segment_length_in_disc(a, b, x, r);
            }
        }
        total
    }
}

pub fn signed_area(lp: &[Vec2]) -> f64 {
    let mut s = 0.0;
    for i in 0..lp.len() {
        let j = (i + 1) % lp.len();
        s += lp[i].cross(lp[j]);
    }
    s / 2.0
}

/// |{t in [0,1] : |a + t(b-a) - x| <= r}| * |b - a|.
fn segment_length_in_disc(a: Vec2, b: Vec2, x: Vec2, r: f64) -> f64 {
    let d = b - a;
    let f = a - x;
    let aa = d.norm_sq();
    if aa == 0.0 {
        return 0.0;
    }
    let bb = 2.0 * f.dot(d);
    let cc = f.norm_sq() - r * r;
    let disc = bb * bb - 4.0 * aa * cc;
    if disc <= 0.0 {
        return 0.0;
    }
    let sq = disc.sqrt();
    let t0 = ((-bb - sq) / (2.0 * aa)).clamp(0.0, 1.0);
    let t1 = ((-bb + sq) / (2.0 * aa)).clamp(0.0, 1.0);
    (t1 - t0).max(0.0) * aa.sqrt()
}

/// Convex clipper in half-plane form, prepared once and reused across
/// translates.  Normals point outward; a point is kept when n.x <= c.
#[derive(Debug, Clone)]
pub struct ConvexClipper {
    planes: Vec<(Vec2, f64)>,
    pub bbox: Box2,
    pub area: f64,
}

impl ConvexClipper {
    pub fn from_polygon(verts: &[Vec2]) -> ConvexClipper {
        let mut planes = Vec::with_capacity(verts.len());
        for i in 0..verts.len() {
            let j = (i + 1) % verts.len();
            let e = verts[j] - verts[i];
            let n = v2(e.y, -e.x);
            planes.push((n, verts[i].dot(n)));
        }
        ConvexClipper {
            planes,
            bbox: Box2::hull_of(verts.iter().copied()).expect("clipper with vertices"),
            area: signed_area(verts),
        }
    }

    /// |E meet (t + C)| where C is this clipper.
    pub fn intersection_area(&self, sys: &PolygonSystem, t: Vec2) -> f64 {
        let cb = Box2 { lo: self.bbox.lo + t, hi: self.bbox.hi + t };
        let mut total = 0.0;
        let mut work: Vec<Vec2> = Vec::new();
        let mut next: Vec<Vec2> = Vec::new();
        for lp in sys.loops() {
            let lb = Box2::hull_of(lp.iter().copied()).unwrap();
            if lb.lo.x > cb.hi.x || lb.hi.x < cb.lo.x || lb.lo.y > cb.hi.y || lb.hi.y < cb.lo.y {
                continue;
            }
            work.clear();
            work.extend_from_slice(lp);
            for &(n, c) in &self.planes {
                let c = c + n.dot(t);
                clip_halfplane(&work, n, c, &mut next);
                std::mem::swap(&mut work, &mut next);
                if work.len() < 3 {
                    break;
                }
            }
            if work.len() >= 3 {
                total += signed_area(&work);
            }
        }
        total
    }
}

/// One Sutherland-Hodgman pass: keep the side n.x <= c.
pub fn clip_halfplane(input: &[Vec2], n: Vec2, c: f64, out: &mut Vec<Vec2>) {
    out.clear();
    let len = input.len();
    if len == 0 {
        return;
    }
    let mut prev = input[len - 1];
    let mut dp = prev.dot(n) - c;
    for &cur in input {
        let dc = cur.dot(n) - c;
        if dp <= 0.0 {
            out.push(prev);
            if dc > 0.0 {
                out.push(prev.lerp(cur, dp / (dp - dc)));
            }
        } else if dc <= 0.0 {
            out.push(prev.lerp(cur, dp / (dp - dc)));
        }
        prev = cur;
        dp = dc;
    }
}

/// Intersection measure of two polygon systems via signed triangle fans.
///
/// Exact up to floating point for systems whose loops are simple; for
/// self-touching chains it returns the winding-weighted overlap, which is
/// the consistent generalization.
pub fn intersection_area(a: &PolygonSystem, b: &PolygonSystem) -> f64 {
    let oa = a.bbox();
    let ob = b.bbox();
    if oa.lo.x > ob.hi.x || oa.hi.x < ob.lo.x || oa.lo.y > ob.hi.y || oa.hi.y < ob.lo.y {
        return 0.0;
    }
    // Fan apexes at the bbox centers for conditioning.
    let ca = (oa.lo + oa.hi) * 0.5;
    let cb = (ob.lo + ob.hi) * 0.5;
    let tris_a = fan_triangles(a, ca);
    let tris_b = fan_triangles(b, cb);
    let mut total = 0.0;
    let mut work: Vec<Vec2> = Vec::with_capacity(8);
    let mut next: Vec<Vec2> = Vec::with_capacity(8);
    for &(ta, sa, bba) in &tris_a {
        for &(tb, sb, bbb) in &tris_b {
            if bba.lo.x > bbb.hi.x || bba.hi.x < bbb.lo.x || bba.lo.y > bbb.hi.y || bba.hi.y < bbb.lo.y {
                continue;
            }
            let ar = triangle_intersection_area(&ta, &tb, &mut work, &mut next);
            if ar != 0.0 {
                total += (sa * sb) as f64 * ar;
            }
        }
    }
    total
}

type FanTri = ([Vec2; 3], i8, Box2);

fn fan_triangles(sys: &PolygonSystem, apex: Vec2) -> Vec<FanTri> {
    let mut tris = Vec::new();
    for lp in sys.loops() {
        for i in 0..lp.len() {
            let a = lp[i];
            let b = lp[(i + 1) % lp.len()];
            let s = (a - apex).cross(b - apex);
            if s == 0.0 {
                continue;
            }
            let (tri, sign) = if s > 0.0 {
                ([apex, a, b], 1)
            } else {
                ([apex, b, a], -1)
            };
            tris.push((tri, sign, Box2::hull_of(tri.iter().copied()).unwrap()));
        }
    }
    tris
}

fn triangle_intersection_area(
    ta: &[Vec2; 3],
    tb: &[Vec2; 3],
    work: &mut Vec<Vec2>,
    next: &mut Vec<Vec2>,
) -> f64 {
    work.clear();
    work.extend_from_slice(ta);
    for i in 0..3 {
        let e = tb[(i + 1) % 3] - tb[i];
        let n = v2(e.y, -e.x);
        clip_halfplane(work, n, tb[i].dot(n), next);
        std::mem::swap(work, next);
        if work.len() < 3 {
            return 0.0;
        }
    }
    signed_area(work)
}

/// |A delta B| for two systems.
pub fn symm_diff_area(a: &PolygonSystem, b: &PolygonSystem) -> f64 {
    let inter = intersection_area(a, b);
    (a.area() + b.area() - 2.0 * inter).max(0.0)
}
