//! Small planar vector type plus the handful of primitives everything else
//! leans on.  Kept dependency-free on purpose: the clipping and distance
//! routines downstream want full control over rounding behaviour.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

pub const fn v2(x: f64, y: f64) -> Vec2 {
    Vec2 { x, y }
}

impl Vec2 {
    pub const ZERO: Vec2 = v2(0.0, 0.0);

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3d cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        v2(self.x / n, self.y / n)
    }

    /// Counterclockwise rotation by 90 degrees.
    pub fn perp(self) -> Vec2 {
        v2(-self.y, self.x)
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn lerp(self, o: Vec2, t: f64) -> Vec2 {
        self + (o - self) * t
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        v2(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        v2(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        v2(self.x * s, self.y * s)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, s: f64) -> Vec2 {
        v2(self.x / s, self.y / s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        v2(-self.x, -self.y)
    }
}

/// Orientation of the triangle (a, b, c): positive for counterclockwise.
///
/// Evaluated with a rational fallback when the f64 determinant is too close
/// to zero to trust, so collinear snapped inputs classify consistently.
pub fn orient2d(a: Vec2, b: Vec2, c: Vec2) -> i8 {
    let det = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    // Error bound for the 4-term determinant, following the usual
    // forward-analysis constant for this expression shape.
    let mag = (b.x - a.x).abs() * (c.y - a.y).abs() + (b.y - a.y).abs() * (c.x - a.x).abs();
    let eps = 3.33e-16 * mag;
    if det > eps {
        return 1;
    }
    if det < -eps {
        return -1;
    }
    orient2d_exact(a, b, c)
}

/// Exact sign of the orientation determinant via two-product expansions.
fn orient2d_exact(a: Vec2, b: Vec2, c: Vec2) -> i8 {
    // Differences of snapped doubles are exact when the inputs share scale;
    // when they are not, the two_product splits keep every rounding term.
    let (p1, e1) = two_product(b.x - a.x, c.y - a.y);
    let (p2, e2) = two_product(b.y - a.y, c.x - a.x);
    // det = (p1 + e1) - (p2 + e2); sum the four terms with exact addition.
    let terms = [p1, e1, -p2, -e2];
    let s = exact_sum_sign(&terms);
    s
}

fn two_product(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

/// Sign of an exactly represented sum of f64 terms (Shewchuk-style growth).
fn exact_sum_sign(terms: &[f64]) -> i8 {
    let mut parts: Vec<f64> = Vec::with_capacity(8);
    for &t in terms {
        if t != 0.0 {
            parts = grow_expansion(&parts, t);
        }
    }
    match parts.last() {
        Some(&v) if v > 0.0 => 1,
        Some(&v) if v < 0.0 => -1,
        _ => 0,
    }
}

fn grow_expansion(e: &[f64], b: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(e.len() + 1);
    let mut q = b;
    for &ei in e {
        let (sum, err) = two_sum(q, ei);
        if err != 0.0 {
            out.push(err);
        }
        q = sum;
    }
    out.push(q);
    out
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bv = s - a;
    let av = s - bv;
    let e = (b - bv) + (a - av);
    (s, e)
}

/// Squared distance from point `p` to the segment [a, b].
pub fn point_segment_dist_sq(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let denom = ab.norm_sq();
    if denom == 0.0 {
        return (p - a).norm_sq();
    }
    let t = ((p - a).dot(ab) / denom).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm_sq()
}

/// Nearest point on segment [a, b] to `p`.
pub fn project_on_segment(p: Vec2, a: Vec2, b: Vec2) -> Vec2 {
    let ab = b - a;
    let denom = ab.norm_sq();
    if denom == 0.0 {
        return a;
    }
    let t = ((p - a).dot(ab) / denom).clamp(0.0, 1.0);
    a + ab * t
}

/// Proper intersection test for closed segments, orientation based.
pub fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let d1 = orient2d(c, d, a);
    let d2 = orient2d(c, d, b);
    let d3 = orient2d(a, b, c);
    let d4 = orient2d(a, b, d);
    if d1 != d2 && d3 != d4 && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0 {
        return true;
    }
    let on = |p: Vec2, q: Vec2, r: Vec2| {
        orient2d(p, q, r) == 0
            && r.x >= p.x.min(q.x) - 0.0
            && r.x <= p.x.max(q.x)
            && r.y >= p.y.min(q.y)
            && r.y <= p.y.max(q.y)
    };
    on(a, b, c) || on(a, b, d) || on(c, d, a) || on(c, d, b)
}

/// Axis-aligned box given by min/max corners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box2 {
    pub lo: Vec2,
    pub hi: Vec2,
}

impl Box2 {
    pub fn hull_of(points: impl IntoIterator<Item = Vec2>) -> Option<Box2> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut b = Box2 { lo: first, hi: first };
        for p in it {
            b.lo.x = b.lo.x.min(p.x);
            b.lo.y = b.lo.y.min(p.y);
            b.hi.x = b.hi.x.max(p.x);
            b.hi.y = b.hi.y.max(p.y);
        }
        Some(b)
    }

    pub fn expand(self, pad: f64) -> Box2 {
        Box2 { lo: self.lo - v2(pad, pad), hi: self.hi + v2(pad, pad) }
    }

    pub fn contains(self, p: Vec2) -> bool {
        p.x >= self.lo.x && p.x <= self.hi.x && p.y >= self.lo.y && p.y <= self.hi.y
    }

    pub fn width(self) -> f64 {
        self.hi.x - self.lo.x
    }

    pub fn height(self) -> f64 {
        self.hi.y - self.lo.y
    }

    /// Squared distance from `p` to the box (zero inside).
    pub fn dist_sq(self, p: Vec2) -> f64 {
        let dx = (self.lo.x - p.x).max(0.0).max(p.x - self.hi.x);
        let dy = (self.lo.y - p.y).max(0.0).max(p.y - self.hi.y);
        dx * dx + dy * dy
    }
}

/// Distance between the closed box and the closed segment [a, b].
///
/// Zero when they meet.  Candidates are box-corner vs segment and segment
/// endpoint vs box; in the plane these cover every closest-pair
/// configuration for two convex sets with vertices.
pub fn box_segment_dist(bx: Box2, a: Vec2, b: Vec2) -> f64 {
    if bx.contains(a) || bx.contains(b) {
        return 0.0;
    }
    let corners = [
        bx.lo,
        v2(bx.hi.x, bx.lo.y),
        bx.hi,
        v2(bx.lo.x, bx.hi.y),
    ];
    // Edge crossing means contact.
    for i in 0..4 {
        if segments_intersect(corners[i], corners[(i + 1) % 4], a, b) {
            return 0.0;
        }
    }
    let mut best = bx.dist_sq(a).min(bx.dist_sq(b));
    for c in corners {
        best = best.min(point_segment_dist_sq(c, a, b));
    }
    best.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orientation_signs() {
        assert_eq!(orient2d(v2(0.0, 0.0), v2(1.0, 0.0), v2(0.0, 1.0)), 1);
        assert_eq!(orient2d(v2(0.0, 0.0), v2(0.0, 1.0), v2(1.0, 0.0)), -1);
        assert_eq!(orient2d(v2(0.0, 0.0), v2(1.0, 1.0), v2(2.0, 2.0)), 0);
    }

    #[test]
    fn orientation_near_degenerate_is_consistent() {
        // Three nearly collinear points; the exact fallback must agree with
        // the sign of the true rational determinant.
        let a = v2(12.0, 12.0);
        let b = v2(24.0, 24.000000000000004);
        let c = v2(36.0, 36.0);
        let s1 = orient2d(a, b, c);
        let s2 = orient2d(b, c, a);
        let s3 = orient2d(c, a, b);
        assert_eq!(s1, s2);
        assert_eq!(s2, s3);
        assert_ne!(s1, 0);
    }

    #[test]
    fn box_segment_distance_cases() {
        let bx = Box2 { lo: v2(0.0, 0.0), hi: v2(1.0, 1.0) };
        // Crossing segment.
        assert_eq!(box_segment_dist(bx, v2(-1.0, 0.5), v2(2.0, 0.5)), 0.0);
        // Segment to the right of the box.
        let d = box_segment_dist(bx, v2(2.0, -1.0), v2(2.0, 2.0));
        assert!((d - 1.0).abs() < 1e-12);
        // Diagonal corner case.
        let d = box_segment_dist(bx, v2(2.0, 2.0), v2(3.0, 2.0));
        assert!((d - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn segment_projection() {
        let p = project_on_segment(v2(0.5, 1.0), v2(0.0, 0.0), v2(1.0, 0.0));
        assert!((p - v2(0.5, 0.0)).norm() < 1e-15);
        let p = project_on_segment(v2(5.0, 1.0), v2(0.0, 0.0), v2(1.0, 0.0));
        assert!((p - v2(1.0, 0.0)).norm() < 1e-15);
    }
}
