//! Surface tensions and the convex bodies they generate.
//!
//! A tension is sampled as a finite list of (direction, value) pairs with
//! positive values.  The associated body is the intersection of the
//! half-spaces x . dir <= value, which we build through the polar dual:
//! the points dir / value are hulled and each dual facet contributes one
//! vertex of the body.  Boundedness is exactly the origin lying strictly
//! inside the dual hull.

use crate::error::{Error, Result};
use crate::geom::{orient2d, v2, Vec2};
use crate::hull::{hull2, hull3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensionSample {
    pub dir: Vec<f64>,
    pub value: f64,
}

/// Sampled surface tension.  Directions need not be normalized; values are
/// read as the tension at that direction vector, so the half-space is
/// x . dir <= value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensionSpec {
    pub dim: usize,
    pub samples: Vec<TensionSample>,
}

impl TensionSpec {
    pub fn new(dim: usize, samples: Vec<TensionSample>) -> Result<TensionSpec> {
        if dim != 2 && dim != 3 {
            return Err(Error::BadInput(format!("dim {dim} unsupported, expected 2 or 3")));
        }
        if samples.len() < dim + 1 {
            return Err(Error::BadInput("too few tension samples".into()));
        }
        for s in &samples {
            if s.dir.len() != dim {
                return Err(Error::BadInput("direction length does not match dim".into()));
            }
            let n2: f64 = s.dir.iter().map(|x| x * x).sum();
            if !(n2 > 0.0) || !n2.is_finite() {
                return Err(Error::BadInput("zero or non-finite direction".into()));
            }
            if !(s.value > 0.0) || !s.value.is_finite() {
                return Err(Error::BadInput("tension values must be positive".into()));
            }
        }
        Ok(TensionSpec { dim, samples })
    }

    /// Uniform planar sampling of a closed-form tension, for tests and
    /// corpus generation.
    pub fn sample_2d(count: usize, f: impl Fn(Vec2) -> f64) -> TensionSpec {
        let samples = (0..count)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / count as f64;
                let d = v2(t.cos(), t.sin());
                TensionSample { dir: vec![d.x, d.y], value: f(d) }
            })
            .collect();
        TensionSpec { dim: 2, samples }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Body {
    /// Counterclockwise convex polygon.
    Poly2(Vec<Vec2>),
    /// Convex polytope as vertex cloud plus hull triangles.
    Poly3 { verts: Vec<[f64; 3]>, faces: Vec<[usize; 3]> },
}

/// A convex body with the derived quantities the rest of the crate needs.
///
/// `inradius` and `circumradius` are measured about the origin: the largest
/// centered ball inside and the smallest centered ball containing the body.
/// They equal the min and max of the support function over unit directions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WulffShape {
    pub body: Body,
    pub volume: f64,
    pub inradius: f64,
    pub circumradius: f64,
}

fn polygon_area(verts: &[Vec2]) -> f64 {
    let mut s = 0.0;
    for i in 0..verts.len() {
        let j = (i + 1) % verts.len();
        s += verts[i].cross(verts[j]);
    }
    s / 2.0
}

fn polygon_centroid(verts: &[Vec2]) -> Vec2 {
    let mut c = Vec2::ZERO;
    let mut a = 0.0;
    for i in 0..verts.len() {
        let j = (i + 1) % verts.len();
        let w = verts[i].cross(verts[j]);
        c = c + (verts[i] + verts[j]) * w;
        a += w;
    }
    c / (3.0 * a)
}

fn dot_n(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl WulffShape {
    /// Wrap an existing counterclockwise convex polygon.
    pub fn from_polygon(verts: Vec<Vec2>) -> Result<WulffShape> {
        if verts.len() < 3 {
            return Err(Error::EmptyShape);
        }
        // Convexity is part of the contract; re-hull to enforce it rather
        // than trusting the caller's ordering.
        let hulled = hull2(&verts);
        if hulled.len() < 3 {
            return Err(Error::EmptyShape);
        }
        Ok(Self::from_hulled_polygon(hulled))
    }

    fn from_hulled_polygon(verts: Vec<Vec2>) -> WulffShape {
        let volume = polygon_area(&verts);
        let (inr, circ) = polygon_radii(&verts);
        WulffShape { body: Body::Poly2(verts), volume, inradius: inr, circumradius: circ }
    }

    pub fn from_polytope(verts: Vec<[f64; 3]>) -> Result<WulffShape> {
        let hull = hull3(&verts).map_err(|_| Error::EmptyShape)?;
        let keep = hull.vertex_indices();
        let remap: std::collections::HashMap<usize, usize> =
            keep.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let vkeep: Vec<[f64; 3]> = keep.iter().map(|&i| verts[i]).collect();
        let faces: Vec<[usize; 3]> = hull
            .faces
            .iter()
            .map(|f| [remap[&f[0]], remap[&f[1]], remap[&f[2]]])
            .collect();
        let volume = polytope_volume(&vkeep, &faces);
        let (inr, circ) = polytope_radii(&vkeep, &faces);
        Ok(WulffShape { body: Body::Poly3 { verts: vkeep, faces }, volume, inradius: inr, circumradius: circ })
    }

    pub fn dim(&self) -> usize {
        match &self.body {
            Body::Poly2(_) => 2,
            Body::Poly3 { .. } => 3,
        }
    }

    pub fn polygon(&self) -> Option<&[Vec2]> {
        match &self.body {
            Body::Poly2(v) => Some(v),
            _ => None,
        }
    }

    /// Support function sup_{x in K} x . dir, evaluated over vertices.
    pub fn support(&self, dir: &[f64]) -> f64 {
        match &self.body {
            Body::Poly2(verts) => {
                let d = v2(dir[0], dir[1]);
                verts.iter().map(|&p| p.dot(d)).fold(f64::NEG_INFINITY, f64::max)
            }
            Body::Poly3 { verts, .. } => verts
                .iter()
                .map(|p| dot_n(p, dir))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn support2(&self, dir: Vec2) -> f64 {
        self.support(&[dir.x, dir.y])
    }

    /// Minkowski gauge inf { t > 0 : x in tK }, finite because the origin
    /// is interior for every shape the constructors hand out.
    pub fn gauge2(&self, x: Vec2) -> f64 {
        let verts = self.polygon().expect("gauge2 needs a planar body");
        let mut g = 0.0f64;
        for i in 0..verts.len() {
            let j = (i + 1) % verts.len();
            let edge = verts[j] - verts[i];
            let n = v2(edge.y, -edge.x); // outward for counterclockwise loops
            let denom = verts[i].dot(n);
            if denom > 0.0 {
                g = g.max(x.dot(n) / denom);
            }
        }
        g
    }

    /// Point where the ray from the origin through `u` leaves the body.
    pub fn boundary_ray(&self, u: Vec2) -> Vec2 {
        let g = self.gauge2(u);
        u / g
    }

    /// Translate by `t` (planar bodies).
    pub fn translated(&self, t: Vec2) -> WulffShape {
        match &self.body {
            Body::Poly2(verts) => {
                let moved: Vec<Vec2> = verts.iter().map(|&p| p + t).collect();
                Self::from_hulled_polygon(moved)
            }
            Body::Poly3 { .. } => panic!("translated is planar only"),
        }
    }

    pub fn scaled(&self, s: f64) -> WulffShape {
        match &self.body {
            Body::Poly2(verts) => {
                let scaled: Vec<Vec2> = verts.iter().map(|&p| p * s).collect();
                Self::from_hulled_polygon(scaled)
            }
            Body::Poly3 { verts, faces } => {
                let scaled: Vec<[f64; 3]> = verts
                    .iter()
                    .map(|p| [p[0] * s, p[1] * s, p[2] * s])
                    .collect();
                let volume = polytope_volume(&scaled, faces);
                let (inr, circ) = polytope_radii(&scaled, faces);
                WulffShape {
                    body: Body::Poly3 { verts: scaled, faces: faces.clone() },
                    volume,
                    inradius: inr,
                    circumradius: circ,
                }
            }
        }
    }

    /// Min and max of the support function over unit directions.
    pub fn support_bounds(&self) -> (f64, f64) {
        (self.inradius, self.circumradius)
    }
}

fn polygon_radii(verts: &[Vec2]) -> (f64, f64) {
    // Min of support over the sphere is attained at a facet normal, max at
    // a vertex direction.
    let mut inr = f64::INFINITY;
    let mut circ: f64 = 0.0;
    for i in 0..verts.len() {
        let j = (i + 1) % verts.len();
        let edge = verts[j] - verts[i];
        let n = v2(edge.y, -edge.x).normalized();
        inr = inr.min(verts[i].dot(n));
        circ = circ.max(verts[i].norm());
    }
    (inr, circ)
}

fn polytope_volume(verts: &[[f64; 3]], faces: &[[usize; 3]]) -> f64 {
    let mut six_v = 0.0;
    for f in faces {
        let (a, b, c) = (verts[f[0]], verts[f[1]], verts[f[2]]);
        six_v += a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
            + a[2] * (b[0] * c[1] - b[1] * c[0]);
    }
    six_v.abs() / 6.0
}

fn polytope_centroid(verts: &[[f64; 3]], faces: &[[usize; 3]]) -> [f64; 3] {
    let mut c = [0.0; 3];
    let mut six_v = 0.0;
    for f in faces {
        let (a, b, c3) = (verts[f[0]], verts[f[1]], verts[f[2]]);
        let det = a[0] * (b[1] * c3[2] - b[2] * c3[1]) - a[1] * (b[0] * c3[2] - b[2] * c3[0])
            + a[2] * (b[0] * c3[1] - b[1] * c3[0]);
        six_v += det;
        for k in 0..3 {
            c[k] += det * (a[k] + b[k] + c3[k]) / 4.0;
        }
    }
    for k in 0..3 {
        c[k] /= six_v;
    }
    c
}

fn polytope_radii(verts: &[[f64; 3]], faces: &[[usize; 3]]) -> (f64, f64) {
    let mut inr = f64::INFINITY;
    let mut circ: f64 = 0.0;
    for f in faces {
        let (a, b, c) = (verts[f[0]], verts[f[1]], verts[f[2]]);
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let w = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let mut n = [
            u[1] * w[2] - u[2] * w[1],
            u[2] * w[0] - u[0] * w[2],
            u[0] * w[1] - u[1] * w[0],
        ];
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if len == 0.0 {
            continue;
        }
        for k in 0..3 {
            n[k] /= len;
        }
        inr = inr.min((a[0] * n[0] + a[1] * n[1] + a[2] * n[2]).abs());
    }
    for p in verts {
        circ = circ.max((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt());
    }
    (inr, circ)
}

/// Build the body of a sampled tension.
///
/// Errors with `UnboundedShape` when the sampled directions fail to
/// positively span space, which is exactly the origin not lying strictly
/// inside the hull of the dual points.
pub fn wulff_from_tension(tension: &TensionSpec) -> Result<WulffShape> {
    match tension.dim {
        2 => wulff2(tension),
        3 => wulff3(tension),
        _ => Err(Error::BadInput("dim must be 2 or 3".into())),
    }
}

fn wulff2(tension: &TensionSpec) -> Result<WulffShape> {
    let duals: Vec<Vec2> = tension
        .samples
        .iter()
        .map(|s| v2(s.dir[0] / s.value, s.dir[1] / s.value))
        .collect();
    let hull = hull2(&duals);
    if hull.len() < 3 {
        return Err(Error::UnboundedShape);
    }
    for i in 0..hull.len() {
        let j = (i + 1) % hull.len();
        if orient2d(hull[i], hull[j], Vec2::ZERO) <= 0 {
            return Err(Error::UnboundedShape);
        }
    }
    // Dual facet {x : x.pa = 1, x.pb = 1} is a primal vertex.
    let mut raw: Vec<Vec2> = Vec::with_capacity(hull.len());
    for i in 0..hull.len() {
        let j = (i + 1) % hull.len();
        let (pa, pb) = (hull[i], hull[j]);
        let det = pa.cross(pb);
        raw.push(v2((pb.y - pa.y) / det, (pa.x - pb.x) / det));
    }
    let scale = raw.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let mut verts: Vec<Vec2> = Vec::with_capacity(raw.len());
    for vert in raw {
        if verts.last().map_or(true, |&last| (vert - last).norm() > 1e-12 * scale) {
            verts.push(vert);
        }
    }
    if verts.len() >= 2 && (verts[0] - *verts.last().unwrap()).norm() <= 1e-12 * scale {
        verts.pop();
    }
    if verts.len() < 3 {
        return Err(Error::EmptyShape);
    }
    if polygon_area(&verts) < 0.0 {
        verts.reverse();
    }
    Ok(WulffShape::from_hulled_polygon(verts))
}

fn wulff3(tension: &TensionSpec) -> Result<WulffShape> {
    let duals: Vec<[f64; 3]> = tension
        .samples
        .iter()
        .map(|s| {
            [
                s.dir[0] / s.value,
                s.dir[1] / s.value,
                s.dir[2] / s.value,
            ]
        })
        .collect();
    let hull = hull3(&duals).map_err(|_| Error::UnboundedShape)?;
    let scale = duals
        .iter()
        .map(|p| (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt())
        .fold(0.0, f64::max);
    let mut verts: Vec<[f64; 3]> = Vec::new();
    for f in &hull.faces {
        let (a, b, c) = (duals[f[0]], duals[f[1]], duals[f[2]]);
        // Solve a.x = b.x = c.x = 1; reject facets whose plane passes too
        // near the origin, which signals an unbounded intersection.
        let det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
            + a[2] * (b[0] * c[1] - b[1] * c[0]);
        if det.abs() < 1e-12 * scale * scale * scale {
            return Err(Error::UnboundedShape);
        }
        let x = [
            ((b[1] * c[2] - b[2] * c[1]) - (a[1] * c[2] - a[2] * c[1])
                + (a[1] * b[2] - a[2] * b[1]))
                / det,
            -((b[0] * c[2] - b[2] * c[0]) - (a[0] * c[2] - a[2] * c[0])
                + (a[0] * b[2] - a[2] * b[0]))
                / det,
            ((b[0] * c[1] - b[1] * c[0]) - (a[0] * c[1] - a[1] * c[0])
                + (a[0] * b[1] - a[1] * b[0]))
                / det,
        ];
        verts.push(x);
    }
    let vscale = verts
        .iter()
        .map(|p| (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt())
        .fold(0.0f64, f64::max);
    let mut deduped: Vec<[f64; 3]> = Vec::with_capacity(verts.len());
    for x in verts {
        if !deduped.iter().any(|q| {
            let d2 = (q[0] - x[0]).powi(2) + (q[1] - x[1]).powi(2) + (q[2] - x[2]).powi(2);
            d2.sqrt() < 1e-9 * vscale
        }) {
            deduped.push(x);
        }
    }
    let verts = deduped;
    // Origin interior of the dual hull <=> every dual facet plane has the
    // origin strictly on its inner side.
    for f in &hull.faces {
        let (a, b, c) = (duals[f[0]], duals[f[1]], duals[f[2]]);
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let w = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let n = [
            u[1] * w[2] - u[2] * w[1],
            u[2] * w[0] - u[0] * w[2],
            u[0] * w[1] - u[1] * w[0],
        ];
        let off = a[0] * n[0] + a[1] * n[1] + a[2] * n[2];
        let inner = hull.interior[0] * n[0] + hull.interior[1] * n[1] + hull.interior[2] * n[2];
        // Strict same-side test: the origin must sit with the hull interior
        // relative to every facet plane.
        if !((-off) * (inner - off) > 0.0) {
            return Err(Error::UnboundedShape);
        }
    }
    WulffShape::from_polytope(verts)
}

/// Recenter at the barycenter, rescale to unit-ball volume, and enforce
/// the eccentricity contract circumradius / inradius <= dim.
pub fn normalize_shape(shape: &WulffShape) -> Result<WulffShape> {
    let n = shape.dim();
    let ball = if n == 2 { std::f64::consts::PI } else { 4.0 * std::f64::consts::PI / 3.0 };
    let normalized = match &shape.body {
        Body::Poly2(verts) => {
            let c = polygon_centroid(verts);
            let s = (ball / shape.volume).sqrt();
            let moved: Vec<Vec2> = verts.iter().map(|&p| (p - c) * s).collect();
            WulffShape::from_hulled_polygon(moved)
        }
        Body::Poly3 { verts, faces } => {
            let c = polytope_centroid(verts, faces);
            let s = (ball / shape.volume).cbrt();
            let moved: Vec<[f64; 3]> = verts
                .iter()
                .map(|p| [(p[0] - c[0]) * s, (p[1] - c[1]) * s, (p[2] - c[2]) * s])
                .collect();
            let volume = polytope_volume(&moved, faces);
            let (inr, circ) = polytope_radii(&moved, faces);
            WulffShape {
                body: Body::Poly3 { verts: moved, faces: faces.clone() },
                volume,
                inradius: inr,
                circumradius: circ,
            }
        }
    };
    let ratio = normalized.circumradius / normalized.inradius;
    let limit = n as f64;
    if ratio > limit * (1.0 + 1e-12) {
        return Err(Error::GaugeRatioExceeded { ratio, limit });
    }
    Ok(normalized)
}

/// Hausdorff distance between two convex polygons.
pub fn hausdorff_convex(a: &[Vec2], b: &[Vec2]) -> f64 {
    let one_way = |from: &[Vec2], to: &[Vec2]| -> f64 {
        let mut worst = 0.0f64;
        for &p in from {
            let mut best = f64::INFINITY;
            for i in 0..to.len() {
                let j = (i + 1) % to.len();
                best = best.min(crate::geom::point_segment_dist_sq(p, to[i], to[j]));
            }
            worst = worst.max(best);
        }
        worst.sqrt()
    };
    one_way(a, b).max(one_way(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Independent route: clip a huge box against every half-space in turn.
    fn halfplane_intersection_oracle(tension: &TensionSpec) -> Vec<Vec2> {
        let big = 1e3;
        let mut poly = vec![v2(-big, -big), v2(big, -big), v2(big, big), v2(-big, big)];
        for s in &tension.samples {
            let n = v2(s.dir[0], s.dir[1]);
            let c = s.value;
            let mut out: Vec<Vec2> = Vec::new();
            for i in 0..poly.len() {
                let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
                let (da, db) = (a.dot(n) - c, b.dot(n) - c);
                if da <= 0.0 {
                    out.push(a);
                }
                if (da < 0.0) != (db < 0.0) && da != db {
                    out.push(a.lerp(b, da / (da - db)));
                }
            }
            poly = out;
            if poly.is_empty() {
                break;
            }
        }
        poly
    }

    #[test]
    fn taxicab_tension_gives_square() {
        let t = TensionSpec::sample_2d(360, |d| d.x.abs() + d.y.abs());
        let k = wulff_from_tension(&t).unwrap();
        let square = vec![v2(1.0, -1.0), v2(1.0, 1.0), v2(-1.0, 1.0), v2(-1.0, -1.0)];
        let d = hausdorff_convex(k.polygon().unwrap(), &square);
        assert!(d <= 1e-3, "hausdorff to square {d}");

        let oracle = halfplane_intersection_oracle(&t);
        let d = hausdorff_convex(k.polygon().unwrap(), &oracle);
        assert!(d <= 1e-9, "hausdorff to clipping oracle {d}");
    }

    #[test]
    fn unit_tension_gives_near_disc() {
        let t = TensionSpec::sample_2d(360, |_| 1.0);
        let k = wulff_from_tension(&t).unwrap();
        // Circumscribed 360-gon: area n tan(pi/n), slightly above pi.
        assert!(k.volume >= PI);
        assert!(k.volume - PI <= 1e-3);
        assert!((k.inradius - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_sphere_directions_unbounded() {
        let samples: Vec<TensionSample> = (0..90)
            .map(|i| {
                let a = PI * (i as f64 + 0.5) / 90.0 - PI / 2.0;
                TensionSample { dir: vec![a.cos(), a.sin()], value: 1.0 }
            })
            .collect();
        let t = TensionSpec::new(2, samples).unwrap();
        assert!(matches!(wulff_from_tension(&t), Err(Error::UnboundedShape)));
    }

    #[test]
    fn round_trip_support_sampling() {
        // Sample the support function of a fixed convex polygon on uniform
        // directions plus its facet normals, rebuild, compare.
        let poly = vec![
            v2(1.2, 0.0),
            v2(0.6, 0.9),
            v2(-0.4, 1.0),
            v2(-1.1, 0.2),
            v2(-0.8, -0.7),
            v2(0.3, -1.0),
        ];
        let k0 = WulffShape::from_polygon(poly.clone()).unwrap();
        let mut dirs: Vec<Vec2> = (0..360)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / 360.0;
                v2(t.cos(), t.sin())
            })
            .collect();
        for i in 0..poly.len() {
            let e = poly[(i + 1) % poly.len()] - poly[i];
            dirs.push(v2(e.y, -e.x).normalized());
        }
        let samples = dirs
            .iter()
            .map(|d| TensionSample { dir: vec![d.x, d.y], value: k0.support2(*d) })
            .collect();
        let t = TensionSpec::new(2, samples).unwrap();
        let k1 = wulff_from_tension(&t).unwrap();
        let diam = 2.0 * k0.circumradius;
        let d = hausdorff_convex(k0.polygon().unwrap(), k1.polygon().unwrap());
        assert!(d <= 1e-6 * diam, "round trip hausdorff {d}");
    }

    #[test]
    fn hexagon_support_bounds() {
        let hexagon: Vec<Vec2> = (0..6)
            .map(|i| {
                let a = PI * i as f64 / 3.0;
                v2(a.cos(), a.sin())
            })
            .collect();
        let k = WulffShape::from_polygon(hexagon).unwrap();
        let (m, big_m) = k.support_bounds();
        assert!((m - 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((big_m - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_square_and_reject_sliver() {
        let square = WulffShape::from_polygon(vec![
            v2(-1.0, -1.0),
            v2(1.0, -1.0),
            v2(1.0, 1.0),
            v2(-1.0, 1.0),
        ])
        .unwrap();
        let k = normalize_shape(&square).unwrap();
        assert!((k.volume - PI).abs() < 1e-12);
        assert!((k.circumradius / k.inradius - 2f64.sqrt()).abs() < 1e-12);

        let sliver = WulffShape::from_polygon(vec![
            v2(-10.0, -0.1),
            v2(10.0, -0.1),
            v2(10.0, 0.1),
            v2(-10.0, 0.1),
        ])
        .unwrap();
        match normalize_shape(&sliver) {
            Err(Error::GaugeRatioExceeded { ratio, .. }) => {
                assert!((ratio - 100.0).abs() / 100.0 < 0.01, "ratio {ratio}");
            }
            other => panic!("expected gauge rejection, got {other:?}"),
        }
    }

    #[test]
    fn octahedral_tension_gives_cube() {
        let mut samples = Vec::new();
        for k in 0..3 {
            for s in [-1.0, 1.0] {
                let mut d = vec![0.0; 3];
                d[k] = s;
                samples.push(TensionSample { dir: d, value: 1.0 });
            }
        }
        let t = TensionSpec::new(3, samples).unwrap();
        let k = wulff_from_tension(&t).unwrap();
        assert!((k.volume - 8.0).abs() < 1e-9);
        assert!((k.inradius - 1.0).abs() < 1e-9);
        assert!((k.circumradius - 3f64.sqrt()).abs() < 1e-9);
        assert!((k.support(&[1.0, 1.0, 1.0]) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn gauge_of_square() {
        let k = WulffShape::from_polygon(vec![
            v2(-1.0, -1.0),
            v2(1.0, -1.0),
            v2(1.0, 1.0),
            v2(-1.0, 1.0),
        ])
        .unwrap();
        assert!((k.gauge2(v2(0.5, 0.0)) - 0.5).abs() < 1e-12);
        assert!((k.gauge2(v2(2.0, 2.0)) - 2.0).abs() < 1e-12);
        assert!((k.boundary_ray(v2(3.0, 3.0)) - v2(1.0, 1.0)).norm() < 1e-12);
    }
}
