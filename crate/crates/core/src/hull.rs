//! Convex hulls in dimension 2 and 3.
//!
//! The planar hull is the usual monotone chain.  The spatial hull is an
//! incremental visibility algorithm that recovers the horizon by edge
//! parity instead of neighbor pointers, which keeps the bookkeeping small
//! at the point counts we deal with (a few thousand).

use crate::geom::{orient2d, Vec2};

/// Counterclockwise hull of a planar point set, collinear points dropped.
pub fn hull2(points: &[Vec2]) -> Vec<Vec2> {
    let mut pts: Vec<Vec2> = points.to_vec();
    pts.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap().then(a.y.partial_cmp(&b.y).unwrap()));
    pts.dedup_by(|a, b| a.x == b.x && a.y == b.y);
    if pts.len() < 3 {
        return pts;
    }
    let chain = |iter: &mut dyn Iterator<Item = Vec2>| -> Vec<Vec2> {
        let mut h: Vec<Vec2> = Vec::new();
        for p in iter {
            while h.len() >= 2 && orient2d(h[h.len() - 2], h[h.len() - 1], p) <= 0 {
                h.pop();
            }
            h.push(p);
        }
        h.pop();
        h
    };
    let mut lower = chain(&mut pts.iter().copied());
    let upper = chain(&mut pts.iter().rev().copied());
    lower.extend(upper);
    lower
}

/// Triangle soup description of a 3d hull.
#[derive(Debug, Clone)]
pub struct Hull3 {
    /// Indices into the input point slice, counterclockwise from outside.
    pub faces: Vec<[usize; 3]>,
    /// A point strictly inside the hull.
    pub interior: [f64; 3],
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

/// Signed volume of the tetrahedron (a, b, c, d), positive when d lies on
/// the counterclockwise side of (a, b, c).
fn orient3d(a: [f64; 3], b: [f64; 3], c: [f64; 3], d: [f64; 3]) -> f64 {
    let u = sub3(b, a);
    let v = sub3(c, a);
    let w = sub3(d, a);
    dot3(cross3(u, v), w)
}

fn orient3d_scale(a: [f64; 3], b: [f64; 3], c: [f64; 3], d: [f64; 3]) -> f64 {
    let u = sub3(b, a);
    let v = sub3(c, a);
    let w = sub3(d, a);
    norm3(u) * norm3(v) * norm3(w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HullError {
    /// Every input point lies in a common plane (or worse).
    Degenerate,
}

/// Convex hull of a spatial point set with at least one non-degenerate
/// tetrahedron among the inputs.
pub fn hull3(points: &[[f64; 3]]) -> Result<Hull3, HullError> {
    let n = points.len();
    if n < 4 {
        return Err(HullError::Degenerate);
    }

    // Initial tetrahedron: spread-out extremes keep the seed well shaped.
    let i0 = (0..n)
        .min_by(|&a, &b| points[a].partial_cmp(&points[b]).unwrap())
        .unwrap();
    let i1 = (0..n)
        .max_by(|&a, &b| {
            let da = norm3(sub3(points[a], points[i0]));
            let db = norm3(sub3(points[b], points[i0]));
            da.partial_cmp(&db).unwrap()
        })
        .unwrap();
    let line = sub3(points[i1], points[i0]);
    let i2 = (0..n)
        .max_by(|&a, &b| {
            let da = norm3(cross3(line, sub3(points[a], points[i0])));
            let db = norm3(cross3(line, sub3(points[b], points[i0])));
            da.partial_cmp(&db).unwrap()
        })
        .unwrap();
    let i3 = (0..n)
        .max_by(|&a, &b| {
            let da = orient3d(points[i0], points[i1], points[i2], points[a]).abs();
            let db = orient3d(points[i0], points[i1], points[i2], points[b]).abs();
            da.partial_cmp(&db).unwrap()
        })
        .unwrap();
    let vol = orient3d(points[i0], points[i1], points[i2], points[i3]);
    let scale = orient3d_scale(points[i0], points[i1], points[i2], points[i3]).max(1e-300);
    if vol.abs() <= 1e-12 * scale {
        return Err(HullError::Degenerate);
    }

    let interior = {
        let mut c = [0.0; 3];
        for &i in &[i0, i1, i2, i3] {
            for k in 0..3 {
                c[k] += points[i][k] / 4.0;
            }
        }
        c
    };

    let orient = |f: [usize; 3]| -> [usize; 3] {
        if orient3d(points[f[0]], points[f[1]], points[f[2]], interior) < 0.0 {
            f
        } else {
            [f[1], f[0], f[2]]
        }
    };
    let mut faces: Vec<[usize; 3]> = vec![
        orient([i0, i1, i2]),
        orient([i0, i1, i3]),
        orient([i0, i2, i3]),
        orient([i1, i2, i3]),
    ];

    // Deterministic pseudoshuffled insertion order to dodge adversarial
    // sorted inputs.
    let mut order: Vec<usize> = (0..n).filter(|i| ![i0, i1, i2, i3].contains(i)).collect();
    let mut s: u64 = 0x9e3779b97f4a7c15 ^ (n as u64);
    for i in (1..order.len()).rev() {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        order.swap(i, (s % (i as u64 + 1)) as usize);
    }

    for &pi in &order {
        let p = points[pi];
        let mut visible: Vec<usize> = Vec::new();
        for (fi, f) in faces.iter().enumerate() {
            let (a, b, c) = (points[f[0]], points[f[1]], points[f[2]]);
            let v = orient3d(a, b, c, p);
            let tol = 1e-12 * orient3d_scale(a, b, c, p).max(1e-300);
            // Coplanar points stay inside; facet triangulation absorbs them.
            if v > tol {
                visible.push(fi);
            }
        }
        if visible.is_empty() {
            continue;
        }

        // Horizon = directed edges of visible faces whose reverse is not
        // among visible faces.
        use std::collections::HashSet;
        let vis_set: HashSet<usize> = visible.iter().copied().collect();
        let mut edges: HashSet<(usize, usize)> = HashSet::new();
        for &fi in &visible {
            let f = faces[fi];
            for (u, v) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                edges.insert((u, v));
            }
        }
        let mut horizon: Vec<(usize, usize)> = Vec::new();
        for &(u, v) in &edges {
            if !edges.contains(&(v, u)) {
                horizon.push((u, v));
            }
        }
        horizon.sort();

        let mut next: Vec<[usize; 3]> = faces
            .iter()
            .enumerate()
            .filter(|(fi, _)| !vis_set.contains(fi))
            .map(|(_, f)| *f)
            .collect();
        for (u, v) in horizon {
            next.push(orient([u, v, pi]));
        }
        faces = next;
    }

    Ok(Hull3 { faces, interior })
}

impl Hull3 {
    /// Indices of points that appear as hull vertices, ascending.
    pub fn vertex_indices(&self) -> Vec<usize> {
        let mut ix: Vec<usize> = self.faces.iter().flatten().copied().collect();
        ix.sort_unstable();
        ix.dedup();
        ix
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::v2;

    #[test]
    fn planar_hull_of_grid() {
        let mut pts = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                pts.push(v2(i as f64, j as f64));
            }
        }
        let h = hull2(&pts);
        assert_eq!(h.len(), 4);
        // Shoelace: counterclockwise and full square.
        let mut a = 0.0;
        for i in 0..h.len() {
            let j = (i + 1) % h.len();
            a += h[i].cross(h[j]);
        }
        assert!((a / 2.0 - 16.0).abs() < 1e-12);
    }

    #[test]
    fn spatial_hull_of_cube_with_inner_points() {
        let mut pts: Vec<[f64; 3]> = Vec::new();
        for &x in &[-1.0, 1.0] {
            for &y in &[-1.0, 1.0] {
                for &z in &[-1.0, 1.0] {
                    pts.push([x, y, z]);
                }
            }
        }
        for k in 0..20 {
            let t = k as f64 / 40.0;
            pts.push([t, -t, 0.3 * t]);
        }
        let h = hull3(&pts).unwrap();
        assert_eq!(h.vertex_indices().len(), 8);
        // Every face keeps the interior point below its plane, and the
        // total volume from the interior point is 8.
        let mut vol = 0.0;
        for f in &h.faces {
            let o = orient3d(pts[f[0]], pts[f[1]], pts[f[2]], h.interior);
            assert!(o < 0.0);
            vol += -o / 6.0;
        }
        assert!((vol - 8.0).abs() < 1e-9);
    }

    #[test]
    fn spatial_hull_of_octahedron() {
        let pts: Vec<[f64; 3]> = vec![
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ];
        let h = hull3(&pts).unwrap();
        assert_eq!(h.faces.len(), 8);
        assert_eq!(h.vertex_indices().len(), 6);
    }

    #[test]
    fn coplanar_points_rejected() {
        let pts: Vec<[f64; 3]> = (0..10).map(|i| [i as f64, (i * i) as f64, 0.0]).collect();
        assert_eq!(hull3(&pts).unwrap_err(), HullError::Degenerate);
    }
}
