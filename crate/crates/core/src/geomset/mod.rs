//! Measurable sets under two representations: polygon systems with exact
//! area bookkeeping, and voxel bitmasks.  Cross-representation arithmetic
//! is refused rather than silently resampled.

pub mod polygon;
pub mod voxel;

pub use polygon::{ConvexClipper, PolygonSystem};
pub use voxel::{MeshFacet, SignedDistField, VoxelGrid};

use crate::error::{Error, Result};
use crate::geom::v2;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub enum GeomSet {
    Polygon(PolygonSystem),
    Voxels(VoxelGrid),
}

/// Oriented facets of a set boundary; segments in the plane, triangles in
/// space.  Normals point out of the set.
#[derive(Debug, Clone)]
pub struct BoundaryMesh {
    pub dim: usize,
    pub facets: Vec<MeshFacet>,
}

impl BoundaryMesh {
    pub fn total_measure(&self) -> f64 {
        self.facets.iter().map(|f| f.measure).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityClass {
    Vanishing,
    Full,
    Fractional,
}

/// Volume-fraction ladder at a point, with its Richardson limit.
#[derive(Debug, Clone)]
pub struct DensityReport {
    pub ladder: Vec<(f64, f64)>,
    pub extrapolated: f64,
    pub class: DensityClass,
}

impl GeomSet {
    pub fn dim(&self) -> usize {
        match self {
            GeomSet::Polygon(_) => 2,
            GeomSet::Voxels(g) => g.dim,
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            GeomSet::Polygon(p) => p.area(),
            GeomSet::Voxels(g) => g.volume(),
        }
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        match self {
            GeomSet::Polygon(sys) => sys.contains(v2(p[0], p[1])),
            GeomSet::Voxels(g) => g.contains_point(p),
        }
    }

    pub fn symm_diff_volume(&self, other: &GeomSet) -> Result<f64> {
        match (self, other) {
            (GeomSet::Polygon(a), GeomSet::Polygon(b)) => Ok(polygon::symm_diff_area(a, b)),
            (GeomSet::Voxels(a), GeomSet::Voxels(b)) => a.symm_diff_volume(b),
            _ => Err(Error::MixedRepresentation),
        }
    }

    pub fn boundary_mesh(&self) -> BoundaryMesh {
        match self {
            GeomSet::Polygon(sys) => {
                let mut facets = Vec::new();
                for lp in sys.loops() {
                    let m = lp.len();
                    for i in 0..m {
                        let a = lp[i];
                        let b = lp[(i + 1) % m];
                        let e = b - a;
                        let len = e.norm();
                        if len == 0.0 {
                            continue;
                        }
                        // CCW outer loops and CW holes both yield the
                        // outward side here.
                        let n = v2(e.y, -e.x) / len;
                        facets.push(MeshFacet {
                            points: vec![[a.x, a.y, 0.0], [b.x, b.y, 0.0]],
                            normal: [n.x, n.y, 0.0],
                            measure: len,
                        });
                    }
                }
                BoundaryMesh { dim: 2, facets }
            }
            GeomSet::Voxels(g) => {
                let facets = if g.dim == 2 {
                    voxel::march_squares(g)
                } else {
                    voxel::march_tets(g)
                };
                BoundaryMesh { dim: g.dim, facets }
            }
        }
    }

    /// Fraction of B(p, r) covered by the set.  The reference disc is a
    /// 512-gon so the polygon route stays exact and self-consistent.
    pub fn ball_fraction(&self, p: [f64; 3], r: f64) -> Result<f64> {
        match self {
            GeomSet::Polygon(sys) => {
                let disc: Vec<_> = (0..512)
                    .map(|i| {
                        let t = 2.0 * PI * i as f64 / 512.0;
                        v2(r * t.cos(), r * t.sin())
                    })
                    .collect();
                let clip = ConvexClipper::from_polygon(&disc);
                Ok(clip.intersection_area(sys, v2(p[0], p[1])) / clip.area)
            }
            GeomSet::Voxels(g) => {
                if r < 4.0 * g.h {
                    return Err(Error::ResolutionTooCoarse);
                }
                let mut hit = 0u64;
                let mut tot = 0u64;
                let lo = [
                    ((p[0] - r - g.origin[0]) / g.h).floor() as i64,
                    ((p[1] - r - g.origin[1]) / g.h).floor() as i64,
                    ((p[2] - r - g.origin[2]) / g.h).floor() as i64,
                ];
                let hi = [
                    ((p[0] + r - g.origin[0]) / g.h).ceil() as i64,
                    ((p[1] + r - g.origin[1]) / g.h).ceil() as i64,
                    ((p[2] + r - g.origin[2]) / g.h).ceil() as i64,
                ];
                let zr = if g.dim == 3 { lo[2]..=hi[2] } else { 0..=0 };
                for z in zr {
                    for y in lo[1]..=hi[1] {
                        for x in lo[0]..=hi[0] {
                            let cx = g.origin[0] + (x as f64 + 0.5) * g.h;
                            let cy = g.origin[1] + (y as f64 + 0.5) * g.h;
                            let cz = if g.dim == 3 {
                                g.origin[2] + (z as f64 + 0.5) * g.h
                            } else {
                                p[2]
                            };
                            let d2 = (cx - p[0]).powi(2)
                                + (cy - p[1]).powi(2)
                                + (cz - p[2]).powi(2);
                            if d2 > r * r {
                                continue;
                            }
                            tot += 1;
                            let inb = x >= 0
                                && y >= 0
                                && z >= 0
                                && (x as usize) < g.dims[0]
                                && (y as usize) < g.dims[1]
                                && (z as usize) < g.dims[2];
                            if inb && g.get(x as usize, y as usize, z as usize) {
                                hit += 1;
                            }
                        }
                    }
                }
                if tot == 0 {
                    return Err(Error::ResolutionTooCoarse);
                }
                Ok(hit as f64 / tot as f64)
            }
        }
    }

    /// Classify the volume density at p from the radii r0, r0/2, r0/4.
    /// Two Richardson stages remove the linear and quadratic terms of the
    /// fraction's small-radius expansion.
    pub fn density_classify(&self, p: [f64; 3], r0: f64) -> Result<DensityReport> {
        if !(r0 > 0.0) {
            return Err(Error::BadInput("density radius must be positive".into()));
        }
        let rs = [r0, r0 / 2.0, r0 / 4.0];
        let mut ladder = Vec::with_capacity(3);
        for &r in &rs {
            ladder.push((r, self.ball_fraction(p, r)?));
        }
        let (t0, t1, t2) = (ladder[0].1, ladder[1].1, ladder[2].1);
        let a1 = 2.0 * t1 - t0;
        let a2 = 2.0 * t2 - t1;
        let extrapolated = (4.0 * a2 - a1) / 3.0;
        let class = if extrapolated <= 0.05 {
            DensityClass::Vanishing
        } else if extrapolated >= 0.95 {
            DensityClass::Full
        } else {
            DensityClass::Fractional
        };
        Ok(DensityReport { ladder, extrapolated, class })
    }

    /// Boundary-measure to ball-radius ratios at p over a halving ladder.
    /// Bounded ratios certify an upper density bound; the comb-type
    /// fixtures drive this to blow-up.
    pub fn upper_density_check(&self, p: [f64; 3], r0: f64, steps: usize) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::with_capacity(steps);
        let mut r = r0;
        for _ in 0..steps {
            let ratio = match self {
                GeomSet::Polygon(sys) => {
                    sys.boundary_length_in_ball(v2(p[0], p[1]), r) / (2.0 * r)
                }
                GeomSet::Voxels(g) => {
                    if r < 4.0 * g.h {
                        return Err(Error::ResolutionTooCoarse);
                    }
                    let mesh = self.boundary_mesh();
                    let mut len = 0.0;
                    for f in &mesh.facets {
                        let k = f.points.len() as f64;
                        let mut m = [0.0; 3];
                        for q in &f.points {
                            for d in 0..3 {
                                m[d] += q[d] / k;
                            }
                        }
                        let d2 = (m[0] - p[0]).powi(2)
                            + (m[1] - p[1]).powi(2)
                            + (m[2] - p[2]).powi(2);
                        if d2 <= r * r {
                            len += f.measure;
                        }
                    }
                    let denom = if g.dim == 2 { 2.0 * r } else { PI * r * r };
                    len / denom
                }
            };
            out.push((r, ratio));
            r /= 2.0;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> GeomSet {
        GeomSet::Polygon(
            PolygonSystem::single(vec![
                v2(0.0, 0.0),
                v2(1.0, 0.0),
                v2(1.0, 1.0),
                v2(0.0, 1.0),
            ])
            .unwrap(),
        )
    }

    #[test]
    fn mixed_representations_refuse_to_combine() {
        let a = unit_square();
        let g = VoxelGrid::empty(2, 0.5, [0.0, 0.0, 0.0], [2, 2, 1]).unwrap();
        let b = GeomSet::Voxels(g);
        assert!(matches!(
            a.symm_diff_volume(&b),
            Err(Error::MixedRepresentation)
        ));
    }

    #[test]
    fn polygon_mesh_measures_the_boundary() {
        let sq = unit_square();
        let mesh = sq.boundary_mesh();
        assert_eq!(mesh.facets.len(), 4);
        assert!((mesh.total_measure() - 4.0).abs() < 1e-12);
        for f in &mesh.facets {
            // Outward: the midpoint nudged along the normal leaves the set.
            let m = v2(
                (f.points[0][0] + f.points[1][0]) / 2.0,
                (f.points[0][1] + f.points[1][1]) / 2.0,
            );
            let out = m + v2(f.normal[0], f.normal[1]) * 1e-3;
            assert!(!sq.contains([out.x, out.y, 0.0]));
        }
    }

    #[test]
    fn density_ladder_classifies_square_points() {
        let sq = unit_square();
        let interior = sq.density_classify([0.5, 0.5, 0.0], 0.2).unwrap();
        assert_eq!(interior.class, DensityClass::Full);
        let edge = sq.density_classify([0.5, 0.0, 0.0], 0.2).unwrap();
        assert_eq!(edge.class, DensityClass::Fractional);
        assert!((edge.extrapolated - 0.5).abs() < 0.02);
        let corner = sq.density_classify([0.0, 0.0, 0.0], 0.2).unwrap();
        assert!((corner.extrapolated - 0.25).abs() < 0.02);
        let far = sq.density_classify([3.0, 3.0, 0.0], 0.2).unwrap();
        assert_eq!(far.class, DensityClass::Vanishing);
    }

    #[test]
    fn voxel_density_needs_resolution() {
        let mut g = VoxelGrid::empty(2, 0.25, [0.0, 0.0, 0.0], [8, 8, 1]).unwrap();
        for y in 0..8 {
            for x in 0..8 {
                g.set(x, y, 0, true);
            }
        }
        let set = GeomSet::Voxels(g);
        assert!(matches!(
            set.density_classify([1.0, 1.0, 0.0], 0.5),
            Err(Error::ResolutionTooCoarse)
        ));
        let ok = set.density_classify([1.0, 1.0, 0.0], 4.0).unwrap();
        assert!(ok.ladder.len() == 3);
    }

    #[test]
    fn straight_edge_has_unit_upper_density() {
        let sq = unit_square();
        let ladder = sq.upper_density_check([0.5, 0.0, 0.0], 0.2, 4).unwrap();
        for &(_, ratio) in &ladder {
            assert!((ratio - 1.0).abs() < 1e-9, "ratio {ratio}");
        }
    }

}
