//! Whitney decomposition of an open set into dyadic cubes.
//!
//! A cube Q of side s is accepted when its certified distance to the
//! boundary is at least sqrt(n) s and its center lies in the domain; the
//! parent-rejection argument then pins dist(center, boundary) between
//! sqrt(n) s and 4 sqrt(n) s.  Cubes still undecided at the deepest level
//! are tallied as uncovered volume instead of being forced either way.

use crate::error::{Error, Result};
use crate::geom::{v2, Box2, Vec2};
use crate::geomset::polygon::PolygonSystem;
use crate::geomset::voxel::SignedDistField;
use crate::geomset::GeomSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use serde::{Deserialize, Serialize};

pub const LEVEL_CAP: u32 = 24;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WhitneyCube {
    pub level: u32,
    pub idx: [i64; 3],
    /// Certified lower bound on dist(Q, boundary); exact for polygons.
    pub dist_lo: f64,
    /// Certified lower bound on dist(center, boundary); equals dist_hi on
    /// the polygon route where center distances are exact.
    pub center_lo: f64,
    /// dist(center, boundary), an upper bound for dist(Q, boundary).
    pub dist_hi: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WhitneyDecomposition {
    pub dim: usize,
    pub origin: [f64; 3],
    pub root_side: f64,
    pub max_level: u32,
    pub cubes: Vec<WhitneyCube>,
    /// Volume of the domain left unassigned at the deepest level.
    pub uncovered: f64,
}

enum DistOracle<'a> {
    Poly(&'a PolygonSystem),
    Vox(&'a crate::geomset::VoxelGrid, SignedDistField),
}

impl DistOracle<'_> {
    fn contains(&self, p: [f64; 3]) -> bool {
        match self {
            DistOracle::Poly(sys) => sys.contains(v2(p[0], p[1])),
            DistOracle::Vox(g, _) => g.contains_point(p),
        }
    }

    /// (lower bound on inf over the box, lower and upper bounds at the
    /// center).
    fn box_bounds(&self, lo: [f64; 3], side: f64, dim: usize) -> (f64, f64, f64) {
        match self {
            DistOracle::Poly(sys) => {
                let bx = Box2 { lo: v2(lo[0], lo[1]), hi: v2(lo[0] + side, lo[1] + side) };
                let c = v2(lo[0] + side / 2.0, lo[1] + side / 2.0);
                let d = sys.dist_to_boundary(c);
                (sys.box_dist_to_boundary(bx), d, d)
            }
            DistOracle::Vox(_, field) => {
                let c = [
                    lo[0] + side / 2.0,
                    lo[1] + side / 2.0,
                    if dim == 3 { lo[2] + side / 2.0 } else { 0.0 },
                ];
                let (clo, chi) = field.bounds(c);
                let half_diag = 0.5 * side * (dim as f64).sqrt();
                ((clo - half_diag).max(0.0), clo, chi)
            }
        }
    }
}

pub fn decompose(domain: &GeomSet, max_level: u32) -> Result<WhitneyDecomposition> {
    if max_level > LEVEL_CAP {
        return Err(Error::MaxLevelExceeded { requested: max_level, cap: LEVEL_CAP });
    }
    let dim = domain.dim();
    let oracle = match domain {
        GeomSet::Polygon(sys) => DistOracle::Poly(sys),
        GeomSet::Voxels(g) => DistOracle::Vox(g, g.dist_field()),
    };
    let (origin, root_side) = root_box(domain);
    let mut cubes = Vec::new();
    let mut uncovered = 0.0;
    let mut stack: Vec<(u32, [i64; 3])> = vec![(0, [0, 0, 0])];
    let sqrt_n = (dim as f64).sqrt();
    while let Some((level, idx)) = stack.pop() {
        let side = root_side / (1u64 << level) as f64;
        let lo = [
            origin[0] + idx[0] as f64 * side,
            origin[1] + idx[1] as f64 * side,
            if dim == 3 { origin[2] + idx[2] as f64 * side } else { 0.0 },
        ];
        let center = [
            lo[0] + side / 2.0,
            lo[1] + side / 2.0,
            if dim == 3 { lo[2] + side / 2.0 } else { 0.0 },
        ];
        let (dist_lo, center_lo, dist_hi) = oracle.box_bounds(lo, side, dim);
        let center_in = oracle.contains(center);
        if center_in && dist_lo >= sqrt_n * side {
            cubes.push(WhitneyCube { level, idx, dist_lo, center_lo, dist_hi });
            continue;
        }
        // No boundary inside the box and an outside center: fully exterior.
        if !center_in && dist_lo > 0.0 {
            continue;
        }
        if level == max_level {
            uncovered += box_domain_volume(domain, lo, side, dim);
            continue;
        }
        let kids = if dim == 3 { 8 } else { 4 };
        for b in 0..kids {
            stack.push((
                level + 1,
                [
                    idx[0] * 2 + (b & 1) as i64,
                    idx[1] * 2 + ((b >> 1) & 1) as i64,
                    if dim == 3 { idx[2] * 2 + ((b >> 2) & 1) as i64 } else { 0 },
                ],
            ));
        }
    }
    if cubes.is_empty() {
        return Err(Error::EmptyInterior);
    }
    cubes.sort_by_key(|c| (c.level, c.idx));
    Ok(WhitneyDecomposition { dim, origin, root_side, max_level, cubes, uncovered })
}

fn root_box(domain: &GeomSet) -> ([f64; 3], f64) {
    match domain {
        GeomSet::Polygon(sys) => {
            let bb = sys.bbox();
            let ext = (bb.hi.x - bb.lo.x).max(bb.hi.y - bb.lo.y);
            let side = ext * 1.01;
            let cx = (bb.lo.x + bb.hi.x) / 2.0;
            let cy = (bb.lo.y + bb.hi.y) / 2.0;
            ([cx - side / 2.0, cy - side / 2.0, 0.0], side)
        }
        GeomSet::Voxels(g) => {
            let ext = (0..g.dim).map(|k| g.dims[k] as f64 * g.h).fold(0.0, f64::max);
            let side = ext * 1.01;
            let mut o = [0.0; 3];
            for k in 0..g.dim {
                let c = g.origin[k] + g.dims[k] as f64 * g.h / 2.0;
                o[k] = c - side / 2.0;
            }
            (o, side)
        }
    }
}

/// |box meet domain|; exact for polygons, cell-center counting for voxels.
fn box_domain_volume(domain: &GeomSet, lo: [f64; 3], side: f64, dim: usize) -> f64 {
    match domain {
        GeomSet::Polygon(sys) => {
            let bx = vec![
                v2(lo[0], lo[1]),
                v2(lo[0] + side, lo[1]),
                v2(lo[0] + side, lo[1] + side),
                v2(lo[0], lo[1] + side),
            ];
            let clip = crate::geomset::polygon::ConvexClipper::from_polygon(&bx);
            clip.intersection_area(sys, Vec2::ZERO)
        }
        GeomSet::Voxels(g) => {
            let mut vol = 0.0;
            let cells = (side / g.h).ceil() as i64 + 1;
            let base = [
                ((lo[0] - g.origin[0]) / g.h).floor() as i64,
                ((lo[1] - g.origin[1]) / g.h).floor() as i64,
                ((lo[2] - g.origin[2]) / g.h).floor() as i64,
            ];
            let zr = if dim == 3 { 0..cells } else { 0..1 };
            for dz in zr {
                for dy in 0..cells {
                    for dx in 0..cells {
                        let (x, y, z) = (base[0] + dx, base[1] + dy, base[2] + dz);
                        if x < 0 || y < 0 || z < 0 {
                            continue;
                        }
                        let (x, y, z) = (x as usize, y as usize, z as usize);
                        if x >= g.dims[0] || y >= g.dims[1] || z >= g.dims[2] {
                            continue;
                        }
                        let c = g.cell_center(x, y, z);
                        let inside_box = (0..dim).all(|k| c[k] >= lo[k] && c[k] < lo[k] + side);
                        if inside_box && g.get(x, y, z) {
                            vol += g.h.powi(dim as i32);
                        }
                    }
                }
            }
            vol
        }
    }
}

impl WhitneyDecomposition {
    pub fn side(&self, level: u32) -> f64 {
        self.root_side / (1u64 << level) as f64
    }

    pub fn cube_lo(&self, c: &WhitneyCube) -> [f64; 3] {
        let s = self.side(c.level);
        [
            self.origin[0] + c.idx[0] as f64 * s,
            self.origin[1] + c.idx[1] as f64 * s,
            if self.dim == 3 { self.origin[2] + c.idx[2] as f64 * s } else { 0.0 },
        ]
    }

    pub fn cube_center(&self, c: &WhitneyCube) -> [f64; 3] {
        let s = self.side(c.level);
        let lo = self.cube_lo(c);
        [
            lo[0] + s / 2.0,
            lo[1] + s / 2.0,
            if self.dim == 3 { lo[2] + s / 2.0 } else { 0.0 },
        ]
    }

    pub fn total_cube_volume(&self) -> f64 {
        self.cubes
            .iter()
            .map(|c| self.side(c.level).powi(self.dim as i32))
            .sum()
    }

    /// Pairs of cubes whose closures touch, by exact integer overlap of
    /// the index boxes lifted to the finest level.
    pub fn touching_pairs(&self) -> Vec<(usize, usize)> {
        let by_level = self.level_index();
        let mut pairs = Vec::new();
        for (a, ca) in self.cubes.iter().enumerate() {
            let la = ca.level;
            let lo_a: Vec<i64> = (0..self.dim)
                .map(|k| ca.idx[k] << (self.max_level - la))
                .collect();
            let hi_a: Vec<i64> = (0..self.dim)
                .map(|k| (ca.idx[k] + 1) << (self.max_level - la))
                .collect();
            for lb in la.saturating_sub(2)..=(la + 2).min(self.max_level) {
                let Some(level_map) = by_level.get(&lb) else { continue };
                let shift = self.max_level - lb;
                // Candidate index window at level lb covering the touch
                // range of A.
                let lo_i: Vec<i64> = (0..self.dim).map(|k| (lo_a[k] >> shift) - 1).collect();
                let hi_i: Vec<i64> = (0..self.dim).map(|k| (hi_a[k] >> shift) + 1).collect();
                let zr = if self.dim == 3 { lo_i[2]..=hi_i[2] } else { 0..=0 };
                for z in zr {
                    for y in lo_i[1]..=hi_i[1] {
                        for x in lo_i[0]..=hi_i[0] {
                            let Some(&b) = level_map.get(&[x, y, z]) else { continue };
                            if b == a {
                                continue;
                            }
                            let cb = &self.cubes[b];
                            let touches = (0..self.dim).all(|k| {
                                let lo_b = cb.idx[k] << (self.max_level - cb.level);
                                let hi_b = (cb.idx[k] + 1) << (self.max_level - cb.level);
                                lo_a[k] <= hi_b && lo_b <= hi_a[k]
                            });
                            if touches {
                                pairs.push((a.min(b), a.max(b)));
                            }
                        }
                    }
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }

    pub(crate) fn level_index(&self) -> HashMap<u32, HashMap<[i64; 3], usize>> {
        let mut by_level: HashMap<u32, HashMap<[i64; 3], usize>> = HashMap::new();
        for (i, c) in self.cubes.iter().enumerate() {
            by_level.entry(c.level).or_default().insert(c.idx, i);
        }
        by_level
    }

    /// Largest number of `dilation`-scaled cubes covering any of `samples`
    /// points drawn from the cube union.
    pub fn overlap_multiplicity(&self, dilation: f64, samples: usize, seed: u64) -> u32 {
        let by_level = self.level_index();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Volume-weighted cube choice via cumulative sums.
        let mut cum = Vec::with_capacity(self.cubes.len());
        let mut acc = 0.0;
        for c in &self.cubes {
            acc += self.side(c.level).powi(self.dim as i32);
            cum.push(acc);
        }
        let mut worst = 0u32;
        for _ in 0..samples {
            let t: f64 = rng.gen::<f64>() * acc;
            let i = cum.partition_point(|&v| v < t).min(self.cubes.len() - 1);
            let s = self.side(self.cubes[i].level);
            let lo = self.cube_lo(&self.cubes[i]);
            let p = [
                lo[0] + rng.gen::<f64>() * s,
                lo[1] + rng.gen::<f64>() * s,
                if self.dim == 3 { lo[2] + rng.gen::<f64>() * s } else { 0.0 },
            ];
            let mut count = 0u32;
            for (&level, level_map) in &by_level {
                let sl = self.side(level);
                let base = [
                    ((p[0] - self.origin[0]) / sl).floor() as i64,
                    ((p[1] - self.origin[1]) / sl).floor() as i64,
                    if self.dim == 3 {
                        ((p[2] - self.origin[2]) / sl).floor() as i64
                    } else {
                        0
                    },
                ];
                let zr = if self.dim == 3 { -1..=1 } else { 0..=0 };
                for dz in zr {
                    for dy in -1..=1i64 {
                        for dx in -1..=1i64 {
                            let key = [base[0] + dx, base[1] + dy, base[2] + dz];
                            if !level_map.contains_key(&key) {
                                continue;
                            }
                            let half = sl * dilation / 2.0;
                            let inside = (0..self.dim).all(|k| {
                                let c = self.origin[k] + (key[k] as f64 + 0.5) * sl;
                                (p[k] - c).abs() <= half
                            });
                            if inside {
                                count += 1;
                            }
                        }
                    }
                }
            }
            worst = worst.max(count);
        }
        worst
    }

    /// One row per cube: level, index, side, certified distance bracket.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(if self.dim == 3 {
            "level,ix,iy,iz,side,dist_lo,dist_hi\n"
        } else {
            "level,ix,iy,side,dist_lo,dist_hi\n"
        });
        for c in &self.cubes {
            let s = self.side(c.level);
            if self.dim == 3 {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    c.level, c.idx[0], c.idx[1], c.idx[2], s, c.dist_lo, c.dist_hi
                ));
            } else {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    c.level, c.idx[0], c.idx[1], s, c.dist_lo, c.dist_hi
                ));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn disc_domain() -> GeomSet {
        let verts: Vec<_> = (0..256)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / 256.0;
                v2(t.cos(), t.sin())
            })
            .collect();
        GeomSet::Polygon(PolygonSystem::single(verts).unwrap())
    }

    fn lshape_domain() -> GeomSet {
        GeomSet::Polygon(
            PolygonSystem::single(vec![
                v2(0.0, 0.0),
                v2(2.0, 0.0),
                v2(2.0, 1.0),
                v2(1.0, 1.0),
                v2(1.0, 2.0),
                v2(0.0, 2.0),
            ])
            .unwrap(),
        )
    }

    #[test]
    fn cube_distances_obey_the_whitney_bracket() {
        for dom in [disc_domain(), lshape_domain()] {
            let w = decompose(&dom, 8).unwrap();
            let sqrt_n = 2.0f64.sqrt();
            for c in &w.cubes {
                let s = w.side(c.level);
                assert!(c.dist_lo >= sqrt_n * s - 1e-12, "lo {} s {}", c.dist_lo, s);
                assert!(c.dist_lo <= c.dist_hi + 1e-12);
                assert!(
                    c.dist_hi <= 4.0 * sqrt_n * s * (1.0 + 1e-9),
                    "hi {} vs {}",
                    c.dist_hi,
                    4.0 * sqrt_n * s
                );
            }
        }
    }

    #[test]
    fn cubes_are_disjoint_and_inside() {
        let dom = disc_domain();
        let w = decompose(&dom, 7).unwrap();
        // Disjointness: lifted index boxes must not overlap in the open
        // sense; verify pairwise on touching pairs only (others cannot
        // overlap if these do not).
        for &(a, b) in w.touching_pairs().iter() {
            let (ca, cb) = (&w.cubes[a], &w.cubes[b]);
            let open_overlap = (0..2).all(|k| {
                let (la, ha) = lifted(ca, k, w.max_level);
                let (lb, hb) = lifted(cb, k, w.max_level);
                la < hb && lb < ha
            });
            assert!(!open_overlap, "cubes {a} {b} overlap");
        }
        // Every cube corner lies in the closed domain.
        for c in &w.cubes {
            let lo = w.cube_lo(c);
            let s = w.side(c.level);
            for corner in [
                [lo[0], lo[1]],
                [lo[0] + s, lo[1]],
                [lo[0], lo[1] + s],
                [lo[0] + s, lo[1] + s],
            ] {
                // Corner distance to the boundary is at least dist_lo > 0,
                // and the center is inside, so membership follows; spot
                // check directly anyway.
                assert!(dom.contains([corner[0] * 0.999999, corner[1] * 0.999999, 0.0]));
            }
        }
    }

    fn lifted(c: &WhitneyCube, k: usize, max_level: u32) -> (i64, i64) {
        (
            c.idx[k] << (max_level - c.level),
            (c.idx[k] + 1) << (max_level - c.level),
        )
    }

    #[test]
    fn touching_cubes_stay_within_two_levels() {
        let w = decompose(&lshape_domain(), 8).unwrap();
        for (a, b) in w.touching_pairs() {
            let (la, lb) = (w.cubes[a].level as i64, w.cubes[b].level as i64);
            assert!((la - lb).abs() <= 2, "levels {la} {lb}");
        }
    }

    #[test]
    fn uncovered_volume_decays_with_depth() {
        let dom = disc_domain();
        let mut prev = f64::INFINITY;
        for level in [5, 7, 9] {
            let w = decompose(&dom, level).unwrap();
            assert!(w.uncovered < prev * 0.6, "level {level}: {} vs {prev}", w.uncovered);
            assert!(
                (w.total_cube_volume() + w.uncovered - dom.volume()).abs()
                    < 1e-6 * dom.volume()
            );
            prev = w.uncovered;
        }
    }

    #[test]
    fn dilated_overlap_stays_small() {
        for dom in [disc_domain(), lshape_domain()] {
            let w = decompose(&dom, 8).unwrap();
            let m = w.overlap_multiplicity(1.1, 20_000, 7);
            assert!(m >= 1);
            assert!(m <= 6, "multiplicity {m}");
        }
    }

    #[test]
    fn voxel_route_accepts_certified_cubes_only() {
        let poly = match disc_domain() {
            GeomSet::Polygon(p) => p,
            _ => unreachable!(),
        };
        let grid = crate::geomset::VoxelGrid::rasterize(&poly, 1.0 / 64.0);
        let dom = GeomSet::Voxels(grid);
        let w = decompose(&dom, 6).unwrap();
        let sqrt_n = 2.0f64.sqrt();
        for c in &w.cubes {
            let s = w.side(c.level);
            // Certified lower bound respects the acceptance rule, and the
            // true distance (disc analytically) respects the bound.
            assert!(c.dist_lo >= sqrt_n * s - 1e-12);
            let ctr = w.cube_center(c);
            let true_center = 1.0 - (ctr[0] * ctr[0] + ctr[1] * ctr[1]).sqrt();
            assert!(true_center >= c.dist_lo + s * sqrt_n / 2.0 - 0.05);
        }
    }

    #[test]
    fn level_cap_is_enforced() {
        assert!(matches!(
            decompose(&disc_domain(), 31),
            Err(Error::MaxLevelExceeded { requested: 31, cap: LEVEL_CAP })
        ));
    }
}
