//! Voxel grids in dimension 2 and 3.
//!
//! A grid is a bitmask over axis-aligned cells of pitch `h`.  The boundary
//! mesh is not the raw staircase: staircase length does not converge to
//! the true perimeter.  Instead we contour the zero level of the signed
//! lattice distance (from the exact Euclidean distance transform), which
//! restores proper convergence of facet measures.

use crate::error::{Error, Result};
use crate::geom::{v2, Vec2};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub struct VoxelGrid {
    pub dim: usize,
    pub h: f64,
    pub origin: [f64; 3],
    pub dims: [usize; 3],
    bits: Vec<u64>,
}

impl VoxelGrid {
    pub fn empty(dim: usize, h: f64, origin: [f64; 3], dims: [usize; 3]) -> Result<VoxelGrid> {
        if dim != 2 && dim != 3 {
            return Err(Error::BadInput("voxel dim must be 2 or 3".into()));
        }
        if dim == 2 && dims[2] != 1 {
            return Err(Error::BadInput("2d voxel grid needs dims[2] = 1".into()));
        }
        if !(h > 0.0) {
            return Err(Error::BadInput("voxel pitch must be positive".into()));
        }
        let n = dims[0] * dims[1] * dims[2];
        if n == 0 {
            return Err(Error::BadInput("voxel grid with zero cells".into()));
        }
        Ok(VoxelGrid { dim, h, origin, dims, bits: vec![0; (n + 63) / 64] })
    }

    pub fn cell_count(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    fn index(&self, x: usize, y: usize, z: usize) -> usize {
        (z * self.dims[1] + y) * self.dims[0] + x
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        let i = self.index(x, y, z);
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, x: usize, y: usize, z: usize, on: bool) {
        let i = self.index(x, y, z);
        if on {
            self.bits[i / 64] |= 1 << (i % 64);
        } else {
            self.bits[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn cell_center(&self, x: usize, y: usize, z: usize) -> [f64; 3] {
        [
            self.origin[0] + (x as f64 + 0.5) * self.h,
            self.origin[1] + (y as f64 + 0.5) * self.h,
            if self.dim == 2 { 0.0 } else { self.origin[2] + (z as f64 + 0.5) * self.h },
        ]
    }

    pub fn volume(&self) -> f64 {
        let count: u64 = self.bits.iter().map(|w| w.count_ones() as u64).sum();
        count as f64 * self.h.powi(self.dim as i32)
    }

    /// Physical side lengths of the grid box.
    pub fn extent(&self) -> [f64; 3] {
        [
            self.dims[0] as f64 * self.h,
            self.dims[1] as f64 * self.h,
            if self.dim == 2 { 0.0 } else { self.dims[2] as f64 * self.h },
        ]
    }

    /// Centers of set cells with at least one unset or out-of-grid
    /// face neighbor.
    pub fn boundary_cell_centers(&self) -> Vec<[f64; 3]> {
        let mut out = Vec::new();
        let zs = if self.dim == 2 { 1 } else { self.dims[2] };
        for z in 0..zs {
            for y in 0..self.dims[1] {
                for x in 0..self.dims[0] {
                    if !self.get(x, y, z) {
                        continue;
                    }
                    let mut edge = false;
                    let mut probe = |xx: isize, yy: isize, zz: isize| {
                        if xx < 0
                            || yy < 0
                            || zz < 0
                            || xx as usize >= self.dims[0]
                            || yy as usize >= self.dims[1]
                            || (self.dim == 3 && zz as usize >= self.dims[2])
                        {
                            edge = true;
                        } else if !self.get(xx as usize, yy as usize, zz as usize) {
                            edge = true;
                        }
                    };
                    let (xi, yi, zi) = (x as isize, y as isize, z as isize);
                    probe(xi - 1, yi, zi);
                    probe(xi + 1, yi, zi);
                    probe(xi, yi - 1, zi);
                    probe(xi, yi + 1, zi);
                    if self.dim == 3 {
                        probe(xi, yi, zi - 1);
                        probe(xi, yi, zi + 1);
                    }
                    if edge {
                        out.push(self.cell_center(x, y, z));
                    }
                }
            }
        }
        out
    }

    pub fn aligned_with(&self, o: &VoxelGrid) -> bool {
        self.dim == o.dim
            && self.h == o.h
            && self.origin == o.origin
            && self.dims == o.dims
    }

    /// |self xor other| for aligned grids.
    pub fn symm_diff_volume(&self, other: &VoxelGrid) -> Result<f64> {
        if !self.aligned_with(other) {
            return Err(Error::BadInput("voxel grids are not aligned".into()));
        }
        let count: u64 = self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| (a ^ b).count_ones() as u64)
            .sum();
        Ok(count as f64 * self.h.powi(self.dim as i32))
    }

    pub fn contains_point(&self, p: [f64; 3]) -> bool {
        let mut idx = [0usize; 3];
        for k in 0..self.dim {
            let t = (p[k] - self.origin[k]) / self.h;
            if t < 0.0 {
                return false;
            }
            let i = t.floor() as usize;
            if i >= self.dims[k] {
                return false;
            }
            idx[k] = i;
        }
        self.get(idx[0], idx[1], idx[2])
    }

    /// Rasterize a polygon system by cell-center membership, with a two
    /// cell margin so every occupied cell has an outside neighborhood.
    pub fn rasterize(sys: &super::polygon::PolygonSystem, h: f64) -> VoxelGrid {
        let bb = sys.bbox();
        let ox = (bb.lo.x / h).floor() - 2.0;
        let oy = (bb.lo.y / h).floor() - 2.0;
        let nx = ((bb.hi.x / h).ceil() - ox) as usize + 2;
        let ny = ((bb.hi.y / h).ceil() - oy) as usize + 2;
        let mut g = VoxelGrid::empty(2, h, [ox * h, oy * h, 0.0], [nx, ny, 1]).unwrap();
        for y in 0..ny {
            for x in 0..nx {
                let c = g.cell_center(x, y, 0);
                if sys.contains(v2(c[0], c[1])) {
                    g.set(x, y, 0, true);
                }
            }
        }
        g
    }

    /// Squared-distance transform to the nearest cell center satisfying
    /// `source`, in cell units, over the padded lattice of this grid.
    fn distance_to_phase(&self, phase: bool) -> Vec<f64> {
        let (nx, ny, nz) = (self.dims[0], self.dims[1], self.dims[2]);
        let inf = 1e18;
        let mut d: Vec<f64> = (0..nx * ny * nz)
            .map(|i| {
                let x = i % nx;
                let y = (i / nx) % ny;
                let z = i / (nx * ny);
                if self.get(x, y, z) == phase {
                    0.0
                } else {
                    inf
                }
            })
            .collect();
        dt_axis_x(&mut d, nx, ny * nz);
        dt_axis_y(&mut d, nx, ny, nz);
        if self.dim == 3 {
            dt_axis_z(&mut d, nx, ny, nz);
        }
        if !phase {
            // The complement extends beyond the grid; cap by the distance
            // to the grid hull.
            for z in 0..nz {
                for y in 0..ny {
                    for x in 0..nx {
                        let mut edge = (x + 1).min(nx - x).min(y + 1).min(ny - y);
                        if self.dim == 3 {
                            edge = edge.min(z + 1).min(nz - z);
                        }
                        let i = (z * ny + y) * nx + x;
                        d[i] = d[i].min((edge as f64) * (edge as f64));
                    }
                }
            }
        }
        d
    }

    /// Signed lattice distance at cell centers, negative inside, in world
    /// units.  Zero level approximates the set boundary to O(h).
    pub fn signed_field(&self) -> Vec<f64> {
        let din = self.distance_to_phase(true);
        let dout = self.distance_to_phase(false);
        let mut phi = vec![0.0; din.len()];
        for i in 0..din.len() {
            let inside = din[i] == 0.0;
            phi[i] = if inside {
                -(dout[i].sqrt() - 0.5) * self.h
            } else {
                (din[i].sqrt() - 0.5) * self.h
            };
        }
        phi
    }

    /// Precompute the signed field once for repeated point queries.
    pub fn dist_field(&self) -> SignedDistField {
        SignedDistField {
            dim: self.dim,
            h: self.h,
            origin: self.origin,
            dims: self.dims,
            phi: self.signed_field(),
        }
    }
}

/// Signed lattice distance with certified boundary-distance brackets.
#[derive(Debug, Clone)]
pub struct SignedDistField {
    dim: usize,
    h: f64,
    origin: [f64; 3],
    dims: [usize; 3],
    phi: Vec<f64>,
}

impl SignedDistField {
    /// Field value at the cell containing p (clamped); negative inside.
    pub fn signed_at(&self, p: [f64; 3]) -> f64 {
        let (idx, _) = self.clamp_cell(p);
        self.phi[(idx[2] * self.dims[1] + idx[1]) * self.dims[0] + idx[0]]
    }

    /// Bracket for dist(p, boundary); lower bound is safe for acceptance
    /// tests of cube placement.
    pub fn bounds(&self, p: [f64; 3]) -> (f64, f64) {
        let (idx, off) = self.clamp_cell(p);
        let phi = self.phi[(idx[2] * self.dims[1] + idx[1]) * self.dims[0] + idx[0]];
        let pad = 0.5 * (self.dim as f64).sqrt() * self.h;
        ((phi.abs() - pad - off).max(0.0), phi.abs() + pad + off)
    }

    fn clamp_cell(&self, p: [f64; 3]) -> ([usize; 3], f64) {
        let mut idx = [0usize; 3];
        let mut off = 0.0;
        for k in 0..self.dim {
            let t = ((p[k] - self.origin[k]) / self.h).floor();
            idx[k] = t.clamp(0.0, self.dims[k] as f64 - 1.0) as usize;
            let c = self.origin[k] + (idx[k] as f64 + 0.5) * self.h;
            off += (p[k] - c) * (p[k] - c);
        }
        (idx, off.sqrt())
    }
}

fn dt_axis_x(d: &mut [f64], nx: usize, rows: usize) {
    let mut f = vec![0.0; nx];
    let mut out = vec![0.0; nx];
    let mut v = vec![0usize; nx];
    let mut z = vec![0.0; nx + 1];
    for row in 0..rows {
        let base = row * nx;
        f.copy_from_slice(&d[base..base + nx]);
        dt_1d(&f, &mut out, &mut v, &mut z);
        d[base..base + nx].copy_from_slice(&out);
    }
}

fn dt_axis_y(d: &mut [f64], nx: usize, ny: usize, nz: usize) {
    let mut f = vec![0.0; ny];
    let mut out = vec![0.0; ny];
    let mut v = vec![0usize; ny];
    let mut z = vec![0.0; ny + 1];
    for zi in 0..nz {
        for x in 0..nx {
            let base = zi * nx * ny + x;
            for i in 0..ny {
                f[i] = d[base + i * nx];
            }
            dt_1d(&f, &mut out, &mut v, &mut z);
            for i in 0..ny {
                d[base + i * nx] = out[i];
            }
        }
    }
}

fn dt_axis_z(d: &mut [f64], nx: usize, ny: usize, nz: usize) {
    let mut f = vec![0.0; nz];
    let mut out = vec![0.0; nz];
    let mut v = vec![0usize; nz];
    let mut z = vec![0.0; nz + 1];
    for y in 0..ny {
        for x in 0..nx {
            let base = y * nx + x;
            let stride = nx * ny;
            for i in 0..nz {
                f[i] = d[base + i * stride];
            }
            dt_1d(&f, &mut out, &mut v, &mut z);
            for i in 0..nz {
                d[base + i * stride] = out[i];
            }
        }
    }
}

/// Felzenszwalb-Huttenlocher exact 1d squared distance transform.
fn dt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64))
                / (2.0 * q as f64 - 2.0 * p as f64);
            if s <= z[k] {
                if k == 0 {
                    // Degenerate envelope head; replace.
                    v[0] = q;
                    z[0] = f64::NEG_INFINITY;
                    z[1] = f64::INFINITY;
                    break;
                }
                k -= 1;
                continue;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    let mut k = 0usize;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        out[q] = dq * dq + f[p];
    }
}

/// Facets of the level-set contour, shared by the 2d and 3d routes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshFacet {
    /// 2 points for a segment, 3 for a triangle; z = 0 in the plane.
    pub points: Vec<[f64; 3]>,
    /// Unit outward normal.
    pub normal: [f64; 3],
    /// Length or area of the facet.
    pub measure: f64,
}

/// Zero contour of the signed field as oriented segments (dim 2).  The
/// raw contour carries lattice-scale jitter that inflates its length, so
/// segments are chained into loops and relaxed before measuring.
pub fn march_squares(grid: &VoxelGrid) -> Vec<MeshFacet> {
    assert_eq!(grid.dim, 2);
    let phi = grid.signed_field();
    let (nx, ny) = (grid.dims[0], grid.dims[1]);
    let at = |x: usize, y: usize| phi[y * nx + x];
    let pos = |x: usize, y: usize| {
        let c = grid.cell_center(x, y, 0);
        v2(c[0], c[1])
    };
    let mut segs: Vec<(Vec2, Vec2)> = Vec::new();
    for y in 0..ny.saturating_sub(1) {
        for x in 0..nx.saturating_sub(1) {
            let corners = [pos(x, y), pos(x + 1, y), pos(x + 1, y + 1), pos(x, y + 1)];
            let vals = [at(x, y), at(x + 1, y), at(x + 1, y + 1), at(x, y + 1)];
            let mut code = 0usize;
            for (i, &v) in vals.iter().enumerate() {
                if v < 0.0 {
                    code |= 1 << i;
                }
            }
            if code == 0 || code == 15 {
                continue;
            }
            // Canonical endpoint order makes the crossing bitwise equal
            // in both squares sharing the lattice edge, so loop chaining
            // can match endpoints exactly.
            let edge_pt = |i: usize, j: usize| -> Vec2 {
                let (i, j) = if (corners[j].x, corners[j].y) < (corners[i].x, corners[i].y) {
                    (j, i)
                } else {
                    (i, j)
                };
                let t = vals[i] / (vals[i] - vals[j]);
                corners[i].lerp(corners[j], t.clamp(0.0, 1.0))
            };
            // Pairs of crossed edges per case; ambiguous saddles split by
            // the center average.
            let cell_segs: Vec<(Vec2, Vec2)> = match code {
                1 => vec![(edge_pt(0, 3), edge_pt(0, 1))],
                2 => vec![(edge_pt(0, 1), edge_pt(1, 2))],
                3 => vec![(edge_pt(0, 3), edge_pt(1, 2))],
                4 => vec![(edge_pt(1, 2), edge_pt(2, 3))],
                5 => {
                    let center = vals.iter().sum::<f64>() / 4.0;
                    if center < 0.0 {
                        vec![(edge_pt(0, 3), edge_pt(2, 3)), (edge_pt(1, 2), edge_pt(0, 1))]
                    } else {
                        vec![(edge_pt(0, 3), edge_pt(0, 1)), (edge_pt(1, 2), edge_pt(2, 3))]
                    }
                }
                6 => vec![(edge_pt(0, 1), edge_pt(2, 3))],
                7 => vec![(edge_pt(0, 3), edge_pt(2, 3))],
                8 => vec![(edge_pt(2, 3), edge_pt(0, 3))],
                9 => vec![(edge_pt(2, 3), edge_pt(0, 1))],
                10 => {
                    let center = vals.iter().sum::<f64>() / 4.0;
                    if center < 0.0 {
                        vec![(edge_pt(0, 1), edge_pt(0, 3)), (edge_pt(2, 3), edge_pt(1, 2))]
                    } else {
                        vec![(edge_pt(0, 1), edge_pt(1, 2)), (edge_pt(2, 3), edge_pt(0, 3))]
                    }
                }
                11 => vec![(edge_pt(2, 3), edge_pt(1, 2))],
                12 => vec![(edge_pt(1, 2), edge_pt(0, 3))],
                13 => vec![(edge_pt(1, 2), edge_pt(0, 1))],
                14 => vec![(edge_pt(0, 1), edge_pt(0, 3))],
                _ => unreachable!(),
            };
            // Bilinear gradient decides the outward side; traversal keeps
            // the interior on the left.
            let gx = ((vals[1] - vals[0]) + (vals[2] - vals[3])) / 2.0;
            let gy = ((vals[3] - vals[0]) + (vals[2] - vals[1])) / 2.0;
            for (mut p, mut q) in cell_segs {
                let d = q - p;
                if d.norm() == 0.0 {
                    continue;
                }
                let n = v2(d.y, -d.x);
                if n.x * gx + n.y * gy < 0.0 {
                    std::mem::swap(&mut p, &mut q);
                }
                segs.push((p, q));
            }
        }
    }
    let loops = chain_segments(segs);
    let mut facets = Vec::new();
    for (mut pts, closed) in loops {
        relax_loop(&mut pts, closed, 6);
        let m = pts.len();
        let last = if closed { m } else { m - 1 };
        for i in 0..last {
            let a = pts[i];
            let b = pts[(i + 1) % m];
            let d = b - a;
            let len = d.norm();
            if len == 0.0 {
                continue;
            }
            let n = v2(d.y, -d.x) / len;
            facets.push(MeshFacet {
                points: vec![[a.x, a.y, 0.0], [b.x, b.y, 0.0]],
                normal: [n.x, n.y, 0.0],
                measure: len,
            });
        }
    }
    facets
}

/// Assemble oriented segments into polylines; bool marks closed loops.
fn chain_segments(segs: Vec<(Vec2, Vec2)>) -> Vec<(Vec<Vec2>, bool)> {
    use std::collections::HashMap;
    let key = |p: Vec2| (p.x.to_bits(), p.y.to_bits());
    let mut by_start: HashMap<(u64, u64), Vec<usize>> = HashMap::new();
    for (i, s) in segs.iter().enumerate() {
        by_start.entry(key(s.0)).or_default().push(i);
    }
    let mut used = vec![false; segs.len()];
    let mut loops = Vec::new();
    for start in 0..segs.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let mut pts = vec![segs[start].0, segs[start].1];
        let first = key(segs[start].0);
        loop {
            let tail = key(*pts.last().unwrap());
            if tail == first {
                pts.pop();
                loops.push((pts, true));
                break;
            }
            let next = by_start
                .get(&tail)
                .and_then(|c| c.iter().copied().find(|&i| !used[i]));
            match next {
                Some(i) => {
                    used[i] = true;
                    pts.push(segs[i].1);
                }
                None => {
                    loops.push((pts, false));
                    break;
                }
            }
        }
    }
    loops
}

/// A few passes of (1/4, 1/2, 1/4) vertex relaxation.  Suppresses the
/// lattice jitter while shifting a curve of curvature k only O(passes
/// spacing^2 k), far below the jitter it removes.
fn relax_loop(pts: &mut [Vec2], closed: bool, passes: usize) {
    let m = pts.len();
    if m < 3 {
        return;
    }
    let mut cur = pts.to_vec();
    let mut next = cur.clone();
    for _ in 0..passes {
        for i in 0..m {
            if !closed && (i == 0 || i == m - 1) {
                next[i] = cur[i];
                continue;
            }
            let a = cur[(i + m - 1) % m];
            let b = cur[(i + 1) % m];
            next[i] = (cur[i] * 2.0 + a + b) / 4.0;
        }
        std::mem::swap(&mut cur, &mut next);
    }
    pts.copy_from_slice(&cur);
}

/// Zero contour of the signed field as oriented triangles (dim 3), via
/// tetrahedral decomposition of each dual cube.  Vertices are welded and
/// relaxed like the planar route; triangle winding encodes the outward
/// side throughout.
pub fn march_tets(grid: &VoxelGrid) -> Vec<MeshFacet> {
    assert_eq!(grid.dim, 3);
    let phi = grid.signed_field();
    let (nx, ny, nz) = (grid.dims[0], grid.dims[1], grid.dims[2]);
    let at = |x: usize, y: usize, z: usize| phi[(z * ny + y) * nx + x];
    // Six tetrahedra around the main diagonal (0 -> 7) of the dual cube,
    // with cube corners numbered by bits (x, y, z).
    const TETS: [[usize; 4]; 6] = [
        [0, 1, 3, 7],
        [0, 3, 2, 7],
        [0, 2, 6, 7],
        [0, 6, 4, 7],
        [0, 4, 5, 7],
        [0, 5, 1, 7],
    ];
    let mut tris: Vec<[[f64; 3]; 3]> = Vec::new();
    for z in 0..nz.saturating_sub(1) {
        for y in 0..ny.saturating_sub(1) {
            for x in 0..nx.saturating_sub(1) {
                let mut pts = [[0.0f64; 3]; 8];
                let mut vals = [0.0f64; 8];
                for b in 0..8 {
                    let (dx, dy, dz) = (b & 1, (b >> 1) & 1, (b >> 2) & 1);
                    pts[b] = grid.cell_center(x + dx, y + dy, z + dz);
                    vals[b] = at(x + dx, y + dy, z + dz);
                }
                for tet in TETS {
                    emit_tet_triangles(&pts, &vals, &tet, &mut tris);
                }
            }
        }
    }
    weld_relax_measure(tris, 4)
}

fn emit_tet_triangles(
    pts: &[[f64; 3]; 8],
    vals: &[f64; 8],
    tet: &[usize; 4],
    out: &mut Vec<[[f64; 3]; 3]>,
) {
    let neg: Vec<usize> = tet.iter().copied().filter(|&i| vals[i] < 0.0).collect();
    if neg.is_empty() || neg.len() == 4 {
        return;
    }
    let posv: Vec<usize> = tet.iter().copied().filter(|&i| !(vals[i] < 0.0)).collect();
    // Canonical order by position keeps shared crossings bitwise equal
    // across tets and cubes, so welding can key on raw bits.
    let ip = |i: usize, j: usize| -> [f64; 3] {
        let (i, j) = if pts[j] < pts[i] { (j, i) } else { (i, j) };
        let t = (vals[i] / (vals[i] - vals[j])).clamp(0.0, 1.0);
        [
            pts[i][0] + (pts[j][0] - pts[i][0]) * t,
            pts[i][1] + (pts[j][1] - pts[i][1]) * t,
            pts[i][2] + (pts[j][2] - pts[i][2]) * t,
        ]
    };
    let mut tris: Vec<[[f64; 3]; 3]> = Vec::new();
    match neg.len() {
        1 => {
            let a = neg[0];
            tris.push([ip(a, posv[0]), ip(a, posv[1]), ip(a, posv[2])]);
        }
        3 => {
            let a = posv[0];
            tris.push([ip(neg[0], a), ip(neg[1], a), ip(neg[2], a)]);
        }
        2 => {
            let q = [
                ip(neg[0], posv[0]),
                ip(neg[0], posv[1]),
                ip(neg[1], posv[1]),
                ip(neg[1], posv[0]),
            ];
            tris.push([q[0], q[1], q[2]]);
            tris.push([q[0], q[2], q[3]]);
        }
        _ => unreachable!(),
    }
    // Winding: outward points from the negative (inside) corners toward
    // the positive ones.
    let centroid = |ix: &[usize]| -> [f64; 3] {
        let mut c = [0.0; 3];
        for &i in ix {
            for k in 0..3 {
                c[k] += pts[i][k] / ix.len() as f64;
            }
        }
        c
    };
    let cn = centroid(&neg);
    let cp = centroid(&posv);
    let dir = [cp[0] - cn[0], cp[1] - cn[1], cp[2] - cn[2]];
    for mut t in tris {
        let n = tri_normal(&t);
        if n[0] * dir[0] + n[1] * dir[1] + n[2] * dir[2] < 0.0 {
            t.swap(1, 2);
        }
        out.push(t);
    }
}

fn tri_normal(t: &[[f64; 3]; 3]) -> [f64; 3] {
    let u = [t[1][0] - t[0][0], t[1][1] - t[0][1], t[1][2] - t[0][2]];
    let w = [t[2][0] - t[0][0], t[2][1] - t[0][1], t[2][2] - t[0][2]];
    [
        u[1] * w[2] - u[2] * w[1],
        u[2] * w[0] - u[0] * w[2],
        u[0] * w[1] - u[1] * w[0],
    ]
}

fn weld_relax_measure(tris: Vec<[[f64; 3]; 3]>, passes: usize) -> Vec<MeshFacet> {
    use std::collections::HashMap;
    let key = |p: [f64; 3]| (p[0].to_bits(), p[1].to_bits(), p[2].to_bits());
    let mut ids: HashMap<(u64, u64, u64), usize> = HashMap::new();
    let mut verts: Vec<[f64; 3]> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    for t in &tris {
        let mut f = [0usize; 3];
        for (k, p) in t.iter().enumerate() {
            let id = *ids.entry(key(*p)).or_insert_with(|| {
                verts.push(*p);
                verts.len() - 1
            });
            f[k] = id;
        }
        if f[0] != f[1] && f[1] != f[2] && f[0] != f[2] {
            faces.push(f);
        }
    }
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); verts.len()];
    for f in &faces {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            if !nbrs[a].contains(&b) {
                nbrs[a].push(b);
            }
            if !nbrs[b].contains(&a) {
                nbrs[b].push(a);
            }
        }
    }
    let mut cur = verts;
    let mut next = cur.clone();
    for _ in 0..passes {
        for i in 0..cur.len() {
            if nbrs[i].is_empty() {
                next[i] = cur[i];
                continue;
            }
            let mut m = [0.0; 3];
            for &j in &nbrs[i] {
                for d in 0..3 {
                    m[d] += cur[j][d];
                }
            }
            for d in 0..3 {
                next[i][d] = 0.5 * cur[i][d] + 0.5 * m[d] / nbrs[i].len() as f64;
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    let mut out = Vec::with_capacity(faces.len());
    for f in &faces {
        let t = [cur[f[0]], cur[f[1]], cur[f[2]]];
        let n = tri_normal(&t);
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if len == 0.0 {
            continue;
        }
        out.push(MeshFacet {
            points: t.to_vec(),
            normal: [n[0] / len, n[1] / len, n[2] / len],
            measure: len / 2.0,
        });
    }
    out
}

/// Pack the cell bits MSB-first into bytes, then hex with a star-count run
/// compression: "ff*12,00*3,a4".  `dims` order is x fastest, then y, then z.
pub fn encode_cells(grid: &VoxelGrid) -> String {
    let n = grid.cell_count();
    let mut bytes = vec![0u8; (n + 7) / 8];
    for i in 0..n {
        if grid.bits[i / 64] >> (i % 64) & 1 == 1 {
            bytes[i / 8] |= 0x80 >> (i % 8);
        }
    }
    let mut out = String::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let mut run = 1;
        while i + run < bytes.len() && bytes[i + run] == b {
            run += 1;
        }
        if !out.is_empty() {
            out.push(',');
        }
        if run > 1 {
            out.push_str(&format!("{b:02x}*{run}"));
        } else {
            out.push_str(&format!("{b:02x}"));
        }
        i += run;
    }
    out
}

pub fn decode_cells(s: &str, grid: &mut VoxelGrid) -> Result<()> {
    let n = grid.cell_count();
    let mut bytes: Vec<u8> = Vec::with_capacity((n + 7) / 8);
    if !s.is_empty() {
        for tok in s.split(',') {
            let (hex, count) = match tok.split_once('*') {
                Some((h, c)) => {
                    let c: usize = c
                        .parse()
                        .map_err(|_| Error::BadInput(format!("bad run count in '{tok}'")))?;
                    (h, c)
                }
                None => (tok, 1),
            };
            let b = u8::from_str_radix(hex, 16)
                .map_err(|_| Error::BadInput(format!("bad hex byte in '{tok}'")))?;
            bytes.extend(std::iter::repeat(b).take(count));
        }
    }
    if bytes.len() != (n + 7) / 8 {
        return Err(Error::BadInput(format!(
            "cell payload holds {} bytes, grid needs {}",
            bytes.len(),
            (n + 7) / 8
        )));
    }
    for w in grid.bits.iter_mut() {
        *w = 0;
    }
    for i in 0..n {
        if bytes[i / 8] & (0x80 >> (i % 8)) != 0 {
            grid.bits[i / 64] |= 1 << (i % 64);
        }
    }
    Ok(())
}
