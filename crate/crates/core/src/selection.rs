//! Penalized selection of a representative set near the Wulff shape.
//!
//! Given an input set E and a body K, minimize
//!
//! ```text
//! P_K(U) + | A(U) - A(E) |  +  lambda * | |U| - |K| |
//! ```
//!
//! over star-shaped polygons inside r0*K, where A is the translation-minimal
//! symmetric difference to K.  The weight lambda must exceed the dimension,
//! otherwise shrinking dilates win; r0 keeps all competitors in a fixed ball.
//! The minimizer is recentred at its barycenter and rescaled to |K| at the
//! end, so downstream ratio checks see a volume-matched set.

use crate::anisotropy::WulffShape;
use crate::error::{Error, Result};
use crate::geom::{v2, Vec2};
use crate::geomset::polygon::{clip_halfplane, signed_area, PolygonSystem};
use crate::geomset::GeomSet;
use crate::isoperimetry::{anisotropic_perimeter, asymmetry, qwi_ratio};
use crate::johnmetric::estimate_john;
use crate::whitney::decompose;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Dyadic depth of the decomposition behind the John check on a minimizer.
const JOHN_LEVEL: u32 = 7;

/// Accept threshold for the graph John constant of a selected set.  Selected
/// sets sit in a thin tube around K, so anything near the cap is a bug.
pub const JOHN_CAP: f64 = 10.0;

/// Relative radial jitter amplitude of the minimality spot check.
const JITTER_AMP: f64 = 0.02;

/// Spot-check sampling defaults used by `solve_selection`.
const SPOT_TRIALS: usize = 100;
const SPOT_SEED: u64 = 0x5e1ec7;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Rays of the radial graph the descent runs on.
    pub vertex_count: usize,
    /// Initial radial step, as a fraction of the mean input radius.
    pub step: f64,
    /// Sweep budget before the solver reports non-convergence.
    pub max_iters: usize,
    /// Energy slack granted to discrete competitors.  A 128-ray polygon
    /// cannot represent a smooth body exactly, so discrete minima sit a few
    /// parts in a thousand above the continuum value; this is also the slack
    /// of the minimality spot check.
    pub tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        SolverConfig { vertex_count: 128, step: 0.05, max_iters: 200, tolerance: 1e-2 }
    }
}

#[derive(Debug, Clone)]
pub struct SelectionProblem {
    pub input_set: GeomSet,
    pub shape: WulffShape,
    /// Volume penalty weight, strictly above the dimension.
    pub lambda: f64,
    /// Competitors are clipped into r0 * K.
    pub r0: f64,
    pub solver: SolverConfig,
}

impl SelectionProblem {
    /// Defaults: lambda = n + 1, r0 = 10.
    pub fn new(input_set: GeomSet, shape: WulffShape) -> Result<SelectionProblem> {
        let n = shape.dim() as f64;
        let p = SelectionProblem {
            input_set,
            shape,
            lambda: n + 1.0,
            r0: 10.0,
            solver: SolverConfig::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.shape.dim() != 2 || self.shape.polygon().is_none() || self.input_set.dim() != 2 {
            return Err(Error::BadInput(
                "selection runs on planar polygon inputs against a polygon body".into(),
            ));
        }
        if !(self.lambda > self.shape.dim() as f64) {
            return Err(Error::BadInput(format!(
                "volume weight {} must exceed the dimension {}; below that a \
                 shrinking dilate beats every full-volume competitor",
                self.lambda,
                self.shape.dim()
            )));
        }
        if !(self.r0 >= 2.0) {
            return Err(Error::BadInput(format!(
                "clip radius {} leaves no room between K and the competitors; need r0 >= 2",
                self.r0
            )));
        }
        if self.solver.vertex_count < 8 {
            return Err(Error::BadInput("radial graph needs at least 8 rays".into()));
        }
        Ok(())
    }
}

/// One evaluation of the penalized functional, split into its addends.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub perimeter: f64,
    pub asym_term: f64,
    pub volume_term: f64,
    pub total: f64,
    /// The competitor stuck out of r0 * K and was cut back first.
    pub clipped: bool,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SelectionEnergies {
    pub perimeter: f64,
    pub asym_term: f64,
    pub volume_term: f64,
    pub total: f64,
    /// Energy of the recentred, clipped input; the descent never ends above it.
    pub input_total: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SelectionChecks {
    pub minimality_pass_fraction: f64,
    pub minimality_worst: f64,
    pub sandwich_delta: f64,
    pub j_estimate: f64,
    /// None when the minimizer is too close to K for a stable quotient.
    pub qwi_value: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SelectionResult {
    /// Raw minimizer: barycenter at the origin, volume free.
    pub minimizer_raw: GeomSet,
    /// Raw minimizer rescaled to |K|.
    pub minimizer: GeomSet,
    /// Scale factor between the two.
    pub lambda_k: f64,
    pub energies: SelectionEnergies,
    pub checks: SelectionChecks,
    /// False when the sweep budget ran out before the step shrank away.
    pub converged: bool,
    pub clipped_input: bool,
    /// The descent endpoint lost to the input and was discarded for it.
    pub fell_back: bool,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MinimalityReport {
    pub trials: usize,
    pub pass_fraction: f64,
    /// Largest perimeter drop in excess of (lambda + 1) |U delta F| seen.
    pub worst_violation: f64,
}

fn polygon_of(set: &GeomSet) -> Result<&PolygonSystem> {
    match set {
        GeomSet::Polygon(sys) => Ok(sys),
        GeomSet::Voxels(_) => Err(Error::BadInput(
            "selection needs polygon sets; voxel masks have no stable boundary normals".into(),
        )),
    }
}

fn halfplanes(shape: &WulffShape, scale: f64) -> Result<Vec<(Vec2, f64)>> {
    let verts = shape
        .polygon()
        .ok_or_else(|| Error::BadInput("selection needs a polygon body".into()))?;
    let m = verts.len();
    let mut planes = Vec::with_capacity(m);
    for i in 0..m {
        let a = verts[i] * scale;
        let b = verts[(i + 1) % m] * scale;
        let e = b - a;
        let n = v2(e.y, -e.x);
        planes.push((n, a.dot(n)));
    }
    Ok(planes)
}

/// Cut every loop of `sys` down to r0 * K.  The flag reports whether any
/// area was actually removed.
fn clip_into(sys: &PolygonSystem, shape: &WulffShape, r0: f64) -> Result<(PolygonSystem, bool)> {
    let planes = halfplanes(shape, r0)?;
    let before = sys.area();
    let mut loops: Vec<Vec<Vec2>> = Vec::new();
    let mut work: Vec<Vec2> = Vec::new();
    let mut next: Vec<Vec2> = Vec::new();
    for lp in sys.loops() {
        work.clear();
        work.extend_from_slice(lp);
        for &(n, c) in &planes {
            clip_halfplane(&work, n, c, &mut next);
            std::mem::swap(&mut work, &mut next);
            if work.len() < 3 {
                break;
            }
        }
        if work.len() >= 3 && signed_area(&work).abs() > 1e-12 * before.abs().max(1.0) {
            loops.push(work.clone());
        }
    }
    if loops.is_empty() {
        return Err(Error::EmptyShape);
    }
    let clipped_sys = PolygonSystem::new(loops)?;
    let clipped = (before - clipped_sys.area()).abs() > 1e-9 * before.abs().max(1e-12);
    Ok((clipped_sys, clipped))
}

fn loop_perimeter(vs: &[Vec2], shape: &WulffShape) -> f64 {
    // h_K is 1-homogeneous, so feeding the unnormalized outward normal
    // (e.y, -e.x) already carries the edge length.
    let m = vs.len();
    let mut total = 0.0;
    for i in 0..m {
        let e = vs[(i + 1) % m] - vs[i];
        total += shape.support2(v2(e.y, -e.x));
    }
    total
}

/// Evaluate the penalized functional at `u`, clipping into r0 * K first.
/// The asymmetry target comes from the problem's input set.
pub fn penalized_energy(u: &GeomSet, problem: &SelectionProblem) -> Result<EnergyBreakdown> {
    problem.validate()?;
    let sys = polygon_of(u)?;
    let (clipped_sys, clipped) = clip_into(sys, &problem.shape, problem.r0)?;
    let a_input = asymmetry(&problem.input_set, &problem.shape)?.value;
    let set = GeomSet::Polygon(clipped_sys);
    let perimeter = anisotropic_perimeter(&set, &problem.shape)?;
    let asym_term = (asymmetry(&set, &problem.shape)?.value - a_input).abs();
    let volume_term = problem.lambda * (set.volume() - problem.shape.volume).abs();
    Ok(EnergyBreakdown {
        perimeter,
        asym_term,
        volume_term,
        total: perimeter + asym_term + volume_term,
        clipped,
    })
}

fn golden_min(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    const PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - PHI * (b - a);
    let mut d = a + PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Incremental energy oracle over radial polygons on a fixed ray fan.
///
/// The shape is v_i = r_i * d_i about the origin.  Per-edge perimeter
/// contributions, per-sector areas and per-sector overlaps with a frozen
/// translate of K are cached, so probing one radius touches two edges and
/// two sectors.  Freezing the translate makes the asymmetry addend an upper
/// bound; `refresh_translate` re-anchors it between sweeps.
struct RadialEval<'a> {
    shape: &'a WulffShape,
    dirs: Vec<Vec2>,
    r: Vec<f64>,
    r_max: Vec<f64>,
    planes: Vec<(Vec2, f64)>,
    per: Vec<f64>,
    tri: Vec<f64>,
    ov: Vec<f64>,
    per_sum: f64,
    area_sum: f64,
    ov_sum: f64,
    t: Vec2,
    a_input: f64,
    lambda: f64,
    kvol: f64,
    scale: f64,
    scratch_a: Vec<Vec2>,
    scratch_b: Vec<Vec2>,
}

impl<'a> RadialEval<'a> {
    fn new(
        shape: &'a WulffShape,
        r: Vec<f64>,
        t: Vec2,
        a_input: f64,
        lambda: f64,
        r0: f64,
    ) -> Result<RadialEval<'a>> {
        let m = r.len();
        let dirs: Vec<Vec2> = (0..m)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / m as f64;
                v2(th.cos(), th.sin())
            })
            .collect();
        let r_max: Vec<f64> = dirs.iter().map(|&d| r0 / shape.gauge2(d)).collect();
        let r = r
            .into_iter()
            .zip(r_max.iter())
            .map(|(ri, &cap)| ri.min(cap))
            .collect::<Vec<_>>();
        let scale = r.iter().sum::<f64>() / m as f64;
        let mut ev = RadialEval {
            shape,
            dirs,
            r,
            r_max,
            planes: halfplanes(shape, 1.0)?,
            per: vec![0.0; m],
            tri: vec![0.0; m],
            ov: vec![0.0; m],
            per_sum: 0.0,
            area_sum: 0.0,
            ov_sum: 0.0,
            t,
            a_input,
            lambda,
            kvol: shape.volume,
            scale,
            scratch_a: Vec::new(),
            scratch_b: Vec::new(),
        };
        ev.recompute_all();
        Ok(ev)
    }

    fn vert(&self, i: usize) -> Vec2 {
        self.dirs[i] * self.r[i]
    }

    fn edge_per(&self, a: Vec2, b: Vec2) -> f64 {
        let e = b - a;
        self.shape.support2(v2(e.y, -e.x))
    }

    /// |tri(0, a, b) meet (t + K)|.
    fn sector_overlap(&mut self, a: Vec2, b: Vec2, t: Vec2) -> f64 {
        self.scratch_a.clear();
        self.scratch_a.extend_from_slice(&[Vec2::ZERO, a, b]);
        for &(n, c) in &self.planes {
            let c = c + n.dot(t);
            clip_halfplane(&self.scratch_a, n, c, &mut self.scratch_b);
            std::mem::swap(&mut self.scratch_a, &mut self.scratch_b);
            if self.scratch_a.len() < 3 {
                return 0.0;
            }
        }
        signed_area(&self.scratch_a)
    }

    fn recompute_all(&mut self) {
        let m = self.r.len();
        self.per_sum = 0.0;
        self.area_sum = 0.0;
        self.ov_sum = 0.0;
        for i in 0..m {
            let a = self.vert(i);
            let b = self.vert((i + 1) % m);
            self.per[i] = self.edge_per(a, b);
            self.tri[i] = 0.5 * a.cross(b);
            let t = self.t;
            self.ov[i] = self.sector_overlap(a, b, t);
            self.per_sum += self.per[i];
            self.area_sum += self.tri[i];
            self.ov_sum += self.ov[i];
        }
    }

    fn energy_of(&self, per_sum: f64, area_sum: f64, ov_sum: f64) -> f64 {
        let a_sur = (area_sum + self.kvol - 2.0 * ov_sum).max(0.0);
        per_sum + (a_sur - self.a_input).abs() + self.lambda * (area_sum - self.kvol).abs()
    }

    fn energy(&self) -> f64 {
        self.energy_of(self.per_sum, self.area_sum, self.ov_sum)
    }

    /// Candidate energy with r_i moved to nr; caches stay untouched.
    fn probe(&mut self, i: usize, nr: f64) -> f64 {
        let m = self.r.len();
        let ip = (i + m - 1) % m;
        let inx = (i + 1) % m;
        let vp = self.vert(ip);
        let vn = self.vert(inx);
        let vi = self.dirs[i] * nr;
        let t = self.t;
        let per_sum = self.per_sum - self.per[ip] - self.per[i]
            + self.edge_per(vp, vi)
            + self.edge_per(vi, vn);
        let area_sum = self.area_sum - self.tri[ip] - self.tri[i]
            + 0.5 * vp.cross(vi)
            + 0.5 * vi.cross(vn);
        let ov_sum = self.ov_sum - self.ov[ip] - self.ov[i]
            + self.sector_overlap(vp, vi, t)
            + self.sector_overlap(vi, vn, t);
        self.energy_of(per_sum, area_sum, ov_sum)
    }

    fn commit(&mut self, i: usize, nr: f64) {
        let m = self.r.len();
        let ip = (i + m - 1) % m;
        self.r[i] = nr;
        let vp = self.vert(ip);
        let vi = self.vert(i);
        let vn = self.vert((i + 1) % m);
        let t = self.t;
        for (k, a, b) in [(ip, vp, vi), (i, vi, vn)] {
            self.per_sum -= self.per[k];
            self.area_sum -= self.tri[k];
            self.ov_sum -= self.ov[k];
            self.per[k] = self.edge_per(a, b);
            self.tri[k] = 0.5 * a.cross(b);
            self.ov[k] = self.sector_overlap(a, b, t);
            self.per_sum += self.per[k];
            self.area_sum += self.tri[k];
            self.ov_sum += self.ov[k];
        }
    }

    fn sweep(&mut self, h: f64) -> bool {
        let m = self.r.len();
        let floor = 1e-6 * self.scale;
        let mut improved = false;
        let mut e = self.energy();
        for i in 0..m {
            let base = self.r[i];
            let hi = (base + h).min(self.r_max[i]);
            let lo = (base - h).max(floor);
            let mut best = e;
            let mut best_r = base;
            for cand in [hi, lo] {
                if cand != base {
                    let ec = self.probe(i, cand);
                    if ec < best - 1e-12 * (1.0 + e.abs()) {
                        best = ec;
                        best_r = cand;
                    }
                }
            }
            if best_r != base {
                self.commit(i, best_r);
                e = best;
                improved = true;
            }
        }
        improved
    }

    fn overlap_at(&mut self, t: Vec2) -> f64 {
        let m = self.r.len();
        let mut total = 0.0;
        for i in 0..m {
            let a = self.vert(i);
            let b = self.vert((i + 1) % m);
            total += self.sector_overlap(a, b, t);
        }
        total
    }

    /// Re-anchor the frozen translate with a short per-axis golden descent
    /// on the overlap; the bracket shrinks geometrically.
    fn refresh_translate(&mut self) {
        let mut span = 0.06 * self.scale;
        for _ in 0..2 {
            for axis in 0..2 {
                let t0 = self.t;
                let best = golden_min(
                    |x| {
                        let t = if axis == 0 { v2(x, t0.y) } else { v2(t0.x, x) };
                        -self.overlap_at(t)
                    },
                    (if axis == 0 { t0.x } else { t0.y }) - span,
                    (if axis == 0 { t0.x } else { t0.y }) + span,
                    12,
                );
                if axis == 0 {
                    self.t.x = best;
                } else {
                    self.t.y = best;
                }
            }
            span *= 0.25;
        }
        self.recompute_all();
    }
}

/// Largest ray parameter at which the ray from the origin along `d` meets
/// the boundary of `sys`.
fn ray_radius(sys: &PolygonSystem, d: Vec2) -> Result<f64> {
    let mut best: f64 = -1.0;
    for lp in sys.loops() {
        let m = lp.len();
        for i in 0..m {
            let a = lp[i];
            let e = lp[(i + 1) % m] - a;
            let denom = d.cross(e);
            if denom.abs() < 1e-300 {
                continue;
            }
            let s = a.cross(e) / denom;
            let t = a.cross(d) / denom;
            if s > 0.0 && (-1e-12..=1.0 + 1e-12).contains(&t) {
                best = best.max(s);
            }
        }
    }
    if best <= 0.0 {
        return Err(Error::BadInput(
            "recentred input does not surround its barycenter; cannot radialize".into(),
        ));
    }
    Ok(best)
}

/// Minimize the penalized functional over radial polygons and package the
/// minimizer with its audit trail.  Running out of sweeps is reported, not
/// fatal; an endpoint that scores above the input is discarded for it.
pub fn solve_selection(problem: &SelectionProblem) -> Result<SelectionResult> {
    problem.validate()?;
    let sys_in = polygon_of(&problem.input_set)?;
    let (clipped_sys, clipped_input) = clip_into(sys_in, &problem.shape, problem.r0)?;
    let b = clipped_sys.barycenter();
    let e0 = clipped_sys.translated(v2(-b.x, -b.y));
    if !e0.contains(Vec2::ZERO) {
        return Err(Error::BadInput(
            "recentred input does not contain its barycenter; not star-shaped".into(),
        ));
    }
    let e0_set = GeomSet::Polygon(e0.clone());
    let asym_in = asymmetry(&e0_set, &problem.shape)?;
    let a_input = asym_in.value;
    let kvol = problem.shape.volume;
    let per_in = anisotropic_perimeter(&e0_set, &problem.shape)?;
    let input_total = per_in + problem.lambda * (e0.area() - kvol).abs();

    let m = problem.solver.vertex_count;
    let mut radii = Vec::with_capacity(m);
    for i in 0..m {
        let th = 2.0 * PI * i as f64 / m as f64;
        radii.push(ray_radius(&e0, v2(th.cos(), th.sin()))?);
    }
    let mut ev = RadialEval::new(
        &problem.shape,
        radii,
        asym_in.translate,
        a_input,
        problem.lambda,
        problem.r0,
    )?;

    let h0 = problem.solver.step * ev.scale;
    let mut h = h0;
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < problem.solver.max_iters {
        sweeps += 1;
        if ev.sweep(h) {
            ev.refresh_translate();
        } else {
            h *= 0.5;
            if h < 1e-3 * h0 {
                converged = true;
                break;
            }
        }
    }
    ev.recompute_all();

    let verts: Vec<Vec2> = (0..m).map(|i| ev.vert(i)).collect();
    let sys_f = PolygonSystem::single(verts)?;
    let bf = sys_f.barycenter();
    let mut f_raw = sys_f.translated(v2(-bf.x, -bf.y));

    let mut per_f = anisotropic_perimeter(&GeomSet::Polygon(f_raw.clone()), &problem.shape)?;
    let mut a_f = asymmetry(&GeomSet::Polygon(f_raw.clone()), &problem.shape)?.value;
    let mut total = per_f + (a_f - a_input).abs() + problem.lambda * (f_raw.area() - kvol).abs();
    let mut fell_back = false;
    if total > input_total + problem.solver.tolerance {
        // The radial family cannot even match the input up to the granted
        // slack; keep the input, a valid competitor of known energy.
        f_raw = e0;
        per_f = per_in;
        a_f = a_input;
        total = input_total;
        fell_back = true;
        converged = false;
    }
    let asym_term = (a_f - a_input).abs();
    let volume_term = problem.lambda * (f_raw.area() - kvol).abs();

    let lambda_k = (kvol / f_raw.area()).sqrt();
    let minimizer = f_raw.scaled(lambda_k);
    let raw_set = GeomSet::Polygon(f_raw);
    let min_set = GeomSet::Polygon(minimizer);

    let spot = minimality_spot_check(&raw_set, problem, SPOT_TRIALS, SPOT_SEED)?;
    let sandwich_delta = sandwich_check(&min_set, &problem.shape)?;
    let w = decompose(&min_set, JOHN_LEVEL)?;
    let j_estimate = estimate_john(&min_set, [0.0, 0.0, 0.0], &w)?.j_value;
    let qwi_value = match qwi_ratio(&min_set, &problem.shape) {
        Ok(rep) => Some(rep.ratio),
        Err(Error::DegenerateAsymmetry { .. }) => None,
        Err(e) => return Err(e),
    };

    Ok(SelectionResult {
        minimizer_raw: raw_set,
        minimizer: min_set,
        lambda_k,
        energies: SelectionEnergies { perimeter: per_f, asym_term, volume_term, total, input_total },
        checks: SelectionChecks {
            minimality_pass_fraction: spot.pass_fraction,
            minimality_worst: spot.worst_violation,
            sandwich_delta,
            j_estimate,
            qwi_value,
        },
        converged,
        clipped_input,
        fell_back,
    })
}

/// Smallest d with (1-d)K inside F inside (1+d)K, read off the gauge at the
/// boundary vertices of F.  The outer side is exact for convex K; the inner
/// side is sampled at the vertices, which is where radial minimizers attain
/// their extremes.
pub fn sandwich_check(f: &GeomSet, shape: &WulffShape) -> Result<f64> {
    let sys = polygon_of(f)?;
    let mut gmin = f64::INFINITY;
    let mut gmax: f64 = 0.0;
    for lp in sys.loops() {
        for &p in lp {
            let g = shape.gauge2(p);
            gmin = gmin.min(g);
            gmax = gmax.max(g);
        }
    }
    if !gmax.is_finite() || gmin == f64::INFINITY {
        return Err(Error::BadInput("sandwich check on an empty boundary".into()));
    }
    Ok((gmax - 1.0).max(1.0 - gmin).max(0.0))
}

/// Exact area of the symmetric difference between the radial polygon with
/// offsets `rad` about a common center and its copy with radii scaled by
/// `fac`, sector by sector.  Chords crossing inside a sector split it into
/// two triangles at the crossing.
fn radial_symm_diff(rad: &[Vec2], fac: &[f64]) -> f64 {
    let m = rad.len();
    let mut total = 0.0;
    for i in 0..m {
        let j = (i + 1) % m;
        let a0 = rad[i];
        let a1 = rad[j];
        let u0 = a0 * fac[i];
        let u1 = a1 * fac[j];
        let s0 = fac[i] - 1.0;
        let s1 = fac[j] - 1.0;
        if s0 * s1 >= 0.0 {
            total += 0.5 * (u0.cross(u1) - a0.cross(a1)).abs();
        } else {
            let d1 = a1 - a0;
            let d2 = u1 - u0;
            let denom = d1.cross(d2);
            if denom.abs() < 1e-300 {
                total += 0.5 * (u0.cross(u1) - a0.cross(a1)).abs();
                continue;
            }
            let t = (u0 - a0).cross(d2) / denom;
            let p = a0 + d1 * t;
            total += 0.5 * (a0 - p).cross(u0 - p).abs();
            total += 0.5 * (a1 - p).cross(u1 - p).abs();
        }
    }
    total
}

/// Jitter the boundary radially about the barycenter and test
///
/// ```text
/// P_K(F) <= P_K(U) + (lambda + 1) |U delta F| + tol
/// ```
///
/// on every sample.  A genuine minimizer of the penalized functional passes
/// every trial; `worst_violation` reports the margin without the slack.
pub fn minimality_spot_check(
    f: &GeomSet,
    problem: &SelectionProblem,
    trials: usize,
    seed: u64,
) -> Result<MinimalityReport> {
    problem.validate()?;
    let sys = polygon_of(f)?;
    if sys.loops().len() != 1 {
        return Err(Error::BadInput("spot check wants a single star-shaped loop".into()));
    }
    let b = sys.barycenter();
    let vs = &sys.loops()[0];
    let m = vs.len();
    let rad: Vec<Vec2> = vs.iter().map(|&v| v - b).collect();
    for i in 0..m {
        if rad[i].cross(rad[(i + 1) % m]) <= 0.0 {
            return Err(Error::BadInput("loop is not star-shaped about its barycenter".into()));
        }
    }
    let per_f = loop_perimeter(vs, &problem.shape);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pass = 0usize;
    let mut worst = f64::NEG_INFINITY;
    let mut us = vec![Vec2::ZERO; m];
    for _ in 0..trials {
        let fac: Vec<f64> = (0..m).map(|_| 1.0 + rng.gen_range(-JITTER_AMP..=JITTER_AMP)).collect();
        for i in 0..m {
            us[i] = b + rad[i] * fac[i];
        }
        let per_u = loop_perimeter(&us, &problem.shape);
        let sd = radial_symm_diff(&rad, &fac);
        let violation = per_f - per_u - (problem.lambda + 1.0) * sd;
        worst = worst.max(violation);
        if violation <= problem.solver.tolerance {
            pass += 1;
        }
    }
    Ok(MinimalityReport {
        trials,
        pass_fraction: pass as f64 / trials.max(1) as f64,
        worst_violation: worst,
    })
}

/// Minimum of r -> n r^{n-1} + lambda |r^n - 1| over [0, 2]: the penalized
/// energy of the dilate r*K in units of |K|, with the asymmetry addend
/// dropped.  Grid pass at 1e-4 pitch, then golden refinement around the
/// best cell.  Returns (argmin, min).
pub fn dilate_scan(n: usize, lambda: f64) -> (f64, f64) {
    let h = |r: f64| n as f64 * r.powi(n as i32 - 1) + lambda * (r.powi(n as i32) - 1.0).abs();
    let steps = 20_000usize;
    let mut best_r = 0.0;
    let mut best = h(0.0);
    for i in 1..=steps {
        let r = 2.0 * i as f64 / steps as f64;
        let v = h(r);
        if v < best {
            best = v;
            best_r = r;
        }
    }
    let lo = (best_r - 1e-4).max(0.0);
    let hi = (best_r + 1e-4).min(2.0);
    let arg = golden_min(h, lo, hi, 64);
    let (arg, val) = if h(arg) <= best { (arg, h(arg)) } else { (best_r, best) };
    (arg, val)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QwiFamilyEntry {
    /// Quantitative ratio of the raw input, when its asymmetry supports one.
    pub input_ratio: Option<f64>,
    /// Same ratio for the selected minimizer.
    pub minimizer_ratio: Option<f64>,
    /// A(minimizer_raw) / A(input); the selection keeps asymmetry, so this
    /// sits near one.
    pub asym_ratio: Option<f64>,
    pub sandwich_delta: f64,
    pub sandwich_ok: bool,
    pub volume_ok: bool,
    pub barycentered: bool,
    pub j_estimate: f64,
    pub j_ok: bool,
    pub minimality_fraction: f64,
    /// Input too close to K for stable quotients; ratios are withheld.
    pub degenerate: bool,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QwiFamilyReport {
    pub entries: Vec<QwiFamilyEntry>,
    pub all_ok: bool,
}

fn pipeline_entry(e: &GeomSet, shape: &WulffShape, delta: f64) -> Result<QwiFamilyEntry> {
    let problem = SelectionProblem::new(e.clone(), shape.clone())?;
    let input_ratio = match qwi_ratio(e, shape) {
        Ok(rep) => Some(rep.ratio),
        Err(Error::DegenerateAsymmetry { .. }) => None,
        Err(err) => return Err(err),
    };
    let res = solve_selection(&problem)?;
    let kvol = shape.volume;
    let floor = 1e-6 * kvol;
    let a_e = asymmetry(e, shape)?.value;
    let a_f = asymmetry(&res.minimizer_raw, shape)?.value;
    let degenerate = a_e < floor;
    let asym_ratio = if degenerate { None } else { Some(a_f / a_e) };
    let fb = polygon_of(&res.minimizer)?.barycenter();
    Ok(QwiFamilyEntry {
        input_ratio,
        minimizer_ratio: res.checks.qwi_value,
        asym_ratio,
        sandwich_delta: res.checks.sandwich_delta,
        sandwich_ok: res.checks.sandwich_delta <= delta + 1e-12,
        volume_ok: (res.minimizer.volume() - kvol).abs() <= 1e-9 * kvol,
        barycentered: fb.norm() <= 1e-9 * kvol.sqrt(),
        j_estimate: res.checks.j_estimate,
        j_ok: res.checks.j_estimate <= JOHN_CAP,
        minimality_fraction: res.checks.minimality_pass_fraction,
        degenerate,
        converged: res.converged,
    })
}

/// Run the selection pipeline over a concentrating family, one sandwich
/// budget per member.  Members are independent and solved in parallel.
pub fn qwi_pipeline(
    family: &[GeomSet],
    shape: &WulffShape,
    deltas: &[f64],
) -> Result<QwiFamilyReport> {
    if family.len() != deltas.len() {
        return Err(Error::BadInput("one sandwich budget per family member".into()));
    }
    let entries = family
        .par_iter()
        .zip(deltas.par_iter())
        .map(|(e, &d)| pipeline_entry(e, shape, d))
        .collect::<Result<Vec<_>>>()?;
    let all_ok = entries.iter().all(|en| {
        en.converged
            && en.sandwich_ok
            && en.volume_ok
            && en.barycentered
            && en.j_ok
            && en.minimality_fraction >= 0.99
            && (en.degenerate || (en.minimizer_ratio.is_some() && en.asym_ratio.is_some()))
    });
    Ok(QwiFamilyReport { entries, all_ok })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle_verts(m: usize, radius: f64) -> Vec<Vec2> {
        (0..m)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / m as f64;
                v2(radius * th.cos(), radius * th.sin())
            })
            .collect()
    }

    fn disc_shape(m: usize) -> WulffShape {
        WulffShape::from_polygon(circle_verts(m, 1.0)).unwrap()
    }

    fn disc_set(m: usize, radius: f64) -> GeomSet {
        GeomSet::Polygon(PolygonSystem::single(circle_verts(m, radius)).unwrap())
    }

    /// Ellipse with aspect (1+t) : 1/(1+t), area-normalized to `target`.
    fn ellipse_set(t: f64, m: usize, target: f64) -> GeomSet {
        let a = 1.0 + t;
        let verts: Vec<Vec2> = (0..m)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / m as f64;
                v2(a * th.cos(), th.sin() / a)
            })
            .collect();
        let sys = PolygonSystem::single(verts).unwrap();
        let s = (target / sys.area()).sqrt();
        GeomSet::Polygon(sys.scaled(s))
    }

    fn radial_set(radii: &[f64]) -> GeomSet {
        let m = radii.len();
        let verts: Vec<Vec2> = (0..m)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / m as f64;
                v2(radii[i] * th.cos(), radii[i] * th.sin())
            })
            .collect();
        GeomSet::Polygon(PolygonSystem::single(verts).unwrap())
    }

    #[test]
    fn energy_of_the_body_itself_splits_exactly() {
        let k = disc_shape(256);
        let e = disc_set(256, 1.0);
        let p = SelectionProblem::new(e.clone(), k.clone()).unwrap();
        let en = penalized_energy(&e, &p).unwrap();
        // P_K(K) = n |K| is the pyramid identity; both other addends vanish.
        assert!((en.perimeter - 2.0 * k.volume).abs() <= 1e-9 * k.volume);
        assert!(en.asym_term <= 1e-9);
        assert!(en.volume_term <= 1e-9);
        assert!(!en.clipped);
        assert!((en.total - en.perimeter - en.asym_term - en.volume_term).abs() <= 1e-12);
    }

    #[test]
    fn dilate_energy_matches_the_closed_form() {
        let k = disc_shape(256);
        let p = SelectionProblem::new(disc_set(256, 1.0), k.clone()).unwrap();
        let t = 1.3;
        let en = penalized_energy(&disc_set(256, t), &p).unwrap();
        let kv = k.volume;
        let excess = kv * (t * t - 1.0);
        assert!((en.perimeter - 2.0 * kv * t).abs() <= 1e-6 * kv);
        assert!((en.asym_term - excess).abs() <= 1e-6 * kv);
        assert!((en.volume_term - p.lambda * excess).abs() <= 1e-6 * kv);
        assert!(!en.clipped);
    }

    #[test]
    fn energy_is_anchored_at_the_input_asymmetry() {
        let k = disc_shape(256);
        let e = ellipse_set(0.2, 256, k.volume);
        let p = SelectionProblem::new(e.clone(), k.clone()).unwrap();
        // The input itself pays nothing in the asymmetry addend.
        let en_e = penalized_energy(&e, &p).unwrap();
        assert!(en_e.asym_term <= 1e-9);
        // The body pays exactly the input's asymmetry.
        let a_e = asymmetry(&e, &k).unwrap().value;
        assert!(a_e > 0.01);
        let en_k = penalized_energy(&disc_set(256, 1.0), &p).unwrap();
        assert!((en_k.asym_term - a_e).abs() <= 1e-9);
    }

    #[test]
    fn oversized_input_is_cut_back_to_the_ball() {
        let k = disc_shape(256);
        let p = SelectionProblem::new(disc_set(256, 1.0), k.clone()).unwrap();
        let en = penalized_energy(&disc_set(256, 12.0), &p).unwrap();
        assert!(en.clipped);
        // What survives is r0 * K, whose perimeter scales linearly.
        assert!((en.perimeter - p.r0 * 2.0 * k.volume).abs() <= 1e-6 * p.r0 * k.volume);
    }

    #[test]
    fn weak_penalties_and_bad_inputs_are_refused() {
        let k = disc_shape(64);
        let e = disc_set(64, 1.0);
        let mut p = SelectionProblem::new(e.clone(), k.clone()).unwrap();
        p.lambda = 2.0;
        assert!(matches!(p.validate(), Err(Error::BadInput(_))));
        let mut p = SelectionProblem::new(e.clone(), k.clone()).unwrap();
        p.r0 = 1.5;
        assert!(matches!(p.validate(), Err(Error::BadInput(_))));
        let mut p = SelectionProblem::new(e, k).unwrap();
        p.solver.vertex_count = 4;
        assert!(matches!(solve_selection(&p), Err(Error::BadInput(_))));
    }

    #[test]
    fn the_body_is_a_fixed_point_of_the_selection() {
        let k = disc_shape(128);
        // Input vertices sit exactly on the solver rays.
        let p = SelectionProblem::new(disc_set(128, 1.0), k.clone()).unwrap();
        let res = solve_selection(&p).unwrap();
        let kv = k.volume;
        assert!(res.converged);
        assert!(!res.clipped_input);
        assert!(!res.fell_back);
        assert!((res.energies.total - 2.0 * kv).abs() <= p.solver.tolerance * kv);
        assert!(res.energies.total <= res.energies.input_total + 1e-9);
        assert!(res.checks.sandwich_delta <= 0.02);
        assert!((res.lambda_k - 1.0).abs() <= 1e-3);
        assert!((res.minimizer.volume() - kv).abs() <= 1e-9 * kv);
        let bf = match &res.minimizer {
            GeomSet::Polygon(sys) => sys.barycenter(),
            _ => unreachable!(),
        };
        assert!(bf.norm() <= 1e-9);
        assert!(res.checks.minimality_pass_fraction == 1.0);
        assert!(res.checks.j_estimate <= JOHN_CAP);
        // A minimizer this close to K has no stable quotient.
        assert!(res.checks.qwi_value.is_none());
    }

    #[test]
    fn an_ellipse_keeps_its_asymmetry_but_sheds_perimeter() {
        let k = disc_shape(128);
        let e = ellipse_set(0.2, 256, k.volume);
        let p = SelectionProblem::new(e.clone(), k.clone()).unwrap();
        let res = solve_selection(&p).unwrap();
        assert!(res.converged);
        assert!(res.energies.total <= res.energies.input_total + p.solver.tolerance);
        // Semi-axes (1.2, 1/1.2) put the input's own gauge spread at 0.2,
        // and the asymmetry pin keeps the minimizer at the same spread.
        assert!(res.checks.sandwich_delta <= 0.25);
        assert!(res.checks.minimality_pass_fraction == 1.0);
        // The asymmetry addend pins A(F) to A(E).
        let a_e = asymmetry(&e, &k).unwrap().value;
        let a_f = asymmetry(&res.minimizer_raw, &k).unwrap().value;
        let ratio = a_f / a_e;
        assert!((0.8..=1.2).contains(&ratio), "asymmetry ratio {ratio}");
        // Selection must not degrade the chain geometry.  The ray-fan
        // boundary is rougher than the smooth input at the cube scale, which
        // is worth about half a grade here.
        let w = decompose(&e, JOHN_LEVEL).unwrap();
        let j_e = estimate_john(&e, [0.0, 0.0, 0.0], &w).unwrap().j_value;
        assert!(res.checks.j_estimate <= j_e + 1.0);
    }

    #[test]
    fn a_thin_spike_gets_shaved() {
        let k = disc_shape(128);
        let mut radii = vec![1.0; 128];
        radii[7] = 1.3;
        let p = SelectionProblem::new(radial_set(&radii), k.clone()).unwrap();
        let res = solve_selection(&p).unwrap();
        assert!(res.converged);
        // The spike costs far more perimeter than its area buys back.
        assert!(res.energies.total <= res.energies.input_total - 0.3);
        assert!(res.checks.sandwich_delta <= 0.05);
        assert!(res.checks.minimality_pass_fraction == 1.0);
    }

    #[test]
    fn far_components_are_clipped_away_before_the_descent() {
        let k = disc_shape(128);
        let blob = vec![v2(10.4, 10.4), v2(10.6, 10.4), v2(10.6, 10.6), v2(10.4, 10.6)];
        let sys = PolygonSystem::new(vec![circle_verts(128, 1.0), blob]).unwrap();
        let p = SelectionProblem::new(GeomSet::Polygon(sys), k.clone()).unwrap();
        let res = solve_selection(&p).unwrap();
        assert!(res.clipped_input);
        assert!(res.converged);
        assert!(res.checks.sandwich_delta <= 0.05);
    }

    #[test]
    fn asymmetry_is_lipschitz_for_the_symmetric_difference() {
        let k = disc_shape(128);
        let mut rng = ChaCha8Rng::seed_from_u64(0xd1f7);
        for _ in 0..6 {
            let ra: Vec<f64> = (0..64).map(|_| 1.0 + rng.gen_range(-0.08..=0.08)).collect();
            let rb: Vec<f64> = (0..64).map(|_| 1.0 + rng.gen_range(-0.08..=0.08)).collect();
            let u = radial_set(&ra);
            let v = radial_set(&rb);
            let au = asymmetry(&u, &k).unwrap().value;
            let av = asymmetry(&v, &k).unwrap().value;
            let sd = u.symm_diff_volume(&v).unwrap();
            assert!((au - av).abs() <= sd + 2e-3 * k.volume);
        }
    }

    #[test]
    fn the_volume_weight_threshold_shows_in_the_dilate_scan() {
        // Above the dimension the unit dilate wins; below, collapse does.
        let (r1, v1) = dilate_scan(2, 3.0);
        assert!((r1 - 1.0).abs() <= 1e-6);
        assert!((v1 - 2.0).abs() <= 1e-6);
        let (r0, v0) = dilate_scan(2, 1.5);
        assert!(r0 <= 1e-4);
        assert!((v0 - 1.5).abs() <= 1e-6);
        let (r3, v3) = dilate_scan(3, 4.0);
        assert!((r3 - 1.0).abs() <= 1e-6);
        assert!((v3 - 3.0).abs() <= 1e-6);
    }

    #[test]
    fn rescaling_is_exact_and_the_perimeter_homogeneous() {
        let k = disc_shape(64);
        let e = ellipse_set(0.1, 128, k.volume);
        let p = SelectionProblem::new(e, k.clone()).unwrap();
        let res = solve_selection(&p).unwrap();
        let kv = k.volume;
        assert!((res.minimizer.volume() - kv).abs() <= 1e-12 * kv);
        let per_raw = anisotropic_perimeter(&res.minimizer_raw, &k).unwrap();
        let per = anisotropic_perimeter(&res.minimizer, &k).unwrap();
        assert!((per - res.lambda_k * per_raw).abs() <= 1e-12 * per.abs());
        let bf = match &res.minimizer {
            GeomSet::Polygon(sys) => sys.barycenter(),
            _ => unreachable!(),
        };
        assert!(bf.norm() <= 1e-9);
    }

    #[test]
    fn the_solver_is_deterministic() {
        let k = disc_shape(64);
        let e = ellipse_set(0.15, 128, k.volume);
        let p = SelectionProblem::new(e, k).unwrap();
        let a = solve_selection(&p).unwrap();
        let b = solve_selection(&p).unwrap();
        assert_eq!(a.energies.total, b.energies.total);
        assert_eq!(a.checks.sandwich_delta, b.checks.sandwich_delta);
        assert_eq!(a.lambda_k, b.lambda_k);
    }

    #[test]
    fn ellipse_family_ratios_stay_pinned_to_the_input() {
        let k = disc_shape(128);
        let family: Vec<GeomSet> = (0..5)
            .map(|i| ellipse_set(0.2 / f64::powi(2.0, i), 256, k.volume))
            .collect();
        // Gauge spread of member k is about t_k; grant discretization room.
        let deltas: Vec<f64> = (0..5).map(|i| 1.3 * 0.2 / f64::powi(2.0, i) + 0.01).collect();
        let rep = qwi_pipeline(&family, &k, &deltas).unwrap();
        assert!(rep.all_ok, "entries: {:?}", rep.entries);
        for en in &rep.entries {
            assert!(!en.degenerate);
            let ratio = en.asym_ratio.unwrap();
            assert!((0.8..=1.2).contains(&ratio), "asymmetry ratio {ratio}");
            assert!(en.input_ratio.is_some());
            assert!(en.minimizer_ratio.is_some());
        }
    }

    #[test]
    fn a_round_input_is_marked_degenerate() {
        let k = disc_shape(128);
        let rep = qwi_pipeline(&[disc_set(128, 1.0)], &k, &[0.05]).unwrap();
        assert!(rep.all_ok);
        let en = &rep.entries[0];
        assert!(en.degenerate);
        assert!(en.input_ratio.is_none());
        assert!(en.asym_ratio.is_none());
    }

    #[test]
    fn bumped_squares_settle_inside_the_tube() {
        let square = WulffShape::from_polygon(vec![
            v2(1.0, 1.0),
            v2(-1.0, 1.0),
            v2(-1.0, -1.0),
            v2(1.0, -1.0),
        ])
        .unwrap();
        let family: Vec<GeomSet> = (0..3)
            .map(|j| {
                let amp = 0.08 / f64::powi(2.0, j);
                let verts: Vec<Vec2> = (0..128)
                    .map(|i| {
                        let th = 2.0 * PI * i as f64 / 128.0;
                        let d = v2(th.cos(), th.sin());
                        let r_sq = 1.0 / d.x.abs().max(d.y.abs());
                        d * (r_sq * (1.0 + amp * (8.0 * th).cos()))
                    })
                    .collect();
                let sys = PolygonSystem::single(verts).unwrap();
                let s = (square.volume / sys.area()).sqrt();
                GeomSet::Polygon(sys.scaled(s))
            })
            .collect();
        let rep = qwi_pipeline(&family, &square, &[0.1, 0.1, 0.1]).unwrap();
        assert!(rep.all_ok, "entries: {:?}", rep.entries);
        for en in &rep.entries {
            assert!(!en.degenerate);
            assert!(en.sandwich_ok);
        }
    }
}
