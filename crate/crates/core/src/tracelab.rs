//! Boundary traces along Whitney chains.
//!
//! A field is known through two fixed lattices per cube: a midpoint
//! lattice on the 11/10 dilate backing the cube averages, and one on the
//! cube proper backing the gradient sums.  Accepted cubes sit at depth
//! sqrt(n) times their side, so the dilate never leaves the domain and
//! the averages need no boundary masking; the cube lattices tile the
//! covered part of the domain, so the gradient integral counts nothing
//! twice.  Chains from the center to a boundary point follow the
//! predecessor tree of the John feasibility pass, which is what makes
//! their sides shrink toward the endpoint.

use crate::error::{Error, Result};
use crate::geom::v2;
use crate::geomset::GeomSet;
use crate::johnmetric::{
    build_graph, cap_pass, cap_tree, domain_dist_lo, BoundaryWalk, CubeGraph,
};
use crate::whitney::WhitneyDecomposition;
use serde::{Deserialize, Serialize};

const DILATION: f64 = 1.1;
/// Lattice points per axis for averages, on the dilated cube.
const AVG_M: usize = 5;
/// Lattice points per axis for gradients, on the cube proper.
const GRAD_M: usize = 4;

fn frac(k: usize, m: usize) -> f64 {
    (k as f64 + 0.5) / m as f64 - 0.5
}

fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// A scalar field reduced to its per-cube statistics on one decomposition.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub label: String,
    /// Mean over the 11/10 dilate of each cube, midpoint rule.
    pub cube_averages: Vec<f64>,
    /// Mean of |Du| over each cube's own lattice.
    pub cube_grad_avg: Vec<f64>,
    /// Integral of |Du| over the cube cover.
    pub gradient_l1: f64,
    /// Sup of |u| over every sample taken.
    pub sup_abs: f64,
}

impl ScalarField {
    /// Samples `f` on both lattices of every cube.  Central differences
    /// inside each lattice, one sided at its rim.
    pub fn sample<F: Fn([f64; 3]) -> f64>(
        domain: &GeomSet,
        w: &WhitneyDecomposition,
        label: &str,
        f: F,
    ) -> ScalarField {
        let dim = w.dim;
        let per_avg = AVG_M.pow(dim as u32) as f64;
        let per_grad = GRAD_M.pow(dim as u32) as f64;
        let mut cube_averages = Vec::with_capacity(w.cubes.len());
        let mut cube_grad_avg = Vec::with_capacity(w.cubes.len());
        let mut gradient_l1 = 0.0;
        let mut sup_abs: f64 = 0.0;
        let mut buf = vec![0.0; GRAD_M.pow(dim as u32)];
        let zs_avg = if dim == 3 { AVG_M } else { 1 };
        let zs_grad = if dim == 3 { GRAD_M } else { 1 };
        for c in &w.cubes {
            let s = w.side(c.level);
            let ctr = w.cube_center(c);
            let mut sum = 0.0;
            for iz in 0..zs_avg {
                for iy in 0..AVG_M {
                    for ix in 0..AVG_M {
                        let p = [
                            ctr[0] + frac(ix, AVG_M) * DILATION * s,
                            ctr[1] + frac(iy, AVG_M) * DILATION * s,
                            if dim == 3 {
                                ctr[2] + frac(iz, AVG_M) * DILATION * s
                            } else {
                                0.0
                            },
                        ];
                        debug_assert!(domain.contains(p));
                        let val = f(p);
                        sup_abs = sup_abs.max(val.abs());
                        sum += val;
                    }
                }
            }
            cube_averages.push(sum / per_avg);

            let pitch = s / GRAD_M as f64;
            for iz in 0..zs_grad {
                for iy in 0..GRAD_M {
                    for ix in 0..GRAD_M {
                        let p = [
                            ctr[0] + frac(ix, GRAD_M) * s,
                            ctr[1] + frac(iy, GRAD_M) * s,
                            if dim == 3 { ctr[2] + frac(iz, GRAD_M) * s } else { 0.0 },
                        ];
                        let val = f(p);
                        sup_abs = sup_abs.max(val.abs());
                        buf[(iz * GRAD_M + iy) * GRAD_M + ix] = val;
                    }
                }
            }
            let mut mag_sum = 0.0;
            for iz in 0..zs_grad {
                for iy in 0..GRAD_M {
                    for ix in 0..GRAD_M {
                        let gx = axis_diff(&buf, ix, 1, (iz * GRAD_M + iy) * GRAD_M, pitch);
                        let gy = axis_diff(&buf, iy, GRAD_M, iz * GRAD_M * GRAD_M + ix, pitch);
                        let gz = if dim == 3 {
                            axis_diff(&buf, iz, GRAD_M * GRAD_M, iy * GRAD_M + ix, pitch)
                        } else {
                            0.0
                        };
                        mag_sum += (gx * gx + gy * gy + gz * gz).sqrt();
                    }
                }
            }
            cube_grad_avg.push(mag_sum / per_grad);
            gradient_l1 += mag_sum * pitch.powi(dim as i32);
        }
        ScalarField {
            label: label.to_string(),
            cube_averages,
            cube_grad_avg,
            gradient_l1,
            sup_abs,
        }
    }
}

fn axis_diff(buf: &[f64], i: usize, stride: usize, base: usize, pitch: f64) -> f64 {
    let v = |k: usize| buf[base + k * stride];
    if i == 0 {
        (v(1) - v(0)) / pitch
    } else if i + 1 == GRAD_M {
        (v(i) - v(i - 1)) / pitch
    } else {
        (v(i + 1) - v(i - 1)) / (2.0 * pitch)
    }
}

/// Cube averages from an externally sampled grid of cell centers.
/// Every cube must see at least 4 grid points inside its dilate.
pub fn cube_averages_from_grid(
    domain: &GeomSet,
    w: &WhitneyDecomposition,
    origin: [f64; 3],
    h: f64,
    dims: [usize; 3],
    values: &[f64],
) -> Result<Vec<f64>> {
    if h <= 0.0 || values.len() != dims[0] * dims[1] * dims[2].max(1) {
        return Err(Error::BadInput("grid dims do not match the value buffer".into()));
    }
    let dim = w.dim;
    let mut out = Vec::with_capacity(w.cubes.len());
    for c in &w.cubes {
        let s = w.side(c.level);
        let ctr = w.cube_center(c);
        let half = 0.5 * DILATION * s;
        let range = |k: usize| -> (i64, i64) {
            let lo = ((ctr[k] - half - origin[k]) / h - 0.5).ceil() as i64;
            let hi = ((ctr[k] + half - origin[k]) / h - 0.5).floor() as i64;
            (lo.max(0), hi.min(dims[k] as i64 - 1))
        };
        let (x0, x1) = range(0);
        let (y0, y1) = range(1);
        let (z0, z1) = if dim == 3 { range(2) } else { (0, 0) };
        let mut sum = 0.0;
        let mut count = 0usize;
        for kz in z0..=z1 {
            for ky in y0..=y1 {
                for kx in x0..=x1 {
                    let p = [
                        origin[0] + (kx as f64 + 0.5) * h,
                        origin[1] + (ky as f64 + 0.5) * h,
                        if dim == 3 { origin[2] + (kz as f64 + 0.5) * h } else { 0.0 },
                    ];
                    if !domain.contains(p) {
                        continue;
                    }
                    let id = ((kz as usize * dims[1]) + ky as usize) * dims[0] + kx as usize;
                    sum += values[id];
                    count += 1;
                }
            }
        }
        if count < 4 {
            return Err(Error::UndersampledCube { level: c.level, index: c.idx, samples: count });
        }
        out.push(sum / count as f64);
    }
    Ok(out)
}

/// Analytic test fields, the vocabulary of trace suites.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticField {
    Constant(f64),
    Linear { a: [f64; 2], b: f64 },
    /// Tent profile max(0, 1 - |p - center| / scale).
    RadialBump { center: [f64; 2], scale: f64 },
    DistToBoundary,
}

impl AnalyticField {
    pub fn eval(&self, domain: &GeomSet, p: [f64; 3]) -> f64 {
        match self {
            AnalyticField::Constant(v) => *v,
            AnalyticField::Linear { a, b } => a[0] * p[0] + a[1] * p[1] + b,
            AnalyticField::RadialBump { center, scale } => {
                let r = ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)).sqrt();
                (1.0 - r / scale).max(0.0)
            }
            AnalyticField::DistToBoundary => domain_dist_lo(domain, p),
        }
    }

    pub fn label(&self) -> String {
        match self {
            AnalyticField::Constant(v) => format!("constant {v}"),
            AnalyticField::Linear { a, b } => format!("linear a=({},{}) b={}", a[0], a[1], b),
            AnalyticField::RadialBump { center, scale } => {
                format!("radial_bump c=({},{}) s={}", center[0], center[1], scale)
            }
            AnalyticField::DistToBoundary => "dist_to_boundary".into(),
        }
    }

    pub fn sample(&self, domain: &GeomSet, w: &WhitneyDecomposition) -> ScalarField {
        ScalarField::sample(domain, w, &self.label(), |p| self.eval(domain, p))
    }
}

/// Chain machinery shared across many boundary points: the cube graph and
/// the predecessor tree of the cheapest feasible John grade.
pub struct ChainSet {
    g: CubeGraph,
    parent: Vec<usize>,
    pub j_used: f64,
    s_fin: f64,
}

impl ChainSet {
    pub fn new(domain: &GeomSet, w: &WhitneyDecomposition, x0: [f64; 3]) -> Result<ChainSet> {
        let g = build_graph(domain, w, x0)?;
        if g.targets.is_empty() {
            return Err(Error::BadInput("no exposed cubes; raise the level".into()));
        }
        let feasible = |cap: &[f64]| {
            g.targets.iter().all(|&t| cap[t] >= g.stubs[&t] - 1e-12)
        };
        let mut hi = 2.0;
        let mut grow = 0;
        while !feasible(&cap_pass(&g, hi)) {
            hi *= 2.0;
            grow += 1;
            if grow > 60 {
                return Err(Error::DisconnectedDomain);
            }
        }
        let mut lo = hi / 2.0;
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if feasible(&cap_pass(&g, mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let j_used = hi * (1.0 + 1e-9);
        let (cap, parent) = cap_tree(&g, j_used);
        debug_assert!(feasible(&cap));
        Ok(ChainSet { g, parent, j_used, s_fin: w.side(w.max_level) })
    }

    fn target_near(&self, x: [f64; 3]) -> Option<usize> {
        self.g
            .targets
            .iter()
            .copied()
            .min_by(|&a, &b| {
                dist3(self.g.centers[a], x)
                    .total_cmp(&dist3(self.g.centers[b], x))
                    .then(a.cmp(&b))
            })
    }

    /// Cube chain from the center's host out to the cube fronting x.
    pub fn chain(
        &self,
        domain: &GeomSet,
        w: &WhitneyDecomposition,
        x: [f64; 3],
    ) -> Result<ChainReport> {
        let reach = 5.0 * (w.dim as f64).sqrt() * self.s_fin;
        if boundary_gap(domain, x) > reach {
            return Err(Error::BadInput(
                "chain endpoint is not near the boundary".into(),
            ));
        }
        let t = self.target_near(x).ok_or(Error::Unreachable)?;
        let mut rev = vec![t];
        let mut cur = t;
        while self.parent[cur] != usize::MAX {
            cur = self.parent[cur];
            if cur != self.g.x0_node {
                rev.push(cur);
            }
        }
        if cur != self.g.x0_node {
            return Err(Error::Unreachable);
        }
        rev.reverse();
        let half = (w.dim as f64).sqrt() * 0.5 * DILATION;
        let c1 = rev
            .iter()
            .map(|&i| {
                let s = w.side(w.cubes[i].level);
                (dist3(self.g.centers[i], x) + half * s) / s
            })
            .fold(0.0, f64::max);
        let attach = match domain {
            GeomSet::Polygon(sys) => {
                let c = self.g.centers[t];
                let nb = sys.nearest_boundary_point(v2(c[0], c[1]));
                [nb.x, nb.y, 0.0]
            }
            GeomSet::Voxels(_) => self.g.centers[t],
        };
        Ok(ChainReport { cubes: rev, c1, attach })
    }
}

fn boundary_gap(domain: &GeomSet, x: [f64; 3]) -> f64 {
    match domain {
        GeomSet::Polygon(sys) => {
            let nb = sys.nearest_boundary_point(v2(x[0], x[1]));
            (nb - v2(x[0], x[1])).norm()
        }
        GeomSet::Voxels(g) => g
            .boundary_cell_centers()
            .iter()
            .map(|&c| dist3(c, x))
            .fold(f64::INFINITY, f64::min),
    }
}

#[derive(Debug, Clone)]
pub struct ChainReport {
    /// Cube indices, the center's host first, ending at the cube
    /// fronting the requested boundary point.
    pub cubes: Vec<usize>,
    /// Measured clustering constant: max over the chain of
    /// (distance to the endpoint + dilated half diagonal) / side.
    pub c1: f64,
    /// Where the final cube meets the boundary.
    pub attach: [f64; 3],
}

pub fn chain_to_boundary(
    domain: &GeomSet,
    w: &WhitneyDecomposition,
    x: [f64; 3],
    x0: [f64; 3],
) -> Result<ChainReport> {
    ChainSet::new(domain, w, x0)?.chain(domain, w, x)
}

#[derive(Debug, Clone, Copy)]
pub struct TraceEval {
    /// Average of the field over the dilate of the final chain cube.
    pub value: f64,
    /// Sum of jumps between consecutive cube averages.
    pub oscillation: f64,
    pub chain_len: usize,
}

fn check_alignment(u: &ScalarField, w: &WhitneyDecomposition) -> Result<()> {
    if u.cube_averages.len() != w.cubes.len() {
        return Err(Error::BadInput(
            "field was sampled on a different decomposition".into(),
        ));
    }
    Ok(())
}

pub fn trace_eval(
    u: &ScalarField,
    domain: &GeomSet,
    w: &WhitneyDecomposition,
    x: [f64; 3],
    x0: [f64; 3],
) -> Result<TraceEval> {
    let cs = ChainSet::new(domain, w, x0)?;
    trace_eval_with(&cs, u, domain, w, x)
}

pub fn trace_eval_with(
    cs: &ChainSet,
    u: &ScalarField,
    domain: &GeomSet,
    w: &WhitneyDecomposition,
    x: [f64; 3],
) -> Result<TraceEval> {
    check_alignment(u, w)?;
    let ch = cs.chain(domain, w, x)?;
    let vals: Vec<f64> = ch.cubes.iter().map(|&i| u.cube_averages[i]).collect();
    let oscillation = vals.windows(2).map(|p| (p[1] - p[0]).abs()).sum();
    Ok(TraceEval {
        value: *vals.last().expect("chains are never empty"),
        oscillation,
        chain_len: ch.cubes.len(),
    })
}

/// Frozen chain factor n (11/10) sqrt(n): cube diameter times the
/// dilation, per dimension of the difference quotient.
fn chain_factor(dim: usize) -> f64 {
    dim as f64 * DILATION * (dim as f64).sqrt()
}

/// Telescoping majorant sum C_P l(Q_k) avg_{Q_k}|Du| along the chain to x.
pub fn chain_sum_bound(
    u: &ScalarField,
    domain: &GeomSet,
    w: &WhitneyDecomposition,
    x: [f64; 3],
    x0: [f64; 3],
) -> Result<f64> {
    let cs = ChainSet::new(domain, w, x0)?;
    chain_sum_bound_with(&cs, u, domain, w, x)
}

pub fn chain_sum_bound_with(
    cs: &ChainSet,
    u: &ScalarField,
    domain: &GeomSet,
    w: &WhitneyDecomposition,
    x: [f64; 3],
) -> Result<f64> {
    check_alignment(u, w)?;
    let ch = cs.chain(domain, w, x)?;
    let cp = chain_factor(w.dim);
    Ok(ch
        .cubes
        .iter()
        .map(|&i| cp * w.side(w.cubes[i].level) * u.cube_grad_avg[i])
        .sum())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldTrace {
    pub label: String,
    /// Boundary integral of |Tu - shift|.
    pub lhs: f64,
    /// Interior integral of |Du|.
    pub rhs: f64,
    pub ratio: f64,
    /// The minimizing shift, a weighted median of the trace values.
    pub shift: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceReport {
    /// (boundary point, trace value) for the worst field of the suite.
    pub boundary_samples: Vec<([f64; 3], f64)>,
    /// lhs and rhs of the worst field.
    pub lhs: f64,
    pub rhs: f64,
    /// Max of lhs/rhs over the suite.
    pub c_emp: f64,
    pub fields: Vec<FieldTrace>,
    /// Fraction of boundary samples with no chain to grade.
    pub skipped_fraction: f64,
}

fn weighted_median(pairs: &mut Vec<(f64, f64)>) -> f64 {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    for &(v, w) in pairs.iter() {
        acc += w;
        if acc >= total / 2.0 {
            return v;
        }
    }
    pairs.last().map(|p| p.0).unwrap_or(0.0)
}

fn l1_about(pairs: &[(f64, f64)], c: f64) -> f64 {
    pairs.iter().map(|&(v, w)| (v - c).abs() * w).sum()
}

/// Empirical trace constant of the domain over a field suite: traces are
/// taken along Whitney chains at equally spaced boundary points, each
/// field is centered by its weighted median, and the boundary integral
/// of the centered trace is compared against the gradient integral.
pub fn trace_constant(
    domain: &GeomSet,
    suite: &[AnalyticField],
    w: &WhitneyDecomposition,
    x0: [f64; 3],
    boundary_samples: usize,
) -> Result<TraceReport> {
    if suite.is_empty() || boundary_samples == 0 {
        return Err(Error::BadInput("empty suite or no boundary samples".into()));
    }
    let GeomSet::Polygon(sys) = domain else {
        return Err(Error::BadInput("trace constants need a polygon boundary".into()));
    };
    let cs = ChainSet::new(domain, w, x0)?;
    let walk = BoundaryWalk::new(sys);
    let weight = walk.total / boundary_samples as f64;
    let mut pts = Vec::with_capacity(boundary_samples);
    let mut lasts: Vec<Option<usize>> = Vec::with_capacity(boundary_samples);
    let mut skipped = 0usize;
    for i in 0..boundary_samples {
        let (p, _) = walk.at(sys, (i as f64 + 0.5) * weight);
        let x = [p.x, p.y, 0.0];
        match cs.chain(domain, w, x) {
            Ok(ch) => lasts.push(Some(*ch.cubes.last().expect("chains are never empty"))),
            Err(_) => {
                lasts.push(None);
                skipped += 1;
            }
        }
        pts.push(x);
    }
    let skipped_fraction = skipped as f64 / boundary_samples as f64;

    let mut fields = Vec::with_capacity(suite.len());
    let mut per_field_samples: Vec<Vec<([f64; 3], f64)>> = Vec::with_capacity(suite.len());
    for spec in suite {
        let u = spec.sample(domain, w);
        let mut samples = Vec::with_capacity(boundary_samples - skipped);
        for (x, last) in pts.iter().zip(&lasts) {
            let Some(t) = last else { continue };
            samples.push((*x, u.cube_averages[*t]));
        }
        let mut pairs: Vec<(f64, f64)> = samples.iter().map(|&(_, v)| (v, weight)).collect();
        let shift = weighted_median(&mut pairs);
        let lhs = l1_about(&pairs, shift);
        // The shift is only reported if no nearby shift does better.
        let scale = 1.0 + u.sup_abs;
        for delta in [-1e-3, 1e-3] {
            assert!(
                l1_about(&pairs, shift + delta) + 1e-12 * scale >= lhs,
                "median shift is not optimal for {}",
                u.label
            );
        }
        let rhs = u.gradient_l1;
        let ratio = if lhs <= 1e-9 * scale {
            0.0
        } else if rhs <= 1e-12 * scale {
            f64::INFINITY
        } else {
            lhs / rhs
        };
        fields.push(FieldTrace { label: u.label.clone(), lhs, rhs, ratio, shift });
        per_field_samples.push(samples);
    }
    let worst = fields
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.ratio.total_cmp(&b.1.ratio).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .expect("suite is non-empty");
    Ok(TraceReport {
        boundary_samples: per_field_samples.swap_remove(worst),
        lhs: fields[worst].lhs,
        rhs: fields[worst].rhs,
        c_emp: fields.iter().map(|f| f.ratio).fold(0.0, f64::max),
        fields,
        skipped_fraction,
    })
}
