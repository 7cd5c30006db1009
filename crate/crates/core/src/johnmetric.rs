//! John-constant estimation on the Whitney cube graph.
//!
//! A curve from the center x0 out to a near-boundary target is graded by
//! the worst ratio of (arc length from the target's boundary attach point)
//! against the distance to the boundary.  On the segment from a cube
//! center to its nearest boundary point those two quantities agree
//! exactly, so the stub contributes ratio 1 and the grading is anchored
//! at the boundary.
//!
//! The domain constant is the max over targets of the min over curves of
//! that grade.  Feasibility of a candidate grade is decided by a single
//! widest-path style pass over the graph; the worst targets then get an
//! exact two-key Pareto search that also produces witness polylines.
//! The same search core backs the sampled local John audit and the
//! two-piece curves for sets sandwiched between Wulff dilates.

use crate::anisotropy::WulffShape;
use crate::error::{Error, Result};
use crate::geom::{v2, Vec2};
use crate::geomset::polygon::{ConvexClipper, PolygonSystem};
use crate::geomset::GeomSet;
use crate::whitney::{decompose, WhitneyDecomposition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::collections::HashMap;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JohnWitness {
    /// Cube center the curve reaches (before the boundary stub).
    pub target: [f64; 3],
    /// Exact graph grade of the best curve to this target.
    pub ratio: f64,
    /// Curve length including the boundary stub.
    pub length: f64,
    /// Boundary attach point (polygon domains), then cube centers out to
    /// the John center.
    pub polyline: Vec<[f64; 3]>,
    /// Cube indices along the curve, target cube first.
    pub cubes: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JohnEstimate {
    /// The distinguished center the curves end at.
    pub center: [f64; 3],
    /// Max witness grade; the graph John constant.
    pub j_value: f64,
    /// Boundary attach point of the worst witness.
    pub worst_start: [f64; 3],
    /// Dyadic depth of the decomposition the estimate ran on.
    pub resolution: u32,
    /// Bisection bracket that j_value must land in.
    pub bracket: (f64, f64),
    pub target_count: usize,
    /// Worst targets first.
    pub witnesses: Vec<JohnWitness>,
}

pub(crate) struct CubeGraph {
    pub(crate) centers: Vec<[f64; 3]>,
    /// Certified lower bounds on center-to-boundary distance.
    pub(crate) d: Vec<f64>,
    pub(crate) adj: Vec<Vec<(usize, f64)>>,
    pub(crate) x0_node: usize,
    pub(crate) targets: Vec<usize>,
    /// Stub length per target node (its center distance).
    pub(crate) stubs: HashMap<usize, f64>,
}

fn point_cube(
    w: &WhitneyDecomposition,
    by_level: &HashMap<u32, HashMap<[i64; 3], usize>>,
    p: [f64; 3],
) -> Option<usize> {
    for (&level, m) in by_level {
        let s = w.side(level);
        let idx = [
            ((p[0] - w.origin[0]) / s).floor() as i64,
            ((p[1] - w.origin[1]) / s).floor() as i64,
            if w.dim == 3 {
                ((p[2] - w.origin[2]) / s).floor() as i64
            } else {
                0
            },
        ];
        if let Some(&i) = m.get(&idx) {
            return Some(i);
        }
    }
    None
}

pub(crate) fn domain_dist_lo(domain: &GeomSet, p: [f64; 3]) -> f64 {
    match domain {
        GeomSet::Polygon(sys) => sys.dist_to_boundary(v2(p[0], p[1])),
        GeomSet::Voxels(g) => g.dist_field().bounds(p).0,
    }
}

fn edge_len(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Cubes whose closed box contains p.  More than one when p sits on a
/// dyadic face or corner.
fn host_cubes(w: &WhitneyDecomposition, p: [f64; 3]) -> Vec<usize> {
    let mut hosts = Vec::new();
    for (i, c) in w.cubes.iter().enumerate() {
        let s = w.side(c.level);
        let lo = w.cube_lo(c);
        let slack = s * 1e-12;
        let inside =
            (0..w.dim).all(|k| p[k] >= lo[k] - slack && p[k] <= lo[k] + s + slack);
        if inside {
            hosts.push(i);
        }
    }
    hosts
}

/// Center-to-center adjacency over touching cubes, with `extra` trailing
/// slots for virtual nodes.
fn cube_adjacency(
    w: &WhitneyDecomposition,
    centers: &[[f64; 3]],
    extra: usize,
) -> Vec<Vec<(usize, f64)>> {
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); w.cubes.len() + extra];
    for (a, b) in w.touching_pairs() {
        let e = edge_len(centers[a], centers[b]);
        adj[a].push((b, e));
        adj[b].push((a, e));
    }
    adj
}

pub(crate) fn build_graph(
    domain: &GeomSet,
    w: &WhitneyDecomposition,
    x0: [f64; 3],
) -> Result<CubeGraph> {
    if !domain.contains(x0) {
        return Err(Error::CenterOutside);
    }
    let by_level = w.level_index();
    let n = w.cubes.len();
    let mut centers: Vec<[f64; 3]> = w.cubes.iter().map(|c| w.cube_center(c)).collect();
    let mut d: Vec<f64> = w.cubes.iter().map(|c| c.center_lo).collect();
    let mut adj = cube_adjacency(w, &centers, 1);
    // The center joins the graph as its own node so the grade at x0 itself
    // participates.  Attach it to every cube whose closed box contains it:
    // when x0 sits on a dyadic face or corner, all incident cubes are fair
    // entry points, and routing through a single quadrant would force
    // detours across the grid seam.
    let x0_node = n;
    let hosts = host_cubes(w, x0);
    if hosts.is_empty() {
        return Err(Error::BadInput(
            "center lies in the uncovered collar; deepen the decomposition".into(),
        ));
    }
    for host in hosts {
        let e = edge_len(x0, centers[host]);
        adj[x0_node].push((host, e));
        adj[host].push((x0_node, e));
    }
    centers.push(x0);
    d.push(domain_dist_lo(domain, x0));

    // Targets: cubes with a face probe that is in the domain but not in
    // any accepted cube, i.e. cubes fronting the uncovered collar.
    let mut targets = Vec::new();
    let mut stubs = HashMap::new();
    for (i, c) in w.cubes.iter().enumerate() {
        let s = w.side(c.level);
        let ctr = centers[i];
        let mut exposed = false;
        'probe: for k in 0..w.dim {
            for sign in [-1.0, 1.0] {
                let mut p = ctr;
                p[k] += sign * s * (0.5 + 1e-3);
                if domain.contains(p) && point_cube(w, &by_level, p).is_none() {
                    exposed = true;
                    break 'probe;
                }
            }
        }
        if exposed {
            targets.push(i);
            stubs.insert(i, d[i]);
        }
    }
    Ok(CubeGraph { centers, d, adj, x0_node, targets, stubs })
}

/// Max-min budget pass: cap(v) is the best over paths from x0 of the
/// tightest remaining length allowance, with allowance j d(u) at u.
pub(crate) fn cap_pass(g: &CubeGraph, j: f64) -> Vec<f64> {
    cap_tree(g, j).0
}

/// cap_pass with predecessors: parent[v] is the neighbor through which
/// cap(v) was achieved, usize::MAX at x0 and on unreached nodes.
pub(crate) fn cap_tree(g: &CubeGraph, j: f64) -> (Vec<f64>, Vec<usize>) {
    let n = g.adj.len();
    let mut cap = vec![f64::NEG_INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut heap: BinaryHeap<(FloatOrd, usize)> = BinaryHeap::new();
    cap[g.x0_node] = j * g.d[g.x0_node];
    heap.push((FloatOrd(cap[g.x0_node]), g.x0_node));
    while let Some((FloatOrd(c), v)) = heap.pop() {
        if c < cap[v] {
            continue;
        }
        for &(wv, e) in &g.adj[v] {
            let cand = (c - e).min(j * g.d[wv]);
            if cand > cap[wv] {
                cap[wv] = cand;
                parent[wv] = v;
                heap.push((FloatOrd(cand), wv));
            }
        }
    }
    (cap, parent)
}

#[derive(PartialEq)]
struct FloatOrd(f64);
impl Eq for FloatOrd {}
impl PartialOrd for FloatOrd {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for FloatOrd {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Best grade from `start` to any node satisfying `goal`, by Pareto label
/// search over the keys (grade so far, length so far).  The start carries
/// `stub` length already spent; grades are checked at every node after it.
/// Returns (grade, total length, path from start to the goal node).
fn prefix_search(
    adj: &[Vec<(usize, f64)>],
    d: &[f64],
    start: usize,
    stub: f64,
    goal: impl Fn(usize) -> bool,
) -> Option<(f64, f64, Vec<usize>)> {
    struct Label {
        node: usize,
        r: f64,
        len: f64,
        parent: usize,
    }
    let r0 = if stub > 0.0 { stub / d[start] } else { 0.0 };
    let mut labels = vec![Label { node: start, r: r0, len: stub, parent: usize::MAX }];
    let mut fronts: Vec<Vec<usize>> = vec![Vec::new(); adj.len()];
    fronts[start].push(0);
    let mut heap: BinaryHeap<Reverse<(FloatOrd, FloatOrd, usize)>> = BinaryHeap::new();
    heap.push(Reverse((FloatOrd(r0), FloatOrd(stub), 0)));
    while let Some(Reverse((FloatOrd(r), FloatOrd(len), id))) = heap.pop() {
        let node = labels[id].node;
        if !fronts[node].contains(&id) {
            continue;
        }
        if goal(node) {
            let mut path = Vec::new();
            let mut cur = id;
            while cur != usize::MAX {
                path.push(labels[cur].node);
                cur = labels[cur].parent;
            }
            path.reverse();
            return Some((r, len, path));
        }
        for &(wv, e) in &adj[node] {
            let len2 = len + e;
            let r2 = r.max(len2 / d[wv]);
            let dominated = fronts[wv]
                .iter()
                .any(|&o| labels[o].r <= r2 && labels[o].len <= len2);
            if dominated {
                continue;
            }
            fronts[wv].retain(|&o| !(labels[o].r >= r2 && labels[o].len >= len2));
            labels.push(Label { node: wv, r: r2, len: len2, parent: id });
            let nid = labels.len() - 1;
            fronts[wv].push(nid);
            heap.push(Reverse((FloatOrd(r2), FloatOrd(len2), nid)));
        }
    }
    None
}

/// Estimates the John constant of the domain seen from x0, on the cube
/// graph of `w`.  The estimate is the exact optimum of the discrete
/// grading, bracketed by bisection and settled by Pareto search on the
/// binding targets.
pub fn estimate_john(
    domain: &GeomSet,
    x0: [f64; 3],
    w: &WhitneyDecomposition,
) -> Result<JohnEstimate> {
    let g = build_graph(domain, w, x0)?;
    if g.targets.is_empty() {
        return Err(Error::BadInput("no exposed cubes; raise the level".into()));
    }
    // Reachability first: an unreachable target is a different failure
    // than a large constant.
    let mut seen = vec![false; g.adj.len()];
    let mut stack = vec![g.x0_node];
    seen[g.x0_node] = true;
    while let Some(v) = stack.pop() {
        for &(wv, _) in &g.adj[v] {
            if !seen[wv] {
                seen[wv] = true;
                stack.push(wv);
            }
        }
    }
    if g.targets.iter().any(|&t| !seen[t]) {
        return Err(Error::DisconnectedDomain);
    }

    let feasible =
        |cap: &[f64]| -> bool { g.targets.iter().all(|&t| cap[t] >= g.stubs[&t] - 1e-12) };
    let mut lo = 1.0;
    let mut hi = 2.0;
    let mut tgt_lo: HashMap<usize, f64> = g.targets.iter().map(|&t| (t, 1.0)).collect();
    let probe = |j: f64, tgt_lo: &mut HashMap<usize, f64>| -> bool {
        let cap = cap_pass(&g, j);
        for &t in &g.targets {
            if cap[t] < g.stubs[&t] - 1e-12 {
                let e = tgt_lo.get_mut(&t).unwrap();
                *e = e.max(j);
            }
        }
        feasible(&cap)
    };
    while !probe(hi, &mut tgt_lo) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e9 {
            return Err(Error::DisconnectedDomain);
        }
    }
    for _ in 0..60 {
        if hi - lo <= 1e-9 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if probe(mid, &mut tgt_lo) {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    // Exact grades for the most binding targets; grow the slate if the
    // exact max has not met the bisection bracket yet.
    let mut order: Vec<usize> = g.targets.clone();
    order.sort_by(|&a, &b| {
        tgt_lo[&b]
            .total_cmp(&tgt_lo[&a])
            .then(g.stubs[&a].total_cmp(&g.stubs[&b]))
            .then(a.cmp(&b))
    });
    let mut witnesses: Vec<JohnWitness> = Vec::new();
    let mut j_value = f64::NEG_INFINITY;
    let mut taken = 0;
    while taken < order.len() {
        let batch = (taken + 16).min(order.len());
        for &t in &order[taken..batch] {
            let (r, length, path) = prefix_search(&g.adj, &g.d, t, g.stubs[&t], |v| {
                v == g.x0_node
            })
            .expect("reachable target must be searchable");
            let mut polyline: Vec<[f64; 3]> = Vec::with_capacity(path.len() + 1);
            if let GeomSet::Polygon(sys) = domain {
                let c = g.centers[t];
                let a = sys.nearest_boundary_point(v2(c[0], c[1]));
                polyline.push([a.x, a.y, 0.0]);
            }
            polyline.extend(path.iter().map(|&v| g.centers[v]));
            let cubes: Vec<usize> = path.iter().copied().filter(|&v| v < w.cubes.len()).collect();
            witnesses.push(JohnWitness { target: g.centers[t], ratio: r, length, polyline, cubes });
            j_value = j_value.max(r);
        }
        taken = batch;
        if j_value >= lo * (1.0 - 1e-9) || taken >= order.len() {
            break;
        }
    }
    witnesses.sort_by(|a, b| {
        b.ratio
            .total_cmp(&a.ratio)
            .then(a.length.total_cmp(&b.length))
    });
    witnesses.truncate(10);
    let worst_start = witnesses[0].polyline[0];
    Ok(JohnEstimate {
        center: x0,
        j_value,
        worst_start,
        resolution: w.max_level,
        bracket: (lo, hi),
        target_count: g.targets.len(),
        witnesses,
    })
}

/// One audited boundary sample of the local John property.
#[derive(Debug, Clone)]
pub struct LocalJohnSample {
    pub z: [f64; 3],
    pub r: f64,
    pub x: [f64; 3],
    /// Fat point reached, when the sample passes.
    pub witness: Option<[f64; 3]>,
    /// Slack of the best reachable depth against the required r/J.
    pub margin: f64,
}

#[derive(Debug, Clone)]
pub struct LocalJohnReport {
    pub checked: usize,
    pub passed: usize,
    pub pass_fraction: f64,
    /// Sample with the least slack, failing samples first.
    pub worst: Option<LocalJohnSample>,
}

/// Arclength-indexed boundary sampler with inward directions.
pub(crate) struct BoundaryWalk {
    segs: Vec<(Vec2, Vec2, f64)>,
    pub(crate) total: f64,
}

impl BoundaryWalk {
    pub(crate) fn new(sys: &PolygonSystem) -> BoundaryWalk {
        let mut segs = Vec::new();
        let mut total = 0.0;
        for lp in sys.loops() {
            for i in 0..lp.len() {
                let a = lp[i];
                let b = lp[(i + 1) % lp.len()];
                let len = (b - a).norm();
                if len > 0.0 {
                    total += len;
                    segs.push((a, b, total));
                }
            }
        }
        BoundaryWalk { segs, total }
    }

    /// Point at arclength u, with the inward unit normal of its segment.
    pub(crate) fn at(&self, sys: &PolygonSystem, u: f64) -> (Vec2, Vec2) {
        let u = u.clamp(0.0, self.total * (1.0 - 1e-15));
        let k = self
            .segs
            .partition_point(|&(_, _, cum)| cum <= u);
        let (a, b, cum_end) = self.segs[k.min(self.segs.len() - 1)];
        let len = (b - a).norm();
        let local = u - (cum_end - len);
        let dir = (b - a) * (1.0 / len);
        let p = a + dir * local.clamp(0.0, len);
        // Loops are oriented with the domain on the left; probe to confirm
        // and flip when the orientation disagrees locally.
        let mut inward = v2(-dir.y, dir.x);
        let eps = 1e-6 * len.max(1e-9);
        if !sys.contains(p + inward * eps) && sys.contains(p - inward * eps) {
            inward = inward * -1.0;
        }
        (p, inward)
    }
}

fn segment_inside(domain: &GeomSet, a: [f64; 3], b: [f64; 3]) -> bool {
    match domain {
        GeomSet::Polygon(sys) => !sys.segment_crosses_boundary(v2(a[0], a[1]), v2(b[0], b[1])),
        GeomSet::Voxels(_) => {
            (1..8).all(|k| {
                let t = k as f64 / 8.0;
                let p = [
                    a[0] + (b[0] - a[0]) * t,
                    a[1] + (b[1] - a[1]) * t,
                    a[2] + (b[2] - a[2]) * t,
                ];
                domain.contains(p)
            })
        }
    }
}

/// Samples the local (J, s)-John property: for boundary points z, radii
/// r < s, and near-boundary starts x close to z, a fat point of depth at
/// least r/J must be reachable inside B_{Jr}(z) by a path whose running
/// length never exceeds J times the boundary distance.
pub fn local_john_check(
    domain: &GeomSet,
    j: f64,
    s: f64,
    w: &WhitneyDecomposition,
    samples: usize,
) -> Result<LocalJohnReport> {
    if j < 1.0 {
        return Err(Error::BadInput(format!("local John grade {j} below 1")));
    }
    let diam = match domain {
        GeomSet::Polygon(sys) => {
            let bb = sys.bbox();
            ((bb.hi.x - bb.lo.x).powi(2) + (bb.hi.y - bb.lo.y).powi(2)).sqrt()
        }
        GeomSet::Voxels(g) => {
            let e = g.extent();
            (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]).sqrt()
        }
    };
    if !(s > 0.0 && s <= diam) {
        return Err(Error::BadInput(format!(
            "scale {s} outside (0, {diam:.6}]"
        )));
    }
    let centers: Vec<[f64; 3]> = w.cubes.iter().map(|c| w.cube_center(c)).collect();
    let d: Vec<f64> = w.cubes.iter().map(|c| c.center_lo).collect();
    let adj = cube_adjacency(w, &centers, 0);

    let walk = match domain {
        GeomSet::Polygon(sys) => Some(BoundaryWalk::new(sys)),
        GeomSet::Voxels(_) => None,
    };
    let vox_boundary: Vec<[f64; 3]> = match domain {
        GeomSet::Voxels(g) => g.boundary_cell_centers(),
        GeomSet::Polygon(_) => Vec::new(),
    };

    let s_fin = w.side(w.max_level);
    // Radii below the grid scale are unresolvable by cube centers; floor
    // the sampled range at a few finest sides.
    let r_min = (8.0 * s_fin).min(0.5 * s);
    let mut rng = ChaCha8Rng::seed_from_u64(0x6a5eed);
    let mut checked = 0usize;
    let mut passed = 0usize;
    let mut worst: Option<LocalJohnSample> = None;

    for _ in 0..samples {
        let (z2, inward) = match (domain, &walk) {
            (GeomSet::Polygon(sys), Some(bw)) => {
                let u = rng.gen::<f64>() * bw.total;
                bw.at(sys, u)
            }
            _ => {
                let i = rng.gen_range(0..vox_boundary.len().max(1));
                let c = vox_boundary.get(i).copied().unwrap_or([0.0; 3]);
                (v2(c[0], c[1]), v2(0.0, 0.0))
            }
        };
        let z = [z2.x, z2.y, 0.0];
        let r = r_min * (s / r_min).powf(rng.gen::<f64>());

        // A start point in B_r(z) inside the domain: rejection first, then
        // a pullback along the inward normal for slivers.
        let mut x = None;
        for _ in 0..32 {
            let th = rng.gen::<f64>() * std::f64::consts::TAU;
            let rho = r * rng.gen::<f64>().sqrt();
            let p = [z[0] + rho * th.cos(), z[1] + rho * th.sin(), 0.0];
            if domain.contains(p) {
                x = Some(p);
                break;
            }
        }
        if x.is_none() {
            let mut t = 0.5 * r;
            for _ in 0..40 {
                let p = [z[0] + t * inward.x, z[1] + t * inward.y, 0.0];
                if domain.contains(p) {
                    x = Some(p);
                    break;
                }
                t *= 0.5;
            }
        }
        let Some(x) = x else { continue };
        checked += 1;

        let need = r / j;
        let dx = domain_dist_lo(domain, x);
        if dx >= need - 1e-12 {
            passed += 1;
            let m = dx - need;
            if worst.as_ref().map_or(true, |wst| m < wst.margin) {
                worst = Some(LocalJohnSample { z, r, x, witness: Some(x), margin: m });
            }
            continue;
        }

        // Any feasible path stays within length j^2 r of x, so the search
        // can ignore cubes beyond that ball around z.
        let ball = (j * j + 2.0) * r;
        let jr = j * r * (1.0 + 1e-9);
        let mut dist: HashMap<usize, f64> = HashMap::new();
        let mut heap: BinaryHeap<Reverse<(FloatOrd, usize)>> = BinaryHeap::new();
        for (i, c) in centers.iter().enumerate() {
            if edge_len(*c, z) > ball {
                continue;
            }
            let e = edge_len(x, *c);
            if e <= j * d[i] * (1.0 + 1e-12) && segment_inside(domain, x, *c) {
                dist.insert(i, e);
                heap.push(Reverse((FloatOrd(e), i)));
            }
        }
        let mut best: Option<(f64, usize)> = None;
        while let Some(Reverse((FloatOrd(l), v))) = heap.pop() {
            if dist.get(&v).copied().unwrap_or(f64::INFINITY) < l {
                continue;
            }
            if edge_len(centers[v], z) <= jr {
                let m = d[v] - need;
                if best.map_or(true, |(bm, _)| m > bm) {
                    best = Some((m, v));
                }
            }
            for &(nv, e) in &adj[v] {
                if edge_len(centers[nv], z) > ball {
                    continue;
                }
                let l2 = l + e;
                if l2 > j * d[nv] * (1.0 + 1e-12) {
                    continue;
                }
                if dist.get(&nv).map_or(true, |&cur| l2 < cur) {
                    dist.insert(nv, l2);
                    heap.push(Reverse((FloatOrd(l2), nv)));
                }
            }
        }
        let (margin, witness) = match best {
            Some((m, v)) if m >= -1e-12 => (m, Some(centers[v])),
            Some((m, _)) => (m, None),
            None => (-need, None),
        };
        if witness.is_some() {
            passed += 1;
        }
        if worst.as_ref().map_or(true, |wst| margin < wst.margin) {
            worst = Some(LocalJohnSample { z, r, x, witness, margin });
        }
    }
    Ok(LocalJohnReport {
        checked,
        passed,
        pass_fraction: passed as f64 / checked.max(1) as f64,
        worst,
    })
}

/// Polyline with per-vertex (arc length so far, boundary distance).
#[derive(Debug, Clone)]
pub struct JohnCurve {
    pub points: Vec<[f64; 3]>,
    pub witness: Vec<(f64, f64)>,
    pub max_ratio: f64,
}

fn measure_curve(points: Vec<[f64; 3]>, domain: &GeomSet) -> JohnCurve {
    let mut witness = Vec::with_capacity(points.len());
    let mut len = 0.0;
    let mut max_ratio = 0.0f64;
    for i in 0..points.len() {
        if i > 0 {
            len += edge_len(points[i - 1], points[i]);
        }
        let dist = domain_dist_lo(domain, points[i]);
        if len > 0.0 {
            max_ratio = max_ratio.max(if dist > 0.0 { len / dist } else { f64::INFINITY });
        }
        witness.push((len, dist));
    }
    JohnCurve { points, witness, max_ratio }
}

/// Dyadic depth of the escape search for points outside the shrunken
/// Wulff body.
const ESCAPE_LEVEL: u32 = 8;

/// Constructive John curve from z to the Wulff center for a set E
/// sandwiched between (1-delta)K and (1+delta)K.  Inside (1-2delta)K the
/// curve is the radial segment; outside, a graph-searched escape path
/// into the shrunken body is prepended.
pub fn john_curve_near_wulff(
    e: &GeomSet,
    k: &WulffShape,
    z: [f64; 3],
    delta: f64,
) -> Result<JohnCurve> {
    let n = e.dim();
    if n != 2 || k.dim() != 2 {
        return Err(Error::BadInput("sandwich curves are built in 2d".into()));
    }
    if !(delta > 0.0 && delta <= 1.0 / (6.0 * n as f64)) {
        return Err(Error::BadInput(format!(
            "delta {delta} outside (0, 1/(6 n)]"
        )));
    }
    let sys = match e {
        GeomSet::Polygon(sys) => sys,
        GeomSet::Voxels(_) => {
            return Err(Error::BadInput("sandwich curves need a polygon set".into()))
        }
    };
    let kverts = k.polygon().ok_or(Error::BadInput("2d Wulff shape required".into()))?;

    // Sandwich test by areas: a subset misses nothing of its own area.
    let tol = 1e-9 * sys.area().max(1.0);
    let inner: Vec<Vec2> = kverts.iter().map(|&p| p * (1.0 - delta)).collect();
    let inner_clip = ConvexClipper::from_polygon(&inner);
    let got = inner_clip.intersection_area(sys, v2(0.0, 0.0));
    if got < inner_clip.area - tol {
        return Err(Error::SandwichViolated {
            detail: format!(
                "(1-delta)K not inside E: overlap {got:.9} of {:.9}",
                inner_clip.area
            ),
        });
    }
    let outer: Vec<Vec2> = kverts.iter().map(|&p| p * (1.0 + delta)).collect();
    let outer_clip = ConvexClipper::from_polygon(&outer);
    let got = outer_clip.intersection_area(sys, v2(0.0, 0.0));
    if got < sys.area() - tol {
        return Err(Error::SandwichViolated {
            detail: format!(
                "E not inside (1+delta)K: overlap {got:.9} of {:.9}",
                sys.area()
            ),
        });
    }
    if !e.contains(z) {
        return Err(Error::PointOutside);
    }

    let z2 = v2(z[0], z[1]);
    if z2.norm() < 1e-15 {
        let d0 = domain_dist_lo(e, [0.0, 0.0, 0.0]);
        return Ok(JohnCurve {
            points: vec![[0.0, 0.0, 0.0]],
            witness: vec![(0.0, d0)],
            max_ratio: 1.0,
        });
    }

    let radial = |from: Vec2, points: &mut Vec<[f64; 3]>| {
        // Sampled radial run to the center; the gauge only shrinks along
        // it, so it stays inside the shrunken body once entered.
        for i in 1..=16 {
            let t = i as f64 / 16.0;
            let p = from * (1.0 - t);
            points.push([p.x, p.y, 0.0]);
        }
    };

    if k.gauge2(z2) <= 1.0 - 2.0 * delta {
        let mut points = vec![z];
        radial(z2, &mut points);
        return Ok(measure_curve(points, e));
    }

    // Escape leg: prefix-graded search from z into the shrunken body.
    let w = decompose(e, ESCAPE_LEVEL)?;
    let centers: Vec<[f64; 3]> = w.cubes.iter().map(|c| w.cube_center(c)).collect();
    let mut dvals: Vec<f64> = w.cubes.iter().map(|c| c.center_lo).collect();
    let mut adj = cube_adjacency(&w, &centers, 1);
    let z_node = w.cubes.len();
    let mut hosts = host_cubes(&w, z);
    if hosts.is_empty() {
        // z sits in the uncovered collar; enter through the closest cube
        // reachable by a straight segment.
        let mut best: Option<(f64, usize)> = None;
        for (i, c) in centers.iter().enumerate() {
            let l = edge_len(z, *c);
            if best.map_or(true, |(bl, _)| l < bl) && segment_inside(e, z, *c) {
                best = Some((l, i));
            }
        }
        hosts = match best {
            Some((_, i)) => vec![i],
            None => return Err(Error::Unreachable),
        };
    }
    for h in hosts {
        let el = edge_len(z, centers[h]);
        adj[z_node].push((h, el));
        adj[h].push((z_node, el));
    }
    dvals.push(domain_dist_lo(e, z));
    let shrunk = 1.0 - 2.0 * delta;
    let poly_centers = centers.clone();
    let found = prefix_search(&adj, &dvals, z_node, 0.0, |v| {
        v < poly_centers.len() && k.gauge2(v2(poly_centers[v][0], poly_centers[v][1])) <= shrunk
    });
    let Some((_, _, path)) = found else {
        return Err(Error::Unreachable);
    };
    let mut points = vec![z];
    points.extend(path.iter().skip(1).map(|&v| centers[v]));
    let last = *points.last().expect("escape path is nonempty");
    radial(v2(last[0], last[1]), &mut points);
    Ok(measure_curve(points, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anisotropy::WulffShape;
    use crate::geomset::polygon::PolygonSystem;
    use std::f64::consts::PI;

    fn circle_verts(m: usize, radius: impl Fn(f64) -> f64) -> Vec<Vec2> {
        (0..m)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / m as f64;
                let r = radius(t);
                v2(r * t.cos(), r * t.sin())
            })
            .collect()
    }

    fn disc_domain() -> GeomSet {
        GeomSet::Polygon(PolygonSystem::single(circle_verts(256, |_| 1.0)).unwrap())
    }

    fn square_domain() -> GeomSet {
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

    fn hexagon_domain() -> GeomSet {
        let verts: Vec<_> = (0..6)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / 6.0;
                v2(t.cos(), t.sin())
            })
            .collect();
        GeomSet::Polygon(PolygonSystem::single(verts).unwrap())
    }

    /// Open region between the parabola arcs y = x^2 and y = -x^2, with an
    /// outward cusp at the origin.
    fn cusp_domain() -> GeomSet {
        let m = 512;
        let mut verts = Vec::with_capacity(2 * m + 1);
        for i in 0..=m {
            let x = i as f64 / m as f64;
            verts.push(v2(x, -x * x));
        }
        for i in (1..=m).rev() {
            let x = i as f64 / m as f64;
            verts.push(v2(x, x * x));
        }
        GeomSet::Polygon(PolygonSystem::single(verts).unwrap())
    }

    fn john_at(dom: &GeomSet, x0: [f64; 3], level: u32) -> JohnEstimate {
        let w = decompose(dom, level).unwrap();
        estimate_john(dom, x0, &w).unwrap()
    }

    #[test]
    fn disc_from_center_is_nearly_ideal() {
        let est = john_at(&disc_domain(), [0.0, 0.0, 0.0], 10);
        assert!(est.j_value >= 1.0 - 1e-9);
        assert!(est.j_value <= 1.25, "j {}", est.j_value);
        assert!(!est.witnesses.is_empty());
        assert_eq!(est.resolution, 10);
        // The worst attach point sits on the unit circle.
        let ws = est.worst_start;
        assert!(((ws[0] * ws[0] + ws[1] * ws[1]).sqrt() - 1.0).abs() < 0.01);
    }

    #[test]
    fn witness_grades_replay_from_their_polylines() {
        let dom = disc_domain();
        let sys = match &dom {
            GeomSet::Polygon(s) => s,
            _ => unreachable!(),
        };
        let est = john_at(&dom, [0.0, 0.0, 0.0], 7);
        for wln in &est.witnesses {
            // polyline: attach, target center, ..., x0.  Grade = max over
            // interior vertices of (length from attach) / dist.
            let mut len = 0.0;
            let mut worst = 0.0f64;
            for i in 1..wln.polyline.len() {
                let (a, b) = (wln.polyline[i - 1], wln.polyline[i]);
                len += ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                let d = sys.dist_to_boundary(v2(b[0], b[1]));
                worst = worst.max(len / d);
            }
            assert!(
                (worst - wln.ratio).abs() <= 1e-9 * wln.ratio,
                "replayed {worst} stored {}",
                wln.ratio
            );
            // The curve grading never beats the domain constant.
            assert!(worst <= est.j_value + 1e-9);
        }
    }

    #[test]
    fn exact_value_lands_in_the_bisection_bracket() {
        for dom in [disc_domain(), square_domain()] {
            let x0 = match &dom {
                GeomSet::Polygon(sys) => {
                    let c = sys.barycenter();
                    [c.x, c.y, 0.0]
                }
                _ => unreachable!(),
            };
            let est = john_at(&dom, x0, 8);
            assert!(
                est.j_value >= est.bracket.0 * (1.0 - 1e-9)
                    && est.j_value <= est.bracket.1 * (1.0 + 1e-9),
                "j {} bracket {:?}",
                est.j_value,
                est.bracket
            );
        }
    }

    #[test]
    fn square_grade_tracks_the_corner_diagonal() {
        let est = john_at(&square_domain(), [0.5, 0.5, 0.0], 10);
        assert!(est.j_value <= 3.0, "j {}", est.j_value);
        // Straight-to-corner curves grade at sqrt(2); the graph estimate
        // must stay within 20 percent of that oracle.
        assert!(
            est.j_value <= 1.2 * std::f64::consts::SQRT_2,
            "j {}",
            est.j_value
        );
        let disc = john_at(&disc_domain(), [0.0, 0.0, 0.0], 10);
        assert!(disc.j_value < est.j_value);
    }

    #[test]
    fn cusp_grade_diverges_with_depth() {
        let dom = cusp_domain();
        let sys = match &dom {
            GeomSet::Polygon(s) => s,
            _ => unreachable!(),
        };
        let x0 = [0.5, 0.0, 0.0];
        let j8 = john_at(&dom, x0, 8);
        let j10 = john_at(&dom, x0, 10);
        let j12 = john_at(&dom, x0, 12);
        assert!(j8.j_value < j10.j_value && j10.j_value < j12.j_value);
        // At coarse depth the narrow corner wedges at (1, +-1) govern: any
        // curve from a wedge target must end at x0, so its grade is at
        // least the straight-line distance over dist(x0).
        let d0 = sys.dist_to_boundary(v2(0.5, 0.0));
        let t = j8.witnesses[0].target;
        let floor = ((t[0] - 0.5).powi(2) + t[1].powi(2)).sqrt() / d0;
        assert!(j8.j_value >= floor - 1e-9, "j8 {} floor {floor}", j8.j_value);
        assert!(t[0] > 0.9, "coarse worst target at {t:?}");
        // By depth 12 the tip overtakes the wedges and the grade departs
        // from the corner plateau.
        let t12 = j12.witnesses[0].target;
        assert!(t12[0] < 0.1, "deep worst target at {t12:?}");
        assert!(j12.j_value >= 1.3 * j8.j_value);
    }

    #[test]
    fn incenter_never_grades_worse_than_off_center() {
        let cases = [
            (disc_domain(), [0.0, 0.0, 0.0], [0.4, 0.0, 0.0]),
            (square_domain(), [0.5, 0.5, 0.0], [0.75, 0.6, 0.0]),
            (hexagon_domain(), [0.0, 0.0, 0.0], [0.3, 0.2, 0.0]),
        ];
        for (dom, inc, off) in cases {
            let ji = john_at(&dom, inc, 7).j_value;
            let jo = john_at(&dom, off, 7).j_value;
            assert!(ji <= jo + 1e-6, "incenter {ji} off {jo}");
        }
    }

    #[test]
    fn convex_bodies_respect_the_diameter_over_inradius_cap() {
        // (domain, diameter, inradius)
        let cases = [
            (disc_domain(), 2.0, 1.0),
            (square_domain(), std::f64::consts::SQRT_2, 0.5),
            (hexagon_domain(), 2.0, (3.0f64).sqrt() / 2.0),
        ];
        for (dom, diam, inr) in cases {
            let x0 = match &dom {
                GeomSet::Polygon(sys) => {
                    let c = sys.barycenter();
                    [c.x, c.y, 0.0]
                }
                _ => unreachable!(),
            };
            let est = john_at(&dom, x0, 8);
            assert!(
                est.j_value <= diam / inr + 0.25,
                "j {} cap {}",
                est.j_value,
                diam / inr + 0.25
            );
        }
    }

    #[test]
    fn estimates_are_deterministic() {
        let dom = disc_domain();
        let a = format!("{:?}", john_at(&dom, [0.1, 0.0, 0.0], 7));
        let b = format!("{:?}", john_at(&dom, [0.1, 0.0, 0.0], 7));
        assert_eq!(a, b);
    }

    #[test]
    fn center_outside_is_a_distinct_failure() {
        let dom = disc_domain();
        let w = decompose(&dom, 6).unwrap();
        assert!(matches!(
            estimate_john(&dom, [5.0, 5.0, 0.0], &w),
            Err(Error::CenterOutside)
        ));
    }

    #[test]
    fn split_domain_reports_disconnection() {
        let dom = GeomSet::Polygon(
            PolygonSystem::new(vec![
                vec![v2(0.0, 0.0), v2(1.0, 0.0), v2(1.0, 1.0), v2(0.0, 1.0)],
                vec![v2(3.0, 0.0), v2(4.0, 0.0), v2(4.0, 1.0), v2(3.0, 1.0)],
            ])
            .unwrap(),
        );
        let w = decompose(&dom, 7).unwrap();
        assert!(matches!(
            estimate_john(&dom, [0.5, 0.5, 0.0], &w),
            Err(Error::DisconnectedDomain)
        ));
    }

    #[test]
    fn disc_passes_the_local_audit_everywhere() {
        let dom = disc_domain();
        let w = decompose(&dom, 9).unwrap();
        let rep = local_john_check(&dom, 2.0, 0.5, &w, 300).unwrap();
        assert!(rep.checked >= 250);
        assert_eq!(rep.pass_fraction, 1.0, "worst {:?}", rep.worst);
    }

    #[test]
    fn cusp_fails_the_local_audit_near_the_tip() {
        let dom = cusp_domain();
        let w = decompose(&dom, 9).unwrap();
        let rep = local_john_check(&dom, 2.0, 0.5, &w, 400).unwrap();
        assert!(rep.pass_fraction < 1.0, "fraction {}", rep.pass_fraction);
        let wst = rep.worst.unwrap();
        assert!(wst.margin < 0.0);
    }

    #[test]
    fn sub_unit_grades_are_rejected() {
        let dom = disc_domain();
        let w = decompose(&dom, 6).unwrap();
        assert!(local_john_check(&dom, 0.9, 0.5, &w, 10).is_err());
    }

    fn disc_wulff() -> WulffShape {
        WulffShape::from_polygon(circle_verts(256, |_| 1.0)).unwrap()
    }

    #[test]
    fn radial_curve_grades_at_most_dimension() {
        let e = disc_domain();
        let k = disc_wulff();
        let c = john_curve_near_wulff(&e, &k, [0.5, 0.0, 0.0], 0.01).unwrap();
        assert!(c.max_ratio <= 2.0, "ratio {}", c.max_ratio);
        assert_eq!(c.points.len(), 17);
        let last = c.points.last().unwrap();
        assert!(last[0].abs() < 1e-12 && last[1].abs() < 1e-12);
        // Arclengths are nondecreasing and distances positive inside.
        for pair in c.witness.windows(2) {
            assert!(pair[1].0 >= pair[0].0);
        }
    }

    #[test]
    fn center_point_curve_is_degenerate() {
        let c = john_curve_near_wulff(&disc_domain(), &disc_wulff(), [0.0, 0.0, 0.0], 0.01)
            .unwrap();
        assert_eq!(c.points.len(), 1);
        assert_eq!(c.max_ratio, 1.0);
    }

    #[test]
    fn bumpy_disc_takes_a_two_piece_curve() {
        let delta = 1.0 / 12.0;
        let e = GeomSet::Polygon(
            PolygonSystem::single(circle_verts(512, |t| 1.0 + 0.5 * delta * (12.0 * t).cos()))
                .unwrap(),
        );
        let k = disc_wulff();
        let z = [1.0 - delta, 0.0, 0.0];
        let c = john_curve_near_wulff(&e, &k, z, delta).unwrap();
        // Escape leg plus radial leg.
        assert!(c.points.len() > 17);
        let w = decompose(&e, 8).unwrap();
        let j0 = estimate_john(&e, [0.0, 0.0, 0.0], &w).unwrap().j_value;
        assert!(
            c.max_ratio <= 3.0 * j0 + 2.0,
            "ratio {} vs 3 J0 + n = {}",
            c.max_ratio,
            3.0 * j0 + 2.0
        );
    }

    #[test]
    fn sandwich_violations_are_reported() {
        let e = GeomSet::Polygon(
            PolygonSystem::single(circle_verts(256, |_| 1.5)).unwrap(),
        );
        assert!(matches!(
            john_curve_near_wulff(&e, &disc_wulff(), [0.1, 0.0, 0.0], 0.01),
            Err(Error::SandwichViolated { .. })
        ));
        assert!(matches!(
            john_curve_near_wulff(&disc_domain(), &disc_wulff(), [3.0, 0.0, 0.0], 0.01),
            Err(Error::PointOutside)
        ));
    }
}
