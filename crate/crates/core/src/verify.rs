//! Verification suites.  The acceptance tests and the command line both run
//! these, so a green `verify` run and a green test run mean the same thing.
//!
//! Every tolerance is pinned here, next to the check it guards.  A criterion
//! that fails reports the measured numbers instead of a bare boolean.

use crate::error::{Error, Result};
use crate::fixtures;
use crate::geomset::GeomSet;
use crate::isoperimetry::{anisotropic_perimeter, asymmetry, qwi_ratio, wulff_margin};
use crate::johnmetric::{estimate_john, BoundaryWalk};
use crate::selection::{dilate_scan, solve_selection, SelectionProblem, JOHN_CAP};
use crate::tracelab::{chain_sum_bound_with, trace_constant, AnalyticField, ChainSet};
use crate::whitney::decompose;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::fmt::Write as _;

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "{} ... {} — {}",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

pub const SUITES: [&str; 7] = ["wulff", "whitney", "john", "trace", "qwi", "selection", "all"];

/// Run one named suite.  "all" chains every criterion in order.
pub fn run_suite(suite: &str) -> Result<Vec<CriterionReport>> {
    match suite {
        "wulff" => Ok(vec![wulff_equality(), wulff_inequality()]),
        "whitney" => Ok(vec![whitney_exactness()]),
        "john" => Ok(vec![john_discrimination()]),
        "trace" => Ok(vec![trace_behavior()]),
        "qwi" => Ok(vec![asymmetry_oracle(), qwi_positivity()]),
        "selection" => Ok(vec![selection_pipeline()]),
        "all" => {
            let mut out = Vec::new();
            for s in ["wulff", "whitney", "john", "trace", "qwi", "selection"] {
                out.extend(run_suite(s)?);
            }
            Ok(out)
        }
        other => Err(Error::UnknownSuite(other.into())),
    }
}

/// Perimeter of each body against itself lands on n|K|.
pub fn wulff_equality() -> CriterionReport {
    let bodies = [
        ("disc1024", fixtures::disc_body(1024)),
        ("square", fixtures::square_body()),
        ("hexagon", fixtures::hexagon_body()),
    ];
    let mut detail = String::new();
    let mut passed = true;
    for (name, k) in bodies {
        let own = GeomSet::Polygon(
            crate::geomset::PolygonSystem::single(k.polygon().unwrap().to_vec()).unwrap(),
        );
        let per = anisotropic_perimeter(&own, &k).unwrap();
        let rel = (per - 2.0 * k.volume).abs() / (2.0 * k.volume);
        passed &= rel <= 1e-3;
        let _ = write!(detail, "{name}: rel {rel:.2e}; ");
    }
    CriterionReport { name: "1 wulff equality", passed, detail }
}

/// The Wulff inequality holds on seeded star polygons up to fp slack.
pub fn wulff_inequality() -> CriterionReport {
    let bodies = [("disc", fixtures::disc_body(256)), ("square", fixtures::square_body())];
    let mut detail = String::new();
    let mut passed = true;
    for (name, k) in bodies {
        let floor = -1e-6 * 2.0 * k.volume;
        let mut min_margin = f64::INFINITY;
        for i in 0..1000u64 {
            let e = fixtures::seeded_star(0x57a6 + i, 64, 0.3);
            let m = wulff_margin(&e, &k).unwrap();
            min_margin = min_margin.min(m);
        }
        passed &= min_margin >= floor;
        let _ = write!(detail, "{name}: min margin {min_margin:.3e} (floor {floor:.1e}); ");
    }
    CriterionReport { name: "2 wulff inequality", passed, detail }
}

/// Largest observed 11/10-dilate multiplicity per domain at level 10, frozen
/// as a regression value.
const FROZEN_MULTIPLICITY: [(&str, u32); 4] =
    [("square", 4), ("disc", 4), ("lshape", 4), ("cusp", 4)];

pub fn whitney_exactness() -> CriterionReport {
    let domains = [
        ("square", fixtures::square()),
        ("disc", fixtures::disc()),
        ("lshape", fixtures::lshape()),
        ("cusp", fixtures::cusp()),
    ];
    let sqrt_n = 2.0f64.sqrt();
    let mut detail = String::new();
    let mut passed = true;
    for ((name, dom), (fname, frozen)) in domains.iter().zip(FROZEN_MULTIPLICITY) {
        assert_eq!(*name, fname);
        let w = decompose(dom, 10).unwrap();
        let mut bracket_ok = 0usize;
        for c in &w.cubes {
            let s = w.side(c.level);
            if c.dist_lo >= sqrt_n * s - 1e-12 && c.dist_hi <= 4.0 * sqrt_n * s * (1.0 + 1e-9) {
                bracket_ok += 1;
            }
        }
        let mut ratio_ok = true;
        for (a, b) in w.touching_pairs() {
            let r = w.side(w.cubes[a].level) / w.side(w.cubes[b].level);
            ratio_ok &= (0.25 - 1e-12..=4.0 + 1e-12).contains(&r);
        }
        let vol = dom.volume();
        let coverage = (w.total_cube_volume() + w.uncovered - vol).abs() / vol;
        let mult = w.overlap_multiplicity(1.1, 20_000, 7);
        let ok = bracket_ok == w.cubes.len() && ratio_ok && coverage <= 1e-9 && mult == frozen;
        passed &= ok;
        let _ = write!(
            detail,
            "{name}: bracket {}/{}, ratios {}, coverage {:.1e}, mult {} (frozen {}); ",
            bracket_ok,
            w.cubes.len(),
            ratio_ok,
            coverage,
            mult,
            frozen
        );
    }
    CriterionReport { name: "3 whitney exactness", passed, detail }
}

pub fn john_discrimination() -> CriterionReport {
    let disc = fixtures::disc();
    let wd = decompose(&disc, 10).unwrap();
    let j_disc = estimate_john(&disc, [0.0, 0.0, 0.0], &wd).unwrap().j_value;
    let square = fixtures::square();
    let ws = decompose(&square, 10).unwrap();
    let j_square = estimate_john(&square, [0.5, 0.5, 0.0], &ws).unwrap().j_value;
    let cusp = fixtures::cusp();
    let mut j_cusp = Vec::new();
    for level in [8u32, 10, 12] {
        let w = decompose(&cusp, level).unwrap();
        j_cusp.push(estimate_john(&cusp, [0.5, 0.0, 0.0], &w).unwrap().j_value);
    }
    let disc_ok = (1.0..=1.25).contains(&j_disc);
    let square_ok = j_square <= 3.0;
    let increasing = j_cusp[0] < j_cusp[1] && j_cusp[1] < j_cusp[2];
    let growth = j_cusp[2] / j_cusp[0];
    // The growth clause stays red: curves from the 26.57-degree corner
    // wedges at (1, +-1) already need grade ~5.1 at every level, and that
    // floor masks the tip divergence until past level 12.
    let growth_ok = growth >= 2.0;
    CriterionReport {
        name: "4 john discrimination",
        passed: disc_ok && square_ok && increasing && growth_ok,
        detail: format!(
            "disc {j_disc:.4} in [1,1.25]: {disc_ok}; square {j_square:.3} <= 3: {square_ok}; \
             cusp {:.3}/{:.3}/{:.3} increasing: {increasing}; growth {growth:.2} >= 2: {growth_ok}",
            j_cusp[0], j_cusp[1], j_cusp[2]
        ),
    }
}

/// Optimized asymmetry against a brute-force translate grid.
pub fn asymmetry_oracle() -> CriterionReport {
    let k = fixtures::disc_body(256);
    let clip = crate::geomset::ConvexClipper::from_polygon(k.polygon().unwrap());
    let kvol = k.volume;
    let step = kvol.sqrt() / 200.0;
    let half = 0.2 * kvol.sqrt();
    let n_steps = (half / step).ceil() as i64;
    let mut worst = 0.0f64;
    let mut passed = true;
    for i in 0..50u64 {
        let e = fixtures::seeded_star(0xa5f + i, 48, 0.15);
        let GeomSet::Polygon(sys) = &e else { unreachable!() };
        let opt = asymmetry(&e, &k).unwrap().value;
        let b = sys.barycenter();
        let mut best = f64::INFINITY;
        for ix in -n_steps..=n_steps {
            for iy in -n_steps..=n_steps {
                let t = crate::geom::v2(b.x + ix as f64 * step, b.y + iy as f64 * step);
                let ov = clip.intersection_area(sys, t);
                best = best.min(sys.area() + kvol - 2.0 * ov);
            }
        }
        let diff = (opt - best).abs();
        worst = worst.max(diff);
        passed &= diff <= 1e-3 * kvol;
    }
    CriterionReport {
        name: "5 asymmetry oracle",
        passed,
        detail: format!("50 seeded stars, worst |optimizer - grid| = {worst:.2e} (cap {:.1e})", 1e-3 * kvol),
    }
}

pub fn trace_behavior() -> CriterionReport {
    let mut detail = String::new();
    let mut passed = true;

    // Coordinate trace on the disc.
    let disc = fixtures::disc();
    let w9 = decompose(&disc, 9).unwrap();
    let rep = trace_constant(
        &disc,
        &[AnalyticField::Linear { a: [1.0, 0.0], b: 0.0 }],
        &w9,
        [0.0, 0.0, 0.0],
        2000,
    )
    .unwrap();
    let target = 4.0 / PI;
    let ok = (rep.c_emp / target - 1.0).abs() <= 0.02;
    passed &= ok;
    let _ = write!(detail, "disc x1 ratio {:.4} vs 4/pi ({ok}); ", rep.c_emp);

    // Stability of the 20-field constant across refinement.
    let suite = fixtures::trace_suite();
    for (name, dom, x0) in [
        ("disc", fixtures::disc(), [0.0, 0.0, 0.0]),
        ("square", fixtures::square(), [0.5, 0.5, 0.0]),
    ] {
        let mut c = [0.0f64; 2];
        for (slot, level) in [(0usize, 8u32), (1, 10)] {
            let w = decompose(&dom, level).unwrap();
            c[slot] = trace_constant(&dom, &suite, &w, x0, 800).unwrap().c_emp;
        }
        let drift = (c[1] / c[0] - 1.0).abs();
        let ok = drift <= 0.10;
        passed &= ok;
        let _ = write!(detail, "{name} c_emp {:.4}->{:.4} drift {:.3} ({ok}); ", c[0], c[1], drift);
    }

    // Concentrating family at the cusp tip.
    let cusp = fixtures::cusp();
    let w11 = decompose(&cusp, 11).unwrap();
    let mut ratios = Vec::new();
    for j in 2..=4u32 {
        let field = AnalyticField::RadialBump {
            center: [0.0, 0.0],
            scale: 1.0 / f64::powi(2.0, j as i32),
        };
        let rep = trace_constant(&cusp, &[field], &w11, [0.5, 0.0, 0.0], 3000).unwrap();
        ratios.push(rep.c_emp);
    }
    let ok = ratios[0] < ratios[1] && ratios[1] < ratios[2];
    passed &= ok;
    let _ = write!(
        detail,
        "cusp ratios {:.2}/{:.2}/{:.2} increasing ({ok}); ",
        ratios[0], ratios[1], ratios[2]
    );

    // Chain-bound soundness at seeded boundary points.
    let fields = [
        AnalyticField::Linear { a: [1.0, 0.0], b: 0.0 },
        AnalyticField::Linear { a: [0.3, -0.8], b: 0.2 },
        AnalyticField::RadialBump { center: [0.3, 0.4], scale: 0.5 },
        AnalyticField::DistToBoundary,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0xb0d4);
    let mut sound = true;
    for (dom, x0) in [
        (fixtures::disc(), [0.0, 0.0, 0.0]),
        (fixtures::square(), [0.5, 0.5, 0.0]),
        (fixtures::cusp(), [0.5, 0.0, 0.0]),
    ] {
        let w = decompose(&dom, 8).unwrap();
        let cs = ChainSet::new(&dom, &w, x0).unwrap();
        let GeomSet::Polygon(sys) = &dom else { unreachable!() };
        let walk = BoundaryWalk::new(sys);
        let samples: Vec<[f64; 3]> = (0..100)
            .map(|_| {
                let (p, _) = walk.at(sys, rng.gen_range(0.0..1.0) * walk.total);
                [p.x, p.y, 0.0]
            })
            .collect();
        for spec in &fields {
            let u = spec.sample(&dom, &w);
            for &x in &samples {
                let Ok(ch) = cs.chain(&dom, &w, x) else { continue };
                let tu = u.cube_averages[*ch.cubes.last().unwrap()];
                let base = u.cube_averages[ch.cubes[0]];
                let bound = chain_sum_bound_with(&cs, &u, &dom, &w, x).unwrap();
                sound &= (tu - base).abs() <= bound + 1e-6 * u.sup_abs.max(1.0);
            }
        }
    }
    passed &= sound;
    let _ = write!(detail, "chain bound sound at 3x100 points: {sound}");

    CriterionReport { name: "6 trace constants", passed, detail }
}

pub fn qwi_positivity() -> CriterionReport {
    let k = fixtures::disc_body(256);
    let mut ratios = Vec::new();
    for &t in &[0.2, 0.1, 0.05, 0.025] {
        let e = fixtures::ellipse_on_rays(t, 256, k.volume);
        ratios.push(qwi_ratio(&e, &k).unwrap().ratio);
    }
    let inf = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let sup = ratios.iter().cloned().fold(0.0f64, f64::max);
    let passed = inf > 0.0 && sup / inf <= 2.0;
    CriterionReport {
        name: "7 qwi positivity",
        passed,
        detail: format!(
            "ellipse family ratios {:?}, inf {:.4}, spread {:.3}",
            ratios.iter().map(|r| (r * 1e4).round() / 1e4).collect::<Vec<_>>(),
            inf,
            sup / inf
        ),
    }
}

pub fn selection_pipeline() -> CriterionReport {
    let mut detail = String::new();
    let mut passed = true;

    let disc = fixtures::disc_body(128);
    let square = fixtures::square_body();
    let mut runs: Vec<(String, SelectionProblem)> = Vec::new();
    for &t in &[0.2, 0.1, 0.05, 0.025] {
        let e = fixtures::ellipse_on_rays(t, 128, disc.volume);
        runs.push((format!("ellipse {t}"), SelectionProblem::new(e, disc.clone()).unwrap()));
    }
    for &a in &[0.08, 0.04, 0.02, 0.01] {
        let e = fixtures::bumped_square_on_rays(a, 128, square.volume);
        runs.push((format!("bump {a}"), SelectionProblem::new(e, square.clone()).unwrap()));
    }
    for (label, problem) in &runs {
        let res = solve_selection(problem).unwrap();
        let kvol = problem.shape.volume;
        let energy_ok = res.energies.total <= res.energies.input_total + 1e-6;
        let vol_ok = (res.minimizer.volume() - kvol).abs() <= 1e-9 * kvol;
        let bary = match &res.minimizer {
            GeomSet::Polygon(sys) => sys.barycenter().norm(),
            _ => unreachable!(),
        };
        let bary_ok = bary <= 1e-6;
        let sandwich_ok = res.checks.sandwich_delta <= 0.1;
        let spot_ok = res.checks.minimality_pass_fraction == 1.0;
        let j_ok = res.checks.j_estimate <= JOHN_CAP;
        let ok = energy_ok && vol_ok && bary_ok && sandwich_ok && spot_ok && j_ok;
        passed &= ok;
        let _ = write!(
            detail,
            "{label}: dE {:.1e}, sandwich {:.3}, spot {:.2}, J {:.2} ({ok}); ",
            res.energies.total - res.energies.input_total,
            res.checks.sandwich_delta,
            res.checks.minimality_pass_fraction,
            res.checks.j_estimate
        );
    }

    let (r_hi, _) = dilate_scan(2, 3.0);
    let (r_lo, _) = dilate_scan(2, 1.5);
    let scan_ok = (r_hi - 1.0).abs() <= 1e-6 && (r_lo - 1.0).abs() > 0.5;
    passed &= scan_ok;
    let _ = write!(detail, "dilate scan argmins {r_hi:.6}/{r_lo:.6} ({scan_ok})");

    CriterionReport { name: "8 selection pipeline", passed, detail }
}
