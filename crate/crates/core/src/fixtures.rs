//! Named fixture corpus.  Every set, body, family, and field suite the
//! verification suites and the command line drive comes from here, so a
//! (name, seed) pair regenerates the exact geometry anywhere.

use crate::anisotropy::WulffShape;
use crate::error::{Error, Result};
use crate::geom::{v2, Vec2};
use crate::geomset::{GeomSet, PolygonSystem};
use crate::tracelab::AnalyticField;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

pub fn circle_verts(m: usize, radius: f64) -> Vec<Vec2> {
    (0..m)
        .map(|i| {
            let th = 2.0 * PI * i as f64 / m as f64;
            v2(radius * th.cos(), radius * th.sin())
        })
        .collect()
}

/// Regular m-gon body inscribed in the unit circle.
pub fn disc_body(m: usize) -> WulffShape {
    WulffShape::from_polygon(circle_verts(m, 1.0)).expect("regular polygon body")
}

/// Centered square body of half-width 1.
pub fn square_body() -> WulffShape {
    WulffShape::from_polygon(vec![v2(1.0, 1.0), v2(-1.0, 1.0), v2(-1.0, -1.0), v2(1.0, -1.0)])
        .expect("square body")
}

/// Regular hexagon body inscribed in the unit circle.
pub fn hexagon_body() -> WulffShape {
    WulffShape::from_polygon(circle_verts(6, 1.0)).expect("hexagon body")
}

/// Unit-circumradius 256-gon disc domain.
pub fn disc() -> GeomSet {
    GeomSet::Polygon(PolygonSystem::single(circle_verts(256, 1.0)).unwrap())
}

/// Unit square [0,1]^2.
pub fn square() -> GeomSet {
    GeomSet::Polygon(
        PolygonSystem::single(vec![v2(0.0, 0.0), v2(1.0, 0.0), v2(1.0, 1.0), v2(0.0, 1.0)])
            .unwrap(),
    )
}

/// L-shaped hallway: a 2x2 square missing its upper-right quadrant.
pub fn lshape() -> GeomSet {
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

/// Region between y = x^2 and y = -x^2 over [0,1], with an outward cusp at
/// the origin.  Not a John domain: chains to the tip must pass through
/// width ~ x^2 at distance x.
pub fn cusp() -> GeomSet {
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

pub fn hexagon() -> GeomSet {
    GeomSet::Polygon(PolygonSystem::single(circle_verts(6, 1.0)).unwrap())
}

/// Star-shaped polygon with seeded radial noise around the unit circle.
pub fn seeded_star(seed: u64, rays: usize, amplitude: f64) -> GeomSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let verts: Vec<Vec2> = (0..rays)
        .map(|i| {
            let th = 2.0 * PI * i as f64 / rays as f64;
            let r = 1.0 + rng.gen_range(-amplitude..=amplitude);
            v2(r * th.cos(), r * th.sin())
        })
        .collect();
    GeomSet::Polygon(PolygonSystem::single(verts).unwrap())
}

/// Ellipse with semi-axes (1 + 0.45 t, 1/(1 + 0.45 t)), sampled on the
/// standard ray fan and rescaled to the target volume.  The gauge spread
/// against the unit disc is 0.45 t on each side, so the t = 0.2 member
/// still fits a 0.1 sandwich after selection.
pub fn ellipse_on_rays(t: f64, rays: usize, target_vol: f64) -> GeomSet {
    let a = 1.0 + 0.45 * t;
    let verts: Vec<Vec2> = (0..rays)
        .map(|i| {
            let th = 2.0 * PI * i as f64 / rays as f64;
            let c = th.cos();
            let s = th.sin();
            let r = 1.0 / (c * c / (a * a) + s * s * a * a).sqrt();
            v2(r * c, r * s)
        })
        .collect();
    let sys = PolygonSystem::single(verts).unwrap();
    let s = (target_vol / sys.area()).sqrt();
    GeomSet::Polygon(sys.scaled(s))
}

/// Square boundary modulated by a cos(8 theta) radial bump, sampled on the
/// standard ray fan and rescaled to the target volume.
pub fn bumped_square_on_rays(amplitude: f64, rays: usize, target_vol: f64) -> GeomSet {
    let verts: Vec<Vec2> = (0..rays)
        .map(|i| {
            let th = 2.0 * PI * i as f64 / rays as f64;
            let d = v2(th.cos(), th.sin());
            let r_sq = 1.0 / d.x.abs().max(d.y.abs());
            d * (r_sq * (1.0 + amplitude * (8.0 * th).cos()))
        })
        .collect();
    let sys = PolygonSystem::single(verts).unwrap();
    let s = (target_vol / sys.area()).sqrt();
    GeomSet::Polygon(sys.scaled(s))
}

/// Twenty analytic fields spanning constants, linear ramps at varied slopes
/// and offsets, tent bumps at assorted centers and widths, and the boundary
/// distance.  Deterministic; drives the trace-constant stability checks.
pub fn trace_suite() -> Vec<AnalyticField> {
    let mut suite = vec![
        AnalyticField::Constant(1.0),
        AnalyticField::Constant(-3.5),
        AnalyticField::DistToBoundary,
    ];
    for k in 0..6 {
        let th = PI * k as f64 / 6.0;
        suite.push(AnalyticField::Linear {
            a: [th.cos(), th.sin()],
            b: 0.25 * k as f64 - 0.5,
        });
    }
    let centers = [
        [0.0, 0.0],
        [0.5, 0.0],
        [0.0, 0.5],
        [-0.4, -0.3],
        [0.3, -0.4],
        [0.6, 0.6],
        [0.25, 0.25],
        [0.75, 0.5],
        [0.5, 0.75],
        [0.1, 0.9],
        [0.9, 0.1],
    ];
    for (k, c) in centers.iter().enumerate() {
        suite.push(AnalyticField::RadialBump {
            center: *c,
            scale: 0.3 + 0.1 * (k % 4) as f64,
        });
    }
    debug_assert_eq!(suite.len(), 20);
    suite
}

/// Fixture lookup for the command line.  Star fixtures consume the seed;
/// the rest ignore it.
pub fn set_by_name(name: &str, seed: u64) -> Result<GeomSet> {
    match name {
        "disc" => Ok(disc()),
        "square" => Ok(square()),
        "lshape" => Ok(lshape()),
        "cusp" => Ok(cusp()),
        "hexagon" => Ok(hexagon()),
        "star" => Ok(seeded_star(seed, 64, 0.3)),
        other => Err(Error::BadInput(format!(
            "unknown fixture '{other}'; have disc, square, lshape, cusp, hexagon, star"
        ))),
    }
}

pub fn body_by_name(name: &str) -> Result<WulffShape> {
    match name {
        "disc" => Ok(disc_body(256)),
        "disc1024" => Ok(disc_body(1024)),
        "square" => Ok(square_body()),
        "hexagon" => Ok(hexagon_body()),
        other => Err(Error::BadInput(format!(
            "unknown body '{other}'; have disc, disc1024, square, hexagon"
        ))),
    }
}
