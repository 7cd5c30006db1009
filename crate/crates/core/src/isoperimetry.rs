//! Anisotropic perimeter, isoperimetric deficit, and asymmetry of a set
//! relative to a reference convex body K.
//!
//! The perimeter is the boundary integral of K's support function over
//! outward normals.  For K itself this equals n |K|, which pins the sharp
//! lower bound n |K|^{1/n} |E|^{(n-1)/n} used by the deficit.

use crate::anisotropy::WulffShape;
use crate::error::{Error, Result};
use crate::geom::{v2, Vec2};
use crate::geomset::polygon::{ConvexClipper, PolygonSystem};
use crate::geomset::GeomSet;
use serde::{Deserialize, Serialize};

pub fn anisotropic_perimeter(set: &GeomSet, k: &WulffShape) -> Result<f64> {
    if set.dim() != k.dim() {
        return Err(Error::BadInput(format!(
            "set dimension {} vs body dimension {}",
            set.dim(),
            k.dim()
        )));
    }
    let mesh = set.boundary_mesh();
    let mut total = 0.0;
    for f in &mesh.facets {
        total += k.support(&f.normal[..k.dim()]) * f.measure;
    }
    Ok(total)
}

/// P_K(E) - n |K|^{1/n} |E|^{(n-1)/n}; nonnegative up to quadrature noise.
pub fn wulff_margin(set: &GeomSet, k: &WulffShape) -> Result<f64> {
    let n = k.dim() as f64;
    let p = anisotropic_perimeter(set, k)?;
    let bound = n * k.volume.powf(1.0 / n) * set.volume().powf((n - 1.0) / n);
    Ok(p - bound)
}

/// P_K(E) / (n |K|^{1/n} |E|^{(n-1)/n}) - 1.
pub fn isoperimetric_deficit(set: &GeomSet, k: &WulffShape) -> Result<f64> {
    let n = k.dim() as f64;
    let p = anisotropic_perimeter(set, k)?;
    let bound = n * k.volume.powf(1.0 / n) * set.volume().powf((n - 1.0) / n);
    Ok(p / bound - 1.0)
}

/// Best-translate symmetric difference |E delta (x + K)| and its witness.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Asymmetry {
    pub value: f64,
    pub translate: Vec2,
}

/// Minimize the symmetric difference over translates of K.  Coarse grid
/// over the feasible offset box, then cyclic golden-section refinement.
pub fn asymmetry(set: &GeomSet, k: &WulffShape) -> Result<Asymmetry> {
    let sys = match set {
        GeomSet::Polygon(sys) => sys,
        GeomSet::Voxels(_) => {
            return Err(Error::BadInput(
                "translate search needs the polygon representation".into(),
            ))
        }
    };
    let kp = k
        .polygon()
        .ok_or_else(|| Error::BadInput("reference body is not planar".into()))?;
    let clip = ConvexClipper::from_polygon(kp);
    Ok(asymmetry_full(sys, &clip))
}

pub fn asymmetry_full(sys: &PolygonSystem, clip: &ConvexClipper) -> Asymmetry {
    let eb = sys.bbox();
    let kb = clip.bbox;
    let lo = eb.lo - kb.hi;
    let hi = eb.hi - kb.lo;
    let mut best = (f64::NEG_INFINITY, Vec2::ZERO);
    let steps = 20;
    for iy in 0..=steps {
        for ix in 0..=steps {
            let x = v2(
                lo.x + (hi.x - lo.x) * ix as f64 / steps as f64,
                lo.y + (hi.y - lo.y) * iy as f64 / steps as f64,
            );
            let a = clip.intersection_area(sys, x);
            if a > best.0 {
                best = (a, x);
            }
        }
    }
    // The barycenter offset is the natural candidate the grid can miss.
    let guess = sys.barycenter() - clip_centroid(clip);
    let a = clip.intersection_area(sys, guess);
    if a > best.0 {
        best = (a, guess);
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y) / steps as f64;
    refine_from(sys, clip, best.1, span)
}

/// Golden-section descent from a known-good translate; used on its own
/// when a previous solution seeds the search.
pub fn refine_asymmetry(sys: &PolygonSystem, clip: &ConvexClipper, seed: Vec2) -> Asymmetry {
    let scale = (clip.bbox.hi - clip.bbox.lo).norm();
    refine_from(sys, clip, seed, 0.25 * scale)
}

fn refine_from(sys: &PolygonSystem, clip: &ConvexClipper, start: Vec2, span0: f64) -> Asymmetry {
    let overlap = |x: Vec2| clip.intersection_area(sys, x);
    let mut x = start;
    let mut span = span0;
    let tol = 1e-7 * span0.max(1e-9);
    for _ in 0..24 {
        for axis in 0..2 {
            let dir = if axis == 0 { v2(1.0, 0.0) } else { v2(0.0, 1.0) };
            let t = golden_max(|t| overlap(x + dir * t), -span, span);
            x = x + dir * t;
        }
        span *= 0.55;
        if span < tol {
            break;
        }
    }
    let value = sys.area() + clip.area - 2.0 * overlap(x);
    Asymmetry { value: value.max(0.0), translate: x }
}

/// One-dimensional golden-section maximization on [a, b].
fn golden_max(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (a, b);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..32 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

fn clip_centroid(clip: &ConvexClipper) -> Vec2 {
    (clip.bbox.lo + clip.bbox.hi) / 2.0
}

/// Deficit-to-asymmetry-squared ratio after renormalizing E to K's volume.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QwiReport {
    pub perimeter: f64,
    /// P_K(E') - n |K| for the renormalized set E'.
    pub excess: f64,
    pub asymmetry: f64,
    pub translate: Vec2,
    pub ratio: f64,
}

pub fn qwi_ratio(set: &GeomSet, k: &WulffShape) -> Result<QwiReport> {
    let sys = match set {
        GeomSet::Polygon(sys) => sys,
        GeomSet::Voxels(_) => {
            return Err(Error::BadInput(
                "ratio evaluation needs the polygon representation".into(),
            ))
        }
    };
    let n = k.dim() as f64;
    let lambda = (k.volume / sys.area()).powf(1.0 / n);
    let scaled_set = GeomSet::Polygon(sys.scaled(lambda));
    let perimeter = anisotropic_perimeter(&scaled_set, k)?;
    let excess = perimeter - n * k.volume;
    let asym = asymmetry(&scaled_set, k)?;
    let floor = 1e-6 * k.volume;
    if asym.value < floor {
        return Err(Error::DegenerateAsymmetry { value: asym.value, floor });
    }
    Ok(QwiReport {
        perimeter,
        excess,
        asymmetry: asym.value,
        translate: asym.translate,
        ratio: excess / (asym.value * asym.value),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomset::polygon;
    use crate::anisotropy::normalize_shape;
    use std::f64::consts::PI;

    fn hexagon(r: f64) -> WulffShape {
        let verts: Vec<_> = (0..6)
            .map(|i| {
                let t = PI * i as f64 / 3.0;
                v2(r * t.cos(), r * t.sin())
            })
            .collect();
        WulffShape::from_polygon(verts).unwrap()
    }

    fn disc_body(m: usize) -> WulffShape {
        let verts: Vec<_> = (0..m)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / m as f64;
                v2(t.cos(), t.sin())
            })
            .collect();
        WulffShape::from_polygon(verts).unwrap()
    }

    fn square(side: f64) -> GeomSet {
        let s = side / 2.0;
        GeomSet::Polygon(
            PolygonSystem::single(vec![v2(-s, -s), v2(s, -s), v2(s, s), v2(-s, s)]).unwrap(),
        )
    }

    #[test]
    fn disc_reference_recovers_euclidean_perimeter() {
        let k = disc_body(1024);
        let p = anisotropic_perimeter(&square(2.0), &k).unwrap();
        assert!((p - 8.0).abs() < 1e-4 * 8.0, "p {p}");
    }

    #[test]
    fn hexagon_reference_on_square_matches_hand_value() {
        // Support of the radius-r hexagon: r along the x axis, r sqrt(3)/2
        // along y; each side of the square contributes support * 2.
        let r = 0.8;
        let k = hexagon(r);
        let p = anisotropic_perimeter(&square(2.0), &k).unwrap();
        let hand = 2.0 * (2.0 * r + 2.0 * r * 3.0f64.sqrt() / 2.0);
        assert!((p - hand).abs() < 1e-12 * hand, "p {p} hand {hand}");
    }

    #[test]
    fn body_against_itself_sits_on_the_sharp_bound() {
        for k in [hexagon(1.0), disc_body(64)] {
            let set = GeomSet::Polygon(
                PolygonSystem::single(k.polygon().unwrap().to_vec()).unwrap(),
            );
            let d = isoperimetric_deficit(&set, &k).unwrap();
            assert!(d.abs() < 1e-12, "deficit {d}");
            // Dilation does not move the deficit.
            let set2 = GeomSet::Polygon(
                PolygonSystem::single(k.polygon().unwrap().to_vec())
                    .unwrap()
                    .scaled(3.7),
            );
            let d2 = isoperimetric_deficit(&set2, &k).unwrap();
            assert!(d2.abs() < 1e-12, "deficit {d2}");
        }
    }

    #[test]
    fn square_deficit_against_disc_is_the_classical_gap() {
        // 8 / (2 sqrt(pi) * 2) - 1 for the side-2 square against the unit
        // disc, up to the 1024-gon's area defect.
        let k = normalize_shape(&disc_body(1024)).unwrap();
        let d = isoperimetric_deficit(&square(2.0), &k).unwrap();
        let expect = 2.0 / PI.sqrt() - 1.0;
        assert!((d - expect).abs() < 1e-3, "d {d} expect {expect}");
    }

    /// Exhaustive translate grid; same minimum problem, different search
    /// path and different intersection routine.
    fn brute_asymmetry(sys: &PolygonSystem, k: &WulffShape) -> f64 {
        let kp = PolygonSystem::single(k.polygon().unwrap().to_vec()).unwrap();
        let eb = sys.bbox();
        let c0 = sys.barycenter() - kp.barycenter();
        let span = (eb.hi - eb.lo).norm() / 2.0;
        let mut best = f64::INFINITY;
        let steps = 40;
        for iy in 0..=steps {
            for ix in 0..=steps {
                let x = c0
                    + v2(
                        span * (2.0 * ix as f64 / steps as f64 - 1.0),
                        span * (2.0 * iy as f64 / steps as f64 - 1.0),
                    );
                let inter = polygon::intersection_area(sys, &kp.translated(x));
                best = best.min(sys.area() + kp.area() - 2.0 * inter);
            }
        }
        best
    }

    #[test]
    fn translate_search_beats_the_brute_grid() {
        let k = hexagon(1.0);
        for set in [
            square(1.7),
            GeomSet::Polygon(
                PolygonSystem::single(vec![
                    v2(0.3, -0.9),
                    v2(1.4, -0.2),
                    v2(1.1, 1.0),
                    v2(-0.2, 1.3),
                    v2(-0.8, 0.1),
                ])
                .unwrap(),
            ),
        ] {
            let sys = match &set {
                GeomSet::Polygon(s) => s,
                _ => unreachable!(),
            };
            let got = asymmetry(&set, &k).unwrap();
            let brute = brute_asymmetry(sys, &k);
            assert!(
                got.value <= brute + 1e-4 * k.volume,
                "search {} vs grid {}",
                got.value,
                brute
            );
        }
    }

    #[test]
    fn nested_dilate_asymmetry_is_the_volume_gap() {
        // K convex and E = lambda K nest, so the optimum is containment.
        let k = hexagon(1.0);
        let lambda: f64 = 1.2;
        let set = GeomSet::Polygon(
            PolygonSystem::single(k.polygon().unwrap().to_vec())
                .unwrap()
                .scaled(lambda),
        );
        let a = asymmetry(&set, &k).unwrap();
        let expect = (lambda * lambda - 1.0) * k.volume;
        assert!((a.value - expect).abs() < 1e-5 * k.volume, "a {} expect {expect}", a.value);
    }

    #[test]
    fn translation_leaves_asymmetry_alone() {
        let k = hexagon(1.0);
        let base = PolygonSystem::single(vec![
            v2(0.3, -0.9),
            v2(1.4, -0.2),
            v2(1.1, 1.0),
            v2(-0.2, 1.3),
            v2(-0.8, 0.1),
        ])
        .unwrap();
        let a0 = asymmetry(&GeomSet::Polygon(base.clone()), &k).unwrap();
        let a1 = asymmetry(&GeomSet::Polygon(base.translated(v2(13.0, -7.5))), &k).unwrap();
        assert!((a0.value - a1.value).abs() < 1e-6 * k.volume);
    }

    #[test]
    fn ratio_floors_out_on_the_body_itself() {
        let k = hexagon(1.0);
        let set = GeomSet::Polygon(
            PolygonSystem::single(k.polygon().unwrap().to_vec()).unwrap(),
        );
        assert!(matches!(
            qwi_ratio(&set, &k),
            Err(Error::DegenerateAsymmetry { .. })
        ));
    }

    #[test]
    fn ratio_is_scale_invariant_and_positive_off_the_optimum() {
        let k = hexagon(1.0);
        let set = square(1.0);
        let r1 = qwi_ratio(&set, &k).unwrap();
        let r2 = qwi_ratio(&square(2.9), &k).unwrap();
        assert!(r1.ratio > 0.0);
        assert!((r1.ratio - r2.ratio).abs() < 1e-3 * r1.ratio.abs(), "{} {}", r1.ratio, r2.ratio);
        assert!(r1.excess > 0.0);
    }
}
