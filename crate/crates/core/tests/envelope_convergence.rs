use std::f64::consts::{FRAC_PI_2, TAU};
use wallace_core::curves::{hypocycloid_point, HypocycloidSpec};
use wallace_core::envelope::{build_family, detect_cusps, envelope_points};
use wallace_core::fitting::{fit_hypocycloid, verify_claim};
use wallace_core::geometry::{Circle, Point};
use wallace_core::simson::InscribedPolygon;

fn triangle() -> InscribedPolygon {
    InscribedPolygon::regular(Circle::unit(), 3, FRAC_PI_2).unwrap()
}

/// Distance from `p` to the curve: every discrete local minimum of a dense
/// sampling is refined by ternary search. Near a cusp the two branches are
/// closer than the sample spacing, so refining only the nearest sample can
/// land on the wrong branch.
fn distance_to_curve(spec: &HypocycloidSpec, p: Point) -> f64 {
    let n = 20_000;
    let h = TAU / n as f64;
    let d = |t: f64| hypocycloid_point(spec, t).distance(p);
    let samples: Vec<f64> = (0..n).map(|i| d(h * i as f64)).collect();
    let mut best = f64::INFINITY;
    for i in 0..n {
        let (prev, next) = (samples[(i + n - 1) % n], samples[(i + 1) % n]);
        if samples[i] > prev || samples[i] > next {
            continue;
        }
        let (mut lo, mut hi) = (h * i as f64 - h, h * i as f64 + h);
        for _ in 0..100 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if d(m1) < d(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        best = best.min(samples[i]).min(d(0.5 * (lo + hi)));
    }
    best
}

#[test]
fn equilateral_envelope_converges_monotonically() {
    // the deltoid of the unit-circle equilateral triangle: R = 3/2, cusp at the top
    let exact = HypocycloidSpec::new(Point::ORIGIN, 1.5, 3, FRAC_PI_2).unwrap();
    let mut previous = f64::INFINITY;
    for samples in [90, 180, 360, 720, 1440] {
        let family = build_family(&triangle(), samples).unwrap();
        let trace = envelope_points(&family).unwrap();
        let worst = trace.points.iter().map(|&p| distance_to_curve(&exact, p)).fold(0.0, f64::max);
        assert!(worst < 0.5 * previous, "{samples}: {worst:e} did not halve {previous:e}");
        previous = worst;
    }
    assert!(previous < 2e-8, "{previous:e}");
}

#[test]
fn family_and_trace_are_deterministic() {
    let poly = InscribedPolygon::new(Circle::unit(), [0.0, 1.2, 2.9, 4.4, 5.1]).unwrap();
    let a = build_family(&poly, 500).unwrap();
    let b = build_family(&poly, 500).unwrap();
    assert_eq!(a, b);
    let ta = envelope_points(&a).unwrap();
    assert_eq!(ta, envelope_points(&b).unwrap());
    assert_eq!(detect_cusps(&ta), detect_cusps(&envelope_points(&b).unwrap()));
}

#[test]
fn fit_scales_with_the_scene() {
    let base = verify_claim(&triangle(), 3, 720).unwrap();
    for s in [0.01, 7.5, 400.0] {
        let poly = InscribedPolygon::regular(Circle::new(Point::ORIGIN, s).unwrap(), 3, FRAC_PI_2).unwrap();
        let scaled = verify_claim(&poly, 3, 720).unwrap();
        assert!(scaled.passed);
        assert!((scaled.spec.fixed_radius / s - base.spec.fixed_radius).abs() <= 1e-9, "s = {s}");
        assert!((scaled.max_dev / s - base.max_dev).abs() <= 1e-9 + 1e-3 * base.max_dev, "s = {s}");
        assert!((scaled.rms / s - base.rms).abs() <= 1e-9 + 1e-3 * base.rms, "s = {s}");
        assert!(scaled.spec.center.norm() <= 1e-4 * scaled.spec.fixed_radius);
    }
}

#[test]
fn translated_scene_moves_the_fit() {
    let shift = Point::new(-3.25, 12.0);
    let poly = InscribedPolygon::regular(Circle::new(shift, 2.0).unwrap(), 4, 0.3).unwrap();
    let report = verify_claim(&poly, 4, 720).unwrap();
    assert!(report.passed, "{}", report.notes);
    assert!(report.spec.center.distance(shift) <= 1e-4 * report.spec.fixed_radius);
    assert!((report.spec.fixed_radius - 3.0).abs() <= 1e-4 * 3.0, "{}", report.spec.fixed_radius);
}

#[test]
fn irregular_quadrangle_is_reported_not_asserted() {
    let poly = InscribedPolygon::new(Circle::unit(), [0.2, 1.1, 3.3, 4.0]).unwrap();
    let family = build_family(&poly, 720).unwrap();
    let trace = envelope_points(&family).unwrap();
    let report = fit_hypocycloid(&trace, 4).unwrap();
    assert!(report.rms.is_finite() && report.max_dev.is_finite());
    assert!(report.rms <= report.max_dev);
}
