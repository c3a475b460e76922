mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use beztopo::curve::{subdivide, validate};
use beztopo::io::{CurveFile, Report};
use beztopo::metrics::{
    estimate_sigma, exterior_angles, max_consecutive_distance, GeometricConstants, SigmaOptions,
};
use beztopo::pipe::{estimate_pipe_radius, frames, pipe_contains, PipeOptions};
use beztopo::verify::{certify, parameterwise_distance, CertifyOptions, Level};
use beztopo::{CompositeBezier, Point3};

fn point() -> impl Strategy<Value = Point3> {
    (-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64).prop_map(|(x, y, z)| Point3::new(x, y, z))
}

fn single_curve() -> impl Strategy<Value = CompositeBezier> {
    (1usize..=6).prop_flat_map(|n| prop::collection::vec(point(), n + 1)).prop_map(|v| CompositeBezier::single(v).unwrap())
}

fn composite_curve() -> impl Strategy<Value = CompositeBezier> {
    (2usize..=5, 1usize..=4, any::<u64>()).prop_map(|(n, s, seed)| {
        common::random_composite(&mut ChaCha8Rng::seed_from_u64(seed), n, s)
    })
}

/// Corpus-style curve that passed the acceptance filters.
fn accepted_curve() -> impl Strategy<Value = common::Sample> {
    (2usize..=5, any::<u64>()).prop_filter_map("rejected by corpus filters", |(n, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let curve = CompositeBezier::single(common::random_polygon(&mut rng, n)).unwrap();
        common::accept(curve, &mut Default::default())
    })
}

fn scale(c: &CompositeBezier) -> f64 {
    c.bounding_box().diagonal().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn subdivision_preserves_the_curve(c in composite_curve(), i in 0u32..6, t in 0.0..=1.0f64) {
        let r = subdivide(&c, i).unwrap();
        let a = c.evaluate(t).unwrap();
        let b = r.bezier_evaluate(t).unwrap();
        prop_assert!(a.distance(b) <= 1e-12 * scale(&c), "{a:?} vs {b:?}");
    }

    #[test]
    fn union_polygon_shape(c in composite_curve(), i in 0u32..6) {
        let r = subdivide(&c, i).unwrap();
        let pieces = c.segment_count() << i;
        prop_assert_eq!(r.pieces().len(), pieces);
        prop_assert_eq!(r.union_polygon().len(), pieces * c.degree() + 1);
        prop_assert_eq!(r.union_polygon()[0], c.start_point());
        prop_assert_eq!(*r.union_polygon().last().unwrap(), c.end_point());
    }

    #[test]
    fn pieces_lie_in_their_hull_box(c in single_curve(), i in 0u32..5, s in 0.0..=1.0f64) {
        let r = subdivide(&c, i).unwrap();
        for piece in r.pieces() {
            let b = beztopo::point::Aabb::from_points(piece.vertices()).unwrap().inflate(1e-12 * scale(&c));
            let p = piece.bezier_point(s);
            prop_assert!(b.min.x <= p.x && p.x <= b.max.x);
            prop_assert!(b.min.y <= p.y && p.y <= b.max.y);
            prop_assert!(b.min.z <= p.z && p.z <= b.max.z);
        }
    }

    #[test]
    fn exterior_angles_ignore_rigid_motion_and_scale(
        pts in prop::collection::vec(point(), 3..12),
        axis in point(),
        angle in 0.0..PI,
        shift in point(),
        k in 0.1..10.0f64,
    ) {
        let Some(u) = axis.normalized() else { return Ok(()) };
        let rotate = |p: Point3| p * angle.cos() + u.cross(p) * angle.sin() + u * (u.dot(p) * (1.0 - angle.cos()));
        let moved: Vec<Point3> = pts.iter().map(|&p| rotate(p) * k + shift).collect();
        let (Ok(a), Ok(b)) = (exterior_angles(&pts, false), exterior_angles(&moved, false)) else { return Ok(()) };
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-7, "{x} vs {y}");
        }
    }

    #[test]
    fn derivative_gaps_and_distance_obey_their_bounds(c in composite_curve(), i in 0u32..7) {
        let Ok(gc) = GeometricConstants::from_curve(&c, 1.0) else { return Ok(()) };
        let r = subdivide(&c, i).unwrap();
        let gap = r
            .pieces()
            .iter()
            .map(|p| max_consecutive_distance(p.discrete_derivative().unwrap().vertices()))
            .fold(0.0, f64::max);
        prop_assert!(gap <= gc.m / 2f64.powi(i as i32) + 1e-9 * gc.m);
        let d = parameterwise_distance(&c, &r, 400).unwrap().value;
        prop_assert!(d <= gc.b_dist(i) + 1e-9 * (1.0 + gc.delta2_p.norm));
    }

    #[test]
    fn sigma_is_a_lower_bound(c in composite_curve()) {
        let Ok(est) = estimate_sigma(&c, SigmaOptions::default()) else { return Ok(()) };
        let sampled = (0..=4000)
            .map(|k| c.derivative(k as f64 / 4000.0).unwrap().norm())
            .fold(f64::INFINITY, f64::min);
        prop_assert!(est.lower_bound > 0.0);
        prop_assert!(est.lower_bound <= sampled * (1.0 + 1e-12));
        prop_assert!(est.lower_bound >= 0.99 * est.sampled_min);
    }

    #[test]
    fn composite_curves_validate(c in composite_curve()) {
        let d = validate(&c).unwrap();
        prop_assert!(d.c1_residuals.iter().all(|&r| r <= d.c1_tolerance));
    }

    #[test]
    fn curve_file_round_trip_is_exact(c in composite_curve(), r in prop::option::of(1e-6..1e3f64)) {
        let mut f = CurveFile::from_curve(&c);
        f.pipe_radius = r;
        let text = f.to_text();
        let back = CurveFile::parse(&text).unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(back.to_text(), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pipe_radius_has_the_reach_property(s in accepted_curve(), phase in 0.0..(2.0 * PI)) {
        let c = &s.curve;
        let r = s.constants.pipe_radius;
        let dense: Vec<Point3> = (0..=4000).map(|k| c.evaluate(k as f64 / 4000.0).unwrap()).collect();
        let ts: Vec<f64> = (0..=40).map(|k| k as f64 / 40.0).collect();
        let fr = frames(c, &ts).unwrap();
        let spacing = dense.windows(2).map(|w| w[0].distance(w[1])).fold(0.0, f64::max);
        for (t, f) in ts.iter().zip(&fr) {
            let base = c.evaluate(*t).unwrap();
            for rho in [0.25 * r, 0.5 * r, 0.99 * r] {
                let q = base + (f.normal * phase.cos() + f.binormal * phase.sin()) * rho;
                let nearest = dense.iter().map(|p| p.distance(q)).fold(f64::INFINITY, f64::min);
                prop_assert!(nearest >= rho - spacing, "t={t} rho={rho} nearest={nearest}");
            }
        }
    }

    #[test]
    fn containment_tracks_the_distance_bound(s in accepted_curve(), i in 0u32..6) {
        let r = subdivide(&s.curve, i).unwrap();
        let c = pipe_contains(&s.curve, &r, s.constants.pipe_radius, 500).unwrap();
        prop_assert!(c.max_distance <= s.constants.b_dist(i) + 1e-9 * (1.0 + s.constants.delta2_p.norm));
        prop_assert_eq!(c.contained, c.max_distance < s.constants.pipe_radius);
    }

    #[test]
    fn certificates_verify_on_accepted_curves(s in accepted_curve()) {
        for level in [Level::SimplePieces, Level::Homeomorphic, Level::Isotopic] {
            let cert = certify(&s.curve, level, &CertifyOptions { samples: 500, ..Default::default() }).unwrap();
            prop_assert!(cert.verified, "{:?}", cert.first_failure());
        }
    }

    #[test]
    fn composite_certificates_verify(c in composite_curve()) {
        let Ok(est) = estimate_pipe_radius(&c, PipeOptions::default()) else { return Ok(()) };
        let Ok(gc) = GeometricConstants::from_curve(&c, est.radius) else { return Ok(()) };
        if beztopo::bounds::iterations_for_isotopy(&gc).unwrap() > 9 {
            return Ok(());
        }
        let cert = certify(&c, Level::Isotopic, &CertifyOptions { samples: 500, ..Default::default() }).unwrap();
        prop_assert!(cert.verified, "{:?}", cert.first_failure());
    }
}

#[test]
fn report_tree_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.bez");
    std::fs::write(&path, "bezier 1 3 1\nsegment\n0 0 0\n1 1 0\n2 -1 0.5\n3 0 0\n").unwrap();
    let report = beztopo::io::cmd_certify(&path, Level::Isotopic, &Default::default(), 300).unwrap();
    let back = Report::from_tree(&report.to_tree()).unwrap();
    assert_eq!(back.to_value(), report.to_value());
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(json, report.to_value());
}
