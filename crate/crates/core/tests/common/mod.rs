//! Random test curves shared by the integration suites.
#![allow(dead_code)]

use beztopo::bounds::iterations_for_isotopy;
use beztopo::pipe::{estimate_pipe_radius, PipeOptions};
use beztopo::{CompositeBezier, GeometricConstants, Point3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Smallest accepted certified speed bound.
pub const MIN_SIGMA: f64 = 0.05;
/// Largest accepted isotopy iteration count.
pub const MAX_ISOTOPY_ITERATIONS: u32 = 10;

/// A corpus member together with its constants.
#[derive(Debug, Clone)]
pub struct Sample {
    pub curve: CompositeBezier,
    pub constants: GeometricConstants,
}

#[derive(Debug, Default, Clone, Copy)]
pub struct Rejections {
    pub sigma: usize,
    pub pipe: usize,
    pub iterations: usize,
}

/// Control points march along x with a uniform jitter in a cube.
pub fn random_polygon(rng: &mut impl Rng, degree: usize) -> Vec<Point3> {
    (0..=degree)
        .map(|j| {
            Point3::new(
                j as f64 + rng.gen_range(-0.8..0.8),
                rng.gen_range(-0.8..0.8),
                rng.gen_range(-0.8..0.8),
            )
        })
        .collect()
}

/// `count` single-segment curves of `degree` that are regular (σ ≥ 0.05),
/// have an estimable pipe radius, and need at most 10 isotopy iterations.
pub fn corpus(degree: usize, count: usize, seed: u64) -> (Vec<Sample>, Rejections) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((degree as u64) << 32));
    let mut out = Vec::with_capacity(count);
    let mut rej = Rejections::default();
    while out.len() < count {
        let curve = CompositeBezier::single(random_polygon(&mut rng, degree)).expect("finite points");
        if let Some(sample) = accept(curve, &mut rej) {
            out.push(sample);
        }
    }
    (out, rej)
}

pub fn accept(curve: CompositeBezier, rej: &mut Rejections) -> Option<Sample> {
    let Ok(est) = estimate_pipe_radius(&curve, PipeOptions::default()) else {
        rej.pipe += 1;
        return None;
    };
    let Ok(constants) = GeometricConstants::from_curve(&curve, est.radius) else {
        rej.sigma += 1;
        return None;
    };
    if constants.sigma < MIN_SIGMA {
        rej.sigma += 1;
        return None;
    }
    match iterations_for_isotopy(&constants) {
        Ok(k) if k <= MAX_ISOTOPY_ITERATIONS => Some(Sample { curve, constants }),
        _ => {
            rej.iterations += 1;
            None
        }
    }
}

/// C¹ composite curve: interior junction tangents are mirrored so each
/// junction is a midpoint of its neighbouring control points.
pub fn random_composite(rng: &mut impl Rng, degree: usize, segments: usize) -> CompositeBezier {
    assert!(degree >= 2);
    let mut segs: Vec<Vec<Point3>> = Vec::with_capacity(segments);
    let mut start = Point3::ORIGIN;
    let mut lead: Option<Point3> = None;
    for _ in 0..segments {
        let mut pts = vec![start];
        let base = start.x;
        for j in 1..=degree {
            let jitter = Point3::new(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6));
            pts.push(Point3::new(base + j as f64, 0.0, 0.0) + jitter);
        }
        if let Some(d) = lead {
            pts[1] = start + d;
        }
        lead = Some(pts[degree] - pts[degree - 1]);
        start = pts[degree];
        segs.push(pts);
    }
    CompositeBezier::new(degree, segs).expect("junctions shared")
}

/// Degree-4 planar curve whose control polygon crosses itself (edges 0 and
/// 2) while the curve does not.
pub fn crossing_polygon_quartic() -> CompositeBezier {
    let p = |x, y| Point3::new(x, y, 0.0);
    CompositeBezier::single(vec![p(2.98, -0.89), p(0.86, 2.14), p(1.16, 1.98), p(-2.0, 1.73), p(-3.03, -0.08)])
        .expect("finite points")
}
