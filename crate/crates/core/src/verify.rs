//! Brute-force oracles for the certified properties and certificate assembly.
//!
//! Continuum properties (distance, tangent angle) are checked on a parameter
//! sample; the sample size is recorded in the certificate so any failure can
//! be reproduced.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::IterationBounds;
use crate::curve::{subdivide_capped, CompositeBezier, SubdivisionResult, DEFAULT_ITERATION_CAP};
use crate::error::{Error, Result};
use crate::metrics::{angle_between, exterior_angles, total_curvature, GeometricConstants};
use crate::pipe::{estimate_pipe_radius, pipe_contains, PipeEstimate, PipeOptions};
use crate::point::{Aabb, Point3};

/// Relative tolerance (times the bounding-box diagonal) for segment contact.
pub const INTERSECTION_REL: f64 = 1e-10;

pub const DEFAULT_SAMPLES: usize = 2000;

/// Outcome of the pairwise segment test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Simplicity {
    pub simple: bool,
    /// Lexicographically first offending segment pair; `(k, k)` marks a
    /// zero-length edge.
    pub witness: Option<(usize, usize)>,
    pub tolerance: f64,
}

/// Closest distance between segments `p1q1` and `p2q2`.
pub fn segment_distance(p1: Point3, q1: Point3, p2: Point3, q2: Point3) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.dot(d1);
    let e = d2.dot(d2);
    let f = d2.dot(r);
    let (s, t);
    if a == 0.0 && e == 0.0 {
        return r.norm();
    }
    if a == 0.0 {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(r);
        if e == 0.0 {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(d2);
            let denom = a * e - b * b;
            let s0 = if denom > 0.0 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            } else {
                t = t0;
                s = s0;
            }
        }
    }
    ((p1 + d1 * s) - (p2 + d2 * t)).norm()
}

pub fn point_segment_distance(x: Point3, a: Point3, b: Point3) -> f64 {
    let d = b - a;
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return x.distance(a);
    }
    let s = ((x - a).dot(d) / len2).clamp(0.0, 1.0);
    x.distance(a + d * s)
}

/// Exhaustive segment-pair self-intersection test. Consecutive segments may
/// touch only at their shared vertex. A closed polyline may list its first
/// vertex again at the end.
pub fn is_simple_polyline(vertices: &[Point3], closed: bool) -> Simplicity {
    let diag = Aabb::from_points(vertices).map(|b| b.diagonal()).unwrap_or(0.0);
    is_simple_polyline_with_tolerance(vertices, closed, INTERSECTION_REL * diag)
}

pub fn is_simple_polyline_with_tolerance(vertices: &[Point3], closed: bool, eps: f64) -> Simplicity {
    let mut v = vertices;
    if closed && v.len() > 1 && v[0] == v[v.len() - 1] {
        v = &v[..v.len() - 1];
    }
    let nv = v.len();
    let m = if closed { nv } else { nv.saturating_sub(1) };
    let seg = |k: usize| (v[k], v[(k + 1) % nv]);
    let fail = |i, j| Simplicity { simple: false, witness: Some((i, j)), tolerance: eps };

    if m == 0 || (closed && nv < 3) {
        return fail(0, 0);
    }
    for k in 0..m {
        let (a, b) = seg(k);
        if a.distance(b) <= eps {
            return fail(k, k);
        }
    }

    let adjacent = |i: usize, j: usize| j == i + 1 || (closed && i == 0 && j == m - 1);
    let intersects = |i: usize, j: usize| -> bool {
        if adjacent(i, j) {
            // first segment ends where the second starts (wrap: j ends at i's start)
            let (a, b, c) = if j == i + 1 {
                (seg(i).0, seg(i).1, seg(j).1)
            } else {
                (seg(j).0, seg(i).0, seg(i).1)
            };
            point_segment_distance(c, a, b) <= eps || point_segment_distance(a, b, c) <= eps
        } else {
            let (a, b) = seg(i);
            let (c, d) = seg(j);
            segment_distance(a, b, c, d) <= eps
        }
    };

    let boxes: Vec<Aabb> = (0..m)
        .map(|k| {
            let (a, b) = seg(k);
            Aabb::from_points(&[a, b]).expect("two points").inflate(eps)
        })
        .collect();
    let extent = Aabb::from_points(v).map(|b| b.max - b.min).unwrap_or_default();
    let axis = if extent.x >= extent.y && extent.x >= extent.z {
        0
    } else if extent.y >= extent.z {
        1
    } else {
        2
    };
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| boxes[a].min.coord(axis).total_cmp(&boxes[b].min.coord(axis)));

    let witness = order
        .par_iter()
        .enumerate()
        .filter_map(|(pos, &a)| {
            let mut best: Option<(usize, usize)> = None;
            let reach = boxes[a].max.coord(axis);
            for &b in &order[pos + 1..] {
                if boxes[b].min.coord(axis) > reach {
                    break;
                }
                if !boxes[a].overlaps(&boxes[b]) {
                    continue;
                }
                let pair = (a.min(b), a.max(b));
                if best.is_some_and(|w| w <= pair) {
                    continue;
                }
                if intersects(pair.0, pair.1) {
                    best = Some(pair);
                }
            }
            best
        })
        .min();

    match witness {
        Some((i, j)) => fail(i, j),
        None => Simplicity { simple: true, witness: None, tolerance: eps },
    }
}

/// A maximum over sampled parameters and where it occurred.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampledMax {
    pub value: f64,
    pub parameter: f64,
}

fn sampled_max(values: impl ParallelIterator<Item = (f64, f64)>) -> SampledMax {
    let (value, parameter) = values.reduce(
        || (f64::NEG_INFINITY, f64::INFINITY),
        |a, b| {
            if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                b
            } else {
                a
            }
        },
    );
    SampledMax { value, parameter }
}

/// Uniform samples plus every polygon node, in global parameters.
fn sample_parameters(result: &SubdivisionResult, samples: usize) -> Vec<f64> {
    let pieces = result.pieces().len();
    let n = result.degree();
    let mut ts: Vec<f64> = (0..samples.max(2)).map(|k| k as f64 / (samples.max(2) - 1) as f64).collect();
    let total = (pieces * n) as f64;
    ts.extend((0..=pieces * n).map(|k| k as f64 / total));
    ts
}

/// `max_t ‖𝒫(t) − ℬ(t)‖` over `samples` uniform parameters and all nodes.
pub fn parameterwise_distance(
    curve: &CompositeBezier,
    result: &SubdivisionResult,
    samples: usize,
) -> Result<SampledMax> {
    check_alignment(curve, result)?;
    let ts = sample_parameters(result, samples);
    Ok(sampled_max(ts.par_iter().map(|&t| {
        let d = result.pl_evaluate(t).expect("in range") - curve.evaluate(t).expect("in range");
        (d.norm(), t)
    })))
}

fn check_alignment(curve: &CompositeBezier, result: &SubdivisionResult) -> Result<()> {
    if curve.segment_count() != result.segment_count() || curve.degree() != result.degree() {
        return Err(Error::InvalidInput("subdivision does not belong to this curve".into()));
    }
    Ok(())
}

/// Angle between `ℬ′(t)` and the polygon's tangent at `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeAngles {
    /// Against the direction of the edge that contains `t`.
    pub edge: SampledMax,
    /// Against the piecewise-linear discrete derivative `l(P′)(t)`.
    pub interpolated: SampledMax,
}

pub fn max_derivative_angle(
    curve: &CompositeBezier,
    result: &SubdivisionResult,
    samples: usize,
) -> Result<DerivativeAngles> {
    check_alignment(curve, result)?;
    let derivs = result
        .pieces()
        .par_iter()
        .map(|p| p.discrete_derivative())
        .collect::<Result<Vec<_>>>()?;
    for (k, d) in derivs.iter().enumerate() {
        if let Some(j) = d.vertices().iter().position(|v| *v == Point3::ORIGIN) {
            return Err(Error::ZeroDiscreteDerivative { piece: k, edge: j });
        }
    }
    let ts = sample_parameters(result, samples);
    let per_sample: Vec<(f64, f64, f64)> = ts
        .par_iter()
        .map(|&t| {
            let (k, s) = result.locate(t);
            let tangent = curve.derivative(t).expect("in range");
            let edge = derivs[k].vertices()[result.pieces()[k].edge_at_unit(s)];
            let interp = derivs[k].pl_at_unit(s);
            (angle_between(tangent, edge), angle_between(tangent, interp), t)
        })
        .collect();
    Ok(DerivativeAngles {
        edge: sampled_max(per_sample.par_iter().map(|&(e, _, t)| (e, t))),
        interpolated: sampled_max(per_sample.par_iter().map(|&(_, i, t)| (i, t))),
    })
}

/// Largest exterior angle at the interior vertices of any piece.
pub fn measure_max_exterior_angle(result: &SubdivisionResult) -> Result<f64> {
    let per_piece = result
        .pieces()
        .par_iter()
        .map(|p| {
            if p.vertices().len() < 3 {
                return Ok(0.0);
            }
            Ok(exterior_angles(p.vertices(), false)?.into_iter().fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(per_piece.into_iter().fold(0.0, f64::max))
}

/// Total curvature of each piece as an open polyline.
pub fn piece_total_curvatures(result: &SubdivisionResult) -> Result<Vec<f64>> {
    result
        .pieces()
        .par_iter()
        .map(|p| if p.vertices().len() < 3 { Ok(0.0) } else { total_curvature(p.vertices(), false) })
        .collect()
}

/// The plane through `q₀` normal to the first edge meets the polygon only at
/// `q₀`.
pub fn normal_plane_meets_only_at_start(vertices: &[Point3]) -> bool {
    let q0 = vertices[0];
    let normal = vertices[1] - q0;
    vertices[1..].iter().all(|q| (*q - q0).dot(normal) > 0.0)
}

/// The topological relation a certificate asserts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    /// Every sub-control polygon is simple.
    SimplePieces,
    /// The union control polygon is homeomorphic to the curve.
    Homeomorphic,
    /// The union control polygon is ambient isotopic to the curve.
    Isotopic,
}

impl Level {
    pub fn as_str(&self) -> &'static str {
        match self {
            Level::SimplePieces => "simple_pieces",
            Level::Homeomorphic => "homeomorphic",
            Level::Isotopic => "isotopic",
        }
    }
}

/// One oracle outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst observed value (distance, angle, ...); NaN when not numeric.
    #[serde(with = "nan_as_null")]
    pub value: f64,
    #[serde(with = "nan_as_null")]
    pub threshold: f64,
    pub detail: Option<String>,
}

impl Check {
    fn below(name: &str, value: f64, threshold: f64, detail: Option<String>) -> Self {
        Self { name: name.into(), passed: value < threshold, value, threshold, detail }
    }

    fn failed(name: &str, detail: String) -> Self {
        Self { name: name.into(), passed: false, value: f64::NAN, threshold: f64::NAN, detail: Some(detail) }
    }
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_nan() {
            s.serialize_none()
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

pub mod check_names {
    pub const REGULARITY: &str = "regularity";
    pub const PIPE_RADIUS: &str = "pipe_radius";
    pub const SUBDIVISION: &str = "subdivision";
    pub const PIECE_SIMPLICITY: &str = "piece_simplicity";
    pub const PIECE_CURVATURE_PI: &str = "piece_total_curvature_below_pi";
    pub const GLOBAL_SIMPLICITY: &str = "global_simplicity";
    pub const PIPE_CONTAINMENT: &str = "pipe_containment";
    pub const PIECE_CURVATURE_HALF_PI: &str = "piece_total_curvature_below_half_pi";
    pub const HALF_PIPE_DISTANCE: &str = "distance_below_half_radius";
    pub const DERIVATIVE_ANGLE: &str = "derivative_angle_below_pi_over_6";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusSource {
    Estimated,
    Supplied,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyCertificate {
    pub level: Level,
    /// `⌈N⌉` for the level, as the theorems state it.
    pub required_iterations: Option<u32>,
    /// Iterations actually performed: `⌈N⌉ + 1`.
    pub iterations: Option<u32>,
    pub samples: usize,
    pub pipe_radius: Option<f64>,
    pub radius_source: RadiusSource,
    pub pipe: Option<PipeEstimate>,
    pub constants: Option<GeometricConstants>,
    pub bounds: Option<IterationBounds>,
    pub checks: Vec<Check>,
    pub verified: bool,
}

impl TopologyCertificate {
    /// First failed check, if any.
    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    /// Use this radius instead of estimating one.
    pub pipe_radius: Option<f64>,
    pub pipe: PipeOptions,
    pub samples: usize,
    pub iteration_cap: u32,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            pipe_radius: None,
            pipe: PipeOptions::default(),
            samples: DEFAULT_SAMPLES,
            iteration_cap: DEFAULT_ITERATION_CAP,
        }
    }
}

/// Computes constants and bounds, subdivides `⌈N⌉ + 1` times and runs the
/// oracle suite for `level`. Oracle failures yield `verified = false`; only
/// invalid options are reported as errors.
pub fn certify(curve: &CompositeBezier, level: Level, opts: &CertifyOptions) -> Result<TopologyCertificate> {
    use check_names::*;

    let mut cert = TopologyCertificate {
        level,
        required_iterations: None,
        iterations: None,
        samples: opts.samples,
        pipe_radius: None,
        radius_source: if opts.pipe_radius.is_some() { RadiusSource::Supplied } else { RadiusSource::Estimated },
        pipe: None,
        constants: None,
        bounds: None,
        checks: Vec::new(),
        verified: false,
    };

    let radius = match opts.pipe_radius {
        Some(r) if r > 0.0 && r.is_finite() => r,
        Some(r) => return Err(Error::Domain(format!("pipe radius must be positive, got {r}"))),
        None => match estimate_pipe_radius(curve, opts.pipe) {
            Ok(est) => {
                cert.pipe = Some(est);
                est.radius
            }
            Err(e @ (Error::NotSimple(_) | Error::RegularityUnverified(_))) => {
                cert.checks.push(Check::failed(PIPE_RADIUS, e.to_string()));
                return Ok(cert);
            }
            Err(e) => return Err(e),
        },
    };
    cert.pipe_radius = Some(radius);

    let gc = match GeometricConstants::from_curve(curve, radius) {
        Ok(gc) => gc,
        Err(e @ Error::RegularityUnverified(_)) => {
            cert.checks.push(Check::failed(REGULARITY, e.to_string()));
            return Ok(cert);
        }
        Err(e) => return Err(e),
    };
    cert.constants = Some(gc);
    let bounds = IterationBounds::compute(&gc, &[])?;
    let required = match level {
        Level::SimplePieces => bounds.simplicity,
        Level::Homeomorphic => bounds.homeomorphism,
        Level::Isotopic => bounds.isotopy,
    };
    cert.bounds = Some(bounds);
    cert.required_iterations = Some(required);
    let iterations = required + 1;

    let result = match subdivide_capped(curve, iterations, opts.iteration_cap) {
        Ok(r) => r,
        Err(e @ Error::Resource { .. }) => {
            cert.checks.push(Check::failed(SUBDIVISION, e.to_string()));
            return Ok(cert);
        }
        Err(e) => return Err(e),
    };
    cert.iterations = Some(iterations);
    cert.checks = run_checks(curve, &result, level, radius, opts.samples);
    cert.verified = cert.checks.iter().all(|c| c.passed);
    Ok(cert)
}

/// The oracle suite for `level` on an existing subdivision.
pub fn run_checks(
    curve: &CompositeBezier,
    result: &SubdivisionResult,
    level: Level,
    radius: f64,
    samples: usize,
) -> Vec<Check> {
    use check_names::*;
    let mut checks = Vec::new();

    let piece_simplicity = result
        .pieces()
        .par_iter()
        .enumerate()
        .filter_map(|(k, p)| {
            let s = is_simple_polyline(p.vertices(), false);
            (!s.simple).then_some((k, s.witness))
        })
        .min_by_key(|(k, _)| *k);
    checks.push(match piece_simplicity {
        None => Check { name: PIECE_SIMPLICITY.into(), passed: true, value: 0.0, threshold: 0.0, detail: None },
        Some((k, w)) => Check {
            name: PIECE_SIMPLICITY.into(),
            passed: false,
            value: k as f64,
            threshold: 0.0,
            detail: Some(format!("piece {k} self-intersects at segment pair {w:?}")),
        },
    });

    let curvatures = piece_total_curvatures(result);
    let worst_curvature = curvatures.as_ref().map(|c| {
        c.iter().enumerate().fold((0usize, 0.0f64), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc })
    });
    match &worst_curvature {
        Ok((k, v)) => checks.push(Check::below(PIECE_CURVATURE_PI, *v, PI, Some(format!("piece {k}")))),
        Err(e) => checks.push(Check::failed(PIECE_CURVATURE_PI, e.to_string())),
    }
    if level == Level::SimplePieces {
        return checks;
    }

    let union = result.union_polygon();
    let global = is_simple_polyline(&union, curve.is_closed());
    checks.push(Check {
        name: GLOBAL_SIMPLICITY.into(),
        passed: global.simple,
        value: if global.simple { 0.0 } else { 1.0 },
        threshold: 0.0,
        detail: global.witness.map(|w| format!("union segments {} and {} meet", w.0, w.1)),
    });
    match pipe_contains(curve, result, radius, samples) {
        Ok(c) => checks.push(Check::below(
            PIPE_CONTAINMENT,
            c.max_distance,
            radius,
            Some(format!("at t = {:.17}", c.worst_parameter)),
        )),
        Err(e) => checks.push(Check::failed(PIPE_CONTAINMENT, e.to_string())),
    }
    match &worst_curvature {
        Ok((k, v)) => checks.push(Check::below(PIECE_CURVATURE_HALF_PI, *v, FRAC_PI_2, Some(format!("piece {k}")))),
        Err(e) => checks.push(Check::failed(PIECE_CURVATURE_HALF_PI, e.to_string())),
    }
    if level == Level::Homeomorphic {
        return checks;
    }

    match parameterwise_distance(curve, result, samples) {
        Ok(d) => checks.push(Check::below(
            HALF_PIPE_DISTANCE,
            d.value,
            radius / 2.0,
            Some(format!("at t = {:.17}", d.parameter)),
        )),
        Err(e) => checks.push(Check::failed(HALF_PIPE_DISTANCE, e.to_string())),
    }
    match max_derivative_angle(curve, result, samples) {
        Ok(a) => checks.push(Check::below(
            DERIVATIVE_ANGLE,
            a.edge.value,
            FRAC_PI_6,
            Some(format!(
                "at t = {:.17}; against interpolated derivative {:.17}",
                a.edge.parameter, a.interpolated.value
            )),
        )),
        Err(e) => checks.push(Check::failed(DERIVATIVE_ANGLE, e.to_string())),
    }
    checks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::subdivide;

    fn p(x: f64, y: f64, z: f64) -> Point3 {
        Point3::new(x, y, z)
    }

    #[test]
    fn square_is_simple_bowtie_is_not() {
        let square = [p(0., 0., 0.), p(1., 0., 0.), p(1., 1., 0.), p(0., 1., 0.)];
        assert!(is_simple_polyline(&square, false).simple);
        assert!(is_simple_polyline(&square, true).simple);
        let bowtie = [p(0., 0., 0.), p(1., 1., 0.), p(1., 0., 0.), p(0., 1., 0.)];
        let s = is_simple_polyline(&bowtie, true);
        assert!(!s.simple);
        assert_eq!(s.witness, Some((0, 2)));
        let open = is_simple_polyline(&bowtie, false);
        assert!(!open.simple);
        assert_eq!(open.witness, Some((0, 2)));
    }

    #[test]
    fn backtracking_and_repeated_vertices_are_not_simple() {
        let back = [p(0., 0., 0.), p(2., 0., 0.), p(1., 0., 0.)];
        assert_eq!(is_simple_polyline(&back, false).witness, Some((0, 1)));
        let beyond = [p(1., 0., 0.), p(2., 0., 0.), p(0., 0., 0.)];
        assert_eq!(is_simple_polyline(&beyond, false).witness, Some((0, 1)));
        let dup = [p(0., 0., 0.), p(1., 0., 0.), p(1., 0., 0.), p(1., 1., 0.)];
        assert_eq!(is_simple_polyline(&dup, false).witness, Some((1, 1)));
    }

    #[test]
    fn touching_far_segments_are_detected() {
        // the last vertex lands on the first edge
        let touch = [p(0., 0., 0.), p(2., 0., 0.), p(2., 1., 0.), p(1., 0., 0.)];
        assert!(!is_simple_polyline(&touch, false).simple);
    }

    #[test]
    fn small_total_curvature_chains_are_simple() {
        let mut state = 7u64;
        let mut rnd = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..200 {
            // turning angles sum below π
            let k = 3 + (rnd() * 10.0) as usize;
            let budget = PI * 0.999 / k as f64;
            let mut dir = p(1., 0., 0.);
            let mut pts = vec![Point3::ORIGIN];
            for _ in 0..=k {
                let last = *pts.last().unwrap();
                pts.push(last + dir * (0.1 + rnd()));
                let axis = p(rnd() - 0.5, rnd() - 0.5, rnd() - 0.5).cross(dir).normalized().unwrap();
                let a = budget * rnd();
                dir = (dir * a.cos() + axis.cross(dir) * a.sin()).normalized().unwrap();
            }
            assert!(total_curvature(&pts, false).unwrap() < PI);
            assert!(is_simple_polyline(&pts, false).simple);
        }
    }

    #[test]
    fn distance_examples() {
        let line = CompositeBezier::single(vec![p(0., 0., 0.), p(1., 0., 0.), p(2., 0., 0.), p(3., 0., 0.)]).unwrap();
        for i in 0..4 {
            let r = subdivide(&line, i).unwrap();
            assert!(parameterwise_distance(&line, &r, 1000).unwrap().value < 1e-15);
            let a = max_derivative_angle(&line, &r, 1000).unwrap();
            assert!(a.edge.value < 1e-12);
            assert_eq!(measure_max_exterior_angle(&r).unwrap(), 0.0);
            assert!(piece_total_curvatures(&r).unwrap().iter().all(|&c| c == 0.0));
        }
    }

    #[test]
    fn derivative_angle_is_scale_free() {
        let pts = vec![p(0., 0., 0.), p(1., 2., 0.), p(2., -1., 1.), p(3., 0., 0.5)];
        let scaled: Vec<_> = pts.iter().map(|v| *v * 7.5).collect();
        let a = CompositeBezier::single(pts).unwrap();
        let b = CompositeBezier::single(scaled).unwrap();
        let ra = subdivide(&a, 3).unwrap();
        let rb = subdivide(&b, 3).unwrap();
        let x = max_derivative_angle(&a, &ra, 500).unwrap().edge.value;
        let y = max_derivative_angle(&b, &rb, 500).unwrap().edge.value;
        assert!((x - y).abs() < 1e-12);
    }

    #[test]
    fn zero_discrete_derivative_is_signalled() {
        let c = CompositeBezier::single(vec![p(0., 0., 0.), p(0., 0., 0.), p(1., 0., 0.)]).unwrap();
        let r = subdivide(&c, 0).unwrap();
        assert!(matches!(
            max_derivative_angle(&c, &r, 10),
            Err(Error::ZeroDiscreteDerivative { piece: 0, edge: 0 })
        ));
    }

    #[test]
    fn normal_plane_spot_check() {
        let gentle = [p(0., 0., 0.), p(1., 0.2, 0.), p(2., 0.3, 0.), p(3., 0.2, 0.)];
        assert!(normal_plane_meets_only_at_start(&gentle));
        let hook = [p(0., 0., 0.), p(1., 0., 0.), p(1., 1., 0.), p(-0.5, 1., 0.)];
        assert!(!normal_plane_meets_only_at_start(&hook));
    }

    #[test]
    fn certify_straight_line() {
        let line = CompositeBezier::single(vec![p(0., 0., 0.), p(1., 0., 0.), p(2., 0., 0.), p(3., 0., 0.)]).unwrap();
        for level in [Level::SimplePieces, Level::Homeomorphic, Level::Isotopic] {
            let cert = certify(&line, level, &CertifyOptions::default()).unwrap();
            assert!(cert.verified, "{level:?}: {:?}", cert.checks);
            assert_eq!(cert.required_iterations, Some(0));
            assert_eq!(cert.iterations, Some(1));
        }
    }

    #[test]
    fn certify_planar_quadratic_isotopic() {
        let q = CompositeBezier::single(vec![p(0., 0., 0.), p(1., 1., 0.), p(2., 0., 0.)]).unwrap();
        let cert = certify(&q, Level::Isotopic, &CertifyOptions::default()).unwrap();
        assert!(cert.verified, "{:?}", cert.checks);
        assert_eq!(cert.checks.len(), 7);
    }

    #[test]
    fn certify_reports_self_intersecting_spine() {
        // planar loop whose two lobes cross
        let c = CompositeBezier::single(vec![p(0., 0., 0.), p(3., 3., 0.), p(-1., 3., 0.), p(2., 0., 0.)]).unwrap();
        let cert = certify(&c, Level::Homeomorphic, &CertifyOptions::default()).unwrap();
        assert!(!cert.verified);
        assert_eq!(cert.first_failure().unwrap().name, check_names::PIPE_RADIUS);
    }

    #[test]
    fn supplied_radius_is_used() {
        let q = CompositeBezier::single(vec![p(0., 0., 0.), p(1., 1., 0.), p(2., 0., 0.)]).unwrap();
        let opts = CertifyOptions { pipe_radius: Some(0.05), ..Default::default() };
        let cert = certify(&q, Level::Homeomorphic, &opts).unwrap();
        assert_eq!(cert.radius_source, RadiusSource::Supplied);
        assert_eq!(cert.pipe_radius, Some(0.05));
        assert!(cert.pipe.is_none());
        assert!(cert.verified);
        let bad = CertifyOptions { pipe_radius: Some(-1.0), ..Default::default() };
        assert!(certify(&q, Level::Homeomorphic, &bad).is_err());
    }
}
