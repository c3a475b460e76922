//! Pipe surfaces around the curve: a sampled radius estimate, containment
//! tests for control polygons, and mesh export.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{CompositeBezier, SubdivisionResult};
use crate::error::{Error, Result};
use crate::metrics::angle_between;
use crate::point::Point3;
use crate::verify::{parameterwise_distance, SampledMax};

pub const DEFAULT_DENSITY: usize = 512;
pub const DEFAULT_SAFETY: f64 = 0.8;

/// Pairs whose chord is within this angle of perpendicular to both tangents
/// count as doubly critical.
pub const DOUBLY_CRITICAL_TOLERANCE: f64 = 5.0 * PI / 180.0;

/// Samples on either side of a point that are excluded from self-distance.
pub const EXCLUSION_SAMPLES: usize = 4;

/// Distances below `SELF_INTERSECTION_REL · diagonal` are treated as a crossing.
pub const SELF_INTERSECTION_REL: f64 = 1e-10;

/// Orthonormal frame along the curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub tangent: Point3,
    pub normal: Point3,
    pub binormal: Point3,
    /// The curvature was too small for a Frenet normal; the normal was
    /// propagated by a rotation-minimizing rule instead.
    pub rotation_minimizing: bool,
}

/// Curvature `‖ℬ′ × ℬ″‖ / ‖ℬ′‖³` at a local parameter.
pub fn curvature_local(curve: &CompositeBezier, segment: usize, s: f64) -> Result<f64> {
    let d1 = curve.derivative_local(segment, s);
    let d2 = curve.second_derivative_local(segment, s);
    let speed = d1.norm();
    if speed == 0.0 {
        return Err(Error::RegularityUnverified(format!(
            "zero tangent in segment {segment} at local parameter {s}"
        )));
    }
    Ok(d1.cross(d2).norm() / (speed * speed * speed))
}

fn any_perpendicular(t: Point3) -> Point3 {
    let a = t.abs();
    let axis = if a.x <= a.y && a.x <= a.z {
        Point3::new(1.0, 0.0, 0.0)
    } else if a.y <= a.z {
        Point3::new(0.0, 1.0, 0.0)
    } else {
        Point3::new(0.0, 0.0, 1.0)
    };
    t.cross(axis).normalized().expect("axis chosen away from t")
}

/// Frenet frames at the given global parameters, falling back to
/// double-reflection rotation-minimizing propagation where the curvature is
/// below `1e-9 / diagonal`.
pub fn frames(curve: &CompositeBezier, params: &[f64]) -> Result<Vec<Frame>> {
    let kappa_floor = 1e-9 / curve.bounding_box().diagonal().max(f64::MIN_POSITIVE);
    let mut out: Vec<Frame> = Vec::with_capacity(params.len());
    let mut prev: Option<(Point3, Frame)> = None;
    for &t in params {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("parameter {t} outside [0, 1]")));
        }
        let (k, s) = curve.locate(t);
        let x = curve.point_local(k, s);
        let d1 = curve.derivative_local(k, s);
        let d2 = curve.second_derivative_local(k, s);
        let tangent = d1.normalized().ok_or_else(|| {
            Error::RegularityUnverified(format!("zero tangent at parameter {t}"))
        })?;
        let speed = d1.norm();
        let b = d1.cross(d2);
        let frame = if b.norm() / (speed * speed * speed) > kappa_floor {
            let binormal = b.normalized().expect("nonzero");
            Frame { tangent, normal: binormal.cross(tangent), binormal, rotation_minimizing: false }
        } else {
            let normal = match prev {
                Some((px, pf)) => double_reflection(px, pf.tangent, pf.normal, x, tangent),
                None => any_perpendicular(tangent),
            };
            Frame { tangent, normal, binormal: tangent.cross(normal), rotation_minimizing: true }
        };
        prev = Some((x, frame));
        out.push(frame);
    }
    Ok(out)
}

fn double_reflection(x0: Point3, t0: Point3, r0: Point3, x1: Point3, t1: Point3) -> Point3 {
    let v1 = x1 - x0;
    let c1 = v1.dot(v1);
    let (r_l, t_l) = if c1 > 0.0 {
        (r0 - v1 * (2.0 / c1 * v1.dot(r0)), t0 - v1 * (2.0 / c1 * v1.dot(t0)))
    } else {
        (r0, t0)
    };
    let v2 = t1 - t_l;
    let c2 = v2.dot(v2);
    let r1 = if c2 > 0.0 { r_l - v2 * (2.0 / c2 * v2.dot(r_l)) } else { r_l };
    // re-orthogonalise against rounding drift
    (r1 - t1 * r1.dot(t1)).normalized().unwrap_or_else(|| any_perpendicular(t1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipeOptions {
    /// Samples per segment.
    pub density: usize,
    pub safety: f64,
    /// Upper limit on the radius; `None` uses the bounding-box diagonal.
    pub max_radius: Option<f64>,
}

impl Default for PipeOptions {
    fn default() -> Self {
        Self { density: DEFAULT_DENSITY, safety: DEFAULT_SAFETY, max_radius: None }
    }
}

/// Which quantity limited the radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusLimit {
    Curvature,
    SelfDistance,
    Cap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipeEstimate {
    pub radius: f64,
    pub curvature_bound: f64,
    /// Smallest doubly-critical self-distance, if any pair qualified.
    pub min_self_distance: Option<f64>,
    pub safety_factor: f64,
    pub sample_density: usize,
    pub cap: f64,
    pub limit: RadiusLimit,
}

/// A radius for a non-self-intersecting pipe:
/// `safety · min(1/κ_max, d_min/2, cap)`.
pub fn estimate_pipe_radius(curve: &CompositeBezier, opts: PipeOptions) -> Result<PipeEstimate> {
    if opts.density < 100 {
        return Err(Error::InvalidInput(format!("density {} below 100 per segment", opts.density)));
    }
    if !(opts.safety > 0.0 && opts.safety <= 1.0) {
        return Err(Error::InvalidInput(format!("safety factor {} outside (0, 1]", opts.safety)));
    }
    let diag = curve.bounding_box().diagonal();
    let cap = opts.max_radius.unwrap_or(diag);
    if !(cap > 0.0) {
        return Err(Error::InvalidInput("curve has zero extent".into()));
    }
    let count = opts.density * curve.segment_count() + 1;
    let params: Vec<f64> = (0..count).map(|k| k as f64 / (count - 1) as f64).collect();

    let kappa_max = params
        .par_iter()
        .map(|&t| {
            let (k, s) = curve.locate(t);
            curvature_local(curve, k, s)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let d_min = min_doubly_critical_distance(curve, &params, SELF_INTERSECTION_REL * diag)?;

    let mut radius = cap;
    let mut limit = RadiusLimit::Cap;
    if kappa_max > 0.0 && 1.0 / kappa_max < radius {
        radius = 1.0 / kappa_max;
        limit = RadiusLimit::Curvature;
    }
    if let Some(d) = d_min {
        if d / 2.0 < radius {
            radius = d / 2.0;
            limit = RadiusLimit::SelfDistance;
        }
    }
    Ok(PipeEstimate {
        radius: opts.safety * radius,
        curvature_bound: kappa_max,
        min_self_distance: d_min,
        safety_factor: opts.safety,
        sample_density: opts.density,
        cap,
        limit,
    })
}

/// Smallest distance over doubly-critical pairs found by refining the grid
/// local minima of the pair-distance function outside the exclusion band.
/// Closed curves (first point equal to last) use cyclic parameter gaps.
fn min_doubly_critical_distance(
    curve: &CompositeBezier,
    params: &[f64],
    crossing_eps: f64,
) -> Result<Option<f64>> {
    let closed = curve.is_closed();
    let n = if closed { params.len() - 1 } else { params.len() };
    let pts: Vec<Point3> = params[..n].iter().map(|&t| curve.evaluate(t).expect("in range")).collect();
    let w = EXCLUSION_SAMPLES;
    if n <= 2 * w + 2 {
        return Ok(None);
    }
    let gap = |i: usize, j: usize| {
        let d = i.abs_diff(j);
        if closed {
            d.min(n - d)
        } else {
            d
        }
    };
    let wrap = |i: isize| -> Option<usize> {
        if closed {
            Some(i.rem_euclid(n as isize) as usize)
        } else if i >= 0 && (i as usize) < n {
            Some(i as usize)
        } else {
            None
        }
    };

    let candidates: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let (pts, gap, wrap) = (&pts, &gap, &wrap);
            ((i + 1)..n).filter(move |&j| gap(i, j) > w).filter_map(move |j| {
                let d = pts[i].distance(pts[j]);
                for di in -1isize..=1 {
                    for dj in -1isize..=1 {
                        if di == 0 && dj == 0 {
                            continue;
                        }
                        let (Some(a), Some(b)) = (wrap(i as isize + di), wrap(j as isize + dj)) else {
                            continue;
                        };
                        if gap(a, b) > w && pts[a].distance(pts[b]) < d {
                            return None;
                        }
                    }
                }
                Some((i, j))
            })
        })
        .collect();

    let step = 1.0 / (params.len() - 1) as f64;
    let window = w as f64 * step;
    let param_gap = |t: f64, s: f64| {
        let d = (t - s).abs();
        if closed {
            d.min(1.0 - d)
        } else {
            d
        }
    };
    let refined: Vec<(f64, f64, f64)> = candidates
        .par_iter()
        .map(|&(i, j)| refine_pair(curve, params[i], params[j], step, closed))
        .collect();

    let mut best: Option<f64> = None;
    for (t, s, d) in refined {
        if param_gap(t, s) <= window {
            continue;
        }
        if d <= crossing_eps {
            return Err(Error::NotSimple(format!(
                "curve points at parameters {t:.9} and {s:.9} are {d:e} apart"
            )));
        }
        let chord = curve.evaluate(s).expect("in range") - curve.evaluate(t).expect("in range");
        let ta = curve.derivative(t).expect("in range");
        let tb = curve.derivative(s).expect("in range");
        let off_a = (angle_between(chord, ta) - PI / 2.0).abs();
        let off_b = (angle_between(chord, tb) - PI / 2.0).abs();
        if off_a <= DOUBLY_CRITICAL_TOLERANCE && off_b <= DOUBLY_CRITICAL_TOLERANCE {
            best = Some(best.map_or(d, |b: f64| b.min(d)));
        }
    }
    Ok(best)
}

/// Alternating golden-section descent on `‖ℬ(t) − ℬ(s)‖` near a grid pair.
fn refine_pair(curve: &CompositeBezier, t0: f64, s0: f64, step: f64, closed: bool) -> (f64, f64, f64) {
    let norm = |u: f64| if closed { u.rem_euclid(1.0) } else { u.clamp(0.0, 1.0) };
    let at = |u: f64| curve.evaluate(norm(u)).expect("normalised");
    let bracket = |u: f64| {
        if closed {
            (u - 2.0 * step, u + 2.0 * step)
        } else {
            ((u - 2.0 * step).max(0.0), (u + 2.0 * step).min(1.0))
        }
    };
    let (mut t, mut s) = (t0, s0);
    for _ in 0..12 {
        let ps = at(s);
        let (lo, hi) = bracket(t);
        t = golden_min(|u| at(u).distance(ps), lo, hi);
        let pt = at(t);
        let (lo, hi) = bracket(s);
        s = golden_min(|u| at(u).distance(pt), lo, hi);
    }
    // Newton on the squared distance converges where alternating search crawls
    let m = curve.segment_count() as f64;
    let jets = |u: f64| {
        let (k, v) = curve.locate(norm(u));
        (curve.point_local(k, v), curve.derivative_local(k, v) * m, curve.second_derivative_local(k, v) * (m * m))
    };
    for _ in 0..30 {
        let (pt, dt, ddt) = jets(t);
        let (ps, ds, dds) = jets(s);
        let d = pt - ps;
        let g = [d.dot(dt), -d.dot(ds)];
        let h11 = dt.dot(dt) + d.dot(ddt);
        let h22 = ds.dot(ds) - d.dot(dds);
        let h12 = -dt.dot(ds);
        let det = h11 * h22 - h12 * h12;
        if !(det > 0.0 && h11 > 0.0) {
            break;
        }
        let dt_step = (-g[0] * h22 + g[1] * h12) / det;
        let ds_step = (g[0] * h12 - g[1] * h11) / det;
        if dt_step.abs() > 2.0 * step || ds_step.abs() > 2.0 * step {
            break;
        }
        let (nt, ns) = (t + dt_step, s + ds_step);
        if at(nt).distance(at(ns)) > d.norm() {
            break;
        }
        t = nt;
        s = ns;
        if dt_step.abs().max(ds_step.abs()) < 1e-15 {
            break;
        }
    }
    let (t, s) = (norm(t), norm(s));
    (t.min(s), t.max(s), at(t).distance(at(s)))
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - (b - a) * INV_PHI;
    let mut d = a + (b - a) * INV_PHI;
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * INV_PHI;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * INV_PHI;
            fd = f(d);
        }
    }
    let m = (a + b) / 2.0;
    // endpoints may beat the interior on monotone stretches
    [a, m, b].into_iter().min_by(|x, y| f(*x).total_cmp(&f(*y))).unwrap_or(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Containment {
    pub contained: bool,
    pub max_distance: f64,
    pub worst_parameter: f64,
    pub radius: f64,
}

/// Whether the aligned PL curve stays strictly within distance `r` of the
/// Bézier curve at every sample.
pub fn pipe_contains(
    curve: &CompositeBezier,
    result: &SubdivisionResult,
    r: f64,
    samples: usize,
) -> Result<Containment> {
    let SampledMax { value, parameter } = parameterwise_distance(curve, result, samples)?;
    Ok(Containment { contained: value < r, max_distance: value, worst_parameter: parameter, radius: r })
}

/// Indexed triangle mesh with 0-based indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Mesh {
    pub vertices: Vec<Point3>,
    pub faces: Vec<[usize; 3]>,
    /// Spine point each vertex was swept from.
    pub spine: Vec<Point3>,
    pub rotation_minimizing_frames: usize,
}

impl Mesh {
    /// `v x y z` and `f i j k` lines with 1-based indices.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            let _ = writeln!(out, "v {:.16e} {:.16e} {:.16e}", v.x, v.y, v.z);
        }
        for f in &self.faces {
            let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
        }
        out
    }
}

/// Samples `c(t) + r(cos θ n(t) + sin θ b(t))` on a grid and stitches the
/// quads into triangles.
pub fn pipe_surface_mesh(curve: &CompositeBezier, r: f64, density_t: usize, density_theta: usize) -> Result<Mesh> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("pipe radius must be positive, got {r}")));
    }
    if density_t < 2 || density_theta < 3 {
        return Err(Error::InvalidInput("mesh needs at least 2 rings of 3 vertices".into()));
    }
    let params: Vec<f64> = (0..density_t).map(|k| k as f64 / (density_t - 1) as f64).collect();
    let fr = frames(curve, &params)?;
    let mut mesh = Mesh {
        rotation_minimizing_frames: fr.iter().filter(|f| f.rotation_minimizing).count(),
        ..Mesh::default()
    };
    for (&t, f) in params.iter().zip(&fr) {
        let c = curve.evaluate(t)?;
        for j in 0..density_theta {
            let theta = 2.0 * PI * j as f64 / density_theta as f64;
            mesh.vertices.push(c + (f.normal * theta.cos() + f.binormal * theta.sin()) * r);
            mesh.spine.push(c);
        }
    }
    for i in 0..density_t - 1 {
        for j in 0..density_theta {
            let a = i * density_theta + j;
            let b = i * density_theta + (j + 1) % density_theta;
            let c = a + density_theta;
            let d = b + density_theta;
            mesh.faces.push([a, b, d]);
            mesh.faces.push([a, d, c]);
        }
    }
    Ok(mesh)
}
