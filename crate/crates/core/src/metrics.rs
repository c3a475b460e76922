//! Geometric quantities that feed the iteration bounds.

use serde::{Deserialize, Serialize};

use crate::curve::{CompositeBezier, ControlPolygon};
use crate::error::{Error, Result};
use crate::point::{Aabb, Point3};

/// Relative tolerance for zero-length edges (scaled by the bounding-box diagonal).
pub const DEGENERATE_EDGE_REL: f64 = 1e-12;

/// Turning angle in `[0, π]` between directions `b − a` and `c − b`.
pub fn exterior_angle(a: Point3, b: Point3, c: Point3) -> Result<f64> {
    let diag = Aabb::from_points(&[a, b, c]).map(|bb| bb.diagonal()).unwrap_or(0.0);
    exterior_angle_with_tolerance(a, b, c, DEGENERATE_EDGE_REL * diag)
}

/// [`exterior_angle`] with an explicit zero-edge tolerance.
pub fn exterior_angle_with_tolerance(a: Point3, b: Point3, c: Point3, eps: f64) -> Result<f64> {
    let u = b - a;
    let v = c - b;
    if u.norm() <= eps {
        return Err(Error::DegenerateEdge { index: 0 });
    }
    if v.norm() <= eps {
        return Err(Error::DegenerateEdge { index: 1 });
    }
    Ok(angle_between(u, v))
}

/// Angle between two nonzero vectors, via atan2(|u×v|, u·v).
#[inline]
pub fn angle_between(u: Point3, v: Point3) -> f64 {
    u.cross(v).norm().atan2(u.dot(v))
}

/// Exterior angles at the interior vertices of an open polyline, or at every
/// vertex of a closed one. A closed polyline may repeat its first vertex at
/// the end; the repeat is ignored.
pub fn exterior_angles(vertices: &[Point3], closed: bool) -> Result<Vec<f64>> {
    let diag = Aabb::from_points(vertices).map(|bb| bb.diagonal()).unwrap_or(0.0);
    let eps = DEGENERATE_EDGE_REL * diag;
    let mut v = vertices;
    if closed && v.len() > 1 && v[0] == v[v.len() - 1] {
        v = &v[..v.len() - 1];
    }
    let m = v.len();
    if m < 3 {
        return Err(Error::InvalidInput(format!("total curvature needs 3 vertices, got {m}")));
    }
    for k in 0..m {
        let next = if k + 1 < m { k + 1 } else if closed { 0 } else { break };
        if (v[next] - v[k]).norm() <= eps {
            return Err(Error::DegenerateEdge { index: k });
        }
    }
    let angle = |a: usize, b: usize, c: usize| angle_between(v[b] - v[a], v[c] - v[b]);
    let mut out = Vec::with_capacity(m);
    if closed {
        for k in 0..m {
            out.push(angle((k + m - 1) % m, k, (k + 1) % m));
        }
    } else {
        for k in 1..m - 1 {
            out.push(angle(k - 1, k, k + 1));
        }
    }
    Ok(out)
}

/// Sum of exterior angles.
pub fn total_curvature(vertices: &[Point3], closed: bool) -> Result<f64> {
    Ok(exterior_angles(vertices, closed)?.iter().sum())
}

/// Per-axis maximum absolute second difference of a polygon and its norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondDifference {
    pub per_axis: Point3,
    pub norm: f64,
    /// Set when the polygon had fewer than three vertices (value is zero).
    pub degenerate: bool,
}

impl SecondDifference {
    pub const ZERO: SecondDifference =
        SecondDifference { per_axis: Point3::ORIGIN, norm: 0.0, degenerate: true };

    /// Component-wise max of two second-difference vectors.
    pub fn combine(self, o: SecondDifference) -> SecondDifference {
        let per_axis = self.per_axis.max_components(o.per_axis);
        SecondDifference { per_axis, norm: per_axis.norm(), degenerate: self.degenerate && o.degenerate }
    }
}

pub fn second_difference_norm(vertices: &[Point3]) -> SecondDifference {
    if vertices.len() < 3 {
        return SecondDifference::ZERO;
    }
    let per_axis = vertices
        .windows(3)
        .map(|w| (w[0] - w[1] * 2.0 + w[2]).abs())
        .fold(Point3::ORIGIN, Point3::max_components);
    SecondDifference { per_axis, norm: per_axis.norm(), degenerate: false }
}

/// `⌊n/2⌋·⌈n/2⌉ / (2n)`.
pub fn n_infinity(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("N_inf(n) needs n >= 1".into()));
    }
    let lo = (n / 2) as f64;
    let hi = n.div_ceil(2) as f64;
    Ok(lo * hi / (2.0 * n as f64))
}

/// Largest distance between consecutive vertices of any segment's initial
/// discrete-derivative polygon.
pub fn max_first_difference(curve: &CompositeBezier) -> f64 {
    curve
        .segments()
        .iter()
        .map(|s| {
            let d = s.discrete_derivative().expect("segments have degree >= 1");
            max_consecutive_distance(d.vertices())
        })
        .fold(0.0, f64::max)
}

pub fn max_consecutive_distance(vertices: &[Point3]) -> f64 {
    vertices.windows(2).map(|w| w[0].distance(w[1])).fold(0.0, f64::max)
}

/// Distance bound between the curve and its control polygon after `i`
/// subdivisions: `2^{-2i} N_∞(n) ‖Δ₂P‖`.
pub fn b_dist(i: u32, n: usize, delta2_norm: f64) -> f64 {
    scaled_distance_bound(i as f64, n_infinity(n).unwrap_or(0.0), delta2_norm)
}

/// Distance bound between the hodograph and the discrete-derivative polygon
/// after `i` subdivisions: `2^{-2i} N_∞(n−1) ‖Δ₂P′‖`; zero for `n < 2`.
pub fn b_prime_dist(i: u32, n: usize, delta2_prime_norm: f64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    scaled_distance_bound(i as f64, n_infinity(n - 1).unwrap_or(0.0), delta2_prime_norm)
}

#[inline]
pub(crate) fn scaled_distance_bound(i: f64, n_inf: f64, norm: f64) -> f64 {
    (-2.0 * i).exp2() * n_inf * norm
}

/// Tuning for the certified lower bound on `min ‖ℬ′‖`.
#[derive(Debug, Clone, Copy)]
pub struct SigmaOptions {
    /// Stop refining a piece once its bound is within this fraction of the
    /// best sampled value.
    pub relative_tolerance: f64,
    pub max_depth: u32,
    pub max_pieces: usize,
}

impl Default for SigmaOptions {
    fn default() -> Self {
        Self { relative_tolerance: 5e-3, max_depth: 48, max_pieces: 1 << 20 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaEstimate {
    /// Certified lower bound on `min_t ‖ℬ′(t)‖`.
    pub lower_bound: f64,
    /// Smallest `‖ℬ′‖` seen at any evaluated parameter (an upper bound).
    pub sampled_min: f64,
    pub pieces_examined: usize,
}

pub fn min_derivative_norm_sigma(curve: &CompositeBezier) -> Result<f64> {
    Ok(estimate_sigma(curve, SigmaOptions::default())?.lower_bound)
}

/// Lower-bounds the hodograph norm by subdividing each segment's hodograph
/// until every piece's convex hull is separated from the origin.
pub fn estimate_sigma(curve: &CompositeBezier, opts: SigmaOptions) -> Result<SigmaEstimate> {
    let mut upper = f64::INFINITY;
    for h in curve.hodographs() {
        for s in [0.0, 0.5, 1.0] {
            upper = upper.min(h.bezier_point(s).norm());
        }
    }
    let mut lower = f64::INFINITY;
    let mut examined = 0usize;
    for (k, h) in curve.hodographs().iter().enumerate() {
        let mut stack: Vec<(ControlPolygon, u32)> = vec![(h.clone(), 0)];
        while let Some((piece, depth)) = stack.pop() {
            examined += 1;
            let mid = piece.bezier_point(0.5);
            upper = upper.min(mid.norm());
            let lb = hull_separation(piece.vertices(), mid);
            let settled = piece.vertices().len() == 1 || lb >= (1.0 - opts.relative_tolerance) * upper;
            if settled {
                if lb <= 0.0 {
                    return Err(Error::RegularityUnverified(format!(
                        "segment {k}: hodograph vanishes"
                    )));
                }
                lower = lower.min(lb);
                continue;
            }
            if depth >= opts.max_depth || examined >= opts.max_pieces {
                if lb > 0.0 {
                    lower = lower.min(lb);
                    continue;
                }
                return Err(Error::RegularityUnverified(format!(
                    "segment {k}: cannot separate the hodograph from the origin near local parameter {:.6}",
                    piece.interval().mid()
                )));
            }
            let (l, r) = piece.subdivide_once()?;
            stack.push((r, depth + 1));
            stack.push((l, depth + 1));
        }
    }
    Ok(SigmaEstimate { lower_bound: lower, sampled_min: upper, pieces_examined: examined })
}

/// Supporting-plane lower bound on the distance from the origin to the hull
/// of `vertices`; nonpositive when the plane does not separate.
fn hull_separation(vertices: &[Point3], mid: Point3) -> f64 {
    let centroid = vertices.iter().fold(Point3::ORIGIN, |a, &b| a + b) / vertices.len() as f64;
    [mid, centroid]
        .into_iter()
        .filter_map(Point3::normalized)
        .map(|d| vertices.iter().map(|v| d.dot(*v)).fold(f64::INFINITY, f64::min))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Curve-level inputs to every iteration bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricConstants {
    pub degree: usize,
    /// Max consecutive-vertex distance of the initial discrete-derivative polygons.
    pub m: f64,
    /// Certified lower bound on `min ‖ℬ′‖`.
    pub sigma: f64,
    pub delta2_p: SecondDifference,
    pub delta2_pprime: SecondDifference,
    pub pipe_radius: f64,
}

impl GeometricConstants {
    /// Computes every constant except the pipe radius, which the caller supplies.
    pub fn from_curve(curve: &CompositeBezier, pipe_radius: f64) -> Result<Self> {
        if !(pipe_radius > 0.0 && pipe_radius.is_finite()) {
            return Err(Error::Domain(format!("pipe radius must be positive, got {pipe_radius}")));
        }
        let delta2_p = curve
            .segments()
            .iter()
            .map(|s| second_difference_norm(s.vertices()))
            .fold(SecondDifference::ZERO, SecondDifference::combine);
        let delta2_pprime = curve
            .hodographs()
            .iter()
            .map(|h| second_difference_norm(h.vertices()))
            .fold(SecondDifference::ZERO, SecondDifference::combine);
        Ok(Self {
            degree: curve.degree(),
            m: max_first_difference(curve),
            sigma: min_derivative_norm_sigma(curve)?,
            delta2_p,
            delta2_pprime,
            pipe_radius,
        })
    }

    pub fn b_dist(&self, i: u32) -> f64 {
        b_dist(i, self.degree, self.delta2_p.norm)
    }

    pub fn b_prime_dist(&self, i: u32) -> f64 {
        b_prime_dist(i, self.degree, self.delta2_pprime.norm)
    }
}
