//! Composite Bézier curves, their control polygons, de Casteljau subdivision
//! and derivative polygons.
//!
//! Parameters come in two flavours. The *global* parameter `t ∈ [0,1]` runs
//! over the whole composite curve, with segment `k` of `S` occupying
//! `[k/S, (k+1)/S]`. The *local* parameter runs over `[0,1]` inside one
//! segment. Every derivative in this crate (hodographs, discrete
//! derivatives) is taken with respect to the local parameter. A piece
//! produced by `i` midpoint subdivisions covers a dyadic local interval of
//! width `2^-i`, and its [`ControlPolygon::interval`] records that interval.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{estimate_sigma, SigmaEstimate, SigmaOptions};
use crate::point::{Aabb, Point3};
use crate::verify::is_simple_polyline;

/// Default cap on the number of subdivision iterations.
pub const DEFAULT_ITERATION_CAP: u32 = 64;

/// Hard cap on the number of vertices a subdivision may materialise.
pub const MAX_SUBDIVISION_VERTICES: u64 = 1 << 27;

/// Closed parameter interval `[start, end]` with `start < end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamInterval {
    pub start: f64,
    pub end: f64,
}

impl ParamInterval {
    pub const UNIT: ParamInterval = ParamInterval { start: 0.0, end: 1.0 };

    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite() && start < end) {
            return Err(Error::InvalidInput(format!("empty parameter interval [{start}, {end}]")));
        }
        Ok(Self { start, end })
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.end - self.start
    }

    #[inline]
    pub fn mid(&self) -> f64 {
        (self.start + self.end) / 2.0
    }

    #[inline]
    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }
}

/// An ordered vertex list together with the parameter interval it covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlPolygon {
    vertices: Vec<Point3>,
    interval: ParamInterval,
}

impl ControlPolygon {
    /// Polygon over the unit interval. Needs at least one finite vertex;
    /// use [`ControlPolygon::check_edges`] for the two-vertex requirement of
    /// a proper control polygon (derivative polygons may be a single point).
    pub fn new(vertices: Vec<Point3>) -> Result<Self> {
        Self::with_interval(vertices, ParamInterval::UNIT)
    }

    pub fn with_interval(vertices: Vec<Point3>, interval: ParamInterval) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidInput("control polygon needs at least one vertex".into()));
        }
        if let Some(i) = vertices.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidInput(format!("vertex {i} is not finite")));
        }
        ParamInterval::new(interval.start, interval.end)?;
        Ok(Self { vertices, interval })
    }

    fn check_edges(&self) -> Result<()> {
        if self.vertices.len() < 2 {
            return Err(Error::Domain("control polygon needs at least two vertices".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    #[inline]
    pub fn interval(&self) -> ParamInterval {
        self.interval
    }

    /// Polynomial degree of the Bézier curve this polygon controls.
    #[inline]
    pub fn degree(&self) -> usize {
        self.vertices.len() - 1
    }

    #[inline]
    pub fn first(&self) -> Point3 {
        self.vertices[0]
    }

    #[inline]
    pub fn last(&self) -> Point3 {
        self.vertices[self.vertices.len() - 1]
    }

    /// Point on the Bézier curve controlled by this polygon, at `s` in the
    /// normalised parameter `[0,1]` of the polygon (not its interval).
    pub fn bezier_point(&self, s: f64) -> Point3 {
        de_casteljau(&self.vertices, s)
    }

    /// Splits the polygon at parameter ½. The left half's last vertex is the
    /// right half's first vertex (the same stored value).
    pub fn subdivide_once(&self) -> Result<(ControlPolygon, ControlPolygon)> {
        self.check_edges()?;
        let n = self.degree();
        let mut work = self.vertices.clone();
        let mut left = Vec::with_capacity(n + 1);
        let mut right = vec![Point3::ORIGIN; n + 1];
        left.push(work[0]);
        right[n] = work[n];
        for level in 1..=n {
            for j in 0..=(n - level) {
                work[j] = work[j].midpoint(work[j + 1]);
            }
            left.push(work[0]);
            right[n - level] = work[n - level];
        }
        let mid = self.interval.mid();
        let li = ParamInterval { start: self.interval.start, end: mid };
        let ri = ParamInterval { start: mid, end: self.interval.end };
        Ok((
            ControlPolygon { vertices: left, interval: li },
            ControlPolygon { vertices: right, interval: ri },
        ))
    }

    /// Control polygon of the derivative curve with respect to the
    /// normalised parameter: vertices `n·(p_{j+1} − p_j)`.
    pub fn hodograph(&self) -> Result<ControlPolygon> {
        if self.vertices.len() < 2 {
            return Err(Error::Domain("hodograph of a degree-0 polygon".into()));
        }
        let n = self.degree() as f64;
        let vertices = self.vertices.windows(2).map(|w| (w[1] - w[0]) * n).collect();
        Ok(ControlPolygon { vertices, interval: self.interval })
    }

    /// First-difference polygon under the uniform parametrization of this
    /// polygon over its own interval: `(p_{j+1} − p_j) / ((b − a)/n)`.
    pub fn discrete_derivative(&self) -> Result<ControlPolygon> {
        if self.vertices.len() < 2 {
            return Err(Error::Domain("discrete derivative of a degree-0 polygon".into()));
        }
        let scale = self.degree() as f64 / self.interval.width();
        let vertices = self.vertices.windows(2).map(|w| (w[1] - w[0]) * scale).collect();
        Ok(ControlPolygon { vertices, interval: self.interval })
    }

    /// Uniform piecewise-linear interpolation: vertex `j` sits at
    /// `a + j(b−a)/n` and the polygon is linear between nodes.
    pub fn pl_evaluate(&self, t: f64) -> Result<Point3> {
        if !self.interval.contains(t) {
            return Err(Error::Domain(format!(
                "parameter {t} outside [{}, {}]",
                self.interval.start, self.interval.end
            )));
        }
        Ok(self.pl_at_unit((t - self.interval.start) / self.interval.width()))
    }

    /// PL interpolation at `s ∈ [0,1]` of the normalised parameter.
    pub(crate) fn pl_at_unit(&self, s: f64) -> Point3 {
        let n = self.degree();
        if n == 0 {
            return self.vertices[0];
        }
        let x = (s * n as f64).clamp(0.0, n as f64);
        let j = (x.floor() as usize).min(n - 1);
        self.vertices[j].lerp(self.vertices[j + 1], x - j as f64)
    }

    /// Index of the edge containing normalised parameter `s`.
    pub(crate) fn edge_at_unit(&self, s: f64) -> usize {
        let n = self.degree();
        let x = (s * n as f64).clamp(0.0, n as f64);
        (x.floor() as usize).min(n.saturating_sub(1))
    }
}

/// de Casteljau evaluation at `t`.
pub(crate) fn de_casteljau(points: &[Point3], t: f64) -> Point3 {
    const STACK: usize = 16;
    let n = points.len();
    if n == 1 {
        return points[0];
    }
    if n <= STACK {
        let mut buf = [Point3::ORIGIN; STACK];
        buf[..n].copy_from_slice(points);
        reduce(&mut buf[..n], t)
    } else {
        let mut buf = points.to_vec();
        reduce(&mut buf, t)
    }
}

fn reduce(buf: &mut [Point3], t: f64) -> Point3 {
    let n = buf.len();
    for level in 1..n {
        for j in 0..(n - level) {
            buf[j] = buf[j].lerp(buf[j + 1], t);
        }
    }
    buf[0]
}

/// Equal-degree Bézier segments joined end to end.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeBezier {
    degree: usize,
    segments: Vec<ControlPolygon>,
    hodographs: Vec<ControlPolygon>,
    second_hodographs: Vec<ControlPolygon>,
}

impl CompositeBezier {
    /// Builds a composite curve. Every segment must have `degree + 1` finite
    /// vertices and consecutive segments must share their junction point
    /// exactly. C¹ continuity and regularity are checked by [`validate`].
    pub fn new(degree: usize, segments: Vec<Vec<Point3>>) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidInput("degree must be at least 1".into()));
        }
        if segments.is_empty() {
            return Err(Error::InvalidInput("curve needs at least one segment".into()));
        }
        for (k, seg) in segments.iter().enumerate() {
            if seg.len() != degree + 1 {
                return Err(Error::InvalidInput(format!(
                    "segment {k} has {} control points, expected {} for degree {degree}",
                    seg.len(),
                    degree + 1
                )));
            }
        }
        for k in 1..segments.len() {
            if segments[k - 1][degree] != segments[k][0] {
                return Err(Error::Validation {
                    assumption: "shared junction",
                    detail: format!("junction {k}: segment {} does not start where segment {} ends", k, k - 1),
                });
            }
        }
        let segments = segments
            .into_iter()
            .map(ControlPolygon::new)
            .collect::<Result<Vec<_>>>()?;
        let hodographs = segments.iter().map(|s| s.hodograph()).collect::<Result<Vec<_>>>()?;
        let second_hodographs = hodographs
            .iter()
            .map(|h| {
                if h.vertices.len() >= 2 {
                    h.hodograph()
                } else {
                    ControlPolygon::new(vec![Point3::ORIGIN])
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { degree, segments, hodographs, second_hodographs })
    }

    pub fn single(vertices: Vec<Point3>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidInput("a segment needs at least two control points".into()));
        }
        Self::new(vertices.len() - 1, vec![vertices])
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn segments(&self) -> &[ControlPolygon] {
        &self.segments
    }

    #[inline]
    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    /// Hodograph (local-parameter derivative polygon) of each segment.
    #[inline]
    pub fn hodographs(&self) -> &[ControlPolygon] {
        &self.hodographs
    }

    pub fn bounding_box(&self) -> Aabb {
        Aabb::from_points(self.segments.iter().flat_map(|s| s.vertices.iter()))
            .expect("curve has vertices")
    }

    /// Maps a global parameter to `(segment, local parameter)`.
    pub fn locate(&self, t: f64) -> (usize, f64) {
        let s = self.segments.len();
        let x = t * s as f64;
        let k = (x.floor().max(0.0) as usize).min(s - 1);
        (k, (x - k as f64).clamp(0.0, 1.0))
    }

    /// Point on the curve at global parameter `t ∈ [0,1]`.
    pub fn evaluate(&self, t: f64) -> Result<Point3> {
        check_unit(t)?;
        let (k, s) = self.locate(t);
        Ok(self.segments[k].bezier_point(s))
    }

    #[inline]
    pub fn point_local(&self, segment: usize, s: f64) -> Point3 {
        self.segments[segment].bezier_point(s)
    }

    /// First derivative with respect to the local parameter.
    #[inline]
    pub fn derivative_local(&self, segment: usize, s: f64) -> Point3 {
        self.hodographs[segment].bezier_point(s)
    }

    #[inline]
    pub fn second_derivative_local(&self, segment: usize, s: f64) -> Point3 {
        self.second_hodographs[segment].bezier_point(s)
    }

    /// Local-parameter derivative at global parameter `t`.
    pub fn derivative(&self, t: f64) -> Result<Point3> {
        check_unit(t)?;
        let (k, s) = self.locate(t);
        Ok(self.derivative_local(k, s))
    }

    pub fn start_point(&self) -> Point3 {
        self.segments[0].first()
    }

    pub fn end_point(&self) -> Point3 {
        self.segments[self.segments.len() - 1].last()
    }

    /// The curve ends where it starts.
    pub fn is_closed(&self) -> bool {
        self.start_point() == self.end_point()
    }
}

/// Relative tolerance for derivative mismatch at junctions, scaled by the
/// largest hodograph vertex.
pub const C1_REL: f64 = 1e-9;

/// Findings of [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `‖ℬ′_k(1) − ℬ′_{k+1}(0)‖` per junction, closing junction last.
    pub c1_residuals: Vec<f64>,
    pub c1_tolerance: f64,
    pub sigma: Option<SigmaEstimate>,
    /// A coarse sample polyline of the curve is not simple. Informational:
    /// the pipe estimate makes the decisive check.
    pub sampled_self_intersection: bool,
    pub violations: Vec<String>,
}

impl Diagnostics {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// Turns the first violation into an error.
    pub fn into_result(self) -> Result<Self> {
        match self.violations.first() {
            None => Ok(self),
            Some(v) => Err(Error::Validation { assumption: "curve preconditions", detail: v.clone() }),
        }
    }
}

/// Checks C¹ continuity at every junction (including the closing one of a
/// closed curve) and certifies regularity.
pub fn validate(curve: &CompositeBezier) -> Result<Diagnostics> {
    let hodos = curve.hodographs();
    let scale = hodos
        .iter()
        .flat_map(|h| h.vertices().iter().map(|v| v.norm()))
        .fold(0.0, f64::max);
    let tolerance = C1_REL * scale;
    let mut junctions: Vec<(usize, usize)> = (1..hodos.len()).map(|k| (k - 1, k)).collect();
    if curve.is_closed() {
        junctions.push((hodos.len() - 1, 0));
    }
    let mut violations = Vec::new();
    let c1_residuals: Vec<f64> = junctions
        .iter()
        .map(|&(a, b)| {
            let r = hodos[a].last().distance(hodos[b].first());
            if !(r <= tolerance) {
                violations.push(format!(
                    "tangent mismatch {r:e} between segments {a} and {b} exceeds {tolerance:e}"
                ));
            }
            r
        })
        .collect();

    let sigma = match estimate_sigma(curve, SigmaOptions::default()) {
        Ok(est) => Some(est),
        Err(e @ Error::RegularityUnverified(_)) => {
            violations.push(e.to_string());
            None
        }
        Err(e) => return Err(e),
    };

    let count = 64 * curve.segment_count() + 1;
    let mut samples: Vec<Point3> = (0..count)
        .map(|k| curve.evaluate(k as f64 / (count - 1) as f64).expect("in range"))
        .collect();
    samples.dedup();
    let sampled_self_intersection = !is_simple_polyline(&samples, curve.is_closed()).simple;

    Ok(Diagnostics { c1_residuals, c1_tolerance: tolerance, sigma, sampled_self_intersection, violations })
}

fn check_unit(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("parameter {t} outside [0, 1]")));
    }
    Ok(())
}

/// The output of `i` rounds of midpoint subdivision.
#[derive(Debug, Clone, PartialEq)]
pub struct SubdivisionResult {
    iterations: u32,
    degree: usize,
    segment_count: usize,
    pieces: Vec<ControlPolygon>,
}

impl SubdivisionResult {
    #[inline]
    pub fn iterations(&self) -> u32 {
        self.iterations
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn segment_count(&self) -> usize {
        self.segment_count
    }

    /// `2^i` pieces per original segment, in curve order.
    #[inline]
    pub fn pieces(&self) -> &[ControlPolygon] {
        &self.pieces
    }

    #[inline]
    pub fn pieces_per_segment(&self) -> usize {
        1usize << self.iterations
    }

    /// Original segment that piece `index` belongs to.
    #[inline]
    pub fn segment_of(&self, index: usize) -> usize {
        index >> self.iterations
    }

    /// Concatenated global PL curve; shared endpoints appear once.
    pub fn union_polygon(&self) -> Vec<Point3> {
        let mut out = Vec::with_capacity(self.pieces.len() * self.degree + 1);
        out.push(self.pieces[0].first());
        for p in &self.pieces {
            out.extend_from_slice(&p.vertices()[1..]);
        }
        out
    }

    /// Maps a global parameter to `(piece index, normalised parameter in piece)`.
    pub fn locate(&self, t: f64) -> (usize, f64) {
        let total = self.pieces.len();
        let x = t * total as f64;
        let k = (x.floor().max(0.0) as usize).min(total - 1);
        (k, (x - k as f64).clamp(0.0, 1.0))
    }

    /// The aligned PL curve 𝒫(t) at global parameter `t`.
    pub fn pl_evaluate(&self, t: f64) -> Result<Point3> {
        check_unit(t)?;
        let (k, s) = self.locate(t);
        Ok(self.pieces[k].pl_at_unit(s))
    }

    /// Point on the Bézier curve reconstructed from the pieces.
    pub fn bezier_evaluate(&self, t: f64) -> Result<Point3> {
        check_unit(t)?;
        let (k, s) = self.locate(t);
        Ok(self.pieces[k].bezier_point(s))
    }

    /// Pieces reinterpreted as a composite curve of `S·2^i` segments.
    pub fn to_composite(&self) -> Result<CompositeBezier> {
        CompositeBezier::new(
            self.degree,
            self.pieces.iter().map(|p| p.vertices().to_vec()).collect(),
        )
    }
}

/// `i` rounds of midpoint subdivision over every segment, with the default cap.
pub fn subdivide(curve: &CompositeBezier, iterations: u32) -> Result<SubdivisionResult> {
    subdivide_capped(curve, iterations, DEFAULT_ITERATION_CAP)
}

pub fn subdivide_capped(curve: &CompositeBezier, iterations: u32, cap: u32) -> Result<SubdivisionResult> {
    if iterations > cap {
        return Err(Error::Resource {
            what: "subdivision iterations",
            requested: iterations as u64,
            cap: cap as u64,
        });
    }
    let per_segment = 1u64.checked_shl(iterations).unwrap_or(u64::MAX);
    let vertices = per_segment
        .saturating_mul(curve.segment_count() as u64)
        .saturating_mul(curve.degree() as u64 + 1);
    if iterations >= 63 || vertices > MAX_SUBDIVISION_VERTICES {
        return Err(Error::Resource {
            what: "subdivision vertices",
            requested: vertices,
            cap: MAX_SUBDIVISION_VERTICES,
        });
    }
    let mut pieces: Vec<ControlPolygon> = curve.segments().to_vec();
    for _ in 0..iterations {
        let mut next = Vec::with_capacity(pieces.len() * 2);
        for p in &pieces {
            let (l, r) = p.subdivide_once()?;
            next.push(l);
            next.push(r);
        }
        pieces = next;
    }
    Ok(SubdivisionResult {
        iterations,
        degree: curve.degree(),
        segment_count: curve.segment_count(),
        pieces,
    })
}
