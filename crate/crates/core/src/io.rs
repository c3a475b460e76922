//! Curve files, polyline output, reports and the command implementations
//! behind the `beztopo` binary.
//!
//! Curve file grammar (one item per line, `#` starts a comment line, blank
//! lines are ignored):
//!
//! ```text
//! bezier <version> <degree> <num_segments>
//! pipe_radius <r>                      (optional)
//! segment                              (num_segments times)
//! <x> <y> <z>                          (degree + 1 times per segment)
//! polyline <count>                     (optional, written by `subdivide`)
//! <x> <y> <z>                          (count times)
//! ```
//!
//! Numbers are written with 17 significant digits so every double survives a
//! round trip exactly.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};

use crate::bounds::IterationBounds;
use crate::curve::{subdivide, validate, CompositeBezier, Diagnostics, SubdivisionResult};
use crate::error::{Error, Result};
use crate::metrics::{n_infinity, GeometricConstants};
use crate::pipe::{estimate_pipe_radius, pipe_surface_mesh, PipeEstimate, PipeOptions};
use crate::point::Point3;
use crate::verify::{certify, CertifyOptions, Level, TopologyCertificate};

pub const FORMAT_VERSION: u32 = 1;

/// Parsed contents of a curve file.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveFile {
    pub format_version: u32,
    pub degree: usize,
    pub segments: Vec<Vec<Point3>>,
    pub pipe_radius: Option<f64>,
    /// Union polygon of the segments, present in `subdivide` output.
    pub polyline: Option<Vec<Point3>>,
}

impl CurveFile {
    pub fn from_curve(curve: &CompositeBezier) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            degree: curve.degree(),
            segments: curve.segments().iter().map(|s| s.vertices().to_vec()).collect(),
            pipe_radius: None,
            polyline: None,
        }
    }

    /// Writes the pieces of a subdivision as segments followed by their union
    /// polygon.
    pub fn from_subdivision(result: &SubdivisionResult) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            degree: result.degree(),
            segments: result.pieces().iter().map(|p| p.vertices().to_vec()).collect(),
            pipe_radius: None,
            polyline: Some(result.union_polygon()),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        let header = lines.expect_line("file header")?;
        let [kw, version, degree, count] = header.fixed::<4>("header `bezier <version> <degree> <num_segments>`")?;
        kw.keyword("bezier")?;
        let format_version: u32 = version.parse_int()?;
        if format_version != FORMAT_VERSION {
            return Err(version.error(format!("unsupported format version {format_version}")));
        }
        let degree_value: usize = degree.parse_int()?;
        if degree_value == 0 {
            return Err(degree.error("degree must be at least 1".into()));
        }
        let degree = degree_value;
        let count_value: usize = count.parse_int()?;
        if count_value == 0 {
            return Err(count.error("at least one segment is required".into()));
        }
        let count = count_value;

        let mut pipe_radius = None;
        if lines.peek_keyword() == Some("pipe_radius") {
            let line = lines.expect_line("pipe_radius")?;
            let [_, r] = line.fixed::<2>("`pipe_radius <r>`")?;
            let value = r.parse_real()?;
            if !(value > 0.0) {
                return Err(r.error("pipe radius must be positive".into()));
            }
            pipe_radius = Some(value);
        }

        let mut segments = Vec::with_capacity(count);
        for k in 0..count {
            let line = lines.expect_line(&format!("segment {k}"))?;
            let [kw] = line.fixed::<1>("`segment`")?;
            kw.keyword("segment")?;
            let mut pts = Vec::with_capacity(degree + 1);
            for j in 0..=degree {
                let line = lines.expect_line(&format!("control point {j} of segment {k}"))?;
                if line.tokens[0].text.chars().next().is_some_and(char::is_alphabetic) {
                    return Err(line.tokens[0].error(format!(
                        "segment {k} has {j} control points, degree {degree} needs {}",
                        degree + 1
                    )));
                }
                pts.push(line.point()?);
            }
            segments.push(pts);
        }

        let mut polyline = None;
        if let Some(line) = lines.next_line() {
            let [kw, n] = line.fixed::<2>("`polyline <count>`")?;
            kw.keyword("polyline")?;
            let n: usize = n.parse_int()?;
            let mut pts = Vec::with_capacity(n);
            for j in 0..n {
                pts.push(lines.expect_line(&format!("polyline vertex {j}"))?.point()?);
            }
            polyline = Some(pts);
        }
        if let Some(line) = lines.next_line() {
            let what = if line.tokens[0].text == "segment" {
                format!("more than the {count} segments declared in the header")
            } else {
                "trailing content".to_string()
            };
            return Err(line.tokens[0].error(what));
        }

        let file = Self { format_version, degree, segments, pipe_radius, polyline };
        if let Some(pl) = &file.polyline {
            if *pl != union_of(&file.segments) {
                return Err(Error::Validation {
                    assumption: "polyline block",
                    detail: "polyline does not match the union of the segments".into(),
                });
            }
        }
        Ok(file)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "bezier {} {} {}", self.format_version, self.degree, self.segments.len());
        if let Some(r) = self.pipe_radius {
            let _ = writeln!(out, "pipe_radius {}", fmt_real(r));
        }
        for seg in &self.segments {
            out.push_str("segment\n");
            for p in seg {
                write_point(&mut out, *p);
            }
        }
        if let Some(pl) = &self.polyline {
            write_polyline_into(&mut out, pl);
        }
        out
    }

    pub fn to_curve(&self) -> Result<CompositeBezier> {
        CompositeBezier::new(self.degree, self.segments.clone())
    }
}

fn union_of(segments: &[Vec<Point3>]) -> Vec<Point3> {
    let mut out = vec![segments[0][0]];
    for s in segments {
        out.extend_from_slice(&s[1..]);
    }
    out
}

/// Scientific notation with 17 significant digits.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_point(out: &mut String, p: Point3) {
    let _ = writeln!(out, "{} {} {}", fmt_real(p.x), fmt_real(p.y), fmt_real(p.z));
}

fn write_polyline_into(out: &mut String, vertices: &[Point3]) {
    let _ = writeln!(out, "polyline {}", vertices.len());
    for p in vertices {
        write_point(out, *p);
    }
}

pub fn write_polyline(vertices: &[Point3]) -> String {
    let mut out = String::new();
    write_polyline_into(&mut out, vertices);
    out
}

pub fn parse_polyline(text: &str) -> Result<Vec<Point3>> {
    let mut lines = Lines::new(text);
    let line = lines.expect_line("polyline header")?;
    let [kw, n] = line.fixed::<2>("`polyline <count>`")?;
    kw.keyword("polyline")?;
    let n: usize = n.parse_int()?;
    let pts = (0..n)
        .map(|j| lines.expect_line(&format!("polyline vertex {j}"))?.point())
        .collect::<Result<Vec<_>>>()?;
    if let Some(line) = lines.next_line() {
        return Err(line.tokens[0].error("trailing content".into()));
    }
    Ok(pts)
}

struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

impl Token<'_> {
    fn error(&self, message: String) -> Error {
        Error::Parse { line: self.line, column: self.column, message }
    }

    fn keyword(&self, kw: &str) -> Result<()> {
        if self.text != kw {
            return Err(self.error(format!("expected `{kw}`, found `{}`", self.text)));
        }
        Ok(())
    }

    fn parse_int<T: std::str::FromStr>(&self) -> Result<T> {
        self.text
            .parse()
            .map_err(|_| self.error(format!("expected a non-negative integer, found `{}`", self.text)))
    }

    fn parse_real(&self) -> Result<f64> {
        match self.text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(_) => Err(self.error(format!("non-finite number `{}`", self.text))),
            Err(_) => Err(self.error(format!("expected a number, found `{}`", self.text))),
        }
    }
}

struct Line<'a> {
    number: usize,
    width: usize,
    tokens: Vec<Token<'a>>,
}

impl<'a> Line<'a> {
    fn fixed<const K: usize>(self, what: &str) -> Result<[Token<'a>; K]> {
        let (number, width, found) = (self.number, self.width, self.tokens.len());
        let column = match self.tokens.get(K) {
            Some(t) => t.column,
            None => width + 1,
        };
        self.tokens.try_into().map_err(|_| Error::Parse {
            line: number,
            column,
            message: format!("expected {what} ({K} fields), found {found} fields"),
        })
    }

    fn point(self) -> Result<Point3> {
        let [x, y, z] = self.fixed::<3>("`x y z`")?;
        Ok(Point3::new(x.parse_real()?, y.parse_real()?, z.parse_real()?))
    }
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last_line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self { inner: text.lines().enumerate().peekable(), last_line: 0 }
    }

    fn skip_blank(&mut self) {
        while let Some((_, l)) = self.inner.peek() {
            let t = l.trim_start();
            if t.is_empty() || t.starts_with('#') {
                self.inner.next();
            } else {
                break;
            }
        }
    }

    fn peek_keyword(&mut self) -> Option<&'a str> {
        self.skip_blank();
        self.inner.peek().and_then(|(_, l)| l.split_whitespace().next())
    }

    fn next_line(&mut self) -> Option<Line<'a>> {
        self.skip_blank();
        let (idx, text) = self.inner.next()?;
        self.last_line = idx + 1;
        let mut tokens = Vec::new();
        let mut start = None;
        for (i, c) in text.char_indices().chain(std::iter::once((text.len(), ' '))) {
            match (c.is_whitespace(), start) {
                (false, None) => start = Some(i),
                (true, Some(s)) => {
                    tokens.push(Token { text: &text[s..i], line: idx + 1, column: text[..s].chars().count() + 1 });
                    start = None;
                }
                _ => {}
            }
        }
        Some(Line { number: idx + 1, width: text.chars().count(), tokens })
    }

    fn expect_line(&mut self, what: &str) -> Result<Line<'a>> {
        self.next_line().ok_or_else(|| Error::Parse {
            line: self.last_line + 1,
            column: 1,
            message: format!("unexpected end of file, expected {what}"),
        })
    }
}

/// A curve read from disk, checked against the modelling assumptions.
#[derive(Debug, Clone)]
pub struct LoadedCurve {
    pub file: CurveFile,
    pub curve: CompositeBezier,
    pub diagnostics: Diagnostics,
}

pub fn load_curve_str(text: &str) -> Result<LoadedCurve> {
    let file = CurveFile::parse(text)?;
    let curve = file.to_curve()?;
    let diagnostics = validate(&curve)?.into_result()?;
    Ok(LoadedCurve { file, curve, diagnostics })
}

pub fn load_curve(path: &Path) -> Result<LoadedCurve> {
    load_curve_str(&std::fs::read_to_string(path)?)
}

/// Everything a command produced, plus the inputs needed to rerun it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub input: ReportInput,
    pub diagnostics: Option<Diagnostics>,
    pub pipe: Option<PipeEstimate>,
    pub constants: Option<GeometricConstants>,
    pub bounds: Option<IterationBounds>,
    pub certificate: Option<TopologyCertificate>,
    pub output: Option<ReportOutput>,
    pub timing: Timing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportInput {
    pub path: String,
    pub degree: usize,
    pub segment_count: usize,
    pub control_points: Vec<Vec<[f64; 3]>>,
    /// Radius from the curve file or a flag; absent when estimated.
    pub pipe_radius: Option<f64>,
    pub options: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportOutput {
    pub path: Option<String>,
    pub iterations: Option<u32>,
    pub pieces: Option<usize>,
    pub union_vertices: Option<usize>,
    pub mesh_vertices: Option<usize>,
    pub mesh_faces: Option<usize>,
    pub n_infinity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_seconds: f64,
}

impl Report {
    fn new(command: &str, path: &Path, loaded: &LoadedCurve, pipe_radius: Option<f64>) -> Self {
        Self {
            command: command.into(),
            input: ReportInput {
                path: path.display().to_string(),
                degree: loaded.curve.degree(),
                segment_count: loaded.curve.segment_count(),
                control_points: loaded
                    .file
                    .segments
                    .iter()
                    .map(|s| s.iter().map(|p| p.to_array()).collect())
                    .collect(),
                pipe_radius,
                options: Map::new(),
            },
            diagnostics: Some(loaded.diagnostics.clone()),
            pipe: None,
            constants: None,
            bounds: None,
            certificate: None,
            output: None,
            timing: Timing { elapsed_seconds: 0.0 },
        }
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("report is serialisable")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serialisable")
    }

    pub fn to_tree(&self) -> String {
        write_tree(&self.to_value())
    }

    pub fn from_tree(text: &str) -> Result<Self> {
        serde_json::from_value(parse_tree(text)?)
            .map_err(|e| Error::InvalidInput(format!("report does not match the schema: {e}")))
    }
}

/// Renders a JSON value as an indented `key: value` tree. Array elements use
/// keys `[0]`, `[1]`, ...; strings are quoted; floats carry 17 significant
/// digits.
pub fn write_tree(value: &Value) -> String {
    let mut out = String::new();
    match value {
        Value::Object(map) => write_entries(&mut out, map.iter().map(|(k, v)| (k.clone(), v)).collect(), 0),
        other => {
            let _ = writeln!(out, "{}", scalar_text(other));
        }
    }
    out
}

fn write_entries(out: &mut String, entries: Vec<(String, &Value)>, depth: usize) {
    for (key, v) in entries {
        let pad = "  ".repeat(depth);
        match v {
            Value::Object(m) if !m.is_empty() => {
                let _ = writeln!(out, "{pad}{key}:");
                write_entries(out, m.iter().map(|(k, v)| (k.clone(), v)).collect(), depth + 1);
            }
            Value::Array(a) if !a.is_empty() => {
                let _ = writeln!(out, "{pad}{key}:");
                write_entries(out, a.iter().enumerate().map(|(i, v)| (format!("[{i}]"), v)).collect(), depth + 1);
            }
            other => {
                let _ = writeln!(out, "{pad}{key}: {}", scalar_text(other));
            }
        }
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::Null => "null".into(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) => u.to_string(),
            (_, Some(i), _) => i.to_string(),
            (_, _, Some(f)) => fmt_real(f),
            _ => n.to_string(),
        },
        Value::String(s) => Value::String(s.clone()).to_string(),
        Value::Array(_) => "[]".into(),
        Value::Object(_) => "{}".into(),
    }
}

fn parse_scalar(text: &str, line: usize, column: usize) -> Result<Value> {
    let err = |m: String| Error::Parse { line, column, message: m };
    match text {
        "null" => return Ok(Value::Null),
        "true" => return Ok(Value::Bool(true)),
        "false" => return Ok(Value::Bool(false)),
        "[]" => return Ok(Value::Array(Vec::new())),
        "{}" => return Ok(Value::Object(Map::new())),
        _ => {}
    }
    if text.starts_with('"') {
        return serde_json::from_str(text).map_err(|e| err(format!("bad string: {e}")));
    }
    if let Ok(u) = text.parse::<u64>() {
        return Ok(Value::Number(u.into()));
    }
    if let Ok(i) = text.parse::<i64>() {
        return Ok(Value::Number(i.into()));
    }
    match text.parse::<f64>().ok().and_then(Number::from_f64) {
        Some(n) => Ok(Value::Number(n)),
        None => Err(err(format!("unrecognised value `{text}`"))),
    }
}

/// Inverse of [`write_tree`].
pub fn parse_tree(text: &str) -> Result<Value> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let indent = raw.len() - raw.trim_start_matches(' ').len();
        if indent % 2 != 0 {
            return Err(Error::Parse { line: idx + 1, column: indent + 1, message: "odd indentation".into() });
        }
        let body = &raw[indent..];
        let Some(colon) = body.find(':') else {
            return Err(Error::Parse { line: idx + 1, column: indent + 1, message: "expected `key:`".into() });
        };
        let key = &body[..colon];
        let rest = body[colon + 1..].strip_prefix(' ').unwrap_or(&body[colon + 1..]);
        let value = if rest.is_empty() {
            None
        } else {
            Some(parse_scalar(rest, idx + 1, indent + colon + 3)?)
        };
        rows.push((idx + 1, indent / 2, key.to_string(), value));
    }
    let mut pos = 0;
    let map = parse_block(&rows, &mut pos, 0)?;
    Ok(map)
}

type Row = (usize, usize, String, Option<Value>);

fn parse_block(rows: &[Row], pos: &mut usize, depth: usize) -> Result<Value> {
    let mut entries: Vec<(String, Value)> = Vec::new();
    while let Some((line, d, key, value)) = rows.get(*pos) {
        if *d < depth {
            break;
        }
        if *d > depth {
            return Err(Error::Parse { line: *line, column: 1, message: "unexpected indentation".into() });
        }
        *pos += 1;
        let v = match value {
            Some(v) => v.clone(),
            None => parse_block(rows, pos, depth + 1)?,
        };
        entries.push((key.clone(), v));
    }
    let is_array = !entries.is_empty()
        && entries.iter().enumerate().all(|(i, (k, _))| *k == format!("[{i}]"));
    Ok(if is_array {
        Value::Array(entries.into_iter().map(|(_, v)| v).collect())
    } else {
        Value::Object(entries.into_iter().collect())
    })
}

/// Options shared by the commands that need a pipe radius.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RadiusFlags {
    /// Overrides both the curve file and the estimator.
    pub pipe_radius: Option<f64>,
    pub pipe: PipeOptions,
}

fn resolve_radius(curve: &CompositeBezier, file: &CurveFile, flags: &RadiusFlags) -> Result<(f64, Option<PipeEstimate>)> {
    match flags.pipe_radius.or(file.pipe_radius) {
        Some(r) => {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Domain(format!("pipe radius must be positive, got {r}")));
            }
            Ok((r, None))
        }
        None => {
            let est = estimate_pipe_radius(curve, flags.pipe)?;
            Ok((est.radius, Some(est)))
        }
    }
}

fn pipe_options_map(flags: &RadiusFlags) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("pipe_density".into(), flags.pipe.density.into());
    m.insert("pipe_safety".into(), flags.pipe.safety.into());
    m.insert("pipe_max_radius".into(), flags.pipe.max_radius.into());
    m
}

/// Geometric constants and every iteration bound. The N(ν) table always
/// holds π/(n−1) and π/(2(n−1)) (for n ≥ 2) followed by `extra_nus`.
pub fn cmd_bounds(path: &Path, flags: &RadiusFlags, extra_nus: &[f64]) -> Result<Report> {
    let start = Instant::now();
    let loaded = load_curve(path)?;
    let (radius, est) = resolve_radius(&loaded.curve, &loaded.file, flags)?;
    let gc = GeometricConstants::from_curve(&loaded.curve, radius)?;
    let n = loaded.curve.degree();
    let mut nus = Vec::new();
    if n >= 2 {
        let base = std::f64::consts::PI / (n - 1) as f64;
        nus.extend([base, base / 2.0]);
    }
    nus.extend_from_slice(extra_nus);
    let bounds = IterationBounds::compute(&gc, &nus)?;

    let mut report = Report::new("bounds", path, &loaded, flags.pipe_radius.or(loaded.file.pipe_radius));
    report.input.options = pipe_options_map(flags);
    report.input.options.insert("nu".into(), extra_nus.to_vec().into());
    report.pipe = est;
    report.constants = Some(gc);
    report.bounds = Some(bounds);
    report.output = Some(ReportOutput {
        path: None,
        iterations: None,
        pieces: None,
        union_vertices: None,
        mesh_vertices: None,
        mesh_faces: None,
        n_infinity: Some(n_infinity(n)?),
    });
    report.timing.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Subdivides `iterations` times and writes the pieces and union polygon.
pub fn cmd_subdivide(path: &Path, iterations: u32, out: &Path) -> Result<Report> {
    let start = Instant::now();
    let loaded = load_curve(path)?;
    let result = subdivide(&loaded.curve, iterations)?;
    let file = CurveFile::from_subdivision(&result);
    std::fs::write(out, file.to_text())?;

    let mut report = Report::new("subdivide", path, &loaded, loaded.file.pipe_radius);
    report.input.options.insert("iterations".into(), iterations.into());
    report.output = Some(ReportOutput {
        path: Some(out.display().to_string()),
        iterations: Some(iterations),
        pieces: Some(result.pieces().len()),
        union_vertices: file.polyline.as_ref().map(Vec::len),
        mesh_vertices: None,
        mesh_faces: None,
        n_infinity: None,
    });
    report.timing.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Runs [`certify`]; the caller exits with status 0 iff
/// `report.certificate.verified`.
pub fn cmd_certify(path: &Path, level: Level, flags: &RadiusFlags, samples: usize) -> Result<Report> {
    let start = Instant::now();
    let loaded = load_curve(path)?;
    let opts = CertifyOptions {
        pipe_radius: flags.pipe_radius.or(loaded.file.pipe_radius),
        pipe: flags.pipe,
        samples,
        ..CertifyOptions::default()
    };
    let cert = certify(&loaded.curve, level, &opts)?;

    let mut report = Report::new("certify", path, &loaded, opts.pipe_radius);
    report.input.options = pipe_options_map(flags);
    report.input.options.insert("level".into(), level.as_str().into());
    report.input.options.insert("samples".into(), samples.into());
    // pipe, constants and bounds live inside the certificate
    report.certificate = Some(cert);
    report.timing.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Writes a triangulated pipe surface of radius `radius` (or the file's or
/// estimated radius) around the curve.
pub fn cmd_mesh(
    path: &Path,
    flags: &RadiusFlags,
    out: &Path,
    density_t: usize,
    density_theta: usize,
) -> Result<Report> {
    let start = Instant::now();
    let loaded = load_curve(path)?;
    let (radius, est) = resolve_radius(&loaded.curve, &loaded.file, flags)?;
    let mesh = pipe_surface_mesh(&loaded.curve, radius, density_t, density_theta)?;
    std::fs::write(out, mesh.to_text())?;

    let mut report = Report::new("mesh", path, &loaded, flags.pipe_radius.or(loaded.file.pipe_radius));
    report.input.options = pipe_options_map(flags);
    report.input.options.insert("density_t".into(), density_t.into());
    report.input.options.insert("density_theta".into(), density_theta.into());
    report.input.options.insert("radius".into(), radius.into());
    report.pipe = est;
    report.output = Some(ReportOutput {
        path: Some(out.display().to_string()),
        iterations: None,
        pieces: None,
        union_vertices: None,
        mesh_vertices: Some(mesh.vertices.len()),
        mesh_faces: Some(mesh.faces.len()),
        n_infinity: None,
    });
    report.timing.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}
