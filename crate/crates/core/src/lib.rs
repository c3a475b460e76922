//! Topologically faithful control polygons for composite Bézier curves.
//!
//! Subdividing a Bézier curve makes its control polygon converge to the
//! curve. This crate computes, from a handful of geometric constants, how
//! many midpoint subdivisions make the polygon simple, homeomorphic to the
//! curve, and ambient isotopic to it, and checks each claim with brute-force
//! oracles.

pub mod bounds;
pub mod curve;
pub mod error;
pub mod io;
pub mod metrics;
pub mod pipe;
pub mod point;
pub mod verify;

pub use bounds::IterationBounds;
pub use curve::{subdivide, CompositeBezier, ControlPolygon, ParamInterval, SubdivisionResult};
pub use error::{Error, Result};
pub use metrics::GeometricConstants;
pub use pipe::{estimate_pipe_radius, PipeEstimate, PipeOptions};
pub use point::Point3;
pub use verify::{certify, CertifyOptions, Level, TopologyCertificate};
