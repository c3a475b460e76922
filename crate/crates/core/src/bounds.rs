//! Closed-form sufficient subdivision counts.
//!
//! All logarithms are base 2. Real-valued bounds are clamped at zero: a
//! negative value means the condition already holds before any subdivision.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{n_infinity, scaled_distance_bound, GeometricConstants};

/// `1 − cos(π/6)`.
const ONE_MINUS_COS_PI_6: f64 = 1.0 - 0.866_025_403_784_438_6;

fn check_sigma(gc: &GeometricConstants) -> Result<()> {
    if !(gc.sigma > 0.0) {
        return Err(Error::Domain(format!("sigma must be positive, got {}", gc.sigma)));
    }
    Ok(())
}

fn n_inf_derivative(gc: &GeometricConstants) -> f64 {
    if gc.degree < 2 {
        0.0
    } else {
        n_infinity(gc.degree - 1).unwrap_or(0.0)
    }
}

/// Unclamped `½ log(N_∞(n−1) ‖Δ₂P′‖ / σ)`; `-∞` when the numerator vanishes.
pub fn n1_raw(gc: &GeometricConstants) -> Result<f64> {
    check_sigma(gc)?;
    Ok(0.5 * (n_inf_derivative(gc) * gc.delta2_pprime.norm / gc.sigma).log2())
}

/// Iterations beyond which the discrete derivative stays away from zero.
pub fn n1(gc: &GeometricConstants) -> Result<f64> {
    Ok(n1_raw(gc)?.max(0.0))
}

/// Smallest iteration count `i` with `B′_dist(i) < σ`.
pub fn first_regular_iteration(gc: &GeometricConstants) -> Result<u32> {
    let raw = n1_raw(gc)?;
    if raw < 0.0 {
        Ok(0)
    } else {
        Ok(raw.floor() as u32 + 1)
    }
}

/// Lower bound on the length of every discrete-derivative vertex once
/// `i ≥ first_regular_iteration`: `σ − B′_dist(i₁)`.
pub fn derivative_floor(gc: &GeometricConstants) -> Result<f64> {
    let i1 = first_regular_iteration(gc)?;
    let lambda = gc.sigma - scaled_distance_bound(i1 as f64, n_inf_derivative(gc), gc.delta2_pprime.norm);
    if !(lambda > 0.0) {
        return Err(Error::InconsistentConstants(format!(
            "sigma - B'_dist({i1}) = {lambda} is not positive"
        )));
    }
    Ok(lambda)
}

fn check_nu(nu: f64) -> Result<()> {
    if !(nu > 0.0 && nu <= PI) {
        return Err(Error::Domain(format!("angle {nu} outside (0, pi]")));
    }
    Ok(())
}

/// `2M / ((1 − cos ν)·λ)` with `λ` from [`derivative_floor`].
pub fn f_nu(nu: f64, gc: &GeometricConstants) -> Result<f64> {
    check_nu(nu)?;
    let lambda = derivative_floor(gc)?;
    Ok(2.0 * gc.m / ((1.0 - nu.cos()) * lambda))
}

/// Iterations after which every exterior angle of every piece is below `ν`
/// (strictly more than the returned count are needed).
pub fn n_of_nu(nu: f64, gc: &GeometricConstants) -> Result<u32> {
    check_nu(nu)?;
    if gc.degree < 2 {
        check_sigma(gc)?;
        return Ok(0);
    }
    let value = n1(gc)?.max(f_nu(nu, gc)?.log2());
    Ok(ceil_count(value))
}

fn ceil_count(v: f64) -> u32 {
    if v <= 0.0 {
        0
    } else {
        v.ceil() as u32
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("pipe radius must be positive, got {r}")));
    }
    Ok(())
}

/// Unclamped `½ log(N_∞(n) ‖Δ₂P‖ / r)`.
pub fn n_prime_raw(r: f64, gc: &GeometricConstants) -> Result<f64> {
    check_radius(r)?;
    let n_inf = n_infinity(gc.degree)?;
    Ok(0.5 * (n_inf * gc.delta2_p.norm / r).log2())
}

/// Iterations beyond which the control polygon stays within distance `r`.
pub fn n_prime(r: f64, gc: &GeometricConstants) -> Result<f64> {
    Ok(n_prime_raw(r, gc)?.max(0.0))
}

pub fn n2_raw(gc: &GeometricConstants) -> Result<f64> {
    check_sigma(gc)?;
    Ok(0.5 * (2.0 * n_inf_derivative(gc) * gc.delta2_pprime.norm / (ONE_MINUS_COS_PI_6 * gc.sigma)).log2())
}

/// Iterations after which the curve and polygon tangents differ by less than π/6.
pub fn n2(gc: &GeometricConstants) -> Result<f64> {
    Ok(n2_raw(gc)?.max(0.0))
}

/// Which term of a maximum decided an iteration count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundTerm {
    /// Every term was zero.
    Trivial,
    /// `N(ν)`.
    SmallAngles,
    /// `N′(r)`.
    PipeContainment,
    /// `N′(r/2)`.
    HalfPipeContainment,
    /// `N₂`.
    DerivativeAngle,
}

impl BoundTerm {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundTerm::Trivial => "trivial",
            BoundTerm::SmallAngles => "small_angles",
            BoundTerm::PipeContainment => "pipe_containment",
            BoundTerm::HalfPipeContainment => "half_pipe_containment",
            BoundTerm::DerivativeAngle => "derivative_angle",
        }
    }
}

fn argmax(terms: &[(BoundTerm, f64)]) -> (BoundTerm, f64) {
    let mut best = (BoundTerm::Trivial, 0.0);
    for &(term, v) in terms {
        if v > best.1 {
            best = (term, v);
        }
    }
    best
}

/// `⌈N(π/(n−1))⌉`, or 0 for `n ≤ 2`.
pub fn iterations_for_simplicity(gc: &GeometricConstants) -> Result<u32> {
    if gc.degree <= 2 {
        check_sigma(gc)?;
        return Ok(0);
    }
    n_of_nu(PI / (gc.degree - 1) as f64, gc)
}

fn homeomorphism_terms(gc: &GeometricConstants) -> Result<[(BoundTerm, f64); 2]> {
    Ok([
        (BoundTerm::SmallAngles, n_of_nu(homeomorphism_angle(gc.degree), gc)? as f64),
        (BoundTerm::PipeContainment, n_prime(gc.pipe_radius, gc)?),
    ])
}

fn isotopy_terms(gc: &GeometricConstants) -> Result<[(BoundTerm, f64); 3]> {
    Ok([
        (BoundTerm::SmallAngles, n_of_nu(homeomorphism_angle(gc.degree), gc)? as f64),
        (BoundTerm::HalfPipeContainment, n_prime(gc.pipe_radius / 2.0, gc)?),
        (BoundTerm::DerivativeAngle, n2(gc)?),
    ])
}

/// `π/(2(n−1))`; degree-1 curves use `π/2` (they never need it).
pub fn homeomorphism_angle(degree: usize) -> f64 {
    PI / (2 * degree.max(2).saturating_sub(1)) as f64
}

/// `⌈N̂⌉` with `N̂ = max{N(π/(2(n−1))), N′(r)}`.
pub fn iterations_for_homeomorphism(gc: &GeometricConstants) -> Result<u32> {
    Ok(ceil_count(argmax(&homeomorphism_terms(gc)?).1))
}

/// `⌈N*⌉` with `N* = max{N(π/(2(n−1))), N′(r/2), N₂}`.
pub fn iterations_for_isotopy(gc: &GeometricConstants) -> Result<u32> {
    Ok(ceil_count(argmax(&isotopy_terms(gc)?).1))
}

/// `N(ν)` evaluated for one requested angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuBound {
    pub nu: f64,
    pub f_nu: f64,
    pub n_of_nu: u32,
}

/// Every bound evaluated from one set of constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationBounds {
    pub n1: f64,
    /// Smallest integer `i` with `B′_dist(i) < σ`.
    pub first_regular_iteration: u32,
    /// `σ − B′_dist(first_regular_iteration)`.
    pub derivative_floor: f64,
    pub n_of_nu: Vec<NuBound>,
    pub n_prime_r: f64,
    pub n_prime_half_r: f64,
    pub n2: f64,
    pub simplicity: u32,
    pub simplicity_angle: f64,
    /// Real-valued `N̂` before the ceiling.
    pub n_hat: f64,
    pub homeomorphism: u32,
    pub homeomorphism_term: BoundTerm,
    pub homeomorphism_angle: f64,
    /// Real-valued `N*` before the ceiling.
    pub n_star: f64,
    pub isotopy: u32,
    pub isotopy_term: BoundTerm,
    /// `N* < N̂ + 2`, checked before ceilings.
    pub isotopy_within_two_of_homeomorphism: bool,
}

impl IterationBounds {
    /// Evaluates every bound; `nus` lists extra angles for the `N(ν)` table.
    pub fn compute(gc: &GeometricConstants, nus: &[f64]) -> Result<Self> {
        let n_of_nu = nus
            .iter()
            .map(|&nu| {
                Ok(NuBound { nu, f_nu: f_nu(nu, gc)?, n_of_nu: n_of_nu(nu, gc)? })
            })
            .collect::<Result<Vec<_>>>()?;
        let (homeomorphism_term, n_hat) = argmax(&homeomorphism_terms(gc)?);
        let (isotopy_term, n_star) = argmax(&isotopy_terms(gc)?);
        let simplicity_angle = if gc.degree <= 2 { PI } else { PI / (gc.degree - 1) as f64 };
        Ok(Self {
            n1: n1(gc)?,
            first_regular_iteration: first_regular_iteration(gc)?,
            derivative_floor: derivative_floor(gc)?,
            n_of_nu,
            n_prime_r: n_prime(gc.pipe_radius, gc)?,
            n_prime_half_r: n_prime(gc.pipe_radius / 2.0, gc)?,
            n2: n2(gc)?,
            simplicity: iterations_for_simplicity(gc)?,
            simplicity_angle,
            n_hat,
            homeomorphism: ceil_count(n_hat),
            homeomorphism_term,
            homeomorphism_angle: homeomorphism_angle(gc.degree),
            n_star,
            isotopy: ceil_count(n_star),
            isotopy_term,
            isotopy_within_two_of_homeomorphism: n_star < n_hat + 2.0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::SecondDifference;
    use crate::point::Point3;

    fn sd(norm: f64) -> SecondDifference {
        SecondDifference { per_axis: Point3::new(norm, 0.0, 0.0), norm, degenerate: false }
    }

    fn gc(degree: usize, m: f64, sigma: f64, d2p: f64, d2pp: f64, r: f64) -> GeometricConstants {
        GeometricConstants {
            degree,
            m,
            sigma,
            delta2_p: sd(d2p),
            delta2_pprime: sd(d2pp),
            pipe_radius: r,
        }
    }

    fn straight(degree: usize) -> GeometricConstants {
        gc(degree, 0.0, 1.0, 0.0, 0.0, 1.0)
    }

    #[test]
    fn n1_examples() {
        assert_eq!(n1(&gc(3, 1.0, 1.0, 1.0, 0.0, 1.0)).unwrap(), 0.0);
        assert_eq!(n1(&gc(3, 1.0, 1.0, 1.0, 4.0, 1.0)).unwrap(), 0.0);
        assert_eq!(n1(&gc(3, 1.0, 1.0, 1.0, 16.0, 1.0)).unwrap(), 1.0);
        assert!(matches!(n1(&gc(3, 1.0, 0.0, 1.0, 1.0, 1.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn derivative_floor_is_positive_when_n1_is_an_integer() {
        // N1 = 1 exactly, so B'_dist(N1) = sigma; the floor steps to i = 2
        let g = gc(3, 1.0, 1.0, 1.0, 16.0, 1.0);
        assert_eq!(first_regular_iteration(&g).unwrap(), 2);
        assert!((derivative_floor(&g).unwrap() - (1.0 - 4.0 / 16.0)).abs() < 1e-15);
    }

    #[test]
    fn f_nu_examples() {
        assert_eq!(f_nu(1.0, &gc(3, 0.0, 1.0, 0.0, 0.0, 1.0)).unwrap(), 0.0);
        assert!((f_nu(PI, &gc(3, 1.0, 1.0, 0.0, 0.0, 1.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!(f_nu(0.0, &straight(3)).is_err());
        assert!(f_nu(3.5, &straight(3)).is_err());
        let g = gc(3, 2.5, 0.7, 1.3, 2.1, 0.2);
        let grid: Vec<f64> = (1..=200).map(|k| PI * k as f64 / 200.0).map(|nu| f_nu(nu, &g).unwrap()).collect();
        assert!(grid.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn n_of_nu_examples() {
        assert_eq!(n_of_nu(0.3, &straight(3)).unwrap(), 0);
        // sigma = 1, no second differences, M chosen so that f(π/2) = 7.5
        let g = gc(3, 3.75, 1.0, 0.0, 0.0, 1.0);
        assert!((f_nu(PI / 2.0, &g).unwrap() - 7.5).abs() < 1e-12);
        assert_eq!(n_of_nu(PI / 2.0, &g).unwrap(), 3);
        // N1 = 1 dominates a tiny f
        let g = gc(3, 1e-6, 1.0, 0.0, 16.0, 1.0);
        assert_eq!(n_of_nu(PI / 2.0, &g).unwrap(), 1);
    }

    #[test]
    fn n_prime_examples() {
        assert_eq!(n_prime(1.0, &straight(3)).unwrap(), 0.0);
        assert!(n_prime(1.0, &gc(3, 1.0, 1.0, 3.0, 0.0, 1.0)).unwrap().abs() < 1e-15);
        assert!((n_prime(1.0 / 16.0, &gc(3, 1.0, 1.0, 3.0, 0.0, 1.0)).unwrap() - 2.0).abs() < 1e-15);
        assert!(n_prime(0.0, &straight(3)).is_err());
        assert!(n_prime(-1.0, &straight(3)).is_err());
    }

    #[test]
    fn n2_examples() {
        assert_eq!(n2(&straight(3)).unwrap(), 0.0);
        let d = 4.0 * ONE_MINUS_COS_PI_6;
        assert!((n2(&gc(3, 1.0, 1.0, 1.0, d, 1.0)).unwrap() - 0.5).abs() < 1e-14);
        assert!(n2(&gc(3, 1.0, 0.0, 1.0, d, 1.0)).is_err());
    }

    #[test]
    fn iteration_count_examples() {
        assert_eq!(iterations_for_simplicity(&gc(2, 5.0, 0.1, 3.0, 0.0, 1.0)).unwrap(), 0);
        for n in 1..6 {
            let g = straight(n);
            assert_eq!(iterations_for_simplicity(&g).unwrap(), 0);
            assert_eq!(iterations_for_homeomorphism(&g).unwrap(), 0);
            assert_eq!(iterations_for_isotopy(&g).unwrap(), 0);
        }
    }

    #[test]
    fn homeomorphism_takes_the_larger_term() {
        // N(π/4) = 3 from f = 8 and N'(r) = 5 from N_inf(3)‖Δ₂P‖/r = 2^10
        let f_target = 7.5;
        let m = f_target * (1.0 - (PI / 4.0).cos()) / 2.0;
        let r = 1.0 / 3.0 * 3.0 / 1024.0;
        let g = gc(3, m, 1.0, 3.0, 0.0, r);
        assert_eq!(n_of_nu(PI / 4.0, &g).unwrap(), 3);
        assert!((n_prime(r, &g).unwrap() - 5.0).abs() < 1e-12);
        let b = IterationBounds::compute(&g, &[]).unwrap();
        assert_eq!(b.homeomorphism, 5);
        assert_eq!(b.homeomorphism_term, BoundTerm::PipeContainment);
    }

    #[test]
    fn isotopy_ceiling_of_max() {
        // terms (3, 5.2, 4.1): N'(r/2) = 5.2 and N2 = 4.1
        let sigma = 1.0;
        let d2pp = 2f64.powf(2.0 * 4.1) * ONE_MINUS_COS_PI_6 * sigma / (2.0 * 0.25);
        let n1v = 0.5 * (0.25 * d2pp / sigma).log2();
        assert!(n1v < 3.0);
        let lambda_i1 = sigma - 0.25 * d2pp * 4f64.powf(-(n1v.floor() + 1.0));
        let m = 7.5 * (1.0 - (PI / 4.0).cos()) * lambda_i1 / 2.0;
        let r = 2.0 * (1.0 / 3.0) * 3.0 / 2f64.powf(2.0 * 5.2);
        let g = gc(3, m, sigma, 3.0, d2pp, r);
        assert_eq!(n_of_nu(PI / 4.0, &g).unwrap(), 3);
        assert!((n2(&g).unwrap() - 4.1).abs() < 1e-12);
        assert!((n_prime(r / 2.0, &g).unwrap() - 5.2).abs() < 1e-12);
        let b = IterationBounds::compute(&g, &[]).unwrap();
        assert_eq!(b.isotopy, 6);
        assert_eq!(b.isotopy_term, BoundTerm::HalfPipeContainment);
        assert!(b.isotopy_within_two_of_homeomorphism);
    }

    #[test]
    fn monotone_in_nu_and_r() {
        let g = gc(4, 3.0, 0.4, 2.0, 5.0, 0.3);
        let ns: Vec<u32> = (1..=100).map(|k| n_of_nu(PI * k as f64 / 100.0, &g).unwrap()).collect();
        assert!(ns.windows(2).all(|w| w[1] <= w[0]));
        let rs: Vec<f64> = (1..=100).map(|k| n_prime(k as f64 / 1000.0, &g).unwrap()).collect();
        assert!(rs.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn halving_radius_adds_half_an_iteration() {
        let g = gc(3, 1.0, 1.0, 3.0, 0.0, 0.01);
        let a = n_prime_raw(0.01, &g).unwrap();
        let b = n_prime_raw(0.005, &g).unwrap();
        assert!((b - a - 0.5).abs() < 1e-12);
    }
}
