//! Mean-field order parameters.
//!
//! The photon and atomic modes are displaced by α = i√N·α0 and β = √N·β0,
//! with α0, β0 real. The displacement cancels the linear terms of the
//! Holstein-Primakoff Hamiltonian when
//!
//! ```text
//! (δ_C − u β0²) α0       = y β0 √(1 − β0²)
//! (ω_R + u α0²) β0       = −y α0 (1 − 2β0²) / √(1 − β0²)
//! ```
//!
//! Besides the trivial solution these admit a symmetry-broken pair
//! ±(α0, β0) once y exceeds y_crit = √(−δ_C ω_R).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ReducedParams;

/// Absolute bound on the stationarity residuals, in units of ω_R.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    /// Homogeneous condensate, empty cavity.
    Normal,
    /// Self-organized: coherent cavity field and λ-periodic density.
    Superradiant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanFieldSolution {
    /// Photon amplitude per √N; the full displacement is α = i√N·α0.
    pub alpha0: f64,
    /// Atomic amplitude per √N, β = √N·β0. Non-negative for solutions
    /// returned by [`solve_displacements`].
    pub beta0: f64,
    pub phase: Phase,
    /// Left minus right side of the photon stationarity condition.
    pub residual_a: f64,
    /// Left minus right side of the atomic stationarity condition.
    pub residual_b: f64,
}

impl MeanFieldSolution {
    pub const NORMAL: Self = Self {
        alpha0: 0.0,
        beta0: 0.0,
        phase: Phase::Normal,
        residual_a: 0.0,
        residual_b: 0.0,
    };

    pub fn alpha0_sq(&self) -> f64 {
        self.alpha0 * self.alpha0
    }

    pub fn beta0_sq(&self) -> f64 {
        self.beta0 * self.beta0
    }

    /// The Z₂ partner (−α0, −β0). It describes the same physical state.
    pub fn flipped(&self) -> Self {
        Self {
            alpha0: -self.alpha0,
            beta0: -self.beta0,
            residual_a: -self.residual_a,
            residual_b: -self.residual_b,
            ..*self
        }
    }
}

/// y_crit = √(−δ_C ω_R).
pub fn critical_coupling(r: &ReducedParams) -> Result<f64> {
    if !(r.delta_c < 0.0) {
        return Err(Error::Regime(format!(
            "δ_C must be negative, got {}",
            r.delta_c
        )));
    }
    Ok((-r.delta_c * r.omega_r).sqrt())
}

/// Evaluates the quadratic in β0² obtained by multiplying the two
/// stationarity conditions:
/// `(u/δ_C) x² − 2x + (δ_C ω_R + y²)/(u ω_R + y²)`.
pub fn stationarity_polynomial(r: &ReducedParams, beta0_sq: f64) -> f64 {
    let x = beta0_sq;
    r.u / r.delta_c * x * x - 2.0 * x
        + (r.delta_c * r.omega_r + r.y * r.y) / (r.u * r.omega_r + r.y * r.y)
}

/// Residuals of the two stationarity conditions at (α0, β0).
pub fn meanfield_residuals(r: &ReducedParams, alpha0: f64, beta0: f64) -> Result<(f64, f64)> {
    let x = beta0 * beta0;
    if !(x < 1.0) {
        return Err(Error::Singular(format!(
            "β0² = {x}: the atomic condition has a 1/√(1 − β0²) factor"
        )));
    }
    let root = (1.0 - x).sqrt();
    let ra = (r.delta_c - r.u * x) * alpha0 - r.y * beta0 * root;
    let rb = (r.omega_r + r.u * alpha0 * alpha0) * beta0 + r.y * alpha0 * (1.0 - 2.0 * x) / root;
    Ok((ra, rb))
}

/// Solves for the order parameters.
///
/// Below or at threshold the normal solution is returned. Above threshold β0²
/// is the smaller root of [`stationarity_polynomial`], written as
/// `c / (1 + √(1 − (u/δ_C)·c))` with `c = (y² − y_crit²)/(y² + u ω_R)`, which
/// reduces to `(y² − y_crit²)/(2y²)` at u = 0 without cancellation.
pub fn solve_displacements(r: &ReducedParams) -> Result<MeanFieldSolution> {
    r.validate()?;
    let y_crit = critical_coupling(r)?;
    if r.y <= y_crit {
        return Ok(MeanFieldSolution::NORMAL);
    }

    let y2 = r.y * r.y;
    let denom = y2 + r.u * r.omega_r;
    if !(denom > 0.0) {
        return Err(Error::Regime(format!(
            "y² + u ω_R = {denom} must be positive above threshold"
        )));
    }
    let c = (y2 - y_crit * y_crit) / denom;
    let disc = 1.0 - r.u / r.delta_c * c;
    if !(disc >= 0.0) {
        return Err(Error::Regime(format!(
            "no real order parameter: discriminant {disc} is negative"
        )));
    }
    let x = c / (1.0 + disc.sqrt());
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Internal(format!("β0² = {x} outside (0, 1)")));
    }

    let beta0 = x.sqrt();
    let alpha0 = r.y * beta0 * (1.0 - x).sqrt() / (r.delta_c - r.u * x);
    let (residual_a, residual_b) = meanfield_residuals(r, alpha0, beta0)?;
    let tol = RESIDUAL_TOLERANCE * r.omega_r;
    if residual_a.abs() > tol || residual_b.abs() > tol {
        return Err(Error::Internal(format!(
            "stationarity residuals ({residual_a:e}, {residual_b:e}) exceed {tol:e}"
        )));
    }
    Ok(MeanFieldSolution {
        alpha0,
        beta0,
        phase: Phase::Superradiant,
        residual_a,
        residual_b,
    })
}
