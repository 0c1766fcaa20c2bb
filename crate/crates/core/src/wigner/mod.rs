//! Number-state eigenfunctions and Wigner functions in normal-mode
//! coordinates, plus the quadrature moment oracle.

mod oracle;
mod poly;
mod quadrature;

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::moments::FockIndex;

pub use oracle::{
    mode_moment, oracle_moment, oracle_moment_set, LabVar, Monomial, Observable, QuadratureSpec,
    MAX_OBSERVABLE_DEGREE,
};
pub use poly::{hermite, laguerre, ln_factorial};
pub use quadrature::GaussHermite;

/// A point of the six-dimensional normal-mode phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub p: f64,
    pub q: f64,
    pub f: f64,
}

impl PhasePoint {
    pub fn new(x: f64, y: f64, z: f64, p: f64, q: f64, f: f64) -> Self {
        PhasePoint { x, y, z, p, q, f }
    }

    pub fn origin() -> Self {
        PhasePoint::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    }

    pub fn negated(&self) -> Self {
        PhasePoint::new(-self.x, -self.y, -self.z, -self.p, -self.q, -self.f)
    }
}

/// One-dimensional normalized number-state wavefunction `psi_k(u)` at
/// frequency `theta`, evaluated in log space.
pub fn oscillator_state(k: usize, u: f64, theta: f64) -> Result<f64> {
    let h = hermite(k, theta.sqrt() * u);
    if !h.is_finite() {
        return Err(Error::Overflow(format!("H_{k}({u})")));
    }
    if h == 0.0 {
        return Ok(0.0);
    }
    let ln_norm = 0.25 * (theta / PI).ln() - 0.5 * (k as f64 * 2f64.ln() + ln_factorial(k));
    Ok(h.signum() * (ln_norm - 0.5 * theta * u * u + h.abs().ln()).exp())
}

/// `Psi_(n,m,l)(X, Y, Z)` for a single characteristic frequency.
pub fn eigenfunction(fock: FockIndex, x: f64, y: f64, z: f64, theta: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(Error::domain(format!(
            "frequency must be positive, got {theta}"
        )));
    }
    Ok(oscillator_state(fock.n, x, theta)?
        * oscillator_state(fock.m, y, theta)?
        * oscillator_state(fock.l, z, theta)?)
}

/// Marginal Wigner function of the `k`-th number state of one mode.
pub fn marginal_wigner(k: usize, u: f64, v: f64, theta: f64) -> f64 {
    let s = (theta * theta * u * u + v * v) / theta;
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign / PI * (-s).exp() * laguerre(k, 2.0 * s)
}

/// Full Wigner function, the product of the three marginals.
pub fn full_wigner(fock: FockIndex, pt: &PhasePoint, theta: f64) -> f64 {
    marginal_wigner(fock.n, pt.x, pt.p, theta)
        * marginal_wigner(fock.m, pt.y, pt.q, theta)
        * marginal_wigner(fock.l, pt.z, pt.f, theta)
}
