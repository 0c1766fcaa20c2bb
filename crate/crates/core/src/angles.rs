//! Euler-angle configuration derived from the single mixing angle.
//!
//! Under geometric diagonalization the three Euler angles `(phi, Phi, theta)`
//! are not independent: `tan(Phi)` and `tan(phi)` are fixed functions of
//! `mu_theta = tan(theta)`. All three angles are taken on the principal
//! branch, `cos > 0`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Default guard keeping `mu_theta` away from the divergence of `tan(phi)` at -1.
pub const DEFAULT_EPS: f64 = 1e-6;

/// One Euler angle stored as its tangent together with sine and cosine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Angle {
    pub tan: f64,
    pub sin: f64,
    pub cos: f64,
}

impl Angle {
    /// Principal-branch angle with the given tangent (`cos > 0`).
    pub fn from_tan(tan: f64) -> Self {
        let cos = 1.0 / tan.hypot(1.0);
        Angle {
            tan,
            sin: tan * cos,
            cos,
        }
    }

    /// The angle in radians, in `(-pi/2, pi/2)`.
    pub fn radians(&self) -> f64 {
        self.sin.atan2(self.cos)
    }

    /// `sin(k * angle)`.
    pub fn sin_mul(&self, k: f64) -> f64 {
        (k * self.radians()).sin()
    }

    /// `cos(k * angle)`.
    pub fn cos_mul(&self, k: f64) -> f64 {
        (k * self.radians()).cos()
    }
}

/// The mixing configuration: `theta`, `Phi` (here `big_phi`) and `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixingConfig {
    pub theta: Angle,
    pub big_phi: Angle,
    pub phi: Angle,
}

impl MixingConfig {
    /// Builds a configuration from three arbitrary tangents, bypassing the
    /// diagonalization constraint.
    pub fn from_tangents(mu_theta: f64, mu_big_phi: f64, mu_phi: f64) -> Self {
        MixingConfig {
            theta: Angle::from_tan(mu_theta),
            big_phi: Angle::from_tan(mu_big_phi),
            phi: Angle::from_tan(mu_phi),
        }
    }

    pub fn mu_theta(&self) -> f64 {
        self.theta.tan
    }

    pub fn mu_big_phi(&self) -> f64 {
        self.big_phi.tan
    }

    pub fn mu_phi(&self) -> f64 {
        self.phi.tan
    }
}

/// `tan(Phi)` as a function of `mu_theta`.
pub fn big_phi_tangent(mu_theta: f64) -> Result<f64> {
    let t2 = mu_theta * mu_theta;
    let radicand = 2.0 + t2 - t2 * t2;
    if radicand <= 0.0 {
        return Err(Error::domain(format!(
            "2 + mu^2 - mu^4 = {radicand} is not positive at mu_theta = {mu_theta}"
        )));
    }
    Ok((1.0 - t2 - (3.0 - t2).sqrt()) / radicand.sqrt())
}

/// `tan(phi)` as a function of `mu_theta`.
///
/// For `mu_theta >= 0` the numerator is rationalized, which removes the 0/0
/// at `mu_theta = 1` (limit 0) and the cancellation next to it. For negative
/// arguments the printed quotient is used directly; it diverges at -1.
pub fn phi_tangent(mu_theta: f64) -> Result<f64> {
    let t2 = mu_theta * mu_theta;
    if t2 > 2.0 {
        return Err(Error::domain(format!(
            "mu_theta = {mu_theta} has |mu| > sqrt 2"
        )));
    }
    let root = (2.0 - t2).sqrt();
    let value = if mu_theta >= 0.0 {
        (t2 - 1.0) / (1.0 + mu_theta * root)
    } else {
        (1.0 - mu_theta * root) / (t2 - 1.0)
    };
    if !value.is_finite() {
        return Err(Error::domain(format!(
            "tan(phi) diverges at mu_theta = {mu_theta}"
        )));
    }
    Ok(value)
}

/// Derives the full Euler configuration from `mu_theta`.
///
/// `mu_theta` must lie in `[-1 + eps, 1]`.
pub fn derive_mixing(mu_theta: f64, eps: f64) -> Result<MixingConfig> {
    // a smaller eps can round -1 + eps back to -1
    if !(eps >= f64::EPSILON) {
        return Err(Error::domain(format!(
            "eps must be at least {:e}, got {eps}",
            f64::EPSILON
        )));
    }
    if !mu_theta.is_finite() || mu_theta < -1.0 + eps || mu_theta > 1.0 {
        return Err(Error::domain(format!(
            "mu_theta = {mu_theta} outside admissible interval [{}, 1]",
            -1.0 + eps
        )));
    }
    let mu_big_phi = big_phi_tangent(mu_theta)?;
    let mu_phi = phi_tangent(mu_theta)?;
    Ok(MixingConfig::from_tangents(mu_theta, mu_big_phi, mu_phi))
}

/// The rotation `R(phi, Phi, theta) = R1(phi) R2(Phi) R3(theta)`.
///
/// Lab coordinates are `(x, y, z) = R (X, Y, Z)`; normal coordinates are
/// `(X, Y, Z) = R^T (x, y, z)`. Momenta transform identically.
pub fn rotation_matrix(cfg: &MixingConfig) -> [[f64; 3]; 3] {
    let (st, ct) = (cfg.theta.sin, cfg.theta.cos);
    let (sb, cb) = (cfg.big_phi.sin, cfg.big_phi.cos);
    let (sp, cp) = (cfg.phi.sin, cfg.phi.cos);
    [
        [ct * cb, sb, st * cb],
        [-cp * sb * ct - sp * st, cp * cb, -cp * sb * st + sp * ct],
        [sp * sb * ct - cp * st, -sp * cb, sp * sb * st + cp * ct],
    ]
}

/// Oscillator frequencies of the three normal modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Frequencies {
    pub theta_x: f64,
    pub theta_y: f64,
    pub theta_z: f64,
}

impl Frequencies {
    /// Single characteristic frequency shared by all modes.
    pub fn uniform(theta: f64) -> Result<Self> {
        Self::new(theta, theta, theta)
    }

    pub fn new(theta_x: f64, theta_y: f64, theta_z: f64) -> Result<Self> {
        for (name, v) in [
            ("theta_x", theta_x),
            ("theta_y", theta_y),
            ("theta_z", theta_z),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!(
                    "{name} = {v} must be positive and finite"
                )));
            }
        }
        Ok(Frequencies {
            theta_x,
            theta_y,
            theta_z,
        })
    }

    pub fn is_uniform(&self) -> bool {
        self.theta_x == self.theta_y && self.theta_y == self.theta_z
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.theta_x, self.theta_y, self.theta_z]
    }
}

impl Default for Frequencies {
    fn default() -> Self {
        Frequencies {
            theta_x: 1.0,
            theta_y: 1.0,
            theta_z: 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det3(m: &[[f64; 3]; 3]) -> f64 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    fn orthogonality_defect(m: &[[f64; 3]; 3]) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| m[k][i] * m[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    #[test]
    fn zero_mixing_tangents() {
        let cfg = derive_mixing(0.0, DEFAULT_EPS).unwrap();
        assert_eq!(cfg.mu_phi(), -1.0);
        let expected = (1.0 - 3f64.sqrt()) / 2f64.sqrt();
        assert!((cfg.mu_big_phi() - expected).abs() < 1e-15);
        assert!((cfg.mu_big_phi() + 0.5176381).abs() < 1e-7);
    }

    #[test]
    fn unit_mixing_uses_limit() {
        let cfg = derive_mixing(1.0, DEFAULT_EPS).unwrap();
        assert_eq!(cfg.mu_phi(), 0.0);
        assert!((cfg.mu_big_phi() + 1.0).abs() < 1e-15);
        // printed quotient just inside the limit
        let mu: f64 = 1.0 - 1e-8;
        let printed = (1.0 - mu * (2.0 - mu * mu).sqrt()) / (mu * mu - 1.0);
        assert!(printed.abs() < 1e-7);
        assert!((phi_tangent(mu).unwrap() - printed).abs() < 1e-7);
    }

    #[test]
    fn left_endpoint_guard() {
        let eps = 1e-6;
        let cfg = derive_mixing(-1.0 + eps, eps).unwrap();
        assert!(cfg.mu_phi().is_finite());
        assert!(cfg.mu_phi() < -1e5);
        assert!(matches!(derive_mixing(-1.0, eps), Err(Error::Domain(_))));
        assert!(matches!(
            derive_mixing(1.0 + 1e-12, eps),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            derive_mixing(f64::NAN, eps),
            Err(Error::Domain(_))
        ));
        assert!(matches!(derive_mixing(-1.0, 1e-20), Err(Error::Domain(_))));
        assert!(matches!(derive_mixing(0.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn rationalized_branch_matches_printed_quotient() {
        for i in 0..=200 {
            let mu = -0.99 + 1.98 * i as f64 / 200.0;
            if (mu * mu - 1.0).abs() < 1e-3 {
                continue;
            }
            let printed = (1.0 - mu * (2.0 - mu * mu).sqrt()) / (mu * mu - 1.0);
            let got = phi_tangent(mu).unwrap();
            assert!(
                (got - printed).abs() <= 1e-12 * printed.abs().max(1.0),
                "mu={mu}"
            );
        }
    }

    #[test]
    fn identity_rotation() {
        let cfg = MixingConfig::from_tangents(0.0, 0.0, 0.0);
        let r = rotation_matrix(&cfg);
        for (i, row) in r.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(v, if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn first_row_golden_at_half() {
        let cfg = derive_mixing(0.5, DEFAULT_EPS).unwrap();
        let r = rotation_matrix(&cfg);
        // mu_Phi(0.5) = (0.75 - sqrt(2.75)) / sqrt(2.1875), cos>0 branch
        let mu_b: f64 = (0.75 - 2.75f64.sqrt()) / 2.1875f64.sqrt();
        let (cb, sb) = (
            1.0 / (1.0 + mu_b * mu_b).sqrt(),
            mu_b / (1.0 + mu_b * mu_b).sqrt(),
        );
        let (ct, st) = (2.0 / 5f64.sqrt(), 1.0 / 5f64.sqrt());
        let golden = [ct * cb, sb, st * cb];
        for j in 0..3 {
            assert!((r[0][j] - golden[j]).abs() < 1e-15);
        }
        // 30-digit evaluation
        assert!((r[0][0] - 0.762172425863503785).abs() < 1e-15);
        assert!((r[0][1] + 0.523322550218005877).abs() < 1e-15);
        assert!((r[0][2] - 0.381086212931751893).abs() < 1e-15);
    }

    #[test]
    fn grid_orthogonality_and_round_trip() {
        let eps = DEFAULT_EPS;
        let lo = -1.0 + eps;
        let mut prev: Option<MixingConfig> = None;
        for i in 0..2001 {
            let mu = lo + (1.0 - lo) * i as f64 / 2000.0;
            let cfg = derive_mixing(mu, eps).unwrap();
            let r = rotation_matrix(&cfg);
            assert!(orthogonality_defect(&r) < 1e-10, "mu={mu}");
            assert!((det3(&r) - 1.0).abs() < 1e-10, "mu={mu}");
            for a in [cfg.theta, cfg.big_phi, cfg.phi] {
                assert!((a.sin * a.sin + a.cos * a.cos - 1.0).abs() < 1e-14);
                assert!(a.cos > 0.0);
                // tan is ill-conditioned near pi/2: error grows like (1 + tan^2) ulp
                assert!((a.radians().tan() - a.tan).abs() <= 1e-14 * (1.0 + a.tan * a.tan));
                if a.cos.abs() > 1e-9 {
                    assert!((a.sin / a.cos - a.tan).abs() <= 1e-12 * a.tan.abs().max(1.0));
                }
            }
            assert!((cfg.mu_big_phi() - big_phi_tangent(mu).unwrap()).abs() < 1e-12);
            if let Some(p) = prev {
                // continuity away from the left endpoint
                if mu > -0.5 {
                    let step = 0.001;
                    assert!((cfg.mu_big_phi() - p.mu_big_phi()).abs() < 50.0 * step);
                    assert!((cfg.mu_phi() - p.mu_phi()).abs() < 50.0 * step);
                }
            }
            prev = Some(cfg);
        }
    }

    #[test]
    fn frequencies_validation() {
        assert!(Frequencies::uniform(2.0).unwrap().is_uniform());
        assert!(Frequencies::uniform(0.0).is_err());
        assert!(Frequencies::new(1.0, -1.0, 1.0).is_err());
        assert!(Frequencies::new(1.0, f64::INFINITY, 1.0).is_err());
    }
}
