//! EPR steering among three coupled harmonic oscillators.
//!
//! The oscillators are diagonalized by an Euler rotation whose three angles
//! are tied to a single mixing angle `mu_theta = tan(theta)`. Steering in each
//! of the six directions is computed along three independent routes:
//!
//! * closed-form rational expressions in the mixing tangents ([`steering`]),
//! * assembly from lab-frame second and fourth moments ([`moments`]),
//! * Gauss-Hermite quadrature of lab observables against the number-state
//!   Wigner function in normal-mode coordinates ([`wigner`]).
//!
//! [`sweep`] drives parameter sweeps, maximization and the verification suite.

pub mod angles;
pub mod error;
pub mod moments;
pub mod parse;
pub mod steering;
pub mod sweep;
pub mod wigner;

pub use angles::{derive_mixing, rotation_matrix, Angle, Frequencies, MixingConfig, DEFAULT_EPS};
pub use error::{Error, Result};
pub use moments::{compute_moments, FockIndex, MomentField, MomentSet};
pub use steering::{Direction, Path, SteeringReport};
