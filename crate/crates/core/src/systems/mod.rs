//! Closed-form physics of the two benchmark systems and a generic
//! finite-dimensional quasi-probability engine.
//!
//! Units are dimensionless with `ħ = 1`. Detectors are minimal-uncertainty
//! Gaussians, so the position part of the detector Wigner function gives the
//! imprecision kernel `D(A|χ) = (χ/√π) e^{-χ²A²}` and the momentum part gives
//! the backaction density `p(γ|χ) = e^{-γ²/χ²} / (√π χ)`.

pub mod fock;
pub mod kqpd;
pub mod spin;
pub mod wigner;

use serde::{Deserialize, Serialize};

use crate::error::{KqpdError, Result};

pub use fock::{
    cf_x_single, cf_xp_joint, exact_k_xp, g_parameter, imprecision_ratio_xp, pdf_x_single, pdf_xp_joint,
};
pub use kqpd::{kqpd_generic_sequential, Atom, DensityMatrix, Observable, SequentialMeasurement, SignedAtomDistribution};
pub use spin::{
    cf_spin_joint, cf_spin_single, exact_k_spin, kqpd_spin_weights, pdf_spin_joint, pdf_spin_single, ClampedValue, SpinState,
};
pub use wigner::{kqpd_xp, wigner_detector, wigner_fock};

/// Raw measurement strength `χ` and the strength `χ'` whose imprecision
/// replaces it when forming `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrengthConfig {
    pub chi: f64,
    pub chi_prime: f64,
}

impl StrengthConfig {
    pub fn new(chi: f64, chi_prime: f64) -> Result<Self> {
        check_strength("chi", chi)?;
        check_strength("chi_prime", chi_prime)?;
        Ok(StrengthConfig { chi, chi_prime })
    }
}

pub(crate) fn check_strength(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(KqpdError::InvalidParameter(format!("{name} must be a positive finite number, got {value}")))
    }
}

/// Gaussian imprecision kernel `D(A|χ)`.
pub fn imprecision_kernel(a: f64, chi: f64) -> f64 {
    chi / std::f64::consts::PI.sqrt() * (-chi * chi * a * a).exp()
}

/// Backaction density `p(γ|χ)`.
pub fn backaction_density(gamma: f64, chi: f64) -> f64 {
    (-(gamma / chi).powi(2)).exp() / (std::f64::consts::PI.sqrt() * chi)
}
