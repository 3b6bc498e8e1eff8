//! Weak `σ1` measurement followed by a projective `σ2` measurement on a
//! two-level system.
//!
//! The state is `α|+₁⟩ + β|−₁⟩` and the `σ2 = +1` eigenvector is
//! `γ|+₁⟩ + δ|−₁⟩`, both written in the `σ1` eigenbasis. The benchmark is the
//! balanced case `α = β = γ = δ = 1/√2` (state `|+⟩`, `σ1 = σ_z`, `σ2 = σ_x`).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{KqpdError, Result};
use crate::systems::kqpd::{Atom, SignedAtomDistribution};

/// Values in `(-CLAMP_TOL, 0)` are floating-point cancellation and are clamped.
pub const CLAMP_TOL: f64 = 1e-12;

/// First-outcome positions of the discrete quasi-probability.
pub const SIGMA1_ATOMS: [f64; 3] = [-1.0, 0.0, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinState {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
    pub delta: Complex64,
}

/// A density value together with whether it was clamped from a tiny negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClampedValue {
    pub value: f64,
    pub clamped: bool,
}

pub(crate) fn check_sigma2(sigma2: f64) -> Result<()> {
    if sigma2 == 1.0 || sigma2 == -1.0 {
        Ok(())
    } else {
        Err(KqpdError::InvalidParameter(format!("sigma2 must be +1 or -1, got {sigma2}")))
    }
}

impl Default for SpinState {
    fn default() -> Self {
        Self::balanced()
    }
}

impl SpinState {
    pub fn new(alpha: Complex64, beta: Complex64, gamma: Complex64, delta: Complex64) -> Result<Self> {
        let state = SpinState { alpha, beta, gamma, delta };
        state.validate()?;
        Ok(state)
    }

    pub fn balanced() -> Self {
        let s = Complex64::new(0.5f64.sqrt(), 0.0);
        SpinState { alpha: s, beta: s, gamma: s, delta: s }
    }

    pub fn validate(&self) -> Result<()> {
        let n1 = self.alpha.norm_sqr() + self.beta.norm_sqr();
        if (n1 - 1.0).abs() > 1e-10 {
            return Err(KqpdError::NotNormalized { name: "alpha, beta", norm: n1 });
        }
        let n2 = self.gamma.norm_sqr() + self.delta.norm_sqr();
        if (n2 - 1.0).abs() > 1e-10 {
            return Err(KqpdError::NotNormalized { name: "gamma, delta", norm: n2 });
        }
        Ok(())
    }

    /// `2 Re{e^{-2iγ1} α β* γ* δ}`.
    pub fn interference(&self, gamma1: f64) -> f64 {
        let z = Complex64::from_polar(1.0, -2.0 * gamma1) * self.alpha * self.beta.conj() * self.gamma.conj() * self.delta;
        2.0 * z.re
    }

    /// Discrete quasi-probability `𝒫(σ1', σ2)` at backaction `γ1`.
    pub fn weight(&self, sigma1: f64, sigma2: f64, gamma1: f64) -> f64 {
        let (a2, b2) = (self.alpha.norm_sqr(), self.beta.norm_sqr());
        let (g2, d2) = (self.gamma.norm_sqr(), self.delta.norm_sqr());
        let up = sigma2 > 0.0;
        if sigma1 > 0.5 {
            a2 * if up { g2 } else { d2 }
        } else if sigma1 < -0.5 {
            b2 * if up { d2 } else { g2 }
        } else if up {
            self.interference(gamma1)
        } else {
            -self.interference(gamma1)
        }
    }

    /// Peak weight after backaction averaging: the interference term is
    /// damped by `e^{-χ²}`.
    pub fn damped_weight(&self, sigma1: f64, sigma2: f64, chi: f64) -> f64 {
        let damping = if sigma1 == 0.0 { (-chi * chi).exp() } else { 1.0 };
        damping * self.weight(sigma1, sigma2, 0.0)
    }

    /// Six-atom quasi-probability on `{-1, 0, 1} × {-1, 1}`.
    pub fn kqpd_weights(&self, gamma1: f64) -> Result<SignedAtomDistribution> {
        self.validate()?;
        let mut atoms = Vec::with_capacity(6);
        for &s2 in &[1.0, -1.0] {
            for &s1 in &[1.0, -1.0, 0.0] {
                atoms.push(Atom { a1: s1, a2: s2, weight: self.weight(s1, s2, gamma1) });
            }
        }
        Ok(SignedAtomDistribution { atoms, backaction: (gamma1, 0.0) })
    }

    /// `P(σ2 | χ)`, the probability of the projective outcome.
    pub fn marginal_sigma2(&self, sigma2: f64, chi: f64) -> Result<f64> {
        check_sigma2(sigma2)?;
        Ok(SIGMA1_ATOMS.iter().map(|&s| self.damped_weight(s, sigma2, chi)).sum())
    }

    /// Measured density `P(σ1, σ2 | χ)` with the clamping diagnostic.
    pub fn pdf_joint_checked(&self, sigma1: f64, sigma2: f64, chi: f64) -> Result<ClampedValue> {
        check_sigma2(sigma2)?;
        let sum: f64 = SIGMA1_ATOMS
            .iter()
            .map(|&s| (-chi * chi * (sigma1 - s).powi(2)).exp() * self.damped_weight(s, sigma2, chi))
            .sum();
        let value = chi / PI.sqrt() * sum;
        if value >= 0.0 {
            Ok(ClampedValue { value, clamped: false })
        } else if value > -CLAMP_TOL {
            Ok(ClampedValue { value: 0.0, clamped: true })
        } else {
            Err(KqpdError::NegativeDensity(value))
        }
    }

    pub fn pdf_joint(&self, sigma1: f64, sigma2: f64, chi: f64) -> Result<f64> {
        self.pdf_joint_checked(sigma1, sigma2, chi).map(|c| c.value)
    }

    /// Hybrid characteristic function: Fourier in `σ1`, probability in `σ2`.
    pub fn cf_joint(&self, lambda: f64, sigma2: f64, chi: f64) -> Result<Complex64> {
        check_sigma2(sigma2)?;
        let sum: Complex64 = SIGMA1_ATOMS
            .iter()
            .map(|&s| Complex64::from_polar(1.0, -lambda * s) * self.damped_weight(s, sigma2, chi))
            .sum();
        Ok(sum * (-(lambda * lambda) / (4.0 * chi * chi)).exp())
    }

    /// Density of measuring `σ1` alone.
    pub fn pdf_single(&self, sigma1: f64, chi: f64) -> f64 {
        let c2 = chi * chi;
        chi / PI.sqrt()
            * (self.alpha.norm_sqr() * (-c2 * (sigma1 - 1.0).powi(2)).exp()
                + self.beta.norm_sqr() * (-c2 * (sigma1 + 1.0).powi(2)).exp())
    }

    pub fn cf_single(&self, lambda: f64, chi: f64) -> Complex64 {
        let asym = self.beta.norm_sqr() - self.alpha.norm_sqr();
        Complex64::new(lambda.cos(), asym * lambda.sin()) * (-(lambda * lambda) / (4.0 * chi * chi)).exp()
    }

    /// Exact `K(σ1, σ2)`: the backaction-damped peaks blurred with the
    /// imprecision of strength `χ'`.
    pub fn exact_k(&self, sigma1: f64, sigma2: f64, chi: f64, chi_prime: f64) -> Result<f64> {
        check_sigma2(sigma2)?;
        let sum: f64 = SIGMA1_ATOMS
            .iter()
            .map(|&s| (-(chi_prime * (s - sigma1)).powi(2)).exp() * self.damped_weight(s, sigma2, chi))
            .sum();
        Ok(chi_prime / PI.sqrt() * sum)
    }
}

/// Six-atom quasi-probability for explicit amplitudes.
pub fn kqpd_spin_weights(
    alpha: Complex64,
    beta: Complex64,
    gamma: Complex64,
    delta: Complex64,
    gamma1: f64,
) -> Result<SignedAtomDistribution> {
    SpinState::new(alpha, beta, gamma, delta)?.kqpd_weights(gamma1)
}

/// [`SpinState::pdf_joint`] for the balanced benchmark state.
pub fn pdf_spin_joint(sigma1: f64, sigma2: f64, chi: f64) -> Result<f64> {
    SpinState::balanced().pdf_joint(sigma1, sigma2, chi)
}

/// [`SpinState::cf_joint`] for the balanced benchmark state.
pub fn cf_spin_joint(lambda: f64, sigma2: f64, chi: f64) -> Result<Complex64> {
    SpinState::balanced().cf_joint(lambda, sigma2, chi)
}

pub fn pdf_spin_single(sigma1: f64, chi: f64) -> f64 {
    SpinState::balanced().pdf_single(sigma1, chi)
}

pub fn cf_spin_single(lambda: f64, chi: f64) -> Complex64 {
    SpinState::balanced().cf_single(lambda, chi)
}

/// [`SpinState::exact_k`] for the balanced benchmark state.
pub fn exact_k_spin(sigma1: f64, sigma2: f64, chi: f64, chi_prime: f64) -> Result<f64> {
    SpinState::balanced().exact_k(sigma1, sigma2, chi, chi_prime)
}
