//! Simultaneous position/momentum measurement on a single-photon Fock state
//! with equal detector strengths on both quadratures.

use std::f64::consts::PI;

use num_complex::Complex64;

/// `g = (χ/2)² + 1/χ'²`; `K` is negative at the origin iff `g < 1`.
pub fn g_parameter(chi: f64, chi_prime: f64) -> f64 {
    (chi / 2.0).powi(2) + 1.0 / (chi_prime * chi_prime)
}

/// Joint outcome density `P(x, p | χ)` of the simultaneous measurement.
pub fn pdf_xp_joint(x: f64, p: f64, chi: f64) -> f64 {
    let r2 = x * x + p * p;
    let chi2 = chi * chi;
    let s = 2.0 + chi2;
    let prefactor = 4.0 * chi2 / (PI * s.powi(6));
    let bracket = 32.0 * chi2 * chi2 * r2 + (4.0 - chi2 * chi2).powi(2);
    prefactor * (-4.0 * chi2 * r2 / (s * s)).exp() * bracket
}

/// Characteristic function of [`pdf_xp_joint`]; real-valued.
pub fn cf_xp_joint(lambda_x: f64, lambda_p: f64, chi: f64) -> Complex64 {
    let l2 = lambda_x * lambda_x + lambda_p * lambda_p;
    let s = 2.0 + chi * chi;
    let v = 0.5 * (-(s * s) / (16.0 * chi * chi) * l2).exp() * (2.0 - l2);
    Complex64::new(v, 0.0)
}

/// Outcome density of measuring `x` alone (identical for `p` alone).
pub fn pdf_x_single(x: f64, chi: f64) -> f64 {
    let chi2 = chi * chi;
    let s = 1.0 + chi2;
    chi / (PI * s.powi(5)).sqrt() * (s + 2.0 * x * x * chi2 * chi2) * (-chi2 * x * x / s).exp()
}

/// Characteristic function of [`pdf_x_single`]; real-valued.
pub fn cf_x_single(lambda: f64, chi: f64) -> Complex64 {
    let l2 = lambda * lambda;
    let v = 0.5 * (-(1.0 + chi * chi) * l2 / (4.0 * chi * chi)).exp() * (2.0 - l2);
    Complex64::new(v, 0.0)
}

/// `cf_x_single(λ, χ') / cf_x_single(λ, χ)` with the common `(2 - λ²)` factor
/// cancelled, so it is finite at `λ = √2`.
pub fn imprecision_ratio_xp(lambda: f64, chi: f64, chi_prime: f64) -> f64 {
    (-(lambda * lambda) / 4.0 * (1.0 / (chi_prime * chi_prime) - 1.0 / (chi * chi))).exp()
}

/// Exact `K(x, p)` for the Fock example.
pub fn exact_k_xp(x: f64, p: f64, chi: f64, chi_prime: f64) -> f64 {
    let g = g_parameter(chi, chi_prime);
    let r2 = x * x + p * p;
    let s = 1.0 + g;
    (-r2 / s).exp() * (2.0 * r2 - 1.0 + g * g) / (PI * s.powi(3))
}
