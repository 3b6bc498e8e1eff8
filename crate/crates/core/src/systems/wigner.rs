//! Wigner functions of the single-photon Fock state and of the detectors.

use std::f64::consts::PI;

/// Wigner function of the single-photon Fock state,
/// `(1/π)[2(x²+p²) - 1] e^{-(x²+p²)}`.
pub fn wigner_fock(x: f64, p: f64) -> f64 {
    let r2 = x * x + p * p;
    (2.0 * r2 - 1.0) * (-r2).exp() / PI
}

/// Wigner function of a minimal-uncertainty Gaussian detector,
/// `(1/π) e^{-(r²+π²)}`.
pub fn wigner_detector(r: f64, pi: f64) -> f64 {
    (-(r * r)).exp() * (-(pi * pi)).exp() / PI
}

/// Quasi-probability for simultaneous `x`/`p` measurement on the Fock state:
/// the Wigner function shifted by the backaction kicks.
pub fn kqpd_xp(x: f64, p: f64, gamma_x: f64, gamma_p: f64) -> f64 {
    wigner_fock(x - gamma_p / 2.0, p + gamma_x / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fock_values() {
        assert_abs_diff_eq!(wigner_fock(0.0, 0.0), -1.0 / PI, epsilon = 1e-15);
        assert_abs_diff_eq!(wigner_fock(0.5f64.sqrt(), 0.0), 0.0, epsilon = 1e-15);
        // 3 e^{-2} / π by plain arithmetic
        assert_abs_diff_eq!(wigner_fock(1.0, 1.0), 0.129_236_5, epsilon = 1e-6);
        assert_abs_diff_eq!(wigner_fock(1.0, 1.0), 3.0 * (-2.0f64).exp() / PI, epsilon = 1e-15);
    }

    #[test]
    fn detector_values() {
        assert_abs_diff_eq!(wigner_detector(0.0, 0.0), 1.0 / PI, epsilon = 1e-15);
        assert_abs_diff_eq!(wigner_detector(1.0, 0.0), 0.117_099_66, epsilon = 1e-8);
        // separable
        let (r, q) = (0.7, -1.3);
        let factor = wigner_detector(r, 0.0) * wigner_detector(0.0, q) * PI;
        assert_abs_diff_eq!(wigner_detector(r, q), factor, epsilon = 1e-16);
    }

    #[test]
    fn detector_normalized() {
        let h = 0.02;
        let n = (16.0 / h) as i32;
        let mut total = 0.0;
        for i in -n / 2..=n / 2 {
            for j in -n / 2..=n / 2 {
                total += wigner_detector(i as f64 * h, j as f64 * h);
            }
        }
        assert_abs_diff_eq!(total * h * h, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn kqpd_shift() {
        assert_abs_diff_eq!(kqpd_xp(0.0, 0.0, 0.0, 0.0), -1.0 / PI, epsilon = 1e-15);
        assert_abs_diff_eq!(kqpd_xp(0.0, 0.0, 2.0, 0.0), (-1.0f64).exp() / PI, epsilon = 1e-15);
        assert_eq!(kqpd_xp(1.0, -0.5, 0.0, 2.0), wigner_fock(0.0, -0.5));
    }
}
