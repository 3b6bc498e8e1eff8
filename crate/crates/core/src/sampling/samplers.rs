use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Exp, Gamma, StandardNormal};

use super::{check_count, rng_from_seed, MeasurementRecord, RecordKind, SimRng, System};
use crate::error::{KqpdError, Result};
use crate::systems::spin::SIGMA1_ATOMS;
use crate::systems::{check_strength, SpinState};

const MIN_ACCEPTANCE: f64 = 0.01;

/// Joint `(x, p)` outcomes of the simultaneous measurement.
///
/// In polar form `u = r²` has density `∝ e^{-au}(bu + c)`, a mixture of
/// `Exp(a)` with weight `c/a` and `Gamma(2, a)` with weight `b/a²`; the angle
/// is uniform.
pub fn sample_xp_joint(chi: f64, n: usize, seed: u64) -> Result<MeasurementRecord> {
    check_strength("chi", chi)?;
    check_count(n)?;
    let chi2 = chi * chi;
    let a = 4.0 * chi2 / (2.0 + chi2).powi(2);
    let b = 32.0 * chi2 * chi2;
    let c = (4.0 - chi2 * chi2).powi(2);
    let w_exp = c / a;
    let w_gamma = b / (a * a);
    let p_exp = w_exp / (w_exp + w_gamma);
    let exp = Exp::new(a).map_err(|e| KqpdError::InvalidParameter(e.to_string()))?;
    let gamma = Gamma::new(2.0, 1.0 / a).map_err(|e| KqpdError::InvalidParameter(e.to_string()))?;

    let mut rng = rng_from_seed(seed);
    let mut values = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let u: f64 = if rng.random::<f64>() < p_exp { exp.sample(&mut rng) } else { gamma.sample(&mut rng) };
        let r = u.sqrt();
        let theta = std::f64::consts::TAU * rng.random::<f64>();
        let (s, c) = theta.sin_cos();
        values.push(r * c);
        values.push(r * s);
    }
    MeasurementRecord::new(System::FockXp, RecordKind::Joint, chi, seed, values)
}

fn sample_quadrature(chi: f64, n: usize, seed: u64, kind: RecordKind) -> Result<MeasurementRecord> {
    check_strength("chi", chi)?;
    check_count(n)?;
    let chi2 = chi * chi;
    // P(x) ∝ (1 + χ² + 2χ⁴x²) e^{-x²/2s²} with s² = (1+χ²)/(2χ²): a Gaussian
    // with weight 1/(1+χ²) and an x²-weighted Gaussian (|x|/s ~ χ₃) with
    // weight χ²/(1+χ²).
    let scale = ((1.0 + chi2) / (2.0 * chi2)).sqrt();
    let p_gauss = 1.0 / (1.0 + chi2);
    let chi3 = ChiSquared::new(3.0).expect("3 degrees of freedom");

    let mut rng = rng_from_seed(seed);
    let values = (0..n)
        .map(|_| {
            if rng.random::<f64>() < p_gauss {
                let z: f64 = StandardNormal.sample(&mut rng);
                scale * z
            } else {
                let radius = Distribution::<f64>::sample(&chi3, &mut rng).sqrt();
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                sign * scale * radius
            }
        })
        .collect();
    MeasurementRecord::new(System::FockXp, kind, chi, seed, values)
}

/// Outcomes of measuring `x` alone.
pub fn sample_x_single(chi: f64, n: usize, seed: u64) -> Result<MeasurementRecord> {
    sample_quadrature(chi, n, seed, RecordKind::Single1)
}

/// Outcomes of measuring `p` alone; same law as `x` by rotational symmetry.
pub fn sample_p_single(chi: f64, n: usize, seed: u64) -> Result<MeasurementRecord> {
    sample_quadrature(chi, n, seed, RecordKind::Single2)
}

/// Conditional sampler of `σ1` given one value of `σ2`.
struct ConditionalSpin {
    /// Positive components `(centre, weight)` forming the proposal.
    proposal: Vec<(f64, f64)>,
    proposal_total: f64,
    /// All components, including negative ones.
    target: Vec<(f64, f64)>,
    exact: bool,
}

impl ConditionalSpin {
    fn new(state: &SpinState, sigma2: f64, chi: f64) -> Result<Self> {
        let target: Vec<(f64, f64)> =
            SIGMA1_ATOMS.iter().map(|&s| (s, state.damped_weight(s, sigma2, chi))).collect();
        let proposal: Vec<(f64, f64)> = target.iter().copied().filter(|&(_, w)| w > 0.0).collect();
        let proposal_total: f64 = proposal.iter().map(|p| p.1).sum();
        let target_total: f64 = target.iter().map(|t| t.1).sum();
        let exact = target.iter().all(|&(_, w)| w >= 0.0);
        if target_total > 0.0 && proposal_total > 0.0 {
            let rate = target_total / proposal_total;
            if rate < MIN_ACCEPTANCE {
                return Err(KqpdError::LowAcceptance { rate });
            }
        }
        Ok(ConditionalSpin { proposal, proposal_total, target, exact })
    }

    fn unnormalized(components: &[(f64, f64)], x: f64, chi: f64) -> f64 {
        components.iter().map(|&(c, w)| w * (-(chi * (x - c)).powi(2)).exp()).sum()
    }

    fn draw(&self, rng: &mut SimRng, chi: f64) -> f64 {
        let sd = 1.0 / (chi * 2f64.sqrt());
        loop {
            let mut u = rng.random::<f64>() * self.proposal_total;
            let mut centre = self.proposal[self.proposal.len() - 1].0;
            for &(c, w) in &self.proposal {
                if u < w {
                    centre = c;
                    break;
                }
                u -= w;
            }
            let z: f64 = StandardNormal.sample(rng);
            let x = centre + sd * z;
            if self.exact {
                return x;
            }
            // target ≤ proposal since only negative components are dropped
            let target = Self::unnormalized(&self.target, x, chi).max(0.0);
            let proposal = Self::unnormalized(&self.proposal, x, chi);
            if rng.random::<f64>() * proposal < target {
                return x;
            }
        }
    }
}

/// Joint `(σ1, σ2)` outcomes for an arbitrary spin state.
///
/// `σ2` is drawn from its closed-form marginal, then `σ1` from the
/// conditional density by rejection from the positive Gaussian components.
pub fn sample_spin_joint_for(state: &SpinState, chi: f64, n: usize, seed: u64) -> Result<MeasurementRecord> {
    check_strength("chi", chi)?;
    check_count(n)?;
    state.validate()?;
    let p_up = state.marginal_sigma2(1.0, chi)?;
    let up = ConditionalSpin::new(state, 1.0, chi)?;
    let down = ConditionalSpin::new(state, -1.0, chi)?;

    let mut rng = rng_from_seed(seed);
    let mut values = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let (sigma2, cond) = if rng.random::<f64>() < p_up { (1.0, &up) } else { (-1.0, &down) };
        values.push(cond.draw(&mut rng, chi));
        values.push(sigma2);
    }
    MeasurementRecord::new(System::Spin, RecordKind::Joint, chi, seed, values)
}

/// Joint outcomes for the balanced benchmark state.
pub fn sample_spin_joint(chi: f64, n: usize, seed: u64) -> Result<MeasurementRecord> {
    sample_spin_joint_for(&SpinState::balanced(), chi, n, seed)
}

/// Outcomes of measuring `σ1` alone: a two-Gaussian mixture.
pub fn sample_spin_single_for(state: &SpinState, chi: f64, n: usize, seed: u64) -> Result<MeasurementRecord> {
    check_strength("chi", chi)?;
    check_count(n)?;
    state.validate()?;
    let p_plus = state.alpha.norm_sqr();
    let sd = 1.0 / (chi * 2f64.sqrt());
    let mut rng = rng_from_seed(seed);
    let values = (0..n)
        .map(|_| {
            let centre = if rng.random::<f64>() < p_plus { 1.0 } else { -1.0 };
            let z: f64 = StandardNormal.sample(&mut rng);
            centre + sd * z
        })
        .collect();
    MeasurementRecord::new(System::Spin, RecordKind::Single1, chi, seed, values)
}

pub fn sample_spin_single(chi: f64, n: usize, seed: u64) -> Result<MeasurementRecord> {
    sample_spin_single_for(&SpinState::balanced(), chi, n, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{cf_x_single, pdf_xp_joint};

    fn mean(v: impl Iterator<Item = f64>) -> (f64, f64, usize) {
        let xs: Vec<f64> = v.collect();
        let n = xs.len();
        let m = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        (m, (var / n as f64).sqrt(), n)
    }

    #[test]
    fn samplers_are_deterministic() {
        assert_eq!(sample_xp_joint(1.0, 500, 9).unwrap(), sample_xp_joint(1.0, 500, 9).unwrap());
        assert_eq!(sample_x_single(1.0, 500, 9).unwrap(), sample_x_single(1.0, 500, 9).unwrap());
        assert_eq!(sample_spin_joint(1.0, 500, 9).unwrap(), sample_spin_joint(1.0, 500, 9).unwrap());
        assert_eq!(sample_spin_single(1.0, 500, 9).unwrap(), sample_spin_single(1.0, 500, 9).unwrap());
        assert_ne!(sample_x_single(1.0, 500, 9).unwrap().values, sample_x_single(1.0, 500, 10).unwrap().values);
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(sample_xp_joint(1.0, 0, 1).is_err());
        assert!(sample_x_single(0.0, 10, 1).is_err());
        assert!(sample_spin_joint(-1.0, 10, 1).is_err());
        assert!(sample_spin_single(1.0, 0, 1).is_err());
    }

    #[test]
    fn low_acceptance_aborts() {
        // P(σ2 = -1) = (1 - e^{-χ²})/2 against proposal mass 1/2
        let err = sample_spin_joint(0.05, 10, 1).unwrap_err();
        assert!(matches!(err, KqpdError::LowAcceptance { .. }));
        assert!(sample_spin_joint(0.2, 10, 1).is_ok());
    }

    #[test]
    fn xp_joint_radial_moment() {
        let chi: f64 = 1.0;
        let rec = sample_xp_joint(chi, 100_000, 3).unwrap();
        let (m, se, _) = mean(rec.pairs().unwrap().map(|(x, p)| x * x + p * p));
        // trapezoidal oracle: ∫ r² P dA / ∫ P dA on the plane
        let h = 0.05;
        let (mut num, mut den) = (0.0, 0.0);
        for i in -240..=240 {
            for j in -240..=240 {
                let (x, p) = (i as f64 * h, j as f64 * h);
                let v = pdf_xp_joint(x, p, chi);
                num += (x * x + p * p) * v;
                den += v;
            }
        }
        let analytic = num / den;
        assert!((m - analytic).abs() < 4.0 * se, "{m} vs {analytic} ± {se}");
    }

    #[test]
    fn xp_joint_hole_at_origin() {
        let chi = 2f64.sqrt();
        let rec = sample_xp_joint(chi, 200_000, 4).unwrap();
        let radius = 0.15;
        let inside = rec.pairs().unwrap().filter(|(x, p)| x * x + p * p < radius * radius).count();
        let hist_density = inside as f64 / (200_000.0 * std::f64::consts::PI * radius * radius);
        // the density grows like r², so the disc average is small but positive
        assert!(hist_density < 0.01, "{hist_density}");
    }

    #[test]
    fn x_single_cf_and_mean() {
        let rec = sample_x_single(1.0, 100_000, 5).unwrap();
        let xs = rec.singles().unwrap();
        let n = xs.len() as f64;
        let cf = xs.iter().map(|x| x.cos()).sum::<f64>() / n;
        assert!((cf - cf_x_single(1.0, 1.0).re).abs() < 4.0 / n.sqrt());
        let (m, se, _) = mean(xs.iter().copied());
        assert!(m.abs() < 4.0 * se);
    }

    #[test]
    fn spin_joint_marginal_and_projective_limit() {
        let n = 30_000;
        let rec = sample_spin_joint(1.0, n, 6).unwrap();
        let ups = rec.pairs().unwrap().filter(|&(_, s2)| s2 == 1.0).count() as f64 / n as f64;
        let p = 0.5 + 0.5 * (-1.0f64).exp();
        assert!((ups - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt());

        let strong = sample_spin_joint(5.0, 100_000, 7).unwrap();
        let central = strong.pairs().unwrap().filter(|(s1, _)| s1.abs() < 0.5).count() as f64 / 100_000.0;
        assert!(central < 1e-3, "{central}");
    }

    #[test]
    fn spin_single_symmetry() {
        let n = 100_000;
        let rec = sample_spin_single(1.0, n, 8).unwrap();
        let xs = rec.singles().unwrap();
        let (m, se, _) = mean(xs.iter().copied());
        assert!(m.abs() < 4.0 * se);
        let l = std::f64::consts::FRAC_PI_2;
        let cf = xs.iter().map(|x| (l * x).cos()).sum::<f64>() / n as f64;
        assert!(cf.abs() < 4.0 / (n as f64).sqrt());
    }
}
