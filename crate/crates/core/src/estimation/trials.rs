//! Repeated sample-and-estimate trials, probe-grid surfaces and the
//! non-classicality verdict.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::estimator::{
    oracle_spin_estimator, oracle_xp_parts, sample_sd, CutoffConfig, KEstimate, SpinEstimator, XpEstimator,
};
use crate::error::{KqpdError, Result};
use crate::grid::{Axis, DensityGrid};
use crate::sampling::{
    derive_seed, sample_p_single, sample_spin_joint, sample_spin_single, sample_x_single, sample_xp_joint,
    MeasurementRecord, System,
};
use crate::systems::{check_strength, exact_k_spin, exact_k_xp, SpinState};

pub const DEFAULT_Z_THRESHOLD: f64 = 5.0;

/// An outcome tuple at which `K` is evaluated: `(x, p)` or `(σ1, σ2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub a1: f64,
    pub a2: f64,
}

impl Probe {
    pub fn new(a1: f64, a2: f64) -> Self {
        Probe { a1, a2 }
    }

    /// Point of maximal negativity: `(0, 0)` for position/momentum,
    /// `(0, -1)` for spin.
    pub fn default_for(system: System) -> Self {
        match system {
            System::FockXp => Probe::new(0.0, 0.0),
            System::Spin => Probe::new(0.0, -1.0),
        }
    }
}

impl fmt::Display for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a1, self.a2)
    }
}

/// Exact `K` for either benchmark system.
pub fn exact_k(system: System, probe: Probe, chi: f64, chi_prime: f64) -> Result<f64> {
    check_strength("chi", chi)?;
    check_strength("chi_prime", chi_prime)?;
    match system {
        System::FockXp => Ok(exact_k_xp(probe.a1, probe.a2, chi, chi_prime)),
        System::Spin => exact_k_spin(probe.a1, probe.a2, chi, chi_prime),
    }
}

/// Everything that defines one sample-and-estimate pipeline except its seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub system: System,
    pub chi: f64,
    pub chi_prime: f64,
    /// Outcomes per single-observable record.
    pub n_single: usize,
    /// Outcomes in the joint record.
    pub n_joint: usize,
    pub cutoffs: CutoffConfig,
}

impl Experiment {
    pub fn new(system: System, chi: f64, chi_prime: f64, n_single: usize, n_joint: usize, cutoffs: CutoffConfig) -> Result<Self> {
        let e = Experiment { system, chi, chi_prime, n_single, n_joint, cutoffs };
        e.validate()?;
        Ok(e)
    }

    /// 15 000 single-observable and 30 000 joint outcomes, `χ' = 5`,
    /// `c_o = 0.011`, `λ_c = 10`.
    pub fn fock_reference(chi: f64) -> Result<Self> {
        Self::new(System::FockXp, chi, 5.0, 15_000, 30_000, CutoffConfig::fock_default())
    }

    /// As [`Experiment::fock_reference`] for spin with `χ' = 3`, `c_o = 0.01`,
    /// `λ_c = 12`.
    pub fn spin_reference(chi: f64) -> Result<Self> {
        Self::new(System::Spin, chi, 3.0, 15_000, 30_000, CutoffConfig::spin_default())
    }

    pub fn validate(&self) -> Result<()> {
        check_strength("chi", self.chi)?;
        check_strength("chi_prime", self.chi_prime)?;
        if self.n_single == 0 || self.n_joint == 0 {
            return Err(KqpdError::InvalidParameter("sample counts must be positive".into()));
        }
        CutoffConfig::new(self.cutoffs.c_o, self.cutoffs.lambda_c, self.cutoffs.n_lambda)?;
        Ok(())
    }

    pub fn exact_k(&self, probe: Probe) -> Result<f64> {
        exact_k(self.system, probe, self.chi, self.chi_prime)
    }
}

/// The records of one trial. Streams are derived from the trial seed:
/// 0 joint, 1 and 2 the two observables at `χ`, 3 and 4 at `χ'`. The spin
/// example measures `σ1` alone only, so it uses streams 0, 1 and 3.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecords {
    pub joint: MeasurementRecord,
    pub single_1: MeasurementRecord,
    pub single_2: Option<MeasurementRecord>,
    pub single_1_prime: MeasurementRecord,
    pub single_2_prime: Option<MeasurementRecord>,
}

impl TrialRecords {
    pub fn sample(exp: &Experiment, trial_seed: u64) -> Result<Self> {
        exp.validate()?;
        let s = |i| derive_seed(trial_seed, i);
        match exp.system {
            System::FockXp => Ok(TrialRecords {
                joint: sample_xp_joint(exp.chi, exp.n_joint, s(0))?,
                single_1: sample_x_single(exp.chi, exp.n_single, s(1))?,
                single_2: Some(sample_p_single(exp.chi, exp.n_single, s(2))?),
                single_1_prime: sample_x_single(exp.chi_prime, exp.n_single, s(3))?,
                single_2_prime: Some(sample_p_single(exp.chi_prime, exp.n_single, s(4))?),
            }),
            System::Spin => Ok(TrialRecords {
                joint: sample_spin_joint(exp.chi, exp.n_joint, s(0))?,
                single_1: sample_spin_single(exp.chi, exp.n_single, s(1))?,
                single_2: None,
                single_1_prime: sample_spin_single(exp.chi_prime, exp.n_single, s(3))?,
                single_2_prime: None,
            }),
        }
    }

    /// All records present, in stream order.
    pub fn iter(&self) -> impl Iterator<Item = &MeasurementRecord> {
        [Some(&self.joint), Some(&self.single_1), self.single_2.as_ref(), Some(&self.single_1_prime), self.single_2_prime.as_ref()]
            .into_iter()
            .flatten()
    }
}

/// An estimator bound to one trial's records.
pub enum TrialEstimator<'a> {
    Xp(XpEstimator<'a>),
    Spin(SpinEstimator),
}

impl<'a> TrialEstimator<'a> {
    pub fn new(records: &'a TrialRecords, cutoffs: &CutoffConfig) -> Result<Self> {
        match (&records.single_2, &records.single_2_prime) {
            (Some(p), Some(p_prime)) => Ok(TrialEstimator::Xp(XpEstimator::new(
                &records.joint,
                &records.single_1,
                p,
                &records.single_1_prime,
                p_prime,
                cutoffs,
            )?)),
            _ => Ok(TrialEstimator::Spin(SpinEstimator::new(
                &records.joint,
                &records.single_1,
                &records.single_1_prime,
                cutoffs,
            )?)),
        }
    }

    pub fn at(&self, probe: Probe) -> Result<KEstimate> {
        match self {
            TrialEstimator::Xp(e) => Ok(e.at(probe.a1, probe.a2)),
            TrialEstimator::Spin(e) => e.at(probe.a1, probe.a2),
        }
    }
}

/// Samples one trial and evaluates `K_est` at every probe.
pub fn run_trial(exp: &Experiment, trial_seed: u64, probes: &[Probe]) -> Result<Vec<KEstimate>> {
    let records = TrialRecords::sample(exp, trial_seed)?;
    let est = TrialEstimator::new(&records, &exp.cutoffs)?;
    probes.iter().map(|&p| est.at(p)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ClassicalRejected,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::ClassicalRejected => "classical_rejected",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Repeat-trial statistics of `K_est` at one probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KEstimateReport {
    pub probe: Probe,
    pub experiment: Experiment,
    pub trial_seeds: Vec<u64>,
    pub k_estimates: Vec<f64>,
    /// Imaginary parts dropped from each estimate.
    pub imaginary: Vec<f64>,
    /// Trials in which the cutoff removed every λ-node.
    pub all_cut_trials: usize,
    pub mean: f64,
    /// Trial standard deviation over `√R`.
    pub std_error: f64,
    pub z_score: f64,
    pub z_threshold: f64,
    pub verdict: Verdict,
    pub exact_k: Option<f64>,
}

impl KEstimateReport {
    pub fn from_estimates(
        experiment: Experiment,
        probe: Probe,
        trial_seeds: Vec<u64>,
        estimates: &[KEstimate],
        z_threshold: f64,
    ) -> Result<Self> {
        if estimates.len() < 2 || estimates.len() != trial_seeds.len() {
            return Err(KqpdError::InvalidParameter(format!(
                "need one estimate per seed and at least 2 trials, got {} estimates for {} seeds",
                estimates.len(),
                trial_seeds.len()
            )));
        }
        let k: Vec<f64> = estimates.iter().map(|e| e.value).collect();
        let mean = k.iter().sum::<f64>() / k.len() as f64;
        let std_error = sample_sd(&k) / (k.len() as f64).sqrt();
        let z_score = z_score(mean, std_error);
        let verdict = if z_score < -z_threshold { Verdict::ClassicalRejected } else { Verdict::Inconclusive };
        Ok(KEstimateReport {
            probe,
            experiment,
            trial_seeds,
            imaginary: estimates.iter().map(|e| e.imaginary).collect(),
            all_cut_trials: estimates.iter().filter(|e| e.all_cut).count(),
            k_estimates: k,
            mean,
            std_error,
            z_score,
            z_threshold,
            verdict,
            exact_k: experiment.exact_k(probe).ok(),
        })
    }

    /// Trial standard deviation of `K_est`.
    pub fn trial_sd(&self) -> f64 {
        self.std_error * (self.k_estimates.len() as f64).sqrt()
    }

    /// `(mean - exact) / std_error`, if the exact value is known.
    pub fn z_vs_exact(&self) -> Option<f64> {
        self.exact_k.map(|e| z_score(self.mean - e, self.std_error))
    }
}

/// `mean / std_error`, with the sign of `mean` carried to infinity when the
/// standard error vanishes.
pub fn z_score(mean: f64, std_error: f64) -> f64 {
    if std_error > 0.0 {
        mean / std_error
    } else if mean == 0.0 {
        0.0
    } else {
        mean.signum() * f64::INFINITY
    }
}

/// `R` trials with seeds `derive_seed(master_seed, r)`, one report per probe.
pub fn repeat_trials(
    exp: &Experiment,
    probes: &[Probe],
    trials: usize,
    master_seed: u64,
    z_threshold: f64,
) -> Result<Vec<KEstimateReport>> {
    let seeds: Vec<u64> = (0..trials as u64).map(|r| derive_seed(master_seed, r)).collect();
    repeat_trials_with_seeds(exp, probes, &seeds, z_threshold)
}

/// Trials with explicit seeds. Trials run in parallel; results are collected
/// and reduced in seed order, so reports do not depend on the thread count.
pub fn repeat_trials_with_seeds(
    exp: &Experiment,
    probes: &[Probe],
    seeds: &[u64],
    z_threshold: f64,
) -> Result<Vec<KEstimateReport>> {
    exp.validate()?;
    if seeds.len() < 2 {
        return Err(KqpdError::InvalidParameter(format!("need at least 2 trials, got {}", seeds.len())));
    }
    if probes.is_empty() {
        return Err(KqpdError::InvalidParameter("no probes given".into()));
    }
    if !(z_threshold > 0.0) {
        return Err(KqpdError::InvalidParameter(format!("z threshold must be positive, got {z_threshold}")));
    }
    let mut seen = HashSet::new();
    if let Some(&dup) = seeds.iter().find(|s| !seen.insert(**s)) {
        return Err(KqpdError::DuplicateSeed(dup));
    }
    let per_trial: Vec<Vec<KEstimate>> =
        seeds.par_iter().map(|&s| run_trial(exp, s, probes)).collect::<Result<_>>()?;
    probes
        .iter()
        .enumerate()
        .map(|(i, &probe)| {
            let column: Vec<KEstimate> = per_trial.iter().map(|t| t[i]).collect();
            KEstimateReport::from_estimates(*exp, probe, seeds.to_vec(), &column, z_threshold)
        })
        .collect()
}

/// A `K` surface with the largest imaginary part that was dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct KSurface {
    pub k: DensityGrid,
    pub max_imaginary: f64,
}

fn surface_axes(system: System, a1: Axis, a2: Option<Axis>) -> Result<[Axis; 2]> {
    match (system, a2) {
        (System::FockXp, Some(a2)) => Ok([a1, a2]),
        (System::FockXp, None) => Err(KqpdError::InvalidParameter("position/momentum surface needs a second axis".into())),
        (System::Spin, None) => Ok([a1, Axis::spin_pair()]),
        (System::Spin, Some(_)) => Err(KqpdError::InvalidParameter("the spin surface fixes its σ2 axis".into())),
    }
}

/// `K_est` on a probe grid from one set of records sampled with
/// `trial_seed`. For spin, pass `a2 = None`; the second axis is `σ2 ∈ {-1, 1}`.
pub fn k_surface(exp: &Experiment, trial_seed: u64, a1: Axis, a2: Option<Axis>) -> Result<KSurface> {
    let axes = surface_axes(exp.system, a1, a2)?;
    let records = TrialRecords::sample(exp, trial_seed)?;
    match TrialEstimator::new(&records, &exp.cutoffs)? {
        TrialEstimator::Xp(est) => {
            let Some((kx, kp)) = est.kernels() else {
                return zero_surface(axes);
            };
            let transform_rows = |axis: &Axis, kernel: &super::DeconvolutionKernel, column: usize| -> Vec<Vec<Complex64>> {
                axis.nodes()
                    .par_iter()
                    .map(|&u| records.joint.values.chunks_exact(2).map(|c| kernel.transform(u - c[column])).collect())
                    .collect()
            };
            let gx = transform_rows(&axes[0], kx, 0);
            let gp = transform_rows(&axes[1], kp, 1);
            let n = records.joint.len() as f64;
            let values: Vec<Complex64> = gx
                .par_iter()
                .flat_map_iter(|row_x| {
                    gp.iter().map(move |row_p| row_x.iter().zip(row_p).map(|(a, b)| a * b).sum::<Complex64>() / n)
                })
                .collect();
            complex_surface(axes, values)
        }
        TrialEstimator::Spin(est) => spin_surface(&est, axes),
    }
}

fn zero_surface(axes: [Axis; 2]) -> Result<KSurface> {
    let n = axes[0].len() * axes[1].len();
    Ok(KSurface { k: DensityGrid::new(axes.to_vec(), vec![0.0; n])?, max_imaginary: 0.0 })
}

fn complex_surface(axes: [Axis; 2], values: Vec<Complex64>) -> Result<KSurface> {
    let max_imaginary = values.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(KSurface { k: DensityGrid::new(axes.to_vec(), values.iter().map(|z| z.re).collect())?, max_imaginary })
}

fn spin_surface(est: &SpinEstimator, axes: [Axis; 2]) -> Result<KSurface> {
    let mut values = Vec::with_capacity(axes[0].len() * 2);
    let mut max_imaginary = 0.0f64;
    for s1 in axes[0].nodes() {
        for s2 in axes[1].nodes() {
            let k = est.at(s1, s2)?;
            max_imaginary = max_imaginary.max(k.imaginary.abs());
            values.push(k.value);
        }
    }
    Ok(KSurface { k: DensityGrid::new(axes.to_vec(), values)?, max_imaginary })
}

/// The estimator surface with every empirical CF replaced by its closed form.
pub fn oracle_k_surface(
    system: System,
    chi: f64,
    chi_prime: f64,
    cutoffs: &CutoffConfig,
    a1: Axis,
    a2: Option<Axis>,
) -> Result<KSurface> {
    check_strength("chi", chi)?;
    check_strength("chi_prime", chi_prime)?;
    let axes = surface_axes(system, a1, a2)?;
    if system == System::Spin {
        let est = oracle_spin_estimator(&SpinState::balanced(), chi, chi_prime, cutoffs)?;
        return spin_surface(&est, axes);
    }
    let Some(grid) = cutoffs.grid()? else {
        return zero_surface(axes);
    };
    let (kernel, joint) = oracle_xp_parts(chi, chi_prime, grid, cutoffs.c_o)?;
    let n = grid.n;
    let lambdas = grid.nodes();
    let c = kernel.coeffs();
    // half[b][j] = Σ_i e^{iλ_i x_b} c_i Y(λ_i, λ_j)
    let half: Vec<Vec<Complex64>> = axes[0]
        .nodes()
        .par_iter()
        .map(|&x| {
            let mut row = vec![Complex64::new(0.0, 0.0); n];
            for i in 0..n {
                if c[i].norm() == 0.0 {
                    continue;
                }
                let f = Complex64::from_polar(1.0, lambdas[i] * x) * c[i];
                for (j, slot) in row.iter_mut().enumerate() {
                    *slot += f * joint.values[i * n + j];
                }
            }
            row
        })
        .collect();
    let p_nodes = axes[1].nodes();
    let norm = 1.0 / (4.0 * PI * PI);
    let lambdas = &lambdas;
    let values: Vec<Complex64> = half
        .iter()
        .flat_map(|row| {
            p_nodes.iter().map(move |&p| {
                row.iter()
                    .enumerate()
                    .map(|(j, v)| v * c[j] * Complex64::from_polar(1.0, lambdas[j] * p))
                    .sum::<Complex64>()
                    * norm
            })
        })
        .collect();
    complex_surface(axes, values)
}
