//! Cutoff-regularized estimators of `K`.
//!
//! Each single-observable pair `(Y', Y)` measured at strengths `(χ', χ)` is
//! turned into a [`DeconvolutionKernel`]: per λ-node coefficients
//! `w_k · Y'_k / Y_k`, set to zero wherever `|Y_k| ≤ c_o`. The cutoff is applied
//! node by node; `w_k` are trapezoidal weights on `[-λ_c, λ_c]`.
//!
//! For joint records the λ-sum factorizes over samples:
//!
//! ```text
//! K(x, p) = (1/N) Σ_j F_x(x - x_j) F_p(p - p_j),   F(u) = (1/2π) Σ_k c_k e^{iλ_k u}
//! ```
//!
//! which is the same trapezoidal quadrature as summing `e^{iλ·A} Y_λ c_x c_p`
//! over the full two-dimensional grid, at `O(N·n)` instead of `O(N·n²)` cost.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cf::{empirical_cf, empirical_cf_spin};
use crate::error::{KqpdError, Result};
use crate::grid::{CharFnGrid, LambdaGrid};
use crate::sampling::{rng_from_seed, MeasurementRecord, System};
use crate::systems::{cf_x_single, cf_xp_joint, spin::check_sigma2, SpinState};

pub const DEFAULT_N_LAMBDA: usize = 401;

/// Regularization of the Fourier inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffConfig {
    /// Magnitude floor on the denominator CF.
    pub c_o: f64,
    /// Band limit of the λ-integral.
    pub lambda_c: f64,
    /// Nodes per λ axis (odd).
    #[serde(default = "default_n_lambda")]
    pub n_lambda: usize,
}

fn default_n_lambda() -> usize {
    DEFAULT_N_LAMBDA
}

impl CutoffConfig {
    pub fn new(c_o: f64, lambda_c: f64, n_lambda: usize) -> Result<Self> {
        if !(c_o > 0.0 && c_o <= 1.0) {
            return Err(KqpdError::InvalidParameter(format!("c_o must lie in (0, 1], got {c_o}")));
        }
        if !(lambda_c > 0.0) || !lambda_c.is_finite() {
            return Err(KqpdError::InvalidParameter(format!("lambda_c must be > 0, got {lambda_c}")));
        }
        if n_lambda < 11 || n_lambda % 2 == 0 {
            return Err(KqpdError::InvalidParameter(format!("n_lambda must be odd and >= 11, got {n_lambda}")));
        }
        Ok(CutoffConfig { c_o, lambda_c, n_lambda })
    }

    /// Position/momentum panel settings: `c_o = 0.011`, `λ_c = 10`.
    pub fn fock_default() -> Self {
        CutoffConfig { c_o: 0.011, lambda_c: 10.0, n_lambda: DEFAULT_N_LAMBDA }
    }

    /// Spin panel settings: `c_o = 0.01`, `λ_c = 12`.
    pub fn spin_default() -> Self {
        CutoffConfig { c_o: 0.01, lambda_c: 12.0, n_lambda: DEFAULT_N_LAMBDA }
    }

    /// The λ-grid, or `None` for an empty integration domain.
    pub fn grid(&self) -> Result<Option<LambdaGrid>> {
        if self.lambda_c == 0.0 {
            return Ok(None);
        }
        LambdaGrid::new(self.lambda_c, self.n_lambda).map(Some)
    }
}

/// Ratio `Y'/Y` with the cutoff and quadrature weights folded in.
#[derive(Debug, Clone)]
pub struct DeconvolutionKernel {
    grid: LambdaGrid,
    coeffs: Vec<Complex64>,
    active: usize,
}

impl DeconvolutionKernel {
    pub fn new(grid: LambdaGrid, numerator: &[Complex64], denominator: &[Complex64], c_o: f64) -> Result<Self> {
        if numerator.len() != grid.n || denominator.len() != grid.n {
            return Err(KqpdError::DimensionMismatch(format!(
                "kernel needs {} nodes, got {} and {}",
                grid.n,
                numerator.len(),
                denominator.len()
            )));
        }
        let weights = grid.weights();
        let mut active = 0;
        let coeffs = numerator
            .iter()
            .zip(denominator)
            .zip(&weights)
            .map(|((&num, &den), &w)| {
                let mag = den.norm();
                if mag > c_o {
                    active += 1;
                    // scaled division: norm_sqr() underflows for tiny exact CFs
                    (num / mag) * (den.conj() / mag) * w
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Ok(DeconvolutionKernel { grid, coeffs, active })
    }

    pub fn from_records(numerator: &MeasurementRecord, denominator: &MeasurementRecord, grid: LambdaGrid, c_o: f64) -> Result<Self> {
        let num = empirical_cf(numerator, &grid)?;
        let den = empirical_cf(denominator, &grid)?;
        Self::new(grid, &num.values, &den.values, c_o)
    }

    pub fn grid(&self) -> &LambdaGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Number of nodes that survive the cutoff.
    pub fn active_nodes(&self) -> usize {
        self.active
    }

    /// `(1/2π) Σ_k c_k e^{iλ_k u}`.
    pub fn transform(&self, u: f64) -> Complex64 {
        let h = self.grid.step();
        let step = Complex64::from_polar(1.0, h * u);
        let mut z = Complex64::from_polar(1.0, self.grid.node(0) * u);
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate() {
            if k % 64 == 0 && k > 0 {
                z = Complex64::from_polar(1.0, self.grid.node(k) * u);
            }
            acc += c * z;
            z *= step;
        }
        acc / (2.0 * PI)
    }
}

/// One estimate of `K` at one probe point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KEstimate {
    /// Real part of the regularized integral.
    pub value: f64,
    /// Imaginary part, dropped from `value` and kept as a diagnostic.
    pub imaginary: f64,
    /// Surviving λ-nodes per axis.
    pub active_nodes: [usize; 2],
    /// Set when the cutoff removed every node (then `value == 0`).
    pub all_cut: bool,
}

impl KEstimate {
    fn empty() -> Self {
        KEstimate { value: 0.0, imaginary: 0.0, active_nodes: [0, 0], all_cut: true }
    }

    fn from_complex(z: Complex64, active_nodes: [usize; 2]) -> Self {
        let all_cut = active_nodes.contains(&0);
        KEstimate { value: z.re, imaginary: z.im, active_nodes, all_cut }
    }
}

fn check_chi(record: &MeasurementRecord, chi: f64, label: &str) -> Result<()> {
    if record.chi != chi {
        return Err(KqpdError::WrongRecord {
            expected: format!("{label} at chi={chi}"),
            found: format!("chi={}", record.chi),
        });
    }
    Ok(())
}

/// Estimator for the position/momentum example. Kernels are built once and
/// the estimate can be evaluated at any number of probe points.
#[derive(Debug, Clone)]
pub struct XpEstimator<'a> {
    joint: &'a MeasurementRecord,
    kernels: Option<(DeconvolutionKernel, DeconvolutionKernel)>,
}

impl<'a> XpEstimator<'a> {
    /// `single_x`/`single_p` are at the joint record's `χ`; the primed
    /// records are at `χ'`.
    pub fn new(
        joint: &'a MeasurementRecord,
        single_x: &MeasurementRecord,
        single_p: &MeasurementRecord,
        single_x_prime: &MeasurementRecord,
        single_p_prime: &MeasurementRecord,
        cutoffs: &CutoffConfig,
    ) -> Result<Self> {
        joint.expect(System::FockXp, true)?;
        for r in [single_x, single_p, single_x_prime, single_p_prime] {
            r.expect(System::FockXp, false)?;
        }
        check_chi(single_x, joint.chi, "x record")?;
        check_chi(single_p, joint.chi, "p record")?;
        check_chi(single_p_prime, single_x_prime.chi, "primed p record")?;
        let kernels = match cutoffs.grid()? {
            None => None,
            Some(grid) => Some((
                DeconvolutionKernel::from_records(single_x_prime, single_x, grid, cutoffs.c_o)?,
                DeconvolutionKernel::from_records(single_p_prime, single_p, grid, cutoffs.c_o)?,
            )),
        };
        Ok(XpEstimator { joint, kernels })
    }

    pub fn kernels(&self) -> Option<&(DeconvolutionKernel, DeconvolutionKernel)> {
        self.kernels.as_ref()
    }

    pub fn at(&self, x: f64, p: f64) -> KEstimate {
        let Some((kx, kp)) = &self.kernels else {
            return KEstimate::empty();
        };
        let active = [kx.active_nodes(), kp.active_nodes()];
        if active.contains(&0) {
            return KEstimate::from_complex(Complex64::new(0.0, 0.0), active);
        }
        let sum: Complex64 = self.terms(x, p).iter().sum();
        KEstimate::from_complex(sum / self.joint.len() as f64, active)
    }

    /// Per-sample contributions `F_x(x - x_j) F_p(p - p_j)`; the estimate is
    /// their mean. Empty if the λ-domain is empty.
    pub fn terms(&self, x: f64, p: f64) -> Vec<Complex64> {
        let Some((kx, kp)) = &self.kernels else {
            return Vec::new();
        };
        let pairs: Vec<&[f64]> = self.joint.values.chunks_exact(2).collect();
        pairs.par_iter().map(|c| kx.transform(x - c[0]) * kp.transform(p - c[1])).collect()
    }
}

/// `K_est` for the position/momentum example at probe `(x, p)`.
pub fn estimate_k_xp(
    joint: &MeasurementRecord,
    single_x: &MeasurementRecord,
    single_p: &MeasurementRecord,
    single_x_prime: &MeasurementRecord,
    single_p_prime: &MeasurementRecord,
    probe: (f64, f64),
    cutoffs: &CutoffConfig,
) -> Result<KEstimate> {
    let est = XpEstimator::new(joint, single_x, single_p, single_x_prime, single_p_prime, cutoffs)?;
    Ok(est.at(probe.0, probe.1))
}

/// Direct two-dimensional trapezoidal quadrature
/// `(1/4π²) Σ e^{iλ·A} Y(λx, λp) c_x c_p` over a joint CF grid.
pub fn quadrature_k_2d(
    joint: &CharFnGrid,
    kernel_x: &DeconvolutionKernel,
    kernel_p: &DeconvolutionKernel,
    x: f64,
    p: f64,
) -> Result<KEstimate> {
    let grid = kernel_x.grid();
    if joint.shape() != vec![grid.n, grid.n] || kernel_p.grid() != grid {
        return Err(KqpdError::DimensionMismatch("joint CF grid does not match the kernels".into()));
    }
    let n = grid.n;
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let cx = kernel_x.coeffs()[i];
        if cx.norm() == 0.0 {
            continue;
        }
        let ex = Complex64::from_polar(1.0, grid.node(i) * x);
        let mut row = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let cp = kernel_p.coeffs()[j];
            if cp.norm() == 0.0 {
                continue;
            }
            row += Complex64::from_polar(1.0, grid.node(j) * p) * joint.values[i * n + j] * cp;
        }
        total += ex * cx * row;
    }
    Ok(KEstimate::from_complex(
        total / (4.0 * PI * PI),
        [kernel_x.active_nodes(), kernel_p.active_nodes()],
    ))
}

/// Oracle-mode estimate: the closed-form CFs replace every empirical one.
pub fn oracle_k_xp(chi: f64, chi_prime: f64, probe: (f64, f64), cutoffs: &CutoffConfig) -> Result<KEstimate> {
    let Some(grid) = cutoffs.grid()? else {
        return Ok(KEstimate::empty());
    };
    let (kernel, joint) = oracle_xp_parts(chi, chi_prime, grid, cutoffs.c_o)?;
    quadrature_k_2d(&joint, &kernel, &kernel, probe.0, probe.1)
}

pub(crate) fn oracle_xp_parts(
    chi: f64,
    chi_prime: f64,
    grid: LambdaGrid,
    c_o: f64,
) -> Result<(DeconvolutionKernel, CharFnGrid)> {
    let nodes = grid.nodes();
    let num: Vec<Complex64> = nodes.iter().map(|&l| cf_x_single(l, chi_prime)).collect();
    let den: Vec<Complex64> = nodes.iter().map(|&l| cf_x_single(l, chi)).collect();
    let kernel = DeconvolutionKernel::new(grid, &num, &den, c_o)?;
    let mut values = Vec::with_capacity(grid.n * grid.n);
    for &lx in &nodes {
        for &lp in &nodes {
            values.push(cf_xp_joint(lx, lp, chi));
        }
    }
    Ok((kernel, CharFnGrid { axes: vec![grid.axis(), grid.axis()], values }))
}

/// Estimator for the spin example.
#[derive(Debug, Clone)]
pub struct SpinEstimator {
    parts: Option<(DeconvolutionKernel, CharFnGrid, CharFnGrid)>,
}

impl SpinEstimator {
    pub fn new(
        joint: &MeasurementRecord,
        single: &MeasurementRecord,
        single_prime: &MeasurementRecord,
        cutoffs: &CutoffConfig,
    ) -> Result<Self> {
        joint.expect(System::Spin, true)?;
        single.expect(System::Spin, false)?;
        single_prime.expect(System::Spin, false)?;
        check_chi(single, joint.chi, "sigma1 record")?;
        let parts = match cutoffs.grid()? {
            None => None,
            Some(grid) => {
                let kernel = DeconvolutionKernel::from_records(single_prime, single, grid, cutoffs.c_o)?;
                let (up, down) = empirical_cf_spin(joint, &grid)?;
                Some((kernel, up, down))
            }
        };
        Ok(SpinEstimator { parts })
    }

    /// Builds the estimator from given CFs (exact or empirical).
    pub fn from_cfs(kernel: DeconvolutionKernel, up: CharFnGrid, down: CharFnGrid) -> Result<Self> {
        let n = kernel.grid().n;
        if up.shape() != vec![n] || down.shape() != vec![n] {
            return Err(KqpdError::DimensionMismatch("spin CF grids do not match the kernel".into()));
        }
        Ok(SpinEstimator { parts: Some((kernel, up, down)) })
    }

    pub fn kernel(&self) -> Option<&DeconvolutionKernel> {
        self.parts.as_ref().map(|p| &p.0)
    }

    pub fn at(&self, sigma1: f64, sigma2: f64) -> Result<KEstimate> {
        check_sigma2(sigma2)?;
        let Some((kernel, up, down)) = &self.parts else {
            return Ok(KEstimate::empty());
        };
        let joint = if sigma2 > 0.0 { up } else { down };
        let grid = kernel.grid();
        let sum: Complex64 = kernel
            .coeffs()
            .iter()
            .zip(&joint.values)
            .enumerate()
            .filter(|(_, (c, _))| c.norm() > 0.0)
            .map(|(k, (c, y))| Complex64::from_polar(1.0, grid.node(k) * sigma1) * y * c)
            .sum();
        let active = kernel.active_nodes();
        Ok(KEstimate::from_complex(sum / (2.0 * PI), [active, active]))
    }
}

/// `K_est` for the spin example at probe `(σ1, σ2)`.
pub fn estimate_k_spin(
    joint: &MeasurementRecord,
    single: &MeasurementRecord,
    single_prime: &MeasurementRecord,
    probe: (f64, f64),
    cutoffs: &CutoffConfig,
) -> Result<KEstimate> {
    SpinEstimator::new(joint, single, single_prime, cutoffs)?.at(probe.0, probe.1)
}

/// Oracle-mode spin estimator built from the closed-form CFs.
pub fn oracle_spin_estimator(state: &SpinState, chi: f64, chi_prime: f64, cutoffs: &CutoffConfig) -> Result<SpinEstimator> {
    let Some(grid) = cutoffs.grid()? else {
        return Ok(SpinEstimator { parts: None });
    };
    let nodes = grid.nodes();
    let num: Vec<Complex64> = nodes.iter().map(|&l| state.cf_single(l, chi_prime)).collect();
    let den: Vec<Complex64> = nodes.iter().map(|&l| state.cf_single(l, chi)).collect();
    let kernel = DeconvolutionKernel::new(grid, &num, &den, cutoffs.c_o)?;
    let branch = |s2: f64| -> Result<CharFnGrid> {
        let values = nodes.iter().map(|&l| state.cf_joint(l, s2, chi)).collect::<Result<Vec<_>>>()?;
        Ok(CharFnGrid { axes: vec![grid.axis()], values })
    };
    SpinEstimator::from_cfs(kernel, branch(1.0)?, branch(-1.0)?)
}

pub fn oracle_k_spin(chi: f64, chi_prime: f64, probe: (f64, f64), cutoffs: &CutoffConfig) -> Result<KEstimate> {
    oracle_spin_estimator(&SpinState::balanced(), chi, chi_prime, cutoffs)?.at(probe.0, probe.1)
}

/// Per-sample contributions to the spin estimate at `(σ1, σ2)`: the
/// estimate equals their mean over the whole joint record.
pub fn spin_sample_terms(kernel: &DeconvolutionKernel, joint: &MeasurementRecord, sigma1: f64, sigma2: f64) -> Result<Vec<Complex64>> {
    joint.expect(System::Spin, true)?;
    check_sigma2(sigma2)?;
    Ok(joint
        .values
        .chunks_exact(2)
        .map(|c| if c[1] == sigma2 { kernel.transform(sigma1 - c[0]) } else { Complex64::new(0.0, 0.0) })
        .collect())
}

/// Bootstrap standard errors `(re, im)` of the mean of `terms`.
pub fn bootstrap_std_error(terms: &[Complex64], resamples: usize, seed: u64) -> Result<(f64, f64)> {
    if terms.is_empty() {
        return Err(KqpdError::EmptyRecord);
    }
    if resamples < 2 {
        return Err(KqpdError::InvalidParameter("bootstrap needs at least 2 resamples".into()));
    }
    let n = terms.len();
    let mut rng = rng_from_seed(seed);
    let means: Vec<Complex64> = (0..resamples)
        .map(|_| {
            let s: Complex64 = (0..n).map(|_| terms[rng.random_range(0..n)]).sum();
            s / n as f64
        })
        .collect();
    let re: Vec<f64> = means.iter().map(|z| z.re).collect();
    let im: Vec<f64> = means.iter().map(|z| z.im).collect();
    Ok((sample_sd(&re), sample_sd(&im)))
}

/// Sample standard deviation with `n - 1` in the denominator.
pub(crate) fn sample_sd(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}
