//! Estimation of `K` from measurement records.

mod cf;
mod estimator;
mod trials;

pub use cf::{empirical_cf, empirical_cf_joint_xp, empirical_cf_spin};
pub use estimator::{
    bootstrap_std_error, estimate_k_spin, estimate_k_xp, oracle_k_spin, oracle_k_xp, oracle_spin_estimator,
    quadrature_k_2d, spin_sample_terms, CutoffConfig, DeconvolutionKernel, KEstimate, SpinEstimator, XpEstimator,
    DEFAULT_N_LAMBDA,
};
pub use trials::{
    exact_k, k_surface, oracle_k_surface, repeat_trials, repeat_trials_with_seeds, run_trial, z_score, Experiment,
    KEstimateReport, KSurface, Probe, TrialEstimator, TrialRecords, Verdict, DEFAULT_Z_THRESHOLD,
};
