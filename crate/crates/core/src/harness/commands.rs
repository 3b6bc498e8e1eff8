//! The `kqpd` subcommands. Each writes plain CSV data files plus a JSON
//! manifest into an output directory; CSV contents depend only on the
//! configuration and seed.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExactSection, ExperimentConfig, EstimateSection, SimulateSection, DEFAULT_MASTER_SEED};
use super::manifest::{OutputDir, RunClock, RunManifest};
use crate::error::{KqpdError, Result};
use crate::estimation::{
    exact_k, k_surface, repeat_trials, CutoffConfig, KEstimateReport, Probe, TrialRecords, DEFAULT_N_LAMBDA,
    DEFAULT_Z_THRESHOLD,
};
use crate::grid::Axis;
use crate::sampling::{derive_seed, write_record, System};

pub const EXACT_HEADER: &str = "chi,a1,a2,k_exact";
pub const REPORT_HEADER: &str = "a1,a2,trial,k_estimate";
pub const SURFACE_HEADER: &str = "chi,a1,a2,k_estimate";
pub const SWEEP_HEADER: &str = "chi,a1,a2,exact_k,mean_k_est,std_error,z_score,verdict";

fn trial_seeds(cfg: &ExperimentConfig) -> Vec<u64> {
    (0..cfg.trials as u64).map(|r| derive_seed(cfg.master_seed, r)).collect()
}

/// Probe points of a surface: the given axis for `a1`, and the same axis or
/// `σ2 ∈ {-1, 1}` for `a2`.
fn surface_points(system: System, axis: Axis) -> Vec<Probe> {
    let second = match system {
        System::FockXp => axis,
        System::Spin => Axis::spin_pair(),
    };
    axis.nodes().into_iter().flat_map(|a1| second.nodes().into_iter().map(move |a2| Probe::new(a1, a2))).collect()
}

fn fails_everywhere(reports: &[KEstimateReport]) -> bool {
    reports.iter().any(|r| r.all_cut_trials == r.k_estimates.len())
}

fn exact_surface_csv(system: System, chis: &[f64], chi_prime: f64, axis: Axis) -> Result<String> {
    let mut out = format!("{EXACT_HEADER}\n");
    for &chi in chis {
        for p in surface_points(system, axis) {
            let _ = writeln!(out, "{chi},{},{},{}", p.a1, p.a2, exact_k(system, p, chi, chi_prime)?);
        }
    }
    Ok(out)
}

fn exact_curve_csv(cfg: &ExperimentConfig) -> Result<String> {
    let mut out = format!("{EXACT_HEADER}\n");
    for chi in cfg.exact.curve_chis()? {
        for &p in &cfg.probes {
            let _ = writeln!(out, "{chi},{},{},{}", p.a1, p.a2, exact_k(cfg.system, p, chi, cfg.chi_prime)?);
        }
    }
    Ok(out)
}

/// `exact`: closed-form `K` on the probe grid for every configured `χ`
/// (`exact_surface.csv`) and along a strength curve at every probe
/// (`exact_curve.csv`).
pub fn cmd_exact(cfg: &ExperimentConfig, out: &Path) -> Result<RunManifest> {
    let clock = RunClock::start();
    cfg.validate()?;
    let surface = exact_surface_csv(cfg.system, &cfg.chis, cfg.chi_prime, cfg.exact.axis()?)?;
    let curve = exact_curve_csv(cfg)?;
    let mut dir = OutputDir::create(out, clock)?;
    dir.write("exact_surface.csv", &surface)?;
    dir.write("exact_curve.csv", &curve)?;
    dir.finish("exact", cfg, Vec::new())
}

/// `simulate`: the records of the first `simulate.trials` trials at every
/// `χ`, under `records/chi_<χ>/trial_<r>/`.
pub fn cmd_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<RunManifest> {
    let clock = RunClock::start();
    cfg.validate()?;
    let seeds: Vec<u64> = trial_seeds(cfg).into_iter().take(cfg.simulate.trials).collect();
    let mut dir = OutputDir::create(out, clock)?;
    for &chi in &cfg.chis {
        let exp = cfg.experiment(chi)?;
        for (r, &seed) in seeds.iter().enumerate() {
            let records = TrialRecords::sample(&exp, seed)?;
            let sub = dir.root().join(format!("records/chi_{chi}/trial_{r}"));
            let named = [
                ("joint", Some(&records.joint)),
                ("single_1", Some(&records.single_1)),
                ("single_2", records.single_2.as_ref()),
                ("single_1_prime", Some(&records.single_1_prime)),
                ("single_2_prime", records.single_2_prime.as_ref()),
            ];
            for (stem, record) in named {
                if let Some(record) = record {
                    for path in write_record(record, &sub, stem)? {
                        dir.track(&path)?;
                    }
                }
            }
        }
    }
    dir.finish("simulate", cfg, seeds)
}

fn report_csv(reports: &[KEstimateReport]) -> String {
    let mut out = format!("{REPORT_HEADER}\n");
    for r in reports {
        for (t, k) in r.k_estimates.iter().enumerate() {
            let _ = writeln!(out, "{},{},{t},{k}", r.probe.a1, r.probe.a2);
        }
    }
    out
}

fn surface_csv(cfg: &ExperimentConfig, chi: f64, axis: Axis) -> Result<String> {
    let exp = cfg.experiment(chi)?;
    let a2 = (cfg.system == System::FockXp).then_some(axis);
    let surface = k_surface(&exp, derive_seed(cfg.master_seed, 0), axis, a2)?;
    if surface.max_imaginary > 0.0 {
        log::debug!("largest dropped imaginary part on the surface: {:e}", surface.max_imaginary);
    }
    let mut out = format!("{SURFACE_HEADER}\n");
    for (p, k) in surface_points(cfg.system, axis).iter().zip(&surface.k.values) {
        let _ = writeln!(out, "{chi},{},{},{k}", p.a1, p.a2);
    }
    Ok(out)
}

fn run_reports(cfg: &ExperimentConfig, chi: f64) -> Result<Vec<KEstimateReport>> {
    let exp = cfg.experiment(chi)?;
    log::info!("chi = {chi}: {} trials", cfg.trials);
    let reports = repeat_trials(&exp, &cfg.probes, cfg.trials, cfg.master_seed, cfg.z_threshold)?;
    for r in &reports {
        log::info!(
            "chi = {chi}, probe {}: mean {:.5} ± {:.5}, z = {:.2}, {}",
            r.probe,
            r.mean,
            r.std_error,
            r.z_score,
            r.verdict
        );
    }
    Ok(reports)
}

/// `estimate`: repeat-trial reports per `χ` (`report_chi_<χ>.json` and
/// `report_chi_<χ>.csv`), plus a single-trial surface if requested.
pub fn cmd_estimate(cfg: &ExperimentConfig, out: &Path) -> Result<RunManifest> {
    let clock = RunClock::start();
    cfg.validate()?;
    let mut files = Vec::new();
    let mut all_cut = false;
    for &chi in &cfg.chis {
        let reports = run_reports(cfg, chi)?;
        all_cut |= fails_everywhere(&reports);
        files.push((format!("report_chi_{chi}.json"), serde_json::to_string_pretty(&reports)?));
        files.push((format!("report_chi_{chi}.csv"), report_csv(&reports)));
        if cfg.estimate.surface {
            files.push((format!("surface_chi_{chi}.csv"), surface_csv(cfg, chi, cfg.estimate.axis()?)?));
        }
    }
    let mut dir = OutputDir::create(out, clock)?;
    for (name, contents) in &files {
        dir.write(name, contents)?;
    }
    let manifest = dir.finish("estimate", cfg, trial_seeds(cfg))?;
    if all_cut {
        return Err(KqpdError::AllNodesCut);
    }
    Ok(manifest)
}

/// One row of the sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub chi: f64,
    pub report: KEstimateReport,
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for row in rows {
        let r = &row.report;
        let exact = r.exact_k.map(|e| e.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{exact},{},{},{},{}",
            row.chi, r.probe.a1, r.probe.a2, r.mean, r.std_error, r.z_score, r.verdict
        );
    }
    out
}

/// Runs the repeat trials for every `χ` with the same trial seeds.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &chi in &cfg.chis {
        rows.extend(run_reports(cfg, chi)?.into_iter().map(|report| SweepRow { chi, report }));
    }
    Ok(rows)
}

/// `sweep`: `sweep.csv` with one row per `(χ, probe)` and the full reports
/// in `sweep_reports.json`.
pub fn cmd_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<RunManifest> {
    let clock = RunClock::start();
    let rows = run_sweep(cfg)?;
    let all_cut = rows.iter().any(|r| fails_everywhere(std::slice::from_ref(&r.report)));
    let mut dir = OutputDir::create(out, clock)?;
    dir.write("sweep.csv", &sweep_csv(&rows))?;
    dir.write("sweep_reports.json", &serde_json::to_string_pretty(&rows)?)?;
    let manifest = dir.finish("sweep", cfg, trial_seeds(cfg))?;
    if all_cut {
        return Err(KqpdError::AllNodesCut);
    }
    Ok(manifest)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Panel {
    /// Position/momentum on the single-photon state.
    A,
    /// Sequential spin measurement.
    B,
}

impl Panel {
    pub fn name(&self) -> &'static str {
        match self {
            Panel::A => "fig2a",
            Panel::B => "fig2b",
        }
    }
}

/// Strength sweep used by both reproduction bundles: `0.25, 0.5, ..., 3.0`.
pub fn reference_chis() -> Vec<f64> {
    (1..=12).map(|i| i as f64 * 0.25).collect()
}

/// The canned configuration of a reproduction bundle.
pub fn reference_config(panel: Panel, master_seed: u64, output_dir: &Path) -> ExperimentConfig {
    let (system, chi_prime, cutoffs, exact_axis) = match panel {
        Panel::A => (System::FockXp, 5.0, CutoffConfig::fock_default(), (-3.0, 3.0, 0.1)),
        Panel::B => (System::Spin, 3.0, CutoffConfig::spin_default(), (-2.5, 2.5, 0.05)),
    };
    let surface_step = match panel {
        Panel::A => 0.25,
        Panel::B => 0.05,
    };
    ExperimentConfig {
        system,
        chis: reference_chis(),
        chi_prime,
        n_single: 15_000,
        n_joint: 30_000,
        cutoffs: CutoffConfig { n_lambda: DEFAULT_N_LAMBDA, ..cutoffs },
        probes: vec![Probe::default_for(system)],
        trials: 20,
        master_seed,
        z_threshold: DEFAULT_Z_THRESHOLD,
        output_dir: output_dir.to_path_buf(),
        exact: ExactSection {
            grid_min: exact_axis.0,
            grid_max: exact_axis.1,
            grid_step: exact_axis.2,
            ..ExactSection::default()
        },
        simulate: SimulateSection::default(),
        estimate: EstimateSection {
            surface: true,
            surface_min: Some(exact_axis.0),
            surface_max: Some(exact_axis.1),
            surface_step: Some(surface_step),
        },
    }
}

/// Strength of the side-panel surfaces.
pub const SURFACE_CHI: f64 = 1.0;

/// `reproduce-fig2a` / `reproduce-fig2b`: the strength sweep with exact
/// curve, plus estimated and exact `K` surfaces at `χ = 1`, written to
/// `<out>/<panel>/`.
pub fn cmd_reproduce_fig2(panel: Panel, master_seed: Option<u64>, out: &Path) -> Result<RunManifest> {
    let clock = RunClock::start();
    let out = out.join(panel.name());
    let cfg = reference_config(panel, master_seed.unwrap_or(DEFAULT_MASTER_SEED), &out);
    let rows = run_sweep(&cfg)?;
    let curve = exact_curve_csv(&cfg)?;
    let estimated = surface_csv(&cfg, SURFACE_CHI, cfg.estimate.axis()?)?;
    let exact = exact_surface_csv(cfg.system, &[SURFACE_CHI], cfg.chi_prime, cfg.exact.axis()?)?;
    let mut dir = OutputDir::create(&out, clock)?;
    dir.write("sweep.csv", &sweep_csv(&rows))?;
    dir.write("sweep_reports.json", &serde_json::to_string_pretty(&rows)?)?;
    dir.write("exact_curve.csv", &curve)?;
    dir.write(&format!("surface_estimate_chi_{SURFACE_CHI}.csv"), &estimated)?;
    dir.write(&format!("surface_exact_chi_{SURFACE_CHI}.csv"), &exact)?;
    dir.finish(panel.name(), &cfg, trial_seeds(&cfg))
}
