//! Configuration, commands and output bundles of the `kqpd` tool.

pub mod commands;
pub mod config;
pub mod manifest;

pub use commands::{
    cmd_estimate, cmd_exact, cmd_reproduce_fig2, cmd_simulate, cmd_sweep, reference_chis, reference_config, run_sweep,
    sweep_csv, Panel, SweepRow, EXACT_HEADER, REPORT_HEADER, SURFACE_HEADER, SWEEP_HEADER,
};
pub use config::{ChiSpec, ConfigFile, ExperimentConfig, ExactSection, EstimateSection, SimulateSection};
pub use manifest::{FileEntry, OutputDir, RunClock, RunManifest};
