//! Experiment harness: configuration, campaigns and reports.

pub mod campaigns;
pub mod catalog;
pub mod config;
pub mod report;

use std::time::Instant;

use anyhow::anyhow;

use crate::campaigns::Ctx;
use crate::config::{load_inputs, validate, ExperimentConfig};
use crate::report::Report;

/// Validates `cfg`, runs its experiment and assembles the report.
pub fn run(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let diags = validate(cfg);
    if !diags.is_empty() {
        let lines: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
        return Err(anyhow!("invalid configuration:\n  {}", lines.join("\n  ")));
    }
    let inputs = load_inputs(cfg, &cfg.experiment).map_err(|d| anyhow!("{}", d[0]))?;
    let ctx = Ctx { params: &cfg.params, seed: cfg.seed, tol: cfg.tol, inputs: &inputs };
    let start = Instant::now();
    let records = campaigns::run(&cfg.experiment, ctx)?;
    Ok(Report::assemble(cfg, records, start.elapsed().as_secs_f64() * 1e3))
}
