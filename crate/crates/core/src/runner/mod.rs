//! Experiment configs, dispatch and the files each run leaves behind.

pub mod acceptance;
pub mod config;
mod experiments;
pub mod manifest;
pub mod plot;

use std::path::{Path, PathBuf};

pub use acceptance::{results_csv, run_criteria, run_criterion, CriterionResult};
pub use config::{
    resolve_data_path, AcceptanceConfig, DatumConfig, ExperimentConfig, FieldConfig, GridConfig, Kind,
    LinearConfig, NormsConfig, QuasilinearConfig, DATA_DIR_VAR,
};
pub use manifest::{sha256_hex, to_json, Artifact, ArtifactWriter, RunManifest, MANIFEST_NAME};
pub use plot::{emit_plotdata, PlotOutcome};

use crate::error::Result;

fn acceptance_run(cfg: &ExperimentConfig, w: &mut ArtifactWriter) -> Result<bool> {
    let (results, details) = run_criteria(&cfg.acceptance.criteria, cfg.seed);
    for (name, text) in &details {
        w.write(name, text.as_bytes())?;
    }
    w.write("acceptance.csv", results_csv(&results).as_bytes())?;
    w.write_json("acceptance.json", &results)?;
    // wall-clock times are the only non-reproducible output
    let mut timings = String::from("id,seconds\n");
    for r in &results {
        timings.push_str(&format!("{},{:.3}\n", r.id, r.seconds));
    }
    w.write("timings.csv", timings.as_bytes())?;
    Ok(results.iter().all(|r| r.passed))
}

/// Run one experiment into `out`. Config errors come back as `Err` before
/// anything is written; failures after that are recorded in the manifest.
pub fn run(config: &ExperimentConfig, out: &Path) -> Result<RunManifest> {
    let kind = config.validate()?;
    let mut w = ArtifactWriter::new(out)?;
    let outcome = match kind {
        Kind::Decompose => experiments::decompose(config, &mut w),
        Kind::Norms => experiments::norms(config, &mut w),
        Kind::VerifyEstimates => experiments::verify_estimates(config, &mut w),
        Kind::SolveLinear => experiments::solve_linear_run(config, &mut w),
        Kind::SolveQuasilinear => experiments::solve_quasilinear(config, &mut w),
        Kind::AcceptanceSuite => acceptance_run(config, &mut w),
    };
    match outcome {
        Ok(passed) => w.finish(config, passed, None),
        Err(e) => w.finish(config, false, Some(e.to_string())),
    }
}

/// Collect plot tables from earlier run directories.
pub fn run_plotdata(inputs: &[PathBuf], out: &Path) -> Result<(RunManifest, PlotOutcome)> {
    let mut w = ArtifactWriter::new(out)?;
    let outcome = emit_plotdata(inputs, &mut w)?;
    let manifest = w.finish(&ExperimentConfig::default(), true, None)?;
    Ok((manifest, outcome))
}
