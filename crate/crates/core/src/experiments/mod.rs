//! Experiment harness: manifests, ensemble scheduling, checkpoints, CSV output
//! and the named experiments.
//!
//! Every experiment takes an [`ExperimentManifest`] and [`RunOptions`], writes
//! its CSV files into `RunOptions::out_dir` and returns its results in memory.
//! Outputs depend only on the manifest, never on the worker count.

pub mod checkpoint;
pub mod conjecture;
pub mod divergence;
pub mod energy;
mod ensemble;
pub mod histogram;
pub mod manifest;
pub mod msd;
pub mod output;
pub mod sample;

pub use ensemble::{steps_for, Failure, RunOptions};
pub use manifest::{EnergyMeasure, ExperimentKind, ExperimentManifest, ExperimentParams, SamplingMode};

use ensemble::Context;
use output::{write_table, Table};

use crate::error::{Error, Result};

/// In-memory result of any experiment.
#[derive(Clone, Debug, PartialEq)]
pub enum ExperimentResult {
    Sample(sample::SampleResult),
    Divergence(divergence::DivergenceResult),
    Histogram(histogram::HistogramResult),
    Msd(msd::MsdResult),
    EnergyDrift(energy::EnergyDriftResult),
    Conjecture(conjecture::ConjectureResult),
}

impl ExperimentResult {
    /// Number of runs that blew up or failed numerically.
    pub fn failures(&self) -> usize {
        match self {
            ExperimentResult::Sample(_) => 0,
            ExperimentResult::Divergence(r) => r.failures(),
            ExperimentResult::Histogram(r) => r.failures.len(),
            ExperimentResult::Msd(r) => r.failures.len(),
            ExperimentResult::EnergyDrift(r) => r.failures(),
            ExperimentResult::Conjecture(r) => r.failures.len(),
        }
    }
}

pub fn run_sample(manifest: &ExperimentManifest, options: &RunOptions) -> Result<sample::SampleResult> {
    expect(manifest, ExperimentKind::Sample)?;
    let ctx = Context::new(manifest, options)?;
    let r = sample::run(&ctx)?;
    ctx.finish()?;
    Ok(r)
}

pub fn run_trajectory_divergence(
    manifest: &ExperimentManifest,
    options: &RunOptions,
) -> Result<divergence::DivergenceResult> {
    expect(manifest, ExperimentKind::Divergence)?;
    let ctx = Context::new(manifest, options)?;
    let r = divergence::run(&ctx)?;
    ctx.finish()?;
    Ok(r)
}

pub fn run_histogram_experiment(
    manifest: &ExperimentManifest,
    options: &RunOptions,
) -> Result<histogram::HistogramResult> {
    expect(manifest, ExperimentKind::Histogram)?;
    let ctx = Context::new(manifest, options)?;
    let r = histogram::run(&ctx)?;
    write_failures(&ctx, "histogram_failures.csv", &r.failures)?;
    ctx.finish()?;
    Ok(r)
}

pub fn run_msd_experiment(manifest: &ExperimentManifest, options: &RunOptions) -> Result<msd::MsdResult> {
    expect(manifest, ExperimentKind::Msd)?;
    let ctx = Context::new(manifest, options)?;
    let r = msd::run(&ctx)?;
    write_failures(&ctx, "msd_failures.csv", &r.failures)?;
    ctx.finish()?;
    Ok(r)
}

pub fn run_energy_drift_experiment(
    manifest: &ExperimentManifest,
    options: &RunOptions,
) -> Result<energy::EnergyDriftResult> {
    expect(manifest, ExperimentKind::EnergyDrift)?;
    let ctx = Context::new(manifest, options)?;
    let r = energy::run(&ctx)?;
    ctx.finish()?;
    Ok(r)
}

pub fn run_conjecture_table(
    manifest: &ExperimentManifest,
    options: &RunOptions,
) -> Result<conjecture::ConjectureResult> {
    expect(manifest, ExperimentKind::Conjecture)?;
    let ctx = Context::new(manifest, options)?;
    let r = conjecture::run(&ctx)?;
    write_failures(&ctx, "conjecture_failures.csv", &r.failures)?;
    ctx.finish()?;
    Ok(r)
}

/// Runs whichever experiment `manifest` describes.
pub fn run(manifest: &ExperimentManifest, options: &RunOptions) -> Result<ExperimentResult> {
    Ok(match manifest.kind() {
        ExperimentKind::Sample => ExperimentResult::Sample(run_sample(manifest, options)?),
        ExperimentKind::Divergence => ExperimentResult::Divergence(run_trajectory_divergence(manifest, options)?),
        ExperimentKind::Histogram => ExperimentResult::Histogram(run_histogram_experiment(manifest, options)?),
        ExperimentKind::Msd => ExperimentResult::Msd(run_msd_experiment(manifest, options)?),
        ExperimentKind::EnergyDrift => ExperimentResult::EnergyDrift(run_energy_drift_experiment(manifest, options)?),
        ExperimentKind::Conjecture => ExperimentResult::Conjecture(run_conjecture_table(manifest, options)?),
    })
}

fn expect(manifest: &ExperimentManifest, kind: ExperimentKind) -> Result<()> {
    if manifest.kind() != kind {
        return Err(Error::Config(format!(
            "manifest describes a {} experiment, not {}",
            manifest.kind().name(),
            kind.name()
        )));
    }
    Ok(())
}

fn write_failures(ctx: &Context, name: &str, failures: &[Failure]) -> Result<()> {
    let mut table = Table::new(&["member", "dt", "step", "time", "reason"]);
    for f in failures {
        table.push(vec![
            f.member.into(),
            f.dt.into(),
            f.step.into(),
            f.time.into(),
            f.reason.replace(',', ";").as_str().into(),
        ]);
    }
    write_table(&ctx.options.out_dir, name, ctx.manifest, &table)?;
    Ok(())
}
