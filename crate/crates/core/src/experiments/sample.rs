//! Canonical samples written to disk, with equipartition and normality checks.

use serde::{Deserialize, Serialize};

use super::ensemble::Context;
use super::output::{write_table, Table};
use crate::error::Result;
use crate::model::{ForceEvaluator, SystemState};
use crate::observables::mean_and_se;
use crate::sampler::{equipartition_report, velocity_shape, CanonicalSample};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleResult {
    pub samples: Vec<CanonicalSample>,
    /// Mean kinetic energy per degree of freedom and its standard error.
    pub ke_per_dof: Option<(f64, f64)>,
    /// Skewness and excess kurtosis of the pooled velocity components.
    pub velocity_shape: Option<(f64, f64)>,
    /// Mean potential energy per particle and its standard error.
    pub pe_per_particle: Option<(f64, f64)>,
}

impl SampleResult {
    pub fn states(&self) -> impl Iterator<Item = &SystemState> {
        self.samples.iter().map(|s| &s.state)
    }
}

pub(crate) fn run(ctx: &Context) -> Result<SampleResult> {
    let m = ctx.manifest;
    let samples: Vec<CanonicalSample> = ctx
        .initial_conditions(0..m.ensemble, 0)?
        .into_iter()
        .map(|ic| CanonicalSample { stream: ic.stream, index: ic.index, state: ic.state })
        .collect();
    let config = ctx.sim_config(m.sampler.step)?;
    let mut evaluator = ForceEvaluator::new();
    let pe: Vec<f64> = samples
        .iter()
        .map(|s| Ok(evaluator.potential(&s.state.positions, &config)? / s.state.len() as f64))
        .collect::<Result<_>>()?;
    let enough = samples.len() >= 2;
    let result = SampleResult {
        ke_per_dof: if enough { Some(equipartition_report(samples.iter().map(|s| &s.state))?) } else { None },
        velocity_shape: if enough { Some(velocity_shape(samples.iter().map(|s| &s.state))?) } else { None },
        pe_per_particle: if enough { Some(mean_and_se(&pe)?) } else { None },
        samples,
    };
    write(ctx, &result)?;
    Ok(result)
}

fn write(ctx: &Context, r: &SampleResult) -> Result<()> {
    let mut states = Table::new(&["sample", "stream", "index", "particle", "x", "y", "vx", "vy"]);
    for (k, s) in r.samples.iter().enumerate() {
        for (i, (q, v)) in s.state.positions.iter().zip(&s.state.velocities).enumerate() {
            states.push(vec![
                k.into(),
                s.stream.into(),
                s.index.into(),
                i.into(),
                q.x.into(),
                q.y.into(),
                v.x.into(),
                v.y.into(),
            ]);
        }
    }
    let mut summary = Table::new(&["quantity", "value", "se"]);
    let mut push = |name: &str, v: Option<f64>, se: Option<f64>| summary.push(vec![name.into(), v.into(), se.into()]);
    push("ke_per_dof", r.ke_per_dof.map(|x| x.0), r.ke_per_dof.map(|x| x.1));
    push("pe_per_particle", r.pe_per_particle.map(|x| x.0), r.pe_per_particle.map(|x| x.1));
    push("velocity_skewness", r.velocity_shape.map(|x| x.0), None);
    push("velocity_excess_kurtosis", r.velocity_shape.map(|x| x.1), None);
    let dir = &ctx.options.out_dir;
    write_table(dir, "samples.csv", ctx.manifest, &states)?;
    write_table(dir, "sample_summary.csv", ctx.manifest, &summary)?;
    Ok(())
}
