//! Difference between coarse-step and fine-reference mean squared
//! displacement at a few checkpoint times.

use serde::{Deserialize, Serialize};

use super::ensemble::{classify, run_guarded, steps_for, Accumulator, Context, Failure, Outcome};
use super::manifest::ExperimentParams;
use super::output::{write_table, Table};
use crate::error::{Error, Result};
use crate::observables::mean_and_se;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
struct Values {
    /// `[dt_index][member]`: `R^2` at each checkpoint, `None` for failed members.
    r2: Vec<Vec<Option<Vec<f64>>>>,
    failures: Vec<Failure>,
}

impl Accumulator<Vec<f64>> for Values {
    fn add(&mut self, member: usize, dt_index: usize, outcome: Outcome<Vec<f64>>) -> Result<()> {
        let column = &mut self.r2[dt_index];
        if column.len() <= member {
            column.resize(member + 1, None);
        }
        match outcome {
            Ok(v) => column[member] = Some(v),
            Err(f) => self.failures.push(f),
        }
        Ok(())
    }
}

/// One `(dt, T)` cell of the table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjectureRow {
    pub dt: f64,
    pub time: f64,
    pub mean: f64,
    pub se: f64,
    pub reference_mean: f64,
    pub reference_se: f64,
    /// `|mean - reference_mean|`
    pub difference: f64,
    /// `sqrt(se^2 + reference_se^2)`, treating the two ensembles as independent.
    pub combined_se: f64,
    /// Standard error of the member-wise paired differences.
    pub paired_se: f64,
    /// `difference / dt^2`
    pub scaled: f64,
    /// Members successful at both step sizes.
    pub n: usize,
}

impl ConjectureRow {
    /// Whether the difference is distinguishable from zero at 2 combined SE.
    pub fn resolved(&self) -> bool {
        self.difference > 2.0 * self.combined_se
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjectureResult {
    pub reference_dt: f64,
    pub rows: Vec<ConjectureRow>,
    pub failures: Vec<Failure>,
}

impl ConjectureResult {
    pub fn row(&self, dt: f64, time: f64) -> Option<&ConjectureRow> {
        self.rows.iter().find(|r| r.dt == dt && (r.time - time).abs() <= 1e-9 * time.max(1.0))
    }
}

pub(crate) fn run(ctx: &Context) -> Result<ConjectureResult> {
    let m = ctx.manifest;
    let ExperimentParams::Conjecture { reference_dt, ref checkpoints } = m.params else {
        return Err(Error::Config("not a conjecture manifest".into()));
    };
    let mut dts = m.dt.clone();
    dts.push(reference_dt);
    let marks: Vec<u64> =
        checkpoints.iter().map(|&t| steps_for(t, m.observe_interval, "checkpoint")).collect::<Result<_>>()?;
    let configs = dts.iter().map(|&dt| ctx.sim_config(dt)).collect::<Result<Vec<_>>>()?;
    let limit = ctx.blowup_limit();
    let acc = Values { r2: vec![Vec::new(); dts.len()], failures: Vec::new() };
    let acc = ctx.run_ensemble(acc, dts.len(), |member, j, initial| {
        let mut values = vec![0.0; marks.len()];
        let mut k = 0u64;
        let end = run_guarded(initial, &configs[j], m.horizon, m.observe_interval, limit, |obs, _| {
            for (slot, &mark) in values.iter_mut().zip(&marks) {
                if mark == k {
                    *slot = obs.tracer_displacement.norm2();
                }
            }
            k += 1;
        });
        classify(end.map(|_| values), member, dts[j])
    })?;
    let reference = &acc.r2[dts.len() - 1];
    let mut rows = Vec::new();
    for (j, &dt) in m.dt.iter().enumerate() {
        let coarse = &acc.r2[j];
        for (c, &time) in checkpoints.iter().enumerate() {
            let pairs: Vec<(f64, f64)> =
                coarse.iter().zip(reference).filter_map(|(a, b)| Some((a.as_ref()?[c], b.as_ref()?[c]))).collect();
            if pairs.len() < 2 {
                continue;
            }
            let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let d: Vec<f64> = pairs.iter().map(|p| p.0 - p.1).collect();
            let (mean, se) = mean_and_se(&a)?;
            let (reference_mean, reference_se) = mean_and_se(&b)?;
            let (_, paired_se) = mean_and_se(&d)?;
            let difference = (mean - reference_mean).abs();
            rows.push(ConjectureRow {
                dt,
                time,
                mean,
                se,
                reference_mean,
                reference_se,
                difference,
                combined_se: (se * se + reference_se * reference_se).sqrt(),
                paired_se,
                scaled: difference / (dt * dt),
                n: pairs.len(),
            });
        }
    }
    let result = ConjectureResult { reference_dt, rows, failures: acc.failures };
    write(ctx, &result)?;
    Ok(result)
}

fn write(ctx: &Context, r: &ConjectureResult) -> Result<()> {
    let mut table = Table::new(&[
        "dt",
        "t",
        "reference_dt",
        "mean_r2",
        "se",
        "reference_mean_r2",
        "reference_se",
        "abs_difference",
        "combined_se",
        "paired_se",
        "difference_over_dt2",
        "n",
    ]);
    for row in &r.rows {
        table.push(vec![
            row.dt.into(),
            row.time.into(),
            r.reference_dt.into(),
            row.mean.into(),
            row.se.into(),
            row.reference_mean.into(),
            row.reference_se.into(),
            row.difference.into(),
            row.combined_se.into(),
            row.paired_se.into(),
            row.scaled.into(),
            row.n.into(),
        ]);
    }
    write_table(&ctx.options.out_dir, "conjecture.csv", ctx.manifest, &table)?;
    Ok(())
}
