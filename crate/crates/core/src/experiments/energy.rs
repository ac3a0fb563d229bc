//! Energy drift of the Verlet map versus step size from one initial condition.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::divergence::failure_row;
use super::ensemble::{classify, steps_for, Context, Failure};
use super::manifest::{EnergyMeasure, ExperimentParams};
use super::output::{write_table, Table};
use crate::error::{Error, Result};
use crate::integrator::{integrate, Observer, StepObservation};
use crate::model::{ForceEvaluator, SimConfig, SystemState};
use crate::observables::linear_slope;

/// Total energy along one run, under both energy conventions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyTrace {
    pub dt: f64,
    pub times: Vec<f64>,
    pub plain: Vec<f64>,
    pub shifted: Vec<f64>,
    pub failure: Option<Failure>,
}

/// Summary of `|H(t) - H(0)|` along a trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftSummary {
    pub max: f64,
    /// Mean over all observations after `t = 0`.
    pub mean: f64,
    /// Mean over the middle tenth of the run, `[0.45 T, 0.55 T]`.
    pub mid: f64,
    /// Mean over the last tenth of the run, `[0.9 T, T]`.
    pub last: f64,
}

impl DriftSummary {
    pub fn of(times: &[f64], energy: &[f64], horizon: f64) -> Option<Self> {
        let h0 = *energy.first()?;
        let drift: Vec<f64> = energy.iter().map(|h| (h - h0).abs()).collect();
        let window = |lo: f64, hi: f64| {
            let eps = 1e-9 * horizon.max(1.0);
            let sel: Vec<f64> =
                times.iter().zip(&drift).filter(|(t, _)| **t >= lo - eps && **t <= hi + eps).map(|(_, d)| *d).collect();
            if sel.is_empty() {
                f64::NAN
            } else {
                sel.iter().sum::<f64>() / sel.len() as f64
            }
        };
        let tail = &drift[1.min(drift.len())..];
        Some(DriftSummary {
            max: drift.iter().copied().fold(0.0, f64::max),
            mean: if tail.is_empty() { 0.0 } else { tail.iter().sum::<f64>() / tail.len() as f64 },
            mid: window(0.45 * horizon, 0.55 * horizon),
            last: window(0.9 * horizon, horizon),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyRow {
    pub dt: f64,
    pub measured: DriftSummary,
    pub other: DriftSummary,
    pub failure: Option<Failure>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyDriftResult {
    pub measure: EnergyMeasure,
    pub traces: Vec<EnergyTrace>,
    pub rows: Vec<EnergyRow>,
    /// Least-squares slope of `ln(max drift)` against `ln(dt)` over runs
    /// without failures; `None` with fewer than two such runs.
    pub slope: Option<f64>,
}

impl EnergyDriftResult {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.failure.is_some()).count()
    }

    pub fn row(&self, dt: f64) -> Option<&EnergyRow> {
        self.rows.iter().find(|r| r.dt == dt)
    }
}

/// Records both energies and aborts once the monitored one has moved by more than `limit`.
struct EnergyMonitor<'a> {
    plain: (ForceEvaluator, SimConfig),
    shifted: (ForceEvaluator, SimConfig),
    measure: EnergyMeasure,
    limit: f64,
    interval: f64,
    trace: &'a mut EnergyTrace,
}

impl Observer for EnergyMonitor<'_> {
    fn wants_energy(&self) -> bool {
        false
    }

    fn observe(&mut self, obs: &StepObservation, state: &SystemState) -> Result<()> {
        let fail = |e: Error| Error::Integration { step: obs.step, reason: e.to_string() };
        let plain = self.plain.0.energy(state, &self.plain.1).map_err(fail)?.total;
        let shifted = self.shifted.0.energy(state, &self.shifted.1).map_err(fail)?.total;
        let t = &mut self.trace;
        t.times.push(t.times.len() as f64 * self.interval);
        t.plain.push(plain);
        t.shifted.push(shifted);
        let series = match self.measure {
            EnergyMeasure::Plain => &t.plain,
            EnergyMeasure::Shifted => &t.shifted,
        };
        let moved = (series[series.len() - 1] - series[0]).abs();
        if !(moved <= self.limit) {
            return Err(Error::Integration {
                step: obs.step,
                reason: format!("energy blow-up: |H - H0| = {moved} exceeds {}", self.limit),
            });
        }
        Ok(())
    }
}

pub(crate) fn run(ctx: &Context) -> Result<EnergyDriftResult> {
    let m = ctx.manifest;
    let ExperimentParams::EnergyDrift { measure } = m.params else {
        return Err(Error::Config("not an energy-drift manifest".into()));
    };
    let initial = ctx.initial_conditions(0..1, 0)?.remove(0).state;
    let traces: Vec<EnergyTrace> = ctx.install(|| {
        m.dt.par_iter()
            .map(|&dt| {
                let config = ctx.sim_config(dt)?;
                let mut plain_cfg = config.clone();
                plain_cfg.system.shift_potential = false;
                let mut shifted_cfg = config.clone();
                shifted_cfg.system.shift_potential = true;
                let n_steps = steps_for(m.horizon, dt, "horizon")?;
                let every = steps_for(m.observe_interval, dt, "observation interval")?;
                let mut trace =
                    EnergyTrace { dt, times: Vec::new(), plain: Vec::new(), shifted: Vec::new(), failure: None };
                let mut monitor = EnergyMonitor {
                    plain: (ForceEvaluator::new(), plain_cfg),
                    shifted: (ForceEvaluator::new(), shifted_cfg),
                    measure,
                    limit: ctx.blowup_limit(),
                    interval: m.observe_interval,
                    trace: &mut trace,
                };
                let outcome = classify(integrate(&initial, &config, n_steps, every, &mut monitor), 0, dt)?;
                trace.failure = outcome.err();
                Ok(trace)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let rows: Vec<EnergyRow> = traces
        .iter()
        .map(|t| {
            let (a, b) = match measure {
                EnergyMeasure::Plain => (&t.plain, &t.shifted),
                EnergyMeasure::Shifted => (&t.shifted, &t.plain),
            };
            let nan = DriftSummary { max: f64::NAN, mean: f64::NAN, mid: f64::NAN, last: f64::NAN };
            EnergyRow {
                dt: t.dt,
                measured: DriftSummary::of(&t.times, a, m.horizon).unwrap_or(nan),
                other: DriftSummary::of(&t.times, b, m.horizon).unwrap_or(nan),
                failure: t.failure.clone(),
            }
        })
        .collect();
    let ok: Vec<&EnergyRow> = rows.iter().filter(|r| r.failure.is_none() && r.measured.max > 0.0).collect();
    let slope = if ok.len() >= 2 {
        let x: Vec<f64> = ok.iter().map(|r| r.dt.ln()).collect();
        let y: Vec<f64> = ok.iter().map(|r| r.measured.max.ln()).collect();
        Some(linear_slope(&x, &y)?)
    } else {
        None
    };
    let result = EnergyDriftResult { measure, traces, rows, slope };
    write(ctx, &result)?;
    Ok(result)
}

fn write(ctx: &Context, r: &EnergyDriftResult) -> Result<()> {
    let mut summary = Table::new(&[
        "dt",
        "max_drift",
        "mean_drift",
        "mid_drift",
        "last_drift",
        "other_max_drift",
        "other_mean_drift",
        "other_mid_drift",
        "other_last_drift",
        "failed",
        "failure_time",
    ]);
    for row in &r.rows {
        let (a, b) = (row.measured, row.other);
        summary.push(vec![
            row.dt.into(),
            a.max.into(),
            a.mean.into(),
            a.mid.into(),
            a.last.into(),
            b.max.into(),
            b.mean.into(),
            b.mid.into(),
            b.last.into(),
            (row.failure.is_some() as usize).into(),
            row.failure.as_ref().map(|f| f.time).into(),
        ]);
    }
    let mut fit = Table::new(&["measure", "slope", "runs"]);
    let measure = match r.measure {
        EnergyMeasure::Plain => "plain",
        EnergyMeasure::Shifted => "shifted",
    };
    fit.push(vec![measure.into(), r.slope.into(), r.rows.iter().filter(|x| x.failure.is_none()).count().into()]);
    let mut series = Table::new(&["dt", "t", "h_plain", "h_shifted"]);
    for t in &r.traces {
        for k in 0..t.times.len() {
            series.push(vec![t.dt.into(), t.times[k].into(), t.plain[k].into(), t.shifted[k].into()]);
        }
    }
    let mut status = Table::new(&["dt", "points", "failed", "failure_time", "reason"]);
    for t in &r.traces {
        status.push(failure_row(t.dt, t.times.len(), t.failure.as_ref()));
    }
    let dir = &ctx.options.out_dir;
    write_table(dir, "energy_drift.csv", ctx.manifest, &summary)?;
    write_table(dir, "energy_drift_fit.csv", ctx.manifest, &fit)?;
    write_table(dir, "energy_series.csv", ctx.manifest, &series)?;
    write_table(dir, "energy_status.csv", ctx.manifest, &status)?;
    Ok(())
}
