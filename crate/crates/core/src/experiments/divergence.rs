//! Tracer x-position versus time for one initial condition and several step sizes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ensemble::{classify, run_guarded, Context, Failure};
use super::manifest::ExperimentParams;
use super::output::{write_table, Cell, Table};
use crate::error::{Error, Result};

/// Unwrapped tracer x-coordinate on the common output grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub dt: f64,
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    /// Set when the run stopped early; the curve then holds the points reached.
    pub failure: Option<Failure>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceTime {
    pub dt: f64,
    /// First grid time where the curve is further than the threshold from the
    /// reference, if it ever is.
    pub time: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceResult {
    pub reference_dt: f64,
    pub threshold: f64,
    pub curves: Vec<Curve>,
    /// One entry per coarse step size, in manifest order.
    pub divergence: Vec<DivergenceTime>,
}

impl DivergenceResult {
    pub fn failures(&self) -> usize {
        self.curves.iter().filter(|c| c.failure.is_some()).count()
    }

    pub fn time_for(&self, dt: f64) -> Option<f64> {
        self.divergence.iter().find(|d| d.dt == dt).and_then(|d| d.time)
    }
}

/// First time at which `|a - b| > threshold`, over the common prefix.
pub fn divergence_time(times: &[f64], a: &[f64], b: &[f64], threshold: f64) -> Option<f64> {
    times.iter().zip(a.iter().zip(b)).find(|(_, (x, y))| (*x - *y).abs() > threshold).map(|(t, _)| *t)
}

pub(crate) fn run(ctx: &Context) -> Result<DivergenceResult> {
    let m = ctx.manifest;
    let ExperimentParams::Divergence { threshold } = m.params else {
        return Err(Error::Config("not a divergence manifest".into()));
    };
    let initial = ctx.initial_conditions(0..1, 0)?.remove(0).state;
    let x0 = initial.positions[0].x;
    let interval = m.observe_interval;
    let limit = ctx.blowup_limit();
    let curves: Vec<Curve> = ctx.install(|| {
        m.dt.par_iter()
            .map(|&dt| {
                let config = ctx.sim_config(dt)?;
                let mut times = Vec::new();
                let mut x = Vec::new();
                let outcome = classify(
                    run_guarded(&initial, &config, m.horizon, interval, limit, |obs, _| {
                        times.push(times.len() as f64 * interval);
                        x.push(x0 + obs.tracer_displacement.x);
                    }),
                    0,
                    dt,
                )?;
                Ok(Curve { dt, times, x, failure: outcome.err() })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let reference = curves.last().expect("validated dt list is non-empty");
    let divergence = curves[..curves.len() - 1]
        .iter()
        .map(|c| DivergenceTime {
            dt: c.dt,
            time: if c.failure.is_some() || reference.failure.is_some() {
                None
            } else {
                divergence_time(&c.times, &c.x, &reference.x, threshold)
            },
        })
        .collect();
    let result = DivergenceResult { reference_dt: reference.dt, threshold, curves, divergence };
    write(ctx, &result)?;
    Ok(result)
}

fn write(ctx: &Context, r: &DivergenceResult) -> Result<()> {
    let mut curves = Table::new(&["dt", "t", "x"]);
    for c in &r.curves {
        for (t, x) in c.times.iter().zip(&c.x) {
            curves.push(vec![c.dt.into(), (*t).into(), (*x).into()]);
        }
    }
    let mut times = Table::new(&["dt", "reference_dt", "threshold", "divergence_time"]);
    for d in &r.divergence {
        times.push(vec![d.dt.into(), r.reference_dt.into(), r.threshold.into(), d.time.into()]);
    }
    let mut status = Table::new(&["dt", "points", "failed", "failure_time", "reason"]);
    for c in &r.curves {
        status.push(failure_row(c.dt, c.times.len(), c.failure.as_ref()));
    }
    let dir = &ctx.options.out_dir;
    write_table(dir, "divergence.csv", ctx.manifest, &curves)?;
    write_table(dir, "divergence_times.csv", ctx.manifest, &times)?;
    write_table(dir, "divergence_status.csv", ctx.manifest, &status)?;
    Ok(())
}

pub(crate) fn failure_row(dt: f64, points: usize, failure: Option<&Failure>) -> Vec<Cell> {
    vec![
        dt.into(),
        points.into(),
        (failure.is_some() as usize).into(),
        failure.map(|f| f.time).into(),
        failure.map_or("", |f| f.reason.as_str()).replace(',', ";").as_str().into(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divergence_time_is_first_exceedance() {
        let t = [0.0, 0.1, 0.2, 0.3];
        assert_eq!(divergence_time(&t, &[0.0, 0.2, 0.9, 0.0], &[0.0; 4], 0.5), Some(0.2));
        assert_eq!(divergence_time(&t, &[1.0; 4], &[1.0; 4], 0.5), None);
        assert_eq!(divergence_time(&t, &[0.0, 0.5, 0.5, 0.5], &[0.0; 4], 0.5), None);
    }
}
