//! Ensemble mean squared tracer displacement versus time, per step size.

use serde::{Deserialize, Serialize};

use super::ensemble::{classify, run_guarded, steps_for, Accumulator, Context, Failure, Outcome};
use super::manifest::ExperimentParams;
use super::output::{write_table, Table};
use crate::error::{Error, Result};
use crate::model::Vec2;
use crate::observables::{series_difference, ObservableSeries, Statistic, StreamingSeries};

pub const STATISTICS: [Statistic; 3] = [Statistic::RSquared, Statistic::DxSquared, Statistic::DySquared];

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Streams {
    /// `[dt_index][statistic]`
    series: Vec<Vec<StreamingSeries>>,
    failures: Vec<Failure>,
}

impl Accumulator<Vec<Vec2>> for Streams {
    fn add(&mut self, _member: usize, dt_index: usize, outcome: Outcome<Vec<Vec2>>) -> Result<()> {
        match outcome {
            Ok(path) => {
                for (k, stat) in STATISTICS.iter().enumerate() {
                    let values: Vec<f64> = path
                        .iter()
                        .map(|d| match stat {
                            Statistic::RSquared => d.norm2(),
                            Statistic::DxSquared => d.x * d.x,
                            Statistic::DySquared => d.y * d.y,
                        })
                        .collect();
                    self.series[dt_index][k].push(&values)?;
                }
            }
            Err(f) => self.failures.push(f),
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MsdCurves {
    pub dt: f64,
    /// Ensemble series of `r2`, `dx2`, `dy2`, in that order; `None` when
    /// fewer than two members succeeded.
    pub series: Vec<Option<ObservableSeries>>,
    pub failures: usize,
}

impl MsdCurves {
    pub fn get(&self, statistic: Statistic) -> Option<&ObservableSeries> {
        let k = STATISTICS.iter().position(|s| *s == statistic)?;
        self.series[k].as_ref()
    }
}

/// Pointwise agreement of one curve with the finest-step curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub dt: f64,
    pub reference_dt: f64,
    pub statistic: Statistic,
    pub points: usize,
    /// Grid points with `|difference| <= 2` combined standard errors.
    pub within_2se: usize,
}

impl Agreement {
    pub fn fraction(&self) -> f64 {
        self.within_2se as f64 / self.points as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MsdResult {
    pub curves: Vec<MsdCurves>,
    pub agreement: Vec<Agreement>,
    pub failures: Vec<Failure>,
}

impl MsdResult {
    pub fn curves_for(&self, dt: f64) -> Option<&MsdCurves> {
        self.curves.iter().find(|c| c.dt == dt)
    }

    pub fn agreement_for(&self, dt: f64, statistic: Statistic) -> Option<&Agreement> {
        self.agreement.iter().find(|a| a.dt == dt && a.statistic == statistic)
    }
}

pub(crate) fn run(ctx: &Context) -> Result<MsdResult> {
    let m = ctx.manifest;
    let ExperimentParams::Msd { zoom_horizon } = m.params else {
        return Err(Error::Config("not an msd manifest".into()));
    };
    let points = steps_for(m.horizon, m.observe_interval, "horizon")? as usize + 1;
    let times: Vec<f64> = (0..points).map(|k| k as f64 * m.observe_interval).collect();
    let configs = m.dt.iter().map(|&dt| ctx.sim_config(dt)).collect::<Result<Vec<_>>>()?;
    let limit = ctx.blowup_limit();
    let acc = Streams {
        series: vec![vec![StreamingSeries::new(points); STATISTICS.len()]; m.dt.len()],
        failures: Vec::new(),
    };
    let acc = ctx.run_ensemble(acc, m.dt.len(), |member, j, initial| {
        let mut path = Vec::with_capacity(points);
        let end = run_guarded(initial, &configs[j], m.horizon, m.observe_interval, limit, |obs, _| {
            path.push(obs.tracer_displacement)
        });
        classify(end.map(|_| path), member, m.dt[j])
    })?;
    let mut curves = Vec::new();
    for (j, &dt) in m.dt.iter().enumerate() {
        let series = acc.series[j]
            .iter()
            .map(|s| if s.count() >= 2 { s.finish(&times).map(Some) } else { Ok(None) })
            .collect::<Result<Vec<_>>>()?;
        curves.push(MsdCurves { dt, series, failures: acc.failures.iter().filter(|f| f.dt == dt).count() });
    }
    let reference = curves.last().expect("validated dt list is non-empty");
    let mut agreement = Vec::new();
    for c in &curves[..curves.len() - 1] {
        for (k, &statistic) in STATISTICS.iter().enumerate() {
            let (Some(a), Some(b)) = (&c.series[k], &reference.series[k]) else {
                continue;
            };
            let diff = series_difference(a, b)?;
            agreement.push(Agreement {
                dt: c.dt,
                reference_dt: reference.dt,
                statistic,
                points: diff.len(),
                within_2se: diff.iter().filter(|d| d.z.abs() <= 2.0).count(),
            });
        }
    }
    let result = MsdResult { curves, agreement, failures: acc.failures };
    write(ctx, &result, zoom_horizon)?;
    Ok(result)
}

fn series_table(r: &MsdResult, t_max: f64) -> Table {
    let mut table = Table::new(&["dt", "statistic", "t", "mean", "se", "n"]);
    for c in &r.curves {
        for (k, stat) in STATISTICS.iter().enumerate() {
            let Some(s) = &c.series[k] else { continue };
            let s = s.truncated(t_max);
            for i in 0..s.len() {
                table.push(vec![
                    c.dt.into(),
                    stat.label().into(),
                    s.times[i].into(),
                    s.mean[i].into(),
                    s.se[i].into(),
                    s.n.into(),
                ]);
            }
        }
    }
    table
}

fn write(ctx: &Context, r: &MsdResult, zoom_horizon: f64) -> Result<()> {
    let mut agree = Table::new(&["dt", "reference_dt", "statistic", "points", "within_2se", "fraction"]);
    for a in &r.agreement {
        agree.push(vec![
            a.dt.into(),
            a.reference_dt.into(),
            a.statistic.label().into(),
            a.points.into(),
            a.within_2se.into(),
            a.fraction().into(),
        ]);
    }
    let dir = &ctx.options.out_dir;
    write_table(dir, "msd.csv", ctx.manifest, &series_table(r, f64::INFINITY))?;
    write_table(dir, "msd_zoom.csv", ctx.manifest, &series_table(r, zoom_horizon))?;
    write_table(dir, "msd_agreement.csv", ctx.manifest, &agree)?;
    Ok(())
}
