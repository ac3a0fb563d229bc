use serde::{Deserialize, Serialize};

use super::stats::mean_and_se;
use crate::error::{Error, Result};
use crate::model::{SystemState, Vec2};

/// Net (unwrapped) displacement of the tracer particle at one time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisplacementRecord {
    pub member: usize,
    pub time: f64,
    pub dx: f64,
    pub dy: f64,
    pub r: f64,
}

impl DisplacementRecord {
    pub fn new(member: usize, time: f64, d: Vec2) -> Self {
        DisplacementRecord { member, time, dx: d.x, dy: d.y, r: d.norm() }
    }
}

/// Tracer (particle 0) displacement read from the unwrapped accumulator.
pub fn tracer_displacement(state: &SystemState, member: usize) -> DisplacementRecord {
    DisplacementRecord::new(member, state.time, state.displacement[0])
}

/// Squared-displacement statistic averaged over the ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// `dx^2 + dy^2`
    RSquared,
    DxSquared,
    DySquared,
}

impl Statistic {
    pub fn of(self, rec: &DisplacementRecord) -> f64 {
        match self {
            Statistic::RSquared => rec.dx * rec.dx + rec.dy * rec.dy,
            Statistic::DxSquared => rec.dx * rec.dx,
            Statistic::DySquared => rec.dy * rec.dy,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Statistic::RSquared => "r2",
            Statistic::DxSquared => "dx2",
            Statistic::DySquared => "dy2",
        }
    }
}

/// Ensemble mean and standard error of an observable on a time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
    pub n: usize,
}

impl ObservableSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the grid point closest to `t`.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.times.iter().enumerate().min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs())).map(|(i, _)| i)
    }

    /// Restricts the series to `t <= t_max`.
    pub fn truncated(&self, t_max: f64) -> ObservableSeries {
        let k = self.times.iter().take_while(|&&t| t <= t_max + time_tolerance(t_max)).count();
        ObservableSeries {
            times: self.times[..k].to_vec(),
            mean: self.mean[..k].to_vec(),
            se: self.se[..k].to_vec(),
            n: self.n,
        }
    }
}

#[inline]
pub(crate) fn time_tolerance(t: f64) -> f64 {
    1e-9 * t.abs().max(1.0)
}

pub(crate) fn grids_match(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= time_tolerance(*x))
}

/// Pointwise ensemble mean and standard error of `statistic`.
///
/// `records[m]` is the time series of member `m`; all members must share the
/// same strictly increasing grid. Reductions run in member order.
pub fn msd_series(records: &[Vec<DisplacementRecord>], statistic: Statistic) -> Result<ObservableSeries> {
    let n = records.len();
    if n < 2 {
        return Err(Error::Statistics(format!("ensemble series needs at least 2 members, got {n}")));
    }
    let times: Vec<f64> = records[0].iter().map(|r| r.time).collect();
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Alignment("time grid is not strictly increasing".into()));
    }
    for (m, member) in records.iter().enumerate() {
        let grid: Vec<f64> = member.iter().map(|r| r.time).collect();
        if !grids_match(&times, &grid) {
            return Err(Error::Alignment(format!("member {m} has a different time grid")));
        }
    }
    let mut mean = Vec::with_capacity(times.len());
    let mut se = Vec::with_capacity(times.len());
    let mut column = vec![0.0; n];
    for k in 0..times.len() {
        for (slot, member) in column.iter_mut().zip(records) {
            *slot = statistic.of(&member[k]);
        }
        let (m, s) = mean_and_se(&column)?;
        mean.push(m);
        se.push(s);
    }
    Ok(ObservableSeries { times, mean, se, n })
}

/// Streaming pointwise mean and variance (Welford), fed one member at a time.
///
/// Produces the same statistics as [`msd_series`] without holding every
/// member's trajectory; results depend only on the order members are pushed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StreamingSeries {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl StreamingSeries {
    pub fn new(len: usize) -> Self {
        StreamingSeries { n: 0, mean: vec![0.0; len], m2: vec![0.0; len] }
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn push(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.mean.len() {
            return Err(Error::Alignment(format!(
                "member has {} grid points, expected {}",
                values.len(),
                self.mean.len()
            )));
        }
        self.n += 1;
        let n = self.n as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(values) {
            let d = v - *m;
            *m += d / n;
            *s += d * (v - *m);
        }
        Ok(())
    }

    pub fn finish(&self, times: &[f64]) -> Result<ObservableSeries> {
        if self.n < 2 {
            return Err(Error::Statistics(format!("ensemble series needs at least 2 members, got {}", self.n)));
        }
        if times.len() != self.mean.len() {
            return Err(Error::Alignment("time grid length does not match the accumulated series".into()));
        }
        let n = self.n as f64;
        let se = self.m2.iter().map(|s| (s / (n - 1.0) / n).sqrt()).collect();
        Ok(ObservableSeries { times: times.to_vec(), mean: self.mean.clone(), se, n: self.n })
    }
}

/// Pointwise comparison of two series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesDiff {
    pub time: f64,
    /// `a - b`
    pub difference: f64,
    /// `sqrt(se_a^2 + se_b^2)`
    pub combined_se: f64,
    /// `difference / combined_se`, or 0 where both vanish.
    pub z: f64,
}

pub fn series_difference(a: &ObservableSeries, b: &ObservableSeries) -> Result<Vec<SeriesDiff>> {
    if !grids_match(&a.times, &b.times) {
        return Err(Error::Alignment(format!("series grids differ ({} vs {} points)", a.times.len(), b.times.len())));
    }
    Ok((0..a.len())
        .map(|k| {
            let difference = a.mean[k] - b.mean[k];
            let combined_se = (a.se[k] * a.se[k] + b.se[k] * b.se[k]).sqrt();
            let z = if combined_se == 0.0 {
                if difference == 0.0 {
                    0.0
                } else {
                    difference.signum() * f64::INFINITY
                }
            } else {
                difference / combined_se
            };
            SeriesDiff { time: a.times[k], difference, combined_se, z }
        })
        .collect())
}
