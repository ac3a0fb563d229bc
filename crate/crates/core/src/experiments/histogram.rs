//! Distribution of the tracer's x-displacement at the horizon, per step size.

use serde::{Deserialize, Serialize};

use super::ensemble::{classify, run_guarded, Accumulator, Context, Failure, Outcome};
use super::manifest::ExperimentParams;
use super::output::{write_table, Table};
use crate::error::{Error, Result};
use crate::model::Vec2;
use crate::observables::{ks_critical, ks_statistic, make_histogram, mean_and_se, Histogram};

/// Significance level of the reported two-sample KS critical value.
pub const KS_ALPHA: f64 = 0.01;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
struct Collected {
    /// Per step size: `(member, displacement)` of every successful member.
    displacements: Vec<Vec<(usize, Vec2)>>,
    failures: Vec<Failure>,
}

impl Accumulator<Vec2> for Collected {
    fn add(&mut self, member: usize, dt_index: usize, outcome: Outcome<Vec2>) -> Result<()> {
        match outcome {
            Ok(d) => self.displacements[dt_index].push((member, d)),
            Err(f) => self.failures.push(f),
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisplacementSet {
    pub dt: f64,
    pub members: Vec<usize>,
    pub dx: Vec<f64>,
    pub dy: Vec<f64>,
    pub histogram: Histogram,
    /// Mean and standard error of `dx`; `None` with fewer than two members.
    pub mean_se: Option<(f64, f64)>,
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsComparison {
    pub dt_a: f64,
    pub dt_b: f64,
    pub statistic: f64,
    pub critical: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramResult {
    pub sets: Vec<DisplacementSet>,
    /// Every pair of step sizes, in manifest order.
    pub comparisons: Vec<KsComparison>,
    pub failures: Vec<Failure>,
}

impl HistogramResult {
    pub fn set(&self, dt: f64) -> Option<&DisplacementSet> {
        self.sets.iter().find(|s| s.dt == dt)
    }

    pub fn comparison(&self, dt_a: f64, dt_b: f64) -> Option<&KsComparison> {
        self.comparisons.iter().find(|c| (c.dt_a, c.dt_b) == (dt_a, dt_b) || (c.dt_a, c.dt_b) == (dt_b, dt_a))
    }
}

pub(crate) fn run(ctx: &Context) -> Result<HistogramResult> {
    let m = ctx.manifest;
    let ExperimentParams::Histogram { bins, lo, hi } = m.params else {
        return Err(Error::Config("not a histogram manifest".into()));
    };
    let configs = m.dt.iter().map(|&dt| ctx.sim_config(dt)).collect::<Result<Vec<_>>>()?;
    let limit = ctx.blowup_limit();
    let acc = Collected { displacements: vec![Vec::new(); m.dt.len()], failures: Vec::new() };
    let acc = ctx.run_ensemble(acc, m.dt.len(), |member, j, initial| {
        let end = run_guarded(initial, &configs[j], m.horizon, m.observe_interval, limit, |_, _| {});
        classify(end.map(|s| s.displacement[0]), member, m.dt[j])
    })?;
    let mut sets = Vec::new();
    for (j, &dt) in m.dt.iter().enumerate() {
        let d = &acc.displacements[j];
        let dx: Vec<f64> = d.iter().map(|(_, v)| v.x).collect();
        let histogram = make_histogram(&dx, bins, (lo, hi))?;
        sets.push(DisplacementSet {
            dt,
            members: d.iter().map(|(k, _)| *k).collect(),
            dy: d.iter().map(|(_, v)| v.y).collect(),
            mean_se: if dx.len() >= 2 { Some(mean_and_se(&dx)?) } else { None },
            histogram,
            dx,
            failures: acc.failures.iter().filter(|f| f.dt == dt).count(),
        });
    }
    let mut comparisons = Vec::new();
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            let (sa, sb) = (&sets[a], &sets[b]);
            if sa.dx.is_empty() || sb.dx.is_empty() {
                continue;
            }
            comparisons.push(KsComparison {
                dt_a: sa.dt,
                dt_b: sb.dt,
                statistic: ks_statistic(&sa.dx, &sb.dx)?,
                critical: ks_critical(KS_ALPHA, sa.dx.len(), sb.dx.len()),
            });
        }
    }
    let result = HistogramResult { sets, comparisons, failures: acc.failures };
    write(ctx, &result)?;
    Ok(result)
}

fn write(ctx: &Context, r: &HistogramResult) -> Result<()> {
    let mut hist = Table::new(&["dt", "bin_lo", "bin_hi", "count"]);
    let mut summary = Table::new(&["dt", "members", "failures", "mean_dx", "se_dx", "underflow", "overflow"]);
    let mut samples = Table::new(&["dt", "member", "dx", "dy"]);
    for s in &r.sets {
        let h = &s.histogram;
        for (k, count) in h.counts.iter().enumerate() {
            hist.push(vec![s.dt.into(), h.edges[k].into(), h.edges[k + 1].into(), (*count).into()]);
        }
        summary.push(vec![
            s.dt.into(),
            s.dx.len().into(),
            s.failures.into(),
            s.mean_se.map(|x| x.0).into(),
            s.mean_se.map(|x| x.1).into(),
            h.underflow.into(),
            h.overflow.into(),
        ]);
        for k in 0..s.dx.len() {
            samples.push(vec![s.dt.into(), s.members[k].into(), s.dx[k].into(), s.dy[k].into()]);
        }
    }
    let mut ks = Table::new(&["dt_a", "dt_b", "ks_statistic", "critical_1pct"]);
    for c in &r.comparisons {
        ks.push(vec![c.dt_a.into(), c.dt_b.into(), c.statistic.into(), c.critical.into()]);
    }
    let dir = &ctx.options.out_dir;
    write_table(dir, "histogram.csv", ctx.manifest, &hist)?;
    write_table(dir, "histogram_summary.csv", ctx.manifest, &summary)?;
    write_table(dir, "displacements.csv", ctx.manifest, &samples)?;
    write_table(dir, "histogram_ks.csv", ctx.manifest, &ks)?;
    Ok(())
}
