use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform-bin histogram over `[lo, hi)` with under/overflow counters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
    pub underflow: u64,
    /// Values at or above `hi`, plus NaNs.
    pub overflow: u64,
}

impl Histogram {
    pub fn lo(&self) -> f64 {
        self.edges[0]
    }

    pub fn hi(&self) -> f64 {
        self.edges[self.edges.len() - 1]
    }

    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }
}

pub fn make_histogram(values: &[f64], n_bins: usize, range: (f64, f64)) -> Result<Histogram> {
    let (lo, hi) = range;
    if n_bins == 0 {
        return Err(Error::Config("histogram needs at least one bin".into()));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Config(format!("histogram range [{lo}, {hi}) is empty or not finite")));
    }
    let width = (hi - lo) / n_bins as f64;
    let mut edges: Vec<f64> = (0..n_bins).map(|k| lo + k as f64 * width).collect();
    edges.push(hi);

    let mut hist = Histogram { edges, counts: vec![0; n_bins], total: values.len() as u64, underflow: 0, overflow: 0 };
    for &v in values {
        if v < lo {
            hist.underflow += 1;
        } else if v >= hi || v.is_nan() {
            hist.overflow += 1;
        } else {
            let mut k = (((v - lo) / width) as usize).min(n_bins - 1);
            // keep the binning consistent with the stored edges
            while k > 0 && v < hist.edges[k] {
                k -= 1;
            }
            while k + 1 < n_bins && v >= hist.edges[k + 1] {
                k += 1;
            }
            hist.counts[k] += 1;
        }
    }
    Ok(hist)
}
