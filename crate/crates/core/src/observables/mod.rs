//! Tracer-displacement statistics: records, ensemble series, histograms.

mod histogram;
mod series;
mod stats;

pub use histogram::{make_histogram, Histogram};
pub use series::{
    msd_series, series_difference, tracer_displacement, DisplacementRecord, ObservableSeries, SeriesDiff, Statistic,
    StreamingSeries,
};
pub use stats::{correlation, ks_critical, ks_statistic, linear_slope, mean_and_se, skewness_kurtosis};
