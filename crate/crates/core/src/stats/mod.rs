//! Throughput series and the statistics computed over them.

mod histogram;
mod hurst;
mod moments;
mod regression;
mod series;

pub use histogram::{histogram, Histogram};
pub use hurst::{detrend, fit_spectrum, hurst_periodogram, periodogram, write_spectrum_csv, HurstEstimate, SpectrumPoint};
pub use moments::{mean, population_stddev, skewness};
pub use regression::{linear_fit, pearson, RegressionFit};
pub use series::{throughput_series, ThroughputSeries};

/// Default throughput bin width in seconds.
pub const DEFAULT_BIN_WIDTH: f64 = 0.1;
/// Default share of positive frequencies used by the periodogram fit.
pub const DEFAULT_LOW_FREQ_FRACTION: f64 = 0.10;
