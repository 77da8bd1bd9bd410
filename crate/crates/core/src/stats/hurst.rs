//! Hurst parameter from the low-frequency slope of the periodogram.
//!
//! The series is detrended by least squares, transformed, and the
//! periodogram `|X_j|^2 / n` at `f_j = j / (n * tau)`, `j = 1..=n/2`, is
//! regressed in log10-log10 space over the lowest frequencies. With
//! `P(f) ~ f^slope`, the estimate is `H = (1 - slope) / 2`.

use std::io::Write;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::regression::linear_fit;
use super::series::ThroughputSeries;
use crate::export::{num, write_table};
use crate::{Error, Result};

pub const MIN_SERIES_LEN: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    /// Hz.
    pub frequency: f64,
    pub power: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HurstEstimate {
    /// `(1 - spectral_slope) / 2`, not clamped.
    pub h: f64,
    pub spectral_slope: f64,
    pub intercept: f64,
    pub regression_r: f64,
    pub n_points: usize,
}

impl HurstEstimate {
    /// `h` restricted to `[0, 1]` for reporting.
    pub fn clamped_h(&self) -> f64 {
        self.h.clamp(0.0, 1.0)
    }
}

/// Residuals of the least-squares line through `(k, values[k])`.
pub fn detrend(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    let mk = (n - 1.0) / 2.0;
    let mv = values.iter().sum::<f64>() / n;
    let (mut skk, mut skv) = (0.0, 0.0);
    for (k, v) in values.iter().enumerate() {
        let dk = k as f64 - mk;
        skk += dk * dk;
        skv += dk * (v - mv);
    }
    let slope = if skk > 0.0 { skv / skk } else { 0.0 };
    values
        .iter()
        .enumerate()
        .map(|(k, v)| (v - mv) - slope * (k as f64 - mk))
        .collect()
}

/// Periodogram of the detrended series at all positive frequencies.
pub fn periodogram(series: &ThroughputSeries) -> Result<Vec<SpectrumPoint>> {
    let n = series.len();
    if n < MIN_SERIES_LEN {
        return Err(Error::SeriesTooShort { needed: MIN_SERIES_LEN, got: n });
    }
    let residuals = detrend(&series.values);
    let scale = series.values.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    if residuals.iter().all(|r| r.abs() <= 1e-12 * scale) {
        return Err(Error::InsufficientData("detrended series is identically zero".into()));
    }

    let mut buf: Vec<Complex<f64>> = residuals.into_iter().map(|r| Complex::new(r, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let span = n as f64 * series.bin_width;
    Ok((1..=n / 2)
        .map(|j| SpectrumPoint {
            frequency: j as f64 / span,
            power: buf[j].norm_sqr() / n as f64,
        })
        .collect())
}

/// Log-log fit over the lowest `ceil(fraction * len)` spectrum points.
pub fn fit_spectrum(spectrum: &[SpectrumPoint], low_freq_fraction: f64) -> Result<HurstEstimate> {
    if !(low_freq_fraction > 0.0 && low_freq_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "low-frequency fraction {low_freq_fraction} must be in (0, 1]"
        )));
    }
    // guard against 0.1 * 1500 = 150.00000000000003
    let wanted = (low_freq_fraction * spectrum.len() as f64 - 1e-9).ceil().max(1.0) as usize;
    let used = &spectrum[..wanted.min(spectrum.len())];
    if used.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} frequencies selected, regression needs 2",
            used.len()
        )));
    }
    if used.iter().any(|p| p.power <= 0.0) {
        return Err(Error::InsufficientData("zero power inside the regression range".into()));
    }
    let xs: Vec<f64> = used.iter().map(|p| p.frequency.log10()).collect();
    let ys: Vec<f64> = used.iter().map(|p| p.power.log10()).collect();
    let fit = linear_fit(&xs, &ys)?;
    Ok(HurstEstimate {
        h: (1.0 - fit.slope) / 2.0,
        spectral_slope: fit.slope,
        intercept: fit.intercept,
        regression_r: fit.pearson_r,
        n_points: used.len(),
    })
}

pub fn hurst_periodogram(series: &ThroughputSeries, low_freq_fraction: f64) -> Result<HurstEstimate> {
    if !(low_freq_fraction > 0.0 && low_freq_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "low-frequency fraction {low_freq_fraction} must be in (0, 1]"
        )));
    }
    fit_spectrum(&periodogram(series)?, low_freq_fraction)
}

/// `log10_f,log10_P` table.
pub fn write_spectrum_csv<W: Write>(spectrum: &[SpectrumPoint], out: W) -> Result<()> {
    write_table(
        out,
        &["log10_f", "log10_P"],
        spectrum
            .iter()
            .filter(|p| p.power > 0.0)
            .map(|p| [num(p.frequency.log10()), num(p.power.log10())]),
    )
}
