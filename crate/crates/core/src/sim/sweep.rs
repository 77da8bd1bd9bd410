use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::queue::{simulate, BufferConvention, SimConfig};
use crate::export::{num, write_table};
use crate::stats::{hurst_periodogram, pearson, throughput_series};
use crate::trace::Trace;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub tau: f64,
    pub low_freq_fraction: f64,
    pub rho: f64,
    pub buffer_packets: usize,
    pub convention: BufferConvention,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams {
            tau: crate::stats::DEFAULT_BIN_WIDTH,
            low_freq_fraction: crate::stats::DEFAULT_LOW_FREQ_FRACTION,
            rho: super::DEFAULT_UTILIZATION,
            buffer_packets: super::DEFAULT_BUFFER_PACKETS,
            convention: BufferConvention::System,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub trace_id: String,
    pub skewness: Option<f64>,
    pub hurst: Option<f64>,
    pub loss_ratio: Option<f64>,
    pub bandwidth: Option<f64>,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

/// A correlation coefficient, or why it could not be computed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub value: Option<f64>,
    pub undefined_reason: Option<String>,
}

impl Correlation {
    fn of(xs: &[f64], ys: &[f64]) -> Self {
        match pearson(xs, ys) {
            Ok(r) => Correlation { value: Some(r), undefined_reason: None },
            Err(e) => Correlation { value: None, undefined_reason: Some(e.to_string()) },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub params: SweepParams,
    /// Sorted by trace id.
    pub rows: Vec<SweepRow>,
    pub skewness_vs_loss: Correlation,
    pub hurst_vs_loss: Correlation,
}

impl SweepReport {
    /// `trace,skewness,hurst,loss_ratio`; failed rows have empty fields.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        write_table(
            out,
            &["trace", "skewness", "hurst", "loss_ratio"],
            self.rows
                .iter()
                .map(|r| [r.trace_id.clone(), opt(r.skewness), opt(r.hurst), opt(r.loss_ratio)]),
        )
    }

    pub fn failed(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| !r.is_ok())
    }
}

fn sweep_one(id: &str, trace: &Trace, params: &SweepParams) -> Result<SweepRow> {
    let series = throughput_series(trace, params.tau)?;
    let skewness = series.skewness()?;
    let hurst = hurst_periodogram(&series, params.low_freq_fraction)?;
    let cfg = SimConfig::at_utilization(params.rho, params.buffer_packets).with_convention(params.convention);
    let sim = simulate(trace, &cfg)?;
    Ok(SweepRow {
        trace_id: id.to_string(),
        skewness: Some(skewness),
        hurst: Some(hurst.h),
        loss_ratio: Some(sim.loss_ratio),
        bandwidth: Some(sim.bandwidth),
        error: None,
    })
}

/// Skewness, Hurst parameter and simulated loss per trace, plus their correlations.
///
/// A failing trace yields a row carrying its error and is left out of the
/// correlations; the remaining traces still run.
pub fn performance_sweep(traces: &[(String, Trace)], params: &SweepParams) -> Result<SweepReport> {
    if traces.len() < 2 {
        return Err(Error::InsufficientData(format!("sweep needs at least 2 traces, got {}", traces.len())));
    }
    let mut rows: Vec<SweepRow> = traces
        .par_iter()
        .map(|(id, trace)| {
            sweep_one(id, trace, params).unwrap_or_else(|e| SweepRow {
                trace_id: id.clone(),
                skewness: None,
                hurst: None,
                loss_ratio: None,
                bandwidth: None,
                error: Some(e.to_string()),
            })
        })
        .collect();
    rows.sort_by(|a, b| a.trace_id.cmp(&b.trace_id));

    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.is_ok()).collect();
    let col = |f: fn(&SweepRow) -> Option<f64>| ok.iter().filter_map(|r| f(r)).collect::<Vec<f64>>();
    let (skew, hurst, loss) = (col(|r| r.skewness), col(|r| r.hurst), col(|r| r.loss_ratio));
    Ok(SweepReport {
        params: *params,
        skewness_vs_loss: Correlation::of(&skew, &loss),
        hurst_vs_loss: Correlation::of(&hurst, &loss),
        rows,
    })
}
