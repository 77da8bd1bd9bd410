use std::io::Write;

use serde::{Deserialize, Serialize};

use super::moments::{mean, population_stddev};
use crate::export::{num, write_table};
use crate::trace::{bin_width_micros, Trace};
use crate::{Error, Result};

/// Throughput in bits per second, one value per complete bin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThroughputSeries {
    pub values: Vec<f64>,
    /// Bin width in seconds.
    pub bin_width: f64,
    pub mean: f64,
    /// Population standard deviation.
    pub stddev: f64,
}

impl ThroughputSeries {
    pub fn from_values(values: Vec<f64>, bin_width: f64) -> Self {
        let mean = mean(&values);
        let stddev = population_stddev(&values);
        ThroughputSeries { values, bin_width, mean, stddev }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn skewness(&self) -> Result<f64> {
        super::skewness(&self.values)
    }

    /// `index,value` table.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_table(
            out,
            &["index", "value"],
            self.values.iter().enumerate().map(|(i, v)| [i.to_string(), num(*v)]),
        )
    }
}

/// Bins packet sizes into `bin_width` intervals aligned at t = 0.
///
/// Bin `k` covers `[k*bin_width, (k+1)*bin_width)` and holds
/// `8 * bytes / bin_width`. A trailing partial bin is dropped.
pub fn throughput_series(trace: &Trace, bin_width: f64) -> Result<ThroughputSeries> {
    let width_us = bin_width_micros(bin_width)?;
    let duration_us = trace.duration().micros();
    if duration_us < 2 * width_us {
        return Err(Error::InsufficientData(format!(
            "trace lasts {} s, need at least two bins of {bin_width} s",
            trace.duration()
        )));
    }
    let n_bins = (duration_us / width_us) as usize;
    let mut bytes = vec![0u64; n_bins];
    for p in trace.packets() {
        let k = (p.timestamp.micros() / width_us) as usize;
        if k >= n_bins {
            break;
        }
        bytes[k] += u64::from(p.size);
    }
    let width_s = width_us as f64 / 1e6;
    let values = bytes.into_iter().map(|b| 8.0 * b as f64 / width_s).collect();
    Ok(ThroughputSeries::from_values(values, width_s))
}
