use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::export::{num, write_table};
use crate::{Error, Result};

/// Fixed-width histogram over contiguous bins from the minimum to the maximum value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    /// Lower edge of each bin.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub mean: f64,
    pub total: u64,
}

impl Histogram {
    /// Count of the bin holding `value`, zero outside the range.
    pub fn count_at(&self, value: f64) -> u64 {
        let Some(&first) = self.edges.first() else { return 0 };
        let k = ((value / self.bin_width).floor() - (first / self.bin_width).round()) as i64;
        if k < 0 {
            return 0;
        }
        self.counts.get(k as usize).copied().unwrap_or(0)
    }

    pub fn write_csv<W: Write>(&self, out: W, value_label: &str) -> Result<()> {
        write_table(
            out,
            &[value_label, "count"],
            self.edges.iter().zip(&self.counts).map(|(e, c)| [num(*e), c.to_string()]),
        )
    }
}

pub fn histogram(values: &[f64], bin_width: f64) -> Result<Histogram> {
    if !bin_width.is_finite() || bin_width <= 0.0 {
        return Err(Error::InvalidArgument(format!("bin width {bin_width} must be > 0")));
    }
    if values.is_empty() {
        return Err(Error::InsufficientData("histogram of empty input".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("histogram input must be finite".into()));
    }
    let bin = |v: f64| (v / bin_width).floor() as i64;
    let lo = values.iter().copied().map(bin).min().unwrap_or(0);
    let hi = values.iter().copied().map(bin).max().unwrap_or(0);
    let mut counts = vec![0u64; (hi - lo + 1) as usize];
    for &v in values {
        counts[(bin(v) - lo) as usize] += 1;
    }
    Ok(Histogram {
        bin_width,
        edges: (lo..=hi).map(|k| k as f64 * bin_width).collect(),
        counts,
        mean: values.iter().sum::<f64>() / values.len() as f64,
        total: values.len() as u64,
    })
}
