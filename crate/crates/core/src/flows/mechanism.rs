use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{eccdf, extract_flows, fit_tail, KeyMode};
use crate::export::{num, write_table};
use crate::stats::throughput_series;
use crate::trace::Trace;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaSkewness {
    pub trace_id: String,
    pub alpha: f64,
    pub skewness: f64,
}

/// Pairs each trace's flow-size tail exponent with its throughput skewness.
///
/// Traces are processed in parallel; output order follows the input.
pub fn alpha_vs_skewness(traces: &[(String, Trace)], tau: f64, n_min: u64) -> Result<Vec<AlphaSkewness>> {
    if traces.len() < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 traces, got {}", traces.len())));
    }
    traces
        .par_iter()
        .map(|(id, trace)| {
            let wrap = |e: Error| Error::InsufficientData(format!("trace {id}: {e}"));
            let flows = extract_flows(trace, tau, KeyMode::Directional).map_err(wrap)?;
            let counts: Vec<u64> = flows.iter().map(|f| f.packet_count).collect();
            let alpha = fit_tail(&eccdf(&counts), n_min).map_err(wrap)?.alpha;
            let skewness = throughput_series(trace, tau).and_then(|s| s.skewness()).map_err(wrap)?;
            Ok(AlphaSkewness { trace_id: id.clone(), alpha, skewness })
        })
        .collect()
}

pub fn write_alpha_skewness_csv<W: Write>(rows: &[AlphaSkewness], out: W) -> Result<()> {
    write_table(
        out,
        &["trace", "alpha", "skewness"],
        rows.iter().map(|r| [r.trace_id.clone(), num(r.alpha), num(r.skewness)]),
    )
}
