//! Per-time-unit flows and their size statistics.
//!
//! A per-time-unit flow is the set of packets sharing a 5-tuple inside one
//! bin `[i*tau, (i+1)*tau)`. Only groups with at least two packets count.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::trace::{bin_width_micros, FlowKey, Trace};
use crate::Result;

mod mechanism;
mod protocol;
mod tail;

pub use mechanism::{alpha_vs_skewness, write_alpha_skewness_csv, AlphaSkewness};
pub use protocol::{protocol_mix, ProtocolMix};
pub use tail::{eccdf, fit_tail, is_heavy_tailed, write_llcd_csv, EccdfPoint, TailFit};

pub const DEFAULT_GREEDY_THRESHOLD: u64 = 20;
pub const DEFAULT_TAIL_MIN: u64 = 10;
pub const MIN_PACKETS_PER_FLOW: u64 = 2;

/// How packets are grouped into flows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeyMode {
    /// Exact 5-tuple.
    #[default]
    Directional,
    /// Both directions of a connection share one flow, keyed by the canonical forward tuple.
    Bidirectional,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PerTimeUnitFlow {
    pub key: FlowKey,
    pub bin_index: usize,
    pub packet_count: u64,
    pub byte_count: u64,
}

impl PerTimeUnitFlow {
    pub fn is_greedy(&self, threshold: u64) -> bool {
        classify_greedy(self, threshold)
    }
}

/// Groups packets by (bin, key) and keeps groups of two or more packets.
///
/// Output is ordered by bin, then by key.
pub fn extract_flows(trace: &Trace, tau: f64, mode: KeyMode) -> Result<Vec<PerTimeUnitFlow>> {
    let width = bin_width_micros(tau)?;
    let mut out = Vec::new();
    let mut current: Option<usize> = None;
    let mut acc: HashMap<FlowKey, (u64, u64)> = HashMap::new();

    let flush = |bin: usize, acc: &mut HashMap<FlowKey, (u64, u64)>, out: &mut Vec<PerTimeUnitFlow>| {
        let start = out.len();
        out.extend(acc.drain().filter(|(_, (n, _))| *n >= MIN_PACKETS_PER_FLOW).map(|(key, (n, b))| {
            PerTimeUnitFlow { key, bin_index: bin, packet_count: n, byte_count: b }
        }));
        out[start..].sort_by_key(|f| f.key);
    };

    for p in trace.packets() {
        let bin = (p.timestamp.micros() / width) as usize;
        if current != Some(bin) {
            if let Some(prev) = current {
                flush(prev, &mut acc, &mut out);
            }
            current = Some(bin);
        }
        let key = match mode {
            KeyMode::Directional => p.key(),
            KeyMode::Bidirectional => p.key().canonical().forward(),
        };
        let e = acc.entry(key).or_insert((0, 0));
        e.0 += 1;
        e.1 += u64::from(p.size);
    }
    if let Some(prev) = current {
        flush(prev, &mut acc, &mut out);
    }
    Ok(out)
}

/// Number of bins spanned by a trace at width `tau` (the last may be partial).
pub fn bin_count(trace: &Trace, tau: f64) -> Result<usize> {
    let width = bin_width_micros(tau)?;
    let by_duration = trace.duration().micros().div_ceil(width);
    let by_last = trace.packets().last().map(|p| p.timestamp.micros() / width + 1).unwrap_or(0);
    Ok(by_duration.max(by_last) as usize)
}

/// `N_{T_i}`: flows per bin for `bins` bins.
pub fn flows_per_bin(flows: &[PerTimeUnitFlow], bins: usize) -> Vec<usize> {
    let mut counts = vec![0; bins];
    for f in flows {
        if let Some(c) = counts.get_mut(f.bin_index) {
            *c += 1;
        }
    }
    counts
}

/// Greedy iff the packet count strictly exceeds `threshold`.
pub fn classify_greedy(flow: &PerTimeUnitFlow, threshold: u64) -> bool {
    flow.packet_count > threshold
}
