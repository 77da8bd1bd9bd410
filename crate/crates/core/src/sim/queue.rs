use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::trace::Trace;
use crate::{Error, Result};

/// How the link rate is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkRate {
    /// Fixed rate in bits per second.
    Bandwidth(f64),
    /// Rate set so that the trace's mean load is this fraction of it.
    Utilization(f64),
}

/// What the packet limit counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BufferConvention {
    /// The limit includes the packet being transmitted.
    #[default]
    System,
    /// The limit counts waiting packets only.
    Waiting,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub link: LinkRate,
    pub buffer_packets: usize,
    pub convention: BufferConvention,
}

impl SimConfig {
    pub fn at_utilization(rho: f64, buffer_packets: usize) -> Self {
        SimConfig { link: LinkRate::Utilization(rho), buffer_packets, convention: BufferConvention::System }
    }

    pub fn at_bandwidth(bps: f64, buffer_packets: usize) -> Self {
        SimConfig { link: LinkRate::Bandwidth(bps), buffer_packets, convention: BufferConvention::System }
    }

    pub fn with_convention(mut self, convention: BufferConvention) -> Self {
        self.convention = convention;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.buffer_packets == 0 {
            return Err(Error::InvalidArgument("buffer must hold at least one packet".into()));
        }
        match self.link {
            LinkRate::Bandwidth(bw) if !(bw.is_finite() && bw > 0.0) => {
                Err(Error::InvalidArgument(format!("bandwidth {bw} must be > 0")))
            }
            LinkRate::Utilization(rho) if !(rho > 0.0 && rho < 1.0) => {
                Err(Error::InvalidArgument(format!("utilization {rho} must be in (0, 1)")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub total_packets: usize,
    pub dropped_packets: usize,
    pub departed_packets: usize,
    pub loss_ratio: f64,
    /// Link rate used, bits per second.
    pub bandwidth: f64,
    /// Delivered bits over the trace duration.
    pub effective_bandwidth: f64,
    /// Peak occupancy, counted the same way as the buffer limit.
    pub max_queue_seen: usize,
    pub buffer_packets: usize,
    pub convention: BufferConvention,
}

/// Link rate at which the trace's mean rate is `rho` of capacity.
pub fn derive_bandwidth(trace: &Trace, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidArgument(format!("utilization {rho} must be in (0, 1)")));
    }
    if trace.is_empty() {
        return Err(Error::InsufficientData("cannot derive bandwidth from an empty trace".into()));
    }
    let duration = trace.duration_secs();
    if duration <= 0.0 {
        return Err(Error::InsufficientData("cannot derive bandwidth from a zero-length trace".into()));
    }
    Ok(trace.total_bytes() as f64 * 8.0 / duration / rho)
}

/// Replays the trace open-loop through one FIFO link.
///
/// Packets arrive at their trace timestamps and occupy the link for
/// `size * 8 / bandwidth` seconds. An arrival finding the buffer full is
/// dropped. Departures due at the same instant as an arrival are
/// processed first; simultaneous arrivals keep trace order.
pub fn simulate(trace: &Trace, config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let bandwidth = match config.link {
        LinkRate::Bandwidth(bw) => bw,
        LinkRate::Utilization(rho) => derive_bandwidth(trace, rho)?,
    };
    let system_limit = match config.convention {
        BufferConvention::System => config.buffer_packets,
        BufferConvention::Waiting => config.buffer_packets + 1,
    };

    // departure times of packets currently in the system, FIFO order
    let mut in_system: VecDeque<f64> = VecDeque::with_capacity(system_limit);
    let mut link_free_at = 0.0f64;
    let mut dropped = 0usize;
    let mut delivered_bits = 0.0f64;
    let mut max_occupancy = 0usize;

    for p in trace.packets() {
        let now = p.timestamp.as_secs_f64();
        while in_system.front().is_some_and(|&d| d <= now) {
            in_system.pop_front();
        }
        if in_system.len() >= system_limit {
            dropped += 1;
            continue;
        }
        let bits = f64::from(p.size) * 8.0;
        let start = link_free_at.max(now);
        link_free_at = start + bits / bandwidth;
        in_system.push_back(link_free_at);
        delivered_bits += bits;
        max_occupancy = max_occupancy.max(in_system.len());
    }

    let total = trace.len();
    let max_queue_seen = match config.convention {
        BufferConvention::System => max_occupancy,
        BufferConvention::Waiting => max_occupancy.saturating_sub(1),
    };
    let duration = trace.duration_secs();
    Ok(SimResult {
        total_packets: total,
        dropped_packets: dropped,
        departed_packets: total - dropped,
        loss_ratio: if total == 0 { 0.0 } else { dropped as f64 / total as f64 },
        bandwidth,
        effective_bandwidth: if duration > 0.0 { delivered_bits / duration } else { 0.0 },
        max_queue_seen,
        buffer_packets: config.buffer_packets,
        convention: config.convention,
    })
}
