//! Synthetic traces with known ground truth.
//!
//! Traffic is the superposition of ON/OFF sources whose period lengths are
//! Pareto distributed. While ON, a source sends fixed-size packets at a
//! constant spacing, so the packets per bin are exactly known. Per-source
//! rates are either identical or drawn from a Pareto law, the latter
//! producing a few very fast flows.

use std::net::Ipv4Addr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::trace::{tcp_flags, FlowKey, PacketRecord, Timestamp, Trace, PROTO_TCP};
use crate::{Error, Result};

mod config;
mod emulate;
mod pareto;
mod shuffle;

pub use config::SynthConfig;
pub use emulate::{emulate_path, HostPath, PathEmulation, ScriptedPath};
pub use pareto::Pareto;
pub use shuffle::block_shuffle;

pub const DEFAULT_TTL: u8 = 64;

/// Per-source sending rate in packets per second.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateModel {
    Uniform { pps: f64 },
    /// `min_pps * U^(-1/shape)`, optionally capped.
    Pareto { shape: f64, min_pps: f64, max_pps: Option<f64> },
}

impl RateModel {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            RateModel::Uniform { pps } => pps,
            RateModel::Pareto { shape, min_pps, max_pps } => {
                let r = Pareto::with_scale(shape, min_pps).sample(rng);
                max_pps.map_or(r, |cap| r.min(cap))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceModel {
    pub n_sources: usize,
    pub on_shape: f64,
    pub off_shape: f64,
    /// Mean ON period, seconds.
    pub mean_on: f64,
    /// Mean OFF period, seconds; zero keeps every source ON.
    pub mean_off: f64,
    pub rates: RateModel,
    /// IP datagram size, bytes.
    pub packet_size: u16,
    pub seed: u64,
    /// Bin width used for the recorded per-bin counts.
    pub truth_bin_width: f64,
}

impl Default for SourceModel {
    fn default() -> Self {
        SourceModel {
            n_sources: 50,
            on_shape: 1.4,
            off_shape: 1.4,
            mean_on: 0.5,
            mean_off: 0.5,
            rates: RateModel::Uniform { pps: 20.0 },
            packet_size: 1000,
            seed: 1,
            truth_bin_width: crate::stats::DEFAULT_BIN_WIDTH,
        }
    }
}

impl SourceModel {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        if self.n_sources == 0 {
            return bad("n_sources must be at least 1".into());
        }
        for (name, shape) in [("on_shape", self.on_shape), ("off_shape", self.off_shape)] {
            if !(shape > 1.0 && shape <= 2.0) {
                return bad(format!("{name} = {shape} must lie in (1, 2]"));
            }
        }
        if !(self.mean_on.is_finite() && self.mean_on > 0.0) {
            return bad(format!("mean_on = {} must be > 0", self.mean_on));
        }
        if !(self.mean_off.is_finite() && self.mean_off >= 0.0) {
            return bad(format!("mean_off = {} must be >= 0", self.mean_off));
        }
        match self.rates {
            RateModel::Uniform { pps } if !(pps.is_finite() && pps > 0.0) => {
                return bad(format!("rate {pps} must be > 0"));
            }
            RateModel::Pareto { shape, min_pps, max_pps } => {
                if !(shape.is_finite() && shape > 0.0) {
                    return bad(format!("rate_shape {shape} must be > 0"));
                }
                if !(min_pps.is_finite() && min_pps > 0.0) {
                    return bad(format!("rate_min {min_pps} must be > 0"));
                }
                if max_pps.is_some_and(|m| m.is_nan() || m < min_pps) {
                    return bad("rate_max must be >= rate_min".into());
                }
            }
            _ => {}
        }
        if self.packet_size < 20 {
            return bad(format!("packet_size {} is below the IPv4 header", self.packet_size));
        }
        if !(self.truth_bin_width.is_finite() && self.truth_bin_width > 0.0) {
            return bad("truth_bin_width must be > 0".into());
        }
        Ok(())
    }

    /// `(3 - min(on_shape, off_shape)) / 2`.
    pub fn theoretical_h(&self) -> f64 {
        (3.0 - self.on_shape.min(self.off_shape)) / 2.0
    }

    fn always_on(&self) -> bool {
        self.mean_off == 0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceTruth {
    pub index: usize,
    pub key: FlowKey,
    pub rate_pps: f64,
    /// `[start, end)` in seconds, clipped to the trace.
    pub on_periods: Vec<(f64, f64)>,
    pub packets: u64,
    pub bytes: u64,
    /// Sparse `(bin, packets)` for non-empty bins.
    pub bin_counts: Vec<(usize, u64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub model: SourceModel,
    pub duration: f64,
    pub theoretical_h: f64,
    pub bin_width: f64,
    pub total_bytes: u64,
    pub sources: Vec<SourceTruth>,
}

/// Source `index` sends from 10.a.b.c to 172.16.a.b.c (a.b.c = index + 1).
pub fn source_key(index: usize) -> FlowKey {
    let n = (index + 1) as u32;
    let [_, a, b, c] = n.to_be_bytes();
    FlowKey {
        src_ip: Ipv4Addr::new(10, a, b, c),
        dst_ip: Ipv4Addr::new(172, 16 + a, b, c),
        src_port: 10_000 + (index % 50_000) as u16,
        dst_port: 80,
        protocol: PROTO_TCP,
    }
}

fn source_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

/// Generates the aggregate trace and everything needed to check estimators against it.
///
/// Each source draws from its own ChaCha stream, so adding sources leaves
/// existing ones unchanged.
pub fn generate(model: &SourceModel, duration: f64) -> Result<(Trace, GroundTruth)> {
    model.validate()?;
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::InvalidModel(format!("duration {duration} must be > 0")));
    }
    let duration_ts = Timestamp::from_secs_f64(duration)?;
    let bin_us = crate::trace::bin_width_micros(model.truth_bin_width)?;

    let on = Pareto::with_mean(model.on_shape, model.mean_on);
    let off = (!model.always_on()).then(|| Pareto::with_mean(model.off_shape, model.mean_off));
    let p_on = model.mean_on / (model.mean_on + model.mean_off);

    let mut packets = Vec::new();
    let mut sources = Vec::with_capacity(model.n_sources);
    for index in 0..model.n_sources {
        let mut rng = source_rng(model.seed, index);
        let rate = model.rates.sample(&mut rng);
        let key = source_key(index);

        let mut on_periods = Vec::new();
        match off {
            None => on_periods.push((0.0, duration)),
            Some(off) => {
                // start in equilibrium: state by time share, first period a residual life
                let mut is_on = rng.gen::<f64>() < p_on;
                let mut t = if is_on { on.sample_residual(&mut rng) } else { off.sample_residual(&mut rng) };
                if is_on {
                    on_periods.push((0.0, t.min(duration)));
                }
                while t < duration {
                    is_on = !is_on;
                    let len = if is_on { on.sample(&mut rng) } else { off.sample(&mut rng) };
                    if is_on {
                        on_periods.push((t, (t + len).min(duration)));
                    }
                    t += len;
                }
            }
        }

        let mut bin_counts: Vec<(usize, u64)> = Vec::new();
        let mut count = 0u64;
        for &(start, end) in &on_periods {
            let end_us = (end * 1e6).round() as u64;
            let mut k = 0u64;
            loop {
                let ts = Timestamp(((start + k as f64 / rate) * 1e6).round() as u64);
                if ts.micros() >= end_us {
                    break;
                }
                let bin = (ts.micros() / bin_us) as usize;
                match bin_counts.last_mut() {
                    Some((b, c)) if *b == bin => *c += 1,
                    _ => bin_counts.push((bin, 1)),
                }
                packets.push(PacketRecord {
                    timestamp: ts,
                    size: model.packet_size,
                    src_ip: key.src_ip,
                    dst_ip: key.dst_ip,
                    src_port: key.src_port,
                    dst_port: key.dst_port,
                    protocol: key.protocol,
                    ttl: DEFAULT_TTL,
                    tcp_flags: tcp_flags::PSH | tcp_flags::ACK,
                });
                count += 1;
                k += 1;
            }
        }
        sources.push(SourceTruth {
            index,
            key,
            rate_pps: rate,
            on_periods,
            packets: count,
            bytes: count * u64::from(model.packet_size),
            bin_counts,
        });
    }

    let trace = Trace::from_unsorted(packets, duration_ts);
    let truth = GroundTruth {
        model: model.clone(),
        duration,
        theoretical_h: model.theoretical_h(),
        bin_width: model.truth_bin_width,
        total_bytes: sources.iter().map(|s| s.bytes).sum(),
        sources,
    };
    Ok((trace, truth))
}
