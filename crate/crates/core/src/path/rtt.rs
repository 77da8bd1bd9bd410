//! Round-trip times from TCP three-way handshakes.
//!
//! At an observation point between the hosts, the interval from the
//! initiator's SYN to its first ACK after the SYN+ACK covers one full
//! round trip: responder side then initiator side.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::hops::estimate_hops;
use crate::export::{num, write_table};
use crate::stats::{linear_fit, RegressionFit};
use crate::trace::tcp_flags::{ACK, FIN, PSH, RST, SYN};
use crate::trace::{BiFlowKey, PacketRecord, Timestamp, Trace};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HandshakeRecord {
    pub bikey: BiFlowKey,
    /// True when endpoint `a` of `bikey` sent the SYN.
    pub initiator_is_a: bool,
    pub t_syn: Timestamp,
    pub t_synack: Timestamp,
    pub t_ack: Timestamp,
    /// Seconds.
    pub rtt: f64,
    /// No duplicate SYN or SYN+ACK before the ACK, and strictly increasing times.
    pub clean: bool,
}

fn is_pure_syn(p: &PacketRecord) -> bool {
    p.tcp_flags & (SYN | ACK | RST) == SYN
}

fn is_synack(p: &PacketRecord) -> bool {
    p.tcp_flags & (SYN | ACK | RST) == SYN | ACK
}

/// ACK with no SYN, FIN, RST or PSH.
fn is_pure_ack(p: &PacketRecord) -> bool {
    p.tcp_flags & (SYN | ACK | FIN | RST | PSH) == ACK
}

#[derive(Default)]
struct Handshake {
    initiator_forward: Option<bool>,
    t_syn: Option<Timestamp>,
    t_synack: Option<Timestamp>,
    t_ack: Option<Timestamp>,
    duplicate: bool,
}

impl Handshake {
    fn observe(&mut self, p: &PacketRecord, forward: bool) {
        if self.t_ack.is_some() {
            return;
        }
        if is_pure_syn(p) {
            match self.initiator_forward {
                None => {
                    self.initiator_forward = Some(forward);
                    self.t_syn = Some(p.timestamp);
                }
                // retransmission, or a simultaneous open from the other side
                Some(_) => self.duplicate = true,
            }
        } else if is_synack(p) {
            if self.initiator_forward == Some(!forward) {
                if self.t_synack.is_none() {
                    self.t_synack = Some(p.timestamp);
                } else {
                    self.duplicate = true;
                }
            }
        } else if is_pure_ack(p) && self.initiator_forward == Some(forward) && self.t_synack.is_some() {
            self.t_ack = Some(p.timestamp);
        }
    }
}

/// One record per TCP key with a complete handshake, sorted by key.
///
/// Records with duplicates are kept but flagged `clean = false`; zero-length
/// intervals are dropped.
pub fn estimate_rtts(trace: &Trace) -> Vec<HandshakeRecord> {
    let mut state: HashMap<BiFlowKey, Handshake> = HashMap::new();
    for p in trace.packets().iter().filter(|p| p.is_tcp()) {
        let key = p.key();
        state.entry(key.canonical()).or_default().observe(p, key.is_forward());
    }
    let mut out: Vec<HandshakeRecord> = state
        .into_iter()
        .filter_map(|(bikey, hs)| {
            let (t_syn, t_synack, t_ack) = (hs.t_syn?, hs.t_synack?, hs.t_ack?);
            if t_ack <= t_syn {
                return None;
            }
            let ordered = t_syn < t_synack && t_synack < t_ack;
            Some(HandshakeRecord {
                bikey,
                initiator_is_a: hs.initiator_forward?,
                t_syn,
                t_synack,
                t_ack,
                rtt: t_ack.saturating_sub(t_syn).as_secs_f64(),
                clean: ordered && !hs.duplicate,
            })
        })
        .collect();
    out.sort_by_key(|r| r.bikey);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopRttGroup {
    pub hops: u32,
    pub mean_rtt_s: f64,
    pub flows: usize,
    pub share: f64,
    /// Whether the group entered the regression.
    pub fitted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopsVsRtt {
    pub groups: Vec<HopRttGroup>,
    /// Mean RTT (s) regressed on hop count over qualifying groups.
    pub fit: RegressionFit,
    pub min_share: f64,
}

impl HopsVsRtt {
    /// `hops,mean_rtt_s,flows` table over all groups.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_table(
            out,
            &["hops", "mean_rtt_s", "flows"],
            self.groups.iter().map(|g| [g.hops.to_string(), num(g.mean_rtt_s), g.flows.to_string()]),
        )
    }
}

/// Mean clean RTT per hop count and the linear fit across hop counts.
///
/// Only keys with both an unambiguous hop estimate and a clean handshake
/// count. Groups whose share of those keys does not exceed `min_share`
/// stay in the table but are left out of the fit.
pub fn hops_vs_rtt(trace: &Trace, min_share: f64) -> Result<HopsVsRtt> {
    if !(0.0..1.0).contains(&min_share) {
        return Err(Error::InvalidArgument(format!("min_share {min_share} must be in [0, 1)")));
    }
    let hops: HashMap<BiFlowKey, u32> = estimate_hops(trace)?
        .into_iter()
        .filter(|e| !e.ambiguous)
        .map(|e| (e.bikey, e.hops))
        .collect();
    let mut by_hops: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for r in estimate_rtts(trace).into_iter().filter(|r| r.clean) {
        if let Some(&h) = hops.get(&r.bikey) {
            by_hops.entry(h).or_default().push(r.rtt);
        }
    }
    let total: usize = by_hops.values().map(Vec::len).sum();
    let groups: Vec<HopRttGroup> = by_hops
        .into_iter()
        .map(|(h, rtts)| {
            let share = rtts.len() as f64 / total as f64;
            HopRttGroup {
                hops: h,
                mean_rtt_s: rtts.iter().sum::<f64>() / rtts.len() as f64,
                flows: rtts.len(),
                share,
                fitted: share > min_share,
            }
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = groups
        .iter()
        .filter(|g| g.fitted)
        .map(|g| (f64::from(g.hops), g.mean_rtt_s))
        .unzip();
    if xs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} hop-count groups above {min_share} share, need 2",
            xs.len()
        )));
    }
    let fit = linear_fit(&xs, &ys)?;
    Ok(HopsVsRtt { groups, fit, min_share })
}
