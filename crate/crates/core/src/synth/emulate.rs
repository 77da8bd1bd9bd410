//! Path emulation: scripted TTLs and handshakes on top of a generated trace.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};

use crate::path::infer_initial_ttl;
use crate::trace::tcp_flags::{ACK, SYN};
use crate::trace::{BiFlowKey, FlowKey, PacketRecord, Timestamp, Trace, PROTO_TCP};
use crate::{Error, Result};

const HANDSHAKE_SIZE: u16 = 40;

/// A host's position relative to the observation point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HostPath {
    /// Routers between the host and the observation point.
    pub hops: u8,
    pub initial_ttl: u8,
    /// Round trip between the observation point and the host, seconds.
    pub rtt: f64,
}

impl HostPath {
    pub fn new(hops: u8, initial_ttl: u8, rtt: f64) -> Self {
        HostPath { hops, initial_ttl, rtt }
    }

    fn observed_ttl(&self) -> u8 {
        self.initial_ttl - self.hops
    }

    fn validate(&self, ip: Ipv4Addr) -> Result<()> {
        if self.hops >= self.initial_ttl {
            return Err(Error::InvalidModel(format!(
                "{ip}: {} hops exhaust initial TTL {}",
                self.hops, self.initial_ttl
            )));
        }
        if infer_initial_ttl(self.observed_ttl())? != self.initial_ttl {
            return Err(Error::InvalidModel(format!(
                "{ip}: TTL {} after {} hops does not map back to initial TTL {}",
                self.observed_ttl(),
                self.hops,
                self.initial_ttl
            )));
        }
        if !(self.rtt.is_finite() && self.rtt > 0.0) {
            return Err(Error::InvalidModel(format!("{ip}: rtt {} must be > 0", self.rtt)));
        }
        Ok(())
    }
}

/// What the path metrics should recover for one connection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScriptedPath {
    pub bikey: BiFlowKey,
    /// `hops(a) + hops(b) + 1`.
    pub hops: u32,
    /// Initiator direction; `None` when no handshake was injected.
    pub initiator: Option<FlowKey>,
    /// Handshake RTT in seconds, when one was injected.
    pub rtt: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathEmulation {
    pub trace: Trace,
    /// One entry per bidirectional key, sorted by key.
    pub scripted: Vec<ScriptedPath>,
}

/// Rewrites TTLs to `initial - hops` of each sender and prepends a handshake to
/// every TCP connection that has none.
///
/// The first packet of a connection decides the initiator. Its SYN takes that
/// packet's time; the SYN+ACK follows after the responder's RTT and the ACK
/// after the initiator's, so the measured interval is their sum.
pub fn emulate_path(trace: &Trace, topology: &BTreeMap<Ipv4Addr, HostPath>) -> Result<PathEmulation> {
    for (ip, path) in topology {
        path.validate(*ip)?;
    }
    let lookup = |ip: Ipv4Addr| topology.get(&ip).ok_or(Error::UnknownHost(ip));

    let mut first_seen: HashMap<BiFlowKey, (Timestamp, FlowKey)> = HashMap::new();
    let mut has_syn: BTreeSet<BiFlowKey> = BTreeSet::new();
    let mut packets = Vec::with_capacity(trace.len());
    for p in trace.packets() {
        let src = lookup(p.src_ip)?;
        let key = p.key();
        let bikey = key.canonical();
        first_seen.entry(bikey).or_insert((p.timestamp, key));
        if p.is_tcp() && p.has_flags(SYN) {
            has_syn.insert(bikey);
        }
        packets.push(PacketRecord { ttl: src.observed_ttl(), ..*p });
    }

    let mut scripted = Vec::with_capacity(first_seen.len());
    let mut last = trace.duration();
    for (bikey, (t0, init)) in first_seen {
        let a = lookup(bikey.a.ip)?;
        let b = lookup(bikey.b.ip)?;
        let hops = u32::from(a.hops) + u32::from(b.hops) + 1;
        if init.protocol != PROTO_TCP || has_syn.contains(&bikey) {
            scripted.push(ScriptedPath { bikey, hops, initiator: None, rtt: None });
            continue;
        }
        let src = lookup(init.src_ip)?;
        let dst = lookup(init.dst_ip)?;
        let to_dst = Timestamp::from_secs_f64(dst.rtt)?.micros();
        let to_src = Timestamp::from_secs_f64(src.rtt)?.micros();
        if to_dst == 0 || to_src == 0 {
            return Err(Error::InvalidModel("rtt rounds to zero microseconds".into()));
        }
        let t_synack = Timestamp(t0.micros() + to_dst);
        let t_ack = Timestamp(t_synack.micros() + to_src);
        let template = PacketRecord {
            timestamp: t0,
            size: HANDSHAKE_SIZE,
            src_ip: init.src_ip,
            dst_ip: init.dst_ip,
            src_port: init.src_port,
            dst_port: init.dst_port,
            protocol: PROTO_TCP,
            ttl: src.observed_ttl(),
            tcp_flags: SYN,
        };
        let reply = init.reversed();
        packets.push(template);
        packets.push(PacketRecord {
            timestamp: t_synack,
            src_ip: reply.src_ip,
            dst_ip: reply.dst_ip,
            src_port: reply.src_port,
            dst_port: reply.dst_port,
            ttl: dst.observed_ttl(),
            tcp_flags: SYN | ACK,
            ..template
        });
        packets.push(PacketRecord { timestamp: t_ack, tcp_flags: ACK, ..template });
        last = last.max(t_ack);
        scripted.push(ScriptedPath {
            bikey,
            hops,
            initiator: Some(init),
            rtt: Some((to_dst + to_src) as f64 / 1e6),
        });
    }
    scripted.sort_by_key(|s| s.bikey);

    // injected packets go after originals with the same timestamp
    let trace = Trace::from_unsorted(packets, last).with_origin(trace.origin());
    Ok(PathEmulation { trace, scripted })
}
