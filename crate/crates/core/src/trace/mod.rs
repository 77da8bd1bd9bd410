//! Packet and trace data model.

use std::fmt;
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub mod csv;
pub mod pcap;

pub use self::csv::{read_csv, write_csv};
pub use self::pcap::{read_pcap, write_pcap, PcapRead, PcapStats};

pub const PROTO_TCP: u8 = 6;
pub const PROTO_UDP: u8 = 17;

/// TCP flag bits as they appear in byte 13 of the TCP header.
pub mod tcp_flags {
    pub const FIN: u8 = 0x01;
    pub const SYN: u8 = 0x02;
    pub const RST: u8 = 0x04;
    pub const PSH: u8 = 0x08;
    pub const ACK: u8 = 0x10;
}

const MICROS_PER_SEC: f64 = 1_000_000.0;

/// Time since the start of a trace, in whole microseconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(pub u64);

impl Timestamp {
    pub const ZERO: Timestamp = Timestamp(0);

    pub fn from_micros(us: u64) -> Self {
        Timestamp(us)
    }

    /// Rounds to the nearest microsecond. Negative and non-finite inputs are rejected.
    pub fn from_secs_f64(secs: f64) -> Result<Self> {
        if !secs.is_finite() || secs < 0.0 {
            return Err(Error::InvalidArgument(format!("timestamp {secs} must be finite and >= 0")));
        }
        Ok(Timestamp((secs * MICROS_PER_SEC).round() as u64))
    }

    pub fn micros(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / MICROS_PER_SEC
    }

    pub fn saturating_sub(self, other: Timestamp) -> Timestamp {
        Timestamp(self.0.saturating_sub(other.0))
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:06}", self.0 / 1_000_000, self.0 % 1_000_000)
    }
}

/// Converts a positive bin width in seconds to whole microseconds.
pub(crate) fn bin_width_micros(secs: f64) -> Result<u64> {
    if !secs.is_finite() || secs <= 0.0 {
        return Err(Error::InvalidArgument(format!("bin width {secs} must be > 0")));
    }
    let us = (secs * MICROS_PER_SEC).round() as u64;
    if us == 0 {
        return Err(Error::InvalidArgument(format!("bin width {secs} is below 1 us")));
    }
    Ok(us)
}

/// One captured IPv4 packet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PacketRecord {
    pub timestamp: Timestamp,
    /// IP total length in bytes.
    pub size: u16,
    pub src_ip: Ipv4Addr,
    pub dst_ip: Ipv4Addr,
    pub src_port: u16,
    pub dst_port: u16,
    pub protocol: u8,
    pub ttl: u8,
    pub tcp_flags: u8,
}

impl PacketRecord {
    pub fn key(&self) -> FlowKey {
        FlowKey {
            src_ip: self.src_ip,
            dst_ip: self.dst_ip,
            src_port: self.src_port,
            dst_port: self.dst_port,
            protocol: self.protocol,
        }
    }

    pub fn is_tcp(&self) -> bool {
        self.protocol == PROTO_TCP
    }

    pub fn has_flags(&self, mask: u8) -> bool {
        self.tcp_flags & mask == mask
    }
}

/// Directional 5-tuple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FlowKey {
    pub src_ip: Ipv4Addr,
    pub dst_ip: Ipv4Addr,
    pub src_port: u16,
    pub dst_port: u16,
    pub protocol: u8,
}

impl FlowKey {
    pub fn reversed(&self) -> FlowKey {
        FlowKey {
            src_ip: self.dst_ip,
            dst_ip: self.src_ip,
            src_port: self.dst_port,
            dst_port: self.src_port,
            protocol: self.protocol,
        }
    }

    /// Bidirectional form; the lower (ip, port) endpoint is always `a`.
    pub fn canonical(&self) -> BiFlowKey {
        let src = Endpoint { ip: self.src_ip, port: self.src_port };
        let dst = Endpoint { ip: self.dst_ip, port: self.dst_port };
        let (a, b) = if src <= dst { (src, dst) } else { (dst, src) };
        BiFlowKey { a, b, protocol: self.protocol }
    }

    /// True when this key travels from `a` to `b` of its canonical form.
    pub fn is_forward(&self) -> bool {
        let src = Endpoint { ip: self.src_ip, port: self.src_port };
        let dst = Endpoint { ip: self.dst_ip, port: self.dst_port };
        src <= dst
    }
}

impl fmt::Display for FlowKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{} -> {}:{} proto {}",
            self.src_ip, self.src_port, self.dst_ip, self.dst_port, self.protocol
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Endpoint {
    pub ip: Ipv4Addr,
    pub port: u16,
}

/// Canonical bidirectional 5-tuple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BiFlowKey {
    pub a: Endpoint,
    pub b: Endpoint,
    pub protocol: u8,
}

impl BiFlowKey {
    pub fn forward(&self) -> FlowKey {
        FlowKey {
            src_ip: self.a.ip,
            dst_ip: self.b.ip,
            src_port: self.a.port,
            dst_port: self.b.port,
            protocol: self.protocol,
        }
    }
}

impl fmt::Display for BiFlowKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{} <-> {}:{} proto {}",
            self.a.ip, self.a.port, self.b.ip, self.b.port, self.protocol
        )
    }
}

/// An ordered packet trace.
///
/// Packets are sorted by timestamp and `duration` is at least the last
/// timestamp. Both are checked on construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    packets: Vec<PacketRecord>,
    duration: Timestamp,
    /// Wall-clock time of the first packet, seconds since the Unix epoch.
    origin: Option<f64>,
}

impl Trace {
    pub fn new(packets: Vec<PacketRecord>, duration: Timestamp) -> Result<Self> {
        if let Some(i) = packets.windows(2).position(|w| w[1].timestamp < w[0].timestamp) {
            return Err(Error::InvalidArgument(format!(
                "packets not sorted by timestamp at index {}",
                i + 1
            )));
        }
        if let Some(last) = packets.last() {
            if last.timestamp > duration {
                return Err(Error::InvalidArgument(format!(
                    "duration {duration} shorter than last timestamp {}",
                    last.timestamp
                )));
            }
        }
        Ok(Trace { packets, duration, origin: None })
    }

    /// Stably sorts the packets; duration becomes at least the last timestamp.
    pub fn from_unsorted(mut packets: Vec<PacketRecord>, duration: Timestamp) -> Self {
        packets.sort_by_key(|p| p.timestamp);
        let last = packets.last().map(|p| p.timestamp).unwrap_or_default();
        Trace { packets, duration: duration.max(last), origin: None }
    }

    /// A trace whose duration is its last timestamp.
    pub fn from_packets(packets: Vec<PacketRecord>) -> Result<Self> {
        let last = packets.last().map(|p| p.timestamp).unwrap_or_default();
        Trace::new(packets, last)
    }

    pub fn empty(duration: Timestamp) -> Self {
        Trace { packets: Vec::new(), duration, origin: None }
    }

    pub fn with_origin(mut self, origin: Option<f64>) -> Self {
        self.origin = origin;
        self
    }

    /// Extends the duration; it never shrinks below the last timestamp.
    pub fn with_duration(mut self, duration: Timestamp) -> Self {
        let last = self.packets.last().map(|p| p.timestamp).unwrap_or_default();
        self.duration = duration.max(last);
        self
    }

    pub fn packets(&self) -> &[PacketRecord] {
        &self.packets
    }

    pub fn into_packets(self) -> Vec<PacketRecord> {
        self.packets
    }

    pub fn len(&self) -> usize {
        self.packets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    pub fn duration(&self) -> Timestamp {
        self.duration
    }

    pub fn duration_secs(&self) -> f64 {
        self.duration.as_secs_f64()
    }

    pub fn origin(&self) -> Option<f64> {
        self.origin
    }

    pub fn total_bytes(&self) -> u64 {
        self.packets.iter().map(|p| u64::from(p.size)).sum()
    }

    /// Packets with `start <= t < start + length`, rebased to t = 0.
    pub fn slice(&self, start: f64, length: f64) -> Result<Trace> {
        let start = Timestamp::from_secs_f64(start)?;
        if !length.is_finite() || length <= 0.0 {
            return Err(Error::InvalidArgument(format!("slice length {length} must be > 0")));
        }
        let length = Timestamp::from_secs_f64(length)?;
        let end = start.0 + length.0;
        let lo = self.packets.partition_point(|p| p.timestamp.0 < start.0);
        let hi = self.packets.partition_point(|p| p.timestamp.0 < end);
        let packets = self.packets[lo..hi]
            .iter()
            .map(|p| PacketRecord { timestamp: Timestamp(p.timestamp.0 - start.0), ..*p })
            .collect();
        let duration = Timestamp(self.duration.0.min(end).saturating_sub(start.0));
        Ok(Trace {
            packets,
            duration,
            origin: self.origin.map(|o| o + start.as_secs_f64()),
        })
    }
}
