//! Classic libpcap reader/writer (Ethernet link type, IPv4 only).

use std::net::Ipv4Addr;

use super::{PacketRecord, Timestamp, Trace, PROTO_TCP, PROTO_UDP};
use crate::{Error, Result};

const GLOBAL_HEADER_LEN: usize = 24;
const RECORD_HEADER_LEN: usize = 16;
const ETH_HEADER_LEN: usize = 14;
const ETHERTYPE_IPV4: u16 = 0x0800;
const LINKTYPE_ETHERNET: u32 = 1;

const MAGIC_MICROS: u32 = 0xa1b2c3d4;
const MAGIC_NANOS: u32 = 0xa1b23c4d;

/// Frame accounting for one parsed capture.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PcapStats {
    pub accepted: usize,
    pub skipped: usize,
    /// Record bytes (16-byte header plus captured data) of accepted frames.
    pub accepted_bytes: usize,
    pub skipped_bytes: usize,
}

#[derive(Clone, Debug)]
pub struct PcapRead {
    pub trace: Trace,
    pub stats: PcapStats,
}

#[derive(Clone, Copy)]
struct Layout {
    big_endian: bool,
    nanos: bool,
}

impl Layout {
    fn u32_at(&self, b: &[u8], at: usize) -> u32 {
        let raw = [b[at], b[at + 1], b[at + 2], b[at + 3]];
        if self.big_endian {
            u32::from_be_bytes(raw)
        } else {
            u32::from_le_bytes(raw)
        }
    }
}

fn be16(b: &[u8], at: usize) -> u16 {
    u16::from_be_bytes([b[at], b[at + 1]])
}

/// Parses a classic pcap capture.
///
/// Non-IPv4 and malformed frames are skipped and counted. Timestamps are
/// rebased so the earliest packet sits at t = 0 and records are stably sorted.
pub fn read_pcap(bytes: &[u8]) -> Result<PcapRead> {
    if bytes.len() < GLOBAL_HEADER_LEN {
        return Err(Error::PcapFormat(format!(
            "global header needs {GLOBAL_HEADER_LEN} bytes, input has {}",
            bytes.len()
        )));
    }
    let magic = u32::from_le_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]);
    let layout = match magic {
        MAGIC_MICROS => Layout { big_endian: false, nanos: false },
        MAGIC_NANOS => Layout { big_endian: false, nanos: true },
        m if m.swap_bytes() == MAGIC_MICROS => Layout { big_endian: true, nanos: false },
        m if m.swap_bytes() == MAGIC_NANOS => Layout { big_endian: true, nanos: true },
        m => return Err(Error::PcapFormat(format!("unrecognised magic number {m:#010x}"))),
    };
    let linktype = layout.u32_at(bytes, 20) & 0x0fff_ffff;
    if linktype != LINKTYPE_ETHERNET {
        return Err(Error::PcapFormat(format!("unsupported link type {linktype}, expected Ethernet (1)")));
    }

    let mut stats = PcapStats::default();
    // (absolute capture time in us, record)
    let mut raw: Vec<(u64, PacketRecord)> = Vec::new();
    let mut offset = GLOBAL_HEADER_LEN;
    while offset < bytes.len() {
        if bytes.len() - offset < RECORD_HEADER_LEN {
            return Err(Error::PcapTruncated {
                offset,
                detail: format!("record header needs {RECORD_HEADER_LEN} bytes, {} left", bytes.len() - offset),
            });
        }
        let ts_sec = u64::from(layout.u32_at(bytes, offset));
        let ts_frac = u64::from(layout.u32_at(bytes, offset + 4));
        let incl_len = layout.u32_at(bytes, offset + 8) as usize;
        let data_start = offset + RECORD_HEADER_LEN;
        if bytes.len() - data_start < incl_len {
            return Err(Error::PcapTruncated {
                offset,
                detail: format!("record declares {incl_len} captured bytes, {} left", bytes.len() - data_start),
            });
        }
        let frame = &bytes[data_start..data_start + incl_len];
        let record_len = RECORD_HEADER_LEN + incl_len;
        let micros = if layout.nanos { ts_frac / 1_000 } else { ts_frac };
        let abs_us = ts_sec * 1_000_000 + micros;
        match parse_frame(frame) {
            Some(mut rec) => {
                rec.timestamp = Timestamp(abs_us);
                raw.push((abs_us, rec));
                stats.accepted += 1;
                stats.accepted_bytes += record_len;
            }
            None => {
                stats.skipped += 1;
                stats.skipped_bytes += record_len;
            }
        }
        offset = data_start + incl_len;
    }

    raw.sort_by_key(|(t, _)| *t);
    let first = raw.first().map(|(t, _)| *t);
    let packets: Vec<PacketRecord> = raw
        .into_iter()
        .map(|(t, rec)| PacketRecord { timestamp: Timestamp(t - first.unwrap_or(0)), ..rec })
        .collect();
    let trace = Trace::from_packets(packets)?.with_origin(first.map(|t| t as f64 / 1e6));
    Ok(PcapRead { trace, stats })
}

/// Extracts an IPv4 record from an Ethernet frame; `None` for anything else.
fn parse_frame(frame: &[u8]) -> Option<PacketRecord> {
    if frame.len() < ETH_HEADER_LEN || be16(frame, 12) != ETHERTYPE_IPV4 {
        return None;
    }
    let ip = &frame[ETH_HEADER_LEN..];
    if ip.len() < 20 || ip[0] >> 4 != 4 {
        return None;
    }
    let ihl = usize::from(ip[0] & 0x0f) * 4;
    let total_len = be16(ip, 2);
    if ihl < 20 || total_len < 20 {
        return None;
    }
    let fragment_offset = be16(ip, 6) & 0x1fff;
    let ttl = ip[8];
    let protocol = ip[9];
    let src_ip = Ipv4Addr::new(ip[12], ip[13], ip[14], ip[15]);
    let dst_ip = Ipv4Addr::new(ip[16], ip[17], ip[18], ip[19]);

    let (mut src_port, mut dst_port, mut tcp_flags) = (0, 0, 0);
    // non-first fragments carry no transport header
    if fragment_offset == 0 && (protocol == PROTO_TCP || protocol == PROTO_UDP) {
        let l4 = ip.get(ihl..).unwrap_or(&[]);
        if l4.len() >= 4 {
            src_port = be16(l4, 0);
            dst_port = be16(l4, 2);
        }
        if protocol == PROTO_TCP && l4.len() >= 14 {
            tcp_flags = l4[13];
        }
    }

    Some(PacketRecord {
        timestamp: Timestamp::ZERO,
        size: total_len,
        src_ip,
        dst_ip,
        src_port,
        dst_port,
        protocol,
        ttl,
        tcp_flags,
    })
}

/// Writes a little-endian microsecond pcap with headers-only captures.
///
/// Each frame carries Ethernet, IPv4 and (when present) the TCP or UDP
/// header; the original length reflects the full IP datagram.
pub fn write_pcap(trace: &Trace) -> Vec<u8> {
    let mut out = Vec::with_capacity(GLOBAL_HEADER_LEN + trace.len() * 90);
    out.extend_from_slice(&MAGIC_MICROS.to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&4u16.to_le_bytes());
    out.extend_from_slice(&0i32.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&65535u32.to_le_bytes());
    out.extend_from_slice(&LINKTYPE_ETHERNET.to_le_bytes());

    let origin_us = trace.origin().map(|o| (o * 1e6).round() as u64).unwrap_or(0);
    for p in trace.packets() {
        let frame = build_frame(p);
        let abs = origin_us + p.timestamp.0;
        out.extend_from_slice(&((abs / 1_000_000) as u32).to_le_bytes());
        out.extend_from_slice(&((abs % 1_000_000) as u32).to_le_bytes());
        out.extend_from_slice(&(frame.len() as u32).to_le_bytes());
        out.extend_from_slice(&(ETH_HEADER_LEN as u32 + u32::from(p.size)).to_le_bytes());
        out.extend_from_slice(&frame);
    }
    out
}

fn build_frame(p: &PacketRecord) -> Vec<u8> {
    let mut f = Vec::with_capacity(ETH_HEADER_LEN + 40);
    f.extend_from_slice(&[0x02, 0, 0, 0, 0, 0x02, 0x02, 0, 0, 0, 0, 0x01]);
    f.extend_from_slice(&ETHERTYPE_IPV4.to_be_bytes());

    let mut ip = [0u8; 20];
    ip[0] = 0x45;
    ip[2..4].copy_from_slice(&p.size.to_be_bytes());
    ip[6] = 0x40; // DF
    ip[8] = p.ttl;
    ip[9] = p.protocol;
    ip[12..16].copy_from_slice(&p.src_ip.octets());
    ip[16..20].copy_from_slice(&p.dst_ip.octets());
    let csum = ipv4_checksum(&ip);
    ip[10..12].copy_from_slice(&csum.to_be_bytes());
    f.extend_from_slice(&ip);

    let l4: Vec<u8> = match p.protocol {
        PROTO_TCP => {
            let mut h = vec![0u8; 20];
            h[0..2].copy_from_slice(&p.src_port.to_be_bytes());
            h[2..4].copy_from_slice(&p.dst_port.to_be_bytes());
            h[12] = 5 << 4;
            h[13] = p.tcp_flags;
            h[14..16].copy_from_slice(&65535u16.to_be_bytes());
            h
        }
        PROTO_UDP => {
            let mut h = vec![0u8; 8];
            h[0..2].copy_from_slice(&p.src_port.to_be_bytes());
            h[2..4].copy_from_slice(&p.dst_port.to_be_bytes());
            h[4..6].copy_from_slice(&p.size.saturating_sub(20).to_be_bytes());
            h
        }
        _ => Vec::new(),
    };
    let room = usize::from(p.size).saturating_sub(20);
    f.extend_from_slice(&l4[..l4.len().min(room)]);
    f
}

fn ipv4_checksum(header: &[u8]) -> u16 {
    let mut sum: u32 = header.chunks(2).map(|c| u32::from(u16::from_be_bytes([c[0], c[1]]))).sum();
    while sum >> 16 != 0 {
        sum = (sum & 0xffff) + (sum >> 16);
    }
    !(sum as u16)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::tcp_flags::SYN;

    fn global_header_le() -> Vec<u8> {
        let mut g = Vec::new();
        g.extend_from_slice(&[0xd4, 0xc3, 0xb2, 0xa1]);
        g.extend_from_slice(&[2, 0, 4, 0]);
        g.extend_from_slice(&[0; 8]);
        g.extend_from_slice(&[0xff, 0xff, 0, 0]);
        g.extend_from_slice(&[1, 0, 0, 0]);
        g
    }

    fn record_le(sec: u32, usec: u32, frame: &[u8], orig: u32) -> Vec<u8> {
        let mut r = Vec::new();
        r.extend_from_slice(&sec.to_le_bytes());
        r.extend_from_slice(&usec.to_le_bytes());
        r.extend_from_slice(&(frame.len() as u32).to_le_bytes());
        r.extend_from_slice(&orig.to_le_bytes());
        r.extend_from_slice(frame);
        r
    }

    fn arp_frame() -> Vec<u8> {
        let mut f = vec![0xff; 6];
        f.extend_from_slice(&[0x02, 0, 0, 0, 0, 1]);
        f.extend_from_slice(&[0x08, 0x06]);
        f.extend_from_slice(&[0u8; 28]);
        f
    }

    fn tcp_record(t: u64, size: u16) -> PacketRecord {
        PacketRecord {
            timestamp: Timestamp(t),
            size,
            src_ip: Ipv4Addr::new(10, 0, 0, 1),
            dst_ip: Ipv4Addr::new(10, 0, 0, 2),
            src_port: 1234,
            dst_port: 80,
            protocol: PROTO_TCP,
            ttl: 64,
            tcp_flags: SYN,
        }
    }

    #[test]
    fn rejects_bad_magic_and_short_header() {
        assert!(matches!(read_pcap(&[0u8; 10]), Err(Error::PcapFormat(_))));
        let mut g = global_header_le();
        g[0] = 0;
        assert!(matches!(read_pcap(&g), Err(Error::PcapFormat(_))));
    }

    #[test]
    fn rejects_non_ethernet_linktype() {
        let mut g = global_header_le();
        g[20] = 101;
        assert!(matches!(read_pcap(&g), Err(Error::PcapFormat(_))));
    }

    #[test]
    fn truncated_record_reports_offset() {
        let mut bytes = global_header_le();
        bytes.extend_from_slice(&record_le(1, 0, &arp_frame(), 42));
        let second = bytes.len();
        let rec = record_le(2, 0, &arp_frame(), 42);
        bytes.extend_from_slice(&rec[..rec.len() - 5]);
        match read_pcap(&bytes) {
            Err(Error::PcapTruncated { offset, .. }) => assert_eq!(offset, second),
            other => panic!("expected truncation error, got {other:?}"),
        }
        bytes.truncate(second + 7);
        assert!(matches!(read_pcap(&bytes), Err(Error::PcapTruncated { offset, .. }) if offset == second));
    }

    #[test]
    fn skips_arp_and_counts_bytes() {
        let trace = Trace::from_packets(vec![tcp_record(0, 40), tcp_record(500, 60)]).unwrap();
        let mut bytes = write_pcap(&trace);
        bytes.extend_from_slice(&record_le(0, 100, &arp_frame(), 42));
        let read = read_pcap(&bytes).unwrap();
        assert_eq!(read.trace.len(), 2);
        assert_eq!(read.stats.skipped, 1);
        assert_eq!(read.stats.accepted, 2);
        assert_eq!(read.stats.accepted_bytes + read.stats.skipped_bytes, bytes.len() - GLOBAL_HEADER_LEN);
    }

    #[test]
    fn big_endian_and_nanosecond_magic() {
        let trace = Trace::from_packets(vec![tcp_record(0, 40), tcp_record(1_500, 52)]).unwrap();
        let le = write_pcap(&trace);
        // rewrite as big-endian nanosecond capture
        let mut be = Vec::new();
        be.extend_from_slice(&MAGIC_NANOS.to_be_bytes());
        be.extend_from_slice(&2u16.to_be_bytes());
        be.extend_from_slice(&4u16.to_be_bytes());
        be.extend_from_slice(&[0; 8]);
        be.extend_from_slice(&65535u32.to_be_bytes());
        be.extend_from_slice(&1u32.to_be_bytes());
        let mut off = GLOBAL_HEADER_LEN;
        while off < le.len() {
            let word = |i: usize| u32::from_le_bytes(le[off + i..off + i + 4].try_into().unwrap());
            let incl = word(8) as usize;
            be.extend_from_slice(&word(0).to_be_bytes());
            be.extend_from_slice(&(word(4) * 1000 + 7).to_be_bytes());
            be.extend_from_slice(&word(8).to_be_bytes());
            be.extend_from_slice(&word(12).to_be_bytes());
            be.extend_from_slice(&le[off + 16..off + 16 + incl]);
            off += 16 + incl;
        }
        let read = read_pcap(&be).unwrap();
        assert_eq!(read.trace.packets(), trace.packets());
    }

    #[test]
    fn out_of_order_records_are_sorted() {
        let mut ip_a = tcp_record(0, 40);
        ip_a.ttl = 1;
        let mut ip_b = tcp_record(0, 40);
        ip_b.ttl = 2;
        let one = write_pcap(&Trace::from_packets(vec![ip_a]).unwrap());
        let two = write_pcap(&Trace::from_packets(vec![ip_b]).unwrap());
        let mut bytes = global_header_le();
        // ttl=1 packet at 2.0 s, ttl=2 packet at 1.0 s
        let mut r1 = one[GLOBAL_HEADER_LEN..].to_vec();
        r1[0..4].copy_from_slice(&2u32.to_le_bytes());
        let mut r2 = two[GLOBAL_HEADER_LEN..].to_vec();
        r2[0..4].copy_from_slice(&1u32.to_le_bytes());
        bytes.extend_from_slice(&r1);
        bytes.extend_from_slice(&r2);
        let read = read_pcap(&bytes).unwrap();
        let ttls: Vec<u8> = read.trace.packets().iter().map(|p| p.ttl).collect();
        assert_eq!(ttls, vec![2, 1]);
        assert_eq!(read.trace.packets()[1].timestamp, Timestamp(1_000_000));
        assert_eq!(read.trace.origin(), Some(1.0));
    }

    #[test]
    fn fragments_lose_ports() {
        let mut frame = build_frame(&tcp_record(0, 1500));
        // fragment offset 185 (x8 bytes)
        frame[ETH_HEADER_LEN + 6] = 0x00;
        frame[ETH_HEADER_LEN + 7] = 185;
        let rec = parse_frame(&frame).unwrap();
        assert_eq!((rec.src_port, rec.dst_port, rec.tcp_flags), (0, 0, 0));
        assert_eq!(rec.protocol, PROTO_TCP);
    }

    #[test]
    fn checksum_verifies() {
        let frame = build_frame(&tcp_record(0, 40));
        assert_eq!(ipv4_checksum(&frame[ETH_HEADER_LEN..ETH_HEADER_LEN + 20]), 0);
    }
}
