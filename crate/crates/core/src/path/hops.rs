//! Hop counts between endpoints from the TTLs of both directions.
//!
//! Each direction contributes `initial - observed` routers between its
//! sender and the observation point; the path length is the sum of both
//! plus one.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};

use super::ttl::{infer_initial_ttl, ttl_decrement};
use crate::export::write_table;
use crate::flows::{classify_greedy, PerTimeUnitFlow};
use crate::trace::{BiFlowKey, Trace};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HopEstimate {
    pub bikey: BiFlowKey,
    pub hops: u32,
    /// Decrement seen on packets sent by endpoint `a`.
    pub dec_a: u8,
    pub dec_b: u8,
    /// Set when a sender shows more than one distance to the observation
    /// point, or when one direction's TTLs map to different initial values.
    pub ambiguous: bool,
}

#[derive(Default)]
struct DirectionTally {
    ttls: BTreeMap<u8, u64>,
}

impl DirectionTally {
    /// Most frequent TTL; ties go to the smaller TTL.
    fn modal(&self) -> Option<u8> {
        let best = self.ttls.values().copied().max()?;
        self.ttls.iter().find(|(_, &n)| n == best).map(|(&t, _)| t)
    }

    fn straddles(&self) -> bool {
        let inits: BTreeSet<u8> = self.ttls.keys().filter_map(|&t| infer_initial_ttl(t).ok()).collect();
        inits.len() > 1
    }
}

/// Hop estimates for every bidirectional key seen in both directions, sorted by key.
///
/// Packets with TTL 0 are ignored. A trace without any two-way key is an error.
pub fn estimate_hops(trace: &Trace) -> Result<Vec<HopEstimate>> {
    let mut tallies: HashMap<BiFlowKey, [DirectionTally; 2]> = HashMap::new();
    for p in trace.packets().iter().filter(|p| p.ttl > 0) {
        let key = p.key();
        let dir = usize::from(!key.is_forward());
        let entry = tallies.entry(key.canonical()).or_default();
        *entry[dir].ttls.entry(p.ttl).or_default() += 1;
    }

    // per sender, the distinct distances it shows across all of its keys
    let mut distances: HashMap<Ipv4Addr, BTreeSet<u8>> = HashMap::new();
    let mut modal: BTreeMap<BiFlowKey, [Option<u8>; 2]> = BTreeMap::new();
    for (key, dirs) in &tallies {
        let m = [dirs[0].modal(), dirs[1].modal()];
        for (sender, ttl) in [(key.a.ip, m[0]), (key.b.ip, m[1])] {
            if let Some(ttl) = ttl {
                distances.entry(sender).or_default().insert(ttl_decrement(ttl)?);
            }
        }
        modal.insert(*key, m);
    }

    let mut out = Vec::new();
    for (key, m) in modal {
        let (Some(ttl_a), Some(ttl_b)) = (m[0], m[1]) else { continue };
        let dec_a = ttl_decrement(ttl_a)?;
        let dec_b = ttl_decrement(ttl_b)?;
        let dirs = &tallies[&key];
        let ambiguous = dirs[0].straddles()
            || dirs[1].straddles()
            || distances[&key.a.ip].len() > 1
            || distances[&key.b.ip].len() > 1;
        out.push(HopEstimate {
            bikey: key,
            hops: u32::from(dec_a) + u32::from(dec_b) + 1,
            dec_a,
            dec_b,
            ambiguous,
        });
    }
    if out.is_empty() {
        return Err(Error::InsufficientData("no key carries traffic in both directions".into()));
    }
    Ok(out)
}

/// Hop values attached to per-time-unit flows, one sample per flow occurrence.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FlowHops {
    pub all: Vec<f64>,
    pub greedy: Vec<f64>,
}

/// Looks up each flow's bidirectional key; ambiguous and one-way keys are skipped.
pub fn flow_hops(flows: &[PerTimeUnitFlow], estimates: &[HopEstimate], threshold: u64) -> FlowHops {
    let by_key: HashMap<BiFlowKey, u32> = estimates
        .iter()
        .filter(|e| !e.ambiguous)
        .map(|e| (e.bikey, e.hops))
        .collect();
    let mut out = FlowHops::default();
    for f in flows {
        if let Some(&h) = by_key.get(&f.key.canonical()) {
            out.all.push(f64::from(h));
            if classify_greedy(f, threshold) {
                out.greedy.push(f64::from(h));
            }
        }
    }
    out
}

/// `hops,count` table from raw hop samples.
pub fn write_hop_histogram_csv<W: Write>(samples: &[f64], out: W) -> Result<()> {
    let mut tally: BTreeMap<u32, u64> = BTreeMap::new();
    for &h in samples {
        *tally.entry(h as u32).or_default() += 1;
    }
    write_table(out, &["hops", "count"], tally.into_iter().map(|(h, c)| [h.to_string(), c.to_string()]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{PacketRecord, Timestamp, PROTO_TCP};

    fn p(t: u64, src: [u8; 4], dst: [u8; 4], sport: u16, dport: u16, ttl: u8) -> PacketRecord {
        PacketRecord {
            timestamp: Timestamp(t),
            size: 40,
            src_ip: src.into(),
            dst_ip: dst.into(),
            src_port: sport,
            dst_port: dport,
            protocol: PROTO_TCP,
            ttl,
            tcp_flags: 0,
        }
    }

    const C: [u8; 4] = [10, 0, 0, 1];
    const S: [u8; 4] = [192, 168, 0, 1];

    #[test]
    fn client_server_example() {
        let t = Trace::from_packets(vec![
            p(0, C, S, 4000, 80, 125),
            p(1, S, C, 80, 4000, 62),
            p(2, C, S, 4000, 80, 125),
        ])
        .unwrap();
        let est = estimate_hops(&t).unwrap();
        assert_eq!(est.len(), 1);
        let e = est[0];
        assert_eq!(e.hops, 6);
        assert_eq!(e.hops, u32::from(e.dec_a) + u32::from(e.dec_b) + 1);
        // a is the lower endpoint, 10.0.0.1
        assert_eq!((e.dec_a, e.dec_b), (3, 2));
        assert!(!e.ambiguous);
    }

    #[test]
    fn adjacent_endpoints() {
        let t = Trace::from_packets(vec![p(0, C, S, 1, 2, 64), p(1, S, C, 2, 1, 64)]).unwrap();
        assert_eq!(estimate_hops(&t).unwrap()[0].hops, 1);
    }

    #[test]
    fn one_way_keys_omitted() {
        let t = Trace::from_packets(vec![
            p(0, C, S, 1, 2, 64),
            p(1, C, S, 3, 4, 60),
            p(2, S, C, 4, 3, 50),
        ])
        .unwrap();
        let est = estimate_hops(&t).unwrap();
        assert_eq!(est.len(), 1);
        assert_eq!(est[0].bikey.a.port, 3);

        let one_way = Trace::from_packets(vec![p(0, C, S, 1, 2, 64)]).unwrap();
        assert!(estimate_hops(&one_way).is_err());
    }

    #[test]
    fn modal_ttl_with_smaller_tie_break() {
        let t = Trace::from_packets(vec![
            p(0, C, S, 1, 2, 120),
            p(1, C, S, 1, 2, 120),
            p(2, C, S, 1, 2, 100),
            p(3, S, C, 2, 1, 60),
            p(4, S, C, 2, 1, 61),
        ])
        .unwrap();
        let e = estimate_hops(&t).unwrap()[0];
        assert_eq!(e.dec_a, 8);
        assert_eq!(e.dec_b, 4);
        assert!(!e.ambiguous);
    }

    #[test]
    fn inconsistent_source_is_ambiguous() {
        let other: [u8; 4] = [192, 168, 0, 2];
        let t = Trace::from_packets(vec![
            p(0, C, S, 1, 80, 120),
            p(1, S, C, 80, 1, 60),
            p(2, C, other, 2, 80, 110),
            p(3, other, C, 80, 2, 60),
        ])
        .unwrap();
        let est = estimate_hops(&t).unwrap();
        assert_eq!(est.len(), 2);
        assert!(est.iter().all(|e| e.ambiguous));
    }

    #[test]
    fn straddling_initials_are_ambiguous() {
        let t = Trace::from_packets(vec![
            p(0, C, S, 1, 2, 33),
            p(1, C, S, 1, 2, 33),
            p(2, C, S, 1, 2, 32),
            p(3, S, C, 2, 1, 60),
        ])
        .unwrap();
        assert!(estimate_hops(&t).unwrap()[0].ambiguous);
    }

    #[test]
    fn order_free() {
        let mut packets = vec![
            p(0, C, S, 1, 2, 120),
            p(0, C, S, 1, 2, 121),
            p(0, S, C, 2, 1, 60),
            p(0, C, S, 1, 2, 121),
            p(0, C, S, 1, 2, 120),
        ];
        let a = estimate_hops(&Trace::from_packets(packets.clone()).unwrap()).unwrap();
        packets.reverse();
        let b = estimate_hops(&Trace::from_packets(packets).unwrap()).unwrap();
        assert_eq!(a, b);
        // 120 and 121 tie; the smaller TTL wins
        assert_eq!(a[0].dec_a, 8);
    }

    #[test]
    fn flow_hops_weights_by_occurrence() {
        let t = Trace::from_packets(vec![p(0, C, S, 1, 2, 125), p(1, S, C, 2, 1, 62)]).unwrap();
        let est = estimate_hops(&t).unwrap();
        let flow = |n| PerTimeUnitFlow { key: t.packets()[1].key(), bin_index: 0, packet_count: n, byte_count: 0 };
        let fh = flow_hops(&[flow(3), flow(30), flow(25)], &est, 20);
        assert_eq!(fh.all, vec![6.0; 3]);
        assert_eq!(fh.greedy, vec![6.0; 2]);
    }
}
