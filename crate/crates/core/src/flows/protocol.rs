use serde::{Deserialize, Serialize};

use super::{classify_greedy, PerTimeUnitFlow};
use crate::trace::{PROTO_TCP, PROTO_UDP};
use crate::{Error, Result};

/// Share of flows per IP protocol class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolMix {
    pub tcp: f64,
    pub udp: f64,
    pub other: f64,
    pub flows: usize,
}

/// Shares of flows (not packets) by protocol, optionally restricted to greedy flows.
pub fn protocol_mix(flows: &[PerTimeUnitFlow], greedy_only: bool, threshold: u64) -> Result<ProtocolMix> {
    let (mut tcp, mut udp, mut other) = (0usize, 0usize, 0usize);
    for f in flows.iter().filter(|f| !greedy_only || classify_greedy(f, threshold)) {
        match f.key.protocol {
            PROTO_TCP => tcp += 1,
            PROTO_UDP => udp += 1,
            _ => other += 1,
        }
    }
    let total = tcp + udp + other;
    if total == 0 {
        return Err(Error::InsufficientData(if greedy_only {
            format!("no greedy flows above {threshold} packets")
        } else {
            "no flows".into()
        }));
    }
    let share = |k: usize| k as f64 / total as f64;
    Ok(ProtocolMix { tcp: share(tcp), udp: share(udp), other: share(other), flows: total })
}
