//! Path length and round-trip time inferred from passively observed packets.

mod hops;
mod rtt;
mod ttl;

pub use hops::{estimate_hops, flow_hops, write_hop_histogram_csv, FlowHops, HopEstimate};
pub use rtt::{estimate_rtts, hops_vs_rtt, HandshakeRecord, HopRttGroup, HopsVsRtt};
pub use ttl::{infer_initial_ttl, ttl_decrement, INITIAL_TTLS};

/// Groups holding at most this share of flows are left out of the hops/RTT fit.
pub const DEFAULT_MIN_SHARE: f64 = 0.01;
