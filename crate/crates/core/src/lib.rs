//! Packet-trace analysis toolkit.
//!
//! The crate covers the whole measurement pipeline for studying the
//! marginal distribution of aggregated traffic:
//!
//! * [`trace`]: packet records, pcap and canonical CSV I/O.
//! * [`stats`]: throughput series, skewness, periodogram Hurst estimation,
//!   regression and histograms.
//! * [`flows`]: per-time-unit flows, greedy classification, LLCD tail fits
//!   and protocol breakdowns.
//! * [`path`]: TTL based hop-count inference and handshake RTT estimation.
//! * [`sim`]: trace-driven FIFO tail-drop queue simulation.
//! * [`synth`]: ON/OFF synthetic traces with recorded ground truth.
//! * [`analysis`]: composition of the above into a single report.

pub mod analysis;
pub mod error;
pub mod export;
pub mod flows;
pub mod path;
pub mod sim;
pub mod stats;
pub mod synth;
pub mod trace;

pub use error::{Error, Result};
pub use trace::{FlowKey, PacketRecord, Timestamp, Trace};
