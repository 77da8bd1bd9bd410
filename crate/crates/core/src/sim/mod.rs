//! Trace-driven single-link FIFO tail-drop simulation.

mod queue;
mod sweep;

pub use queue::{derive_bandwidth, simulate, BufferConvention, LinkRate, SimConfig, SimResult};
pub use sweep::{performance_sweep, Correlation, SweepParams, SweepReport, SweepRow};

pub const DEFAULT_UTILIZATION: f64 = 0.6;
pub const DEFAULT_BUFFER_PACKETS: usize = 50;
