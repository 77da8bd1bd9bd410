//! Flat TOML configuration for the generator.
//!
//! ```toml
//! n_sources = 100
//! on_shape = 1.4
//! off_shape = 1.4
//! mean_on = 0.5
//! mean_off = 0.5
//! rate_model = "pareto"   # or "uniform"
//! rate = 20.0             # uniform rate, or minimum for pareto (pkt/s)
//! rate_shape = 1.2        # pareto only
//! rate_max = 2000.0       # optional cap, pareto only
//! packet_size = 1000
//! seed = 7
//! duration = 300.0
//! bin_width = 0.1
//! ```
//!
//! Every key is optional; missing keys take the [`SourceModel`] defaults and a
//! 300 s duration.

use serde::{Deserialize, Serialize};

use super::{RateModel, SourceModel};
use crate::{Error, Result};

pub const DEFAULT_DURATION: f64 = 300.0;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub n_sources: Option<usize>,
    pub on_shape: Option<f64>,
    pub off_shape: Option<f64>,
    pub mean_on: Option<f64>,
    pub mean_off: Option<f64>,
    pub rate_model: Option<String>,
    pub rate: Option<f64>,
    pub rate_shape: Option<f64>,
    pub rate_max: Option<f64>,
    pub packet_size: Option<u16>,
    pub seed: Option<u64>,
    pub duration: Option<f64>,
    pub bin_width: Option<f64>,
}

impl SynthConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// The model and duration this config describes, validated.
    pub fn resolve(&self) -> Result<(SourceModel, f64)> {
        let d = SourceModel::default();
        let default_rate = match d.rates {
            RateModel::Uniform { pps } => pps,
            RateModel::Pareto { min_pps, .. } => min_pps,
        };
        let rate = self.rate.unwrap_or(default_rate);
        let rates = match self.rate_model.as_deref().unwrap_or("uniform") {
            "uniform" => {
                if self.rate_shape.is_some() || self.rate_max.is_some() {
                    return Err(Error::Config("rate_shape and rate_max need rate_model = \"pareto\"".into()));
                }
                RateModel::Uniform { pps: rate }
            }
            "pareto" => RateModel::Pareto {
                shape: self
                    .rate_shape
                    .ok_or_else(|| Error::Config("rate_model = \"pareto\" needs rate_shape".into()))?,
                min_pps: rate,
                max_pps: self.rate_max,
            },
            other => return Err(Error::Config(format!("unknown rate_model `{other}`"))),
        };
        let model = SourceModel {
            n_sources: self.n_sources.unwrap_or(d.n_sources),
            on_shape: self.on_shape.unwrap_or(d.on_shape),
            off_shape: self.off_shape.unwrap_or(d.off_shape),
            mean_on: self.mean_on.unwrap_or(d.mean_on),
            mean_off: self.mean_off.unwrap_or(d.mean_off),
            rates,
            packet_size: self.packet_size.unwrap_or(d.packet_size),
            seed: self.seed.unwrap_or(d.seed),
            truth_bin_width: self.bin_width.unwrap_or(d.truth_bin_width),
        };
        model.validate()?;
        let duration = self.duration.unwrap_or(DEFAULT_DURATION);
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::InvalidModel(format!("duration {duration} must be > 0")));
        }
        Ok((model, duration))
    }
}
