//! Full single-trace analysis and its report.

use serde::{Deserialize, Serialize};

use crate::flows::{
    eccdf, extract_flows, fit_tail, flows_per_bin, protocol_mix, bin_count, write_llcd_csv, EccdfPoint, KeyMode,
    PerTimeUnitFlow, ProtocolMix, DEFAULT_GREEDY_THRESHOLD, DEFAULT_TAIL_MIN,
};
use crate::path::{estimate_hops, flow_hops, hops_vs_rtt, write_hop_histogram_csv, HopsVsRtt, DEFAULT_MIN_SHARE};
use crate::sim::{BufferConvention, DEFAULT_BUFFER_PACKETS, DEFAULT_UTILIZATION};
use crate::stats::{
    fit_spectrum, histogram, periodogram, throughput_series, write_spectrum_csv, RegressionFit, SpectrumPoint,
    ThroughputSeries, DEFAULT_BIN_WIDTH, DEFAULT_LOW_FREQ_FRACTION,
};
use crate::trace::Trace;
use crate::Result;

pub const FORMAT_VERSION: u32 = 1;

/// Bins in the throughput marginal histogram.
const MARGINAL_BINS: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisParams {
    pub tau: f64,
    pub greedy_threshold: u64,
    pub tail_min: u64,
    pub low_freq_fraction: f64,
    pub key_mode: KeyMode,
    pub min_share: f64,
    /// Used by the simulate and sweep commands.
    pub rho: f64,
    pub buffer_packets: usize,
    pub convention: BufferConvention,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        AnalysisParams {
            tau: DEFAULT_BIN_WIDTH,
            greedy_threshold: DEFAULT_GREEDY_THRESHOLD,
            tail_min: DEFAULT_TAIL_MIN,
            low_freq_fraction: DEFAULT_LOW_FREQ_FRACTION,
            key_mode: KeyMode::Directional,
            min_share: DEFAULT_MIN_SHARE,
            rho: DEFAULT_UTILIZATION,
            buffer_packets: DEFAULT_BUFFER_PACKETS,
            convention: BufferConvention::System,
        }
    }
}

/// A statistic, or the reason it could not be produced for this trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Section<T> {
    Available(T),
    Unavailable { reason: String },
}

impl<T> Section<T> {
    fn from_result(r: Result<T>) -> Self {
        match r {
            Ok(v) => Section::Available(v),
            Err(e) => Section::Unavailable { reason: e.to_string() },
        }
    }

    pub fn value(&self) -> Option<&T> {
        match self {
            Section::Available(v) => Some(v),
            Section::Unavailable { .. } => None,
        }
    }

    pub fn is_available(&self) -> bool {
        matches!(self, Section::Available(_))
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            Section::Available(_) => None,
            Section::Unavailable { reason } => Some(reason),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub packets: usize,
    pub bytes: u64,
    pub duration_s: f64,
    /// Epoch seconds of the first packet, when known.
    pub origin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThroughputSummary {
    pub bins: usize,
    pub mean_bps: f64,
    pub stddev_bps: f64,
    pub skewness: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HurstSummary {
    pub h: f64,
    pub h_clamped: f64,
    pub spectral_slope: f64,
    pub regression_r: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSummary {
    pub bins: usize,
    pub flows: usize,
    pub mean_flows_per_bin: f64,
    pub greedy_flows: usize,
    /// Greedy flows over all per-time-unit flows.
    pub greedy_share: f64,
    /// Share of bytes in per-time-unit flows carried by greedy ones.
    pub greedy_byte_share: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailSummary {
    pub alpha: f64,
    pub regression_r: f64,
    pub n_min: u64,
    pub points: usize,
    pub heavy_tailed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSummary {
    pub all: Section<ProtocolMix>,
    pub greedy: Section<ProtocolMix>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopSummary {
    pub connections: usize,
    pub ambiguous: usize,
    /// Per-time-unit flows with a hop estimate.
    pub flow_samples: usize,
    pub mean_hops_all: Option<f64>,
    pub mean_hops_greedy: Option<f64>,
    pub min_hops: Option<u32>,
    pub max_hops: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RttSummary {
    pub groups: usize,
    pub fitted_groups: usize,
    pub fit: RegressionFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub format_version: u32,
    pub trace_id: String,
    pub params: AnalysisParams,
    pub trace: TraceSummary,
    pub throughput: ThroughputSummary,
    pub hurst: HurstSummary,
    pub flows: FlowSummary,
    pub tail: Section<TailSummary>,
    pub protocol: ProtocolSummary,
    pub hops: Section<HopSummary>,
    pub rtt_vs_hops: Section<RttSummary>,
}

/// The report plus the data behind each CSV artifact.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub report: AnalysisReport,
    pub series: ThroughputSeries,
    pub spectrum: Vec<SpectrumPoint>,
    pub flows: Vec<PerTimeUnitFlow>,
    pub flows_per_bin: Vec<usize>,
    pub eccdf: Vec<EccdfPoint>,
    pub hop_samples_all: Vec<f64>,
    pub hop_samples_greedy: Vec<f64>,
    pub hops_vs_rtt: Option<HopsVsRtt>,
}

fn mean_of(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Runs every analysis on one trace.
///
/// Throughput, skewness, Hurst and flow extraction must succeed. The tail
/// fit, protocol shares and path metrics are reported as unavailable when
/// the trace cannot support them, for instance one-way captures.
pub fn analyze(trace_id: &str, trace: &Trace, params: &AnalysisParams) -> Result<Analysis> {
    let series = throughput_series(trace, params.tau)?;
    let skewness = series.skewness()?;
    let spectrum = periodogram(&series)?;
    let hurst = fit_spectrum(&spectrum, params.low_freq_fraction)?;

    let flows = extract_flows(trace, params.tau, params.key_mode)?;
    let bins = bin_count(trace, params.tau)?;
    let per_bin = flows_per_bin(&flows, bins);
    let greedy: Vec<&PerTimeUnitFlow> = flows.iter().filter(|f| f.is_greedy(params.greedy_threshold)).collect();
    let flow_bytes: u64 = flows.iter().map(|f| f.byte_count).sum();
    let greedy_bytes: u64 = greedy.iter().map(|f| f.byte_count).sum();
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
    let flow_summary = FlowSummary {
        bins,
        flows: flows.len(),
        mean_flows_per_bin: ratio(flows.len() as f64, bins as f64),
        greedy_flows: greedy.len(),
        greedy_share: ratio(greedy.len() as f64, flows.len() as f64),
        greedy_byte_share: ratio(greedy_bytes as f64, flow_bytes as f64),
    };

    let counts: Vec<u64> = flows.iter().map(|f| f.packet_count).collect();
    let points = eccdf(&counts);
    let tail = Section::from_result(fit_tail(&points, params.tail_min).map(|fit| TailSummary {
        alpha: fit.alpha,
        regression_r: fit.regression_r,
        n_min: fit.n_min,
        points: fit.points.len(),
        heavy_tailed: fit.is_heavy_tailed(),
    }));

    let protocol = ProtocolSummary {
        all: Section::from_result(protocol_mix(&flows, false, params.greedy_threshold)),
        greedy: Section::from_result(protocol_mix(&flows, true, params.greedy_threshold)),
    };

    let (hops, hop_samples) = match estimate_hops(trace) {
        Ok(estimates) => {
            let samples = flow_hops(&flows, &estimates, params.greedy_threshold);
            let clear: Vec<u32> = estimates.iter().filter(|e| !e.ambiguous).map(|e| e.hops).collect();
            let summary = HopSummary {
                connections: estimates.len(),
                ambiguous: estimates.len() - clear.len(),
                flow_samples: samples.all.len(),
                mean_hops_all: mean_of(&samples.all),
                mean_hops_greedy: mean_of(&samples.greedy),
                min_hops: clear.iter().copied().min(),
                max_hops: clear.iter().copied().max(),
            };
            (Section::Available(summary), samples)
        }
        Err(e) => (Section::Unavailable { reason: e.to_string() }, Default::default()),
    };
    let rtt = match &hops {
        Section::Available(_) => hops_vs_rtt(trace, params.min_share).map_err(|e| e.to_string()),
        Section::Unavailable { reason } => Err(reason.clone()),
    };
    let rtt_summary = match &rtt {
        Ok(r) => Section::Available(RttSummary {
            groups: r.groups.len(),
            fitted_groups: r.groups.iter().filter(|g| g.fitted).count(),
            fit: r.fit,
        }),
        Err(reason) => Section::Unavailable { reason: reason.clone() },
    };

    let report = AnalysisReport {
        format_version: FORMAT_VERSION,
        trace_id: trace_id.to_string(),
        params: *params,
        trace: TraceSummary {
            packets: trace.len(),
            bytes: trace.total_bytes(),
            duration_s: trace.duration_secs(),
            origin: trace.origin(),
        },
        throughput: ThroughputSummary {
            bins: series.len(),
            mean_bps: series.mean,
            stddev_bps: series.stddev,
            skewness,
        },
        hurst: HurstSummary {
            h: hurst.h,
            h_clamped: hurst.clamped_h(),
            spectral_slope: hurst.spectral_slope,
            regression_r: hurst.regression_r,
            points: hurst.n_points,
        },
        flows: flow_summary,
        tail,
        protocol,
        hops,
        rtt_vs_hops: rtt_summary,
    };
    Ok(Analysis {
        report,
        series,
        spectrum,
        flows_per_bin: per_bin,
        flows,
        eccdf: points,
        hop_samples_all: hop_samples.all,
        hop_samples_greedy: hop_samples.greedy,
        hops_vs_rtt: rtt.ok(),
    })
}

impl Analysis {
    /// CSV artifacts as `(file name, contents)`, rendered in memory.
    pub fn artifacts(&self) -> Result<Vec<(&'static str, String)>> {
        fn render(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<String> {
            let mut buf = Vec::new();
            f(&mut buf)?;
            Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
        }
        let mut out = vec![
            ("throughput.csv", render(|b| self.series.write_csv(b))?),
            ("marginal.csv", render(|b| self.marginal_histogram()?.write_csv(b, "bps"))?),
            ("spectrum.csv", render(|b| write_spectrum_csv(&self.spectrum, b))?),
            (
                "flows_per_bin.csv",
                render(|b| {
                    crate::export::write_table(
                        b,
                        &["bin", "flows"],
                        self.flows_per_bin.iter().enumerate().map(|(i, n)| [i.to_string(), n.to_string()]),
                    )
                })?,
            ),
            ("llcd.csv", render(|b| write_llcd_csv(&self.eccdf, b))?),
        ];
        if self.report.hops.is_available() {
            out.push(("hops_all.csv", render(|b| write_hop_histogram_csv(&self.hop_samples_all, b))?));
            out.push(("hops_greedy.csv", render(|b| write_hop_histogram_csv(&self.hop_samples_greedy, b))?));
        }
        if let Some(r) = &self.hops_vs_rtt {
            out.push(("hops_rtt.csv", render(|b| r.write_csv(b))?));
        }
        Ok(out)
    }

    /// Throughput histogram with about fifty bins across the observed range.
    pub fn marginal_histogram(&self) -> Result<crate::stats::Histogram> {
        let v = &self.series.values;
        let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
        let width = if hi > lo { (hi - lo) / MARGINAL_BINS } else { 1.0 };
        histogram(v, width)
    }
}
