//! Command implementations behind the `tracekit` binary.
//!
//! Every command computes its complete output in memory and returns it as an
//! [`Output`]; nothing touches the filesystem until [`Output::commit`]. A
//! failing command therefore never leaves partial files behind.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;
use tracekit::analysis::{analyze, AnalysisParams, AnalysisReport, FORMAT_VERSION};
use tracekit::sim::{
    derive_bandwidth, performance_sweep, simulate, BufferConvention, SimConfig, SimResult, SweepParams, SweepRow,
};
use tracekit::synth::{generate, SynthConfig};
use tracekit::trace::{read_csv, read_pcap, write_csv, write_pcap};
use tracekit::Trace;

#[derive(Debug, Parser)]
#[command(name = "tracekit", version, about = "Packet-trace analysis, queue simulation and synthesis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Statistics report and per-figure CSV files for one trace.
    Analyze {
        trace: PathBuf,
        #[command(flatten)]
        stats: StatsArgs,
        #[arg(long, default_value_t = 20)]
        greedy_threshold: u64,
        #[arg(long, default_value_t = 10)]
        tail_min: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Replay one trace through a FIFO tail-drop link.
    Simulate {
        trace: PathBuf,
        #[command(flatten)]
        queue: QueueArgs,
        /// Fixed link rate in bit/s instead of deriving it from --rho.
        #[arg(long)]
        bandwidth: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Skewness, Hurst and loss for a set of traces, with their correlations.
    Sweep {
        /// Directory of .pcap/.csv traces, or a manifest listing one path per line.
        input: PathBuf,
        #[command(flatten)]
        stats: StatsArgs,
        #[command(flatten)]
        queue: QueueArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Synthetic ON/OFF trace plus ground truth from a TOML config.
    Synth {
        config: PathBuf,
        /// Trace destination; `.pcap` writes pcap, anything else CSV.
        /// Ground truth goes next to it as `<stem>.truth.json`.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Convert between pcap and canonical CSV.
    Convert { input: PathBuf, output: PathBuf },
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Time unit in seconds.
    #[arg(long, default_value_t = 0.1)]
    pub tau: f64,
    /// Fraction of the periodogram used for the Hurst fit.
    #[arg(long, default_value_t = 0.1)]
    pub freq_fraction: f64,
}

#[derive(Debug, Args)]
pub struct QueueArgs {
    /// Link utilisation used to derive the bandwidth.
    #[arg(long, default_value_t = 0.6)]
    pub rho: f64,
    /// Buffer size in packets.
    #[arg(long, default_value_t = 50)]
    pub buffer: usize,
    #[arg(long, value_enum, default_value_t = Convention::System)]
    pub buffer_convention: Convention,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Directory receiving the report and CSV artifacts.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Rendering of the report printed on stdout.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Convention {
    /// Limit includes the packet in service.
    System,
    /// Limit counts waiting packets only.
    Waiting,
}

impl From<Convention> for BufferConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::System => BufferConvention::System,
            Convention::Waiting => BufferConvention::Waiting,
        }
    }
}

/// Everything a command produces.
#[derive(Debug, Default)]
pub struct Output {
    pub stdout: String,
    /// Diagnostics for stderr.
    pub notes: Vec<String>,
    pub files: Vec<(PathBuf, Vec<u8>)>,
    /// Set when some requested analysis did not complete.
    pub incomplete: bool,
}

impl Output {
    /// Writes the files, creating parent directories as needed.
    pub fn commit(&self) -> Result<()> {
        for (path, bytes) in &self.files {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

pub fn execute(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Analyze { trace, stats, greedy_threshold, tail_min, out } => {
            let params = AnalysisParams {
                tau: stats.tau,
                low_freq_fraction: stats.freq_fraction,
                greedy_threshold: *greedy_threshold,
                tail_min: *tail_min,
                ..Default::default()
            };
            cmd_analyze(trace, &params, out)
        }
        Command::Simulate { trace, queue, bandwidth, out } => cmd_simulate(trace, queue, *bandwidth, out),
        Command::Sweep { input, stats, queue, out } => cmd_sweep(input, stats, queue, out),
        Command::Synth { config, out, seed, duration } => cmd_synth(config, out, *seed, *duration),
        Command::Convert { input, output } => cmd_convert(input, output),
    }
}

const PCAP_MAGICS: [[u8; 4]; 5] = [
    [0xd4, 0xc3, 0xb2, 0xa1],
    [0xa1, 0xb2, 0xc3, 0xd4],
    [0x4d, 0x3c, 0xb2, 0xa1],
    [0xa1, 0xb2, 0x3c, 0x4d],
    // pcapng, rejected with a format error by the reader
    [0x0a, 0x0d, 0x0d, 0x0a],
];

/// A loaded trace plus any reader diagnostics.
pub struct Loaded {
    pub id: String,
    pub trace: Trace,
    pub notes: Vec<String>,
}

/// Reads a pcap or canonical CSV trace, telling them apart by magic number.
pub fn load_trace(path: &Path) -> Result<Loaded> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let id = trace_id(path);
    let mut notes = Vec::new();
    let trace = if bytes.len() >= 4 && PCAP_MAGICS.iter().any(|m| bytes[..4] == m[..]) {
        let read = read_pcap(&bytes).with_context(|| format!("parsing {}", path.display()))?;
        if read.stats.skipped > 0 {
            notes.push(format!("{id}: skipped {} non-IPv4 or malformed frames", read.stats.skipped));
        }
        read.trace
    } else {
        read_csv(&bytes[..]).with_context(|| format!("parsing {}", path.display()))?
    };
    Ok(Loaded { id, trace, notes })
}

fn trace_id(path: &Path) -> String {
    path.file_stem().unwrap_or(path.as_os_str()).to_string_lossy().into_owned()
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Flattens a JSON document into `field,value` rows with dotted paths.
fn flat_csv(value: &Value) -> String {
    fn walk(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
        let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
        match v {
            Value::Object(map) => map.iter().for_each(|(k, v)| walk(&join(k), v, rows)),
            Value::Array(items) => items.iter().enumerate().for_each(|(i, v)| walk(&join(&i.to_string()), v, rows)),
            Value::Null => rows.push((prefix.to_string(), String::new())),
            Value::String(s) => rows.push((prefix.to_string(), s.clone())),
            other => rows.push((prefix.to_string(), other.to_string())),
        }
    }
    let mut rows = Vec::new();
    walk("", value, &mut rows);
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(["field", "value"]).expect("in-memory write");
    for (k, v) in rows {
        w.write_record([k, v]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

fn render<T: Serialize>(value: &T, format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(value),
        Format::Csv => Ok(flat_csv(&serde_json::to_value(value)?)),
    }
}

pub fn cmd_analyze(path: &Path, params: &AnalysisParams, out: &OutArgs) -> Result<Output> {
    let loaded = load_trace(path)?;
    let analysis = analyze(&loaded.id, &loaded.trace, params).with_context(|| format!("analysing {}", loaded.id))?;
    let report: &AnalysisReport = &analysis.report;
    let mut output = Output { notes: loaded.notes, ..Default::default() };
    for (name, section) in [("tail", report.tail.reason()), ("hops", report.hops.reason()), ("rtt_vs_hops", report.rtt_vs_hops.reason())] {
        if let Some(reason) = section {
            output.notes.push(format!("{}: {name} unavailable: {reason}", loaded.id));
        }
    }
    if let Some(dir) = &out.out_dir {
        output.files.push((dir.join("report.json"), to_json(report)?.into_bytes()));
        for (name, body) in analysis.artifacts()? {
            output.files.push((dir.join(name), body.into_bytes()));
        }
    }
    output.stdout = render(report, out.format)?;
    Ok(output)
}

#[derive(Debug, Serialize)]
pub struct SimulateReport {
    pub format_version: u32,
    pub trace_id: String,
    /// Set when the bandwidth was derived from a target utilisation.
    pub rho: Option<f64>,
    pub result: SimResult,
}

pub fn cmd_simulate(path: &Path, queue: &QueueArgs, bandwidth: Option<f64>, out: &OutArgs) -> Result<Output> {
    let loaded = load_trace(path)?;
    let (bw, rho) = match bandwidth {
        Some(bw) => (bw, None),
        None => (derive_bandwidth(&loaded.trace, queue.rho)?, Some(queue.rho)),
    };
    let config = SimConfig::at_bandwidth(bw, queue.buffer).with_convention(queue.buffer_convention.into());
    let result = simulate(&loaded.trace, &config)?;
    let mut output = Output { notes: loaded.notes, ..Default::default() };
    output.notes.push(format!("{}: link bandwidth {bw} bit/s", loaded.id));
    let report = SimulateReport { format_version: FORMAT_VERSION, trace_id: loaded.id, rho, result };
    if let Some(dir) = &out.out_dir {
        output.files.push((dir.join("simulate.json"), to_json(&report)?.into_bytes()));
    }
    output.stdout = render(&report, out.format)?;
    Ok(output)
}

fn is_trace_file(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("pcap" | "cap" | "csv")
    )
}

/// Trace paths from a directory listing or a manifest file.
///
/// Manifest lines are paths relative to the manifest; blank lines and
/// `#` comments are ignored.
pub fn sweep_inputs(input: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = if input.is_dir() {
        let mut found = Vec::new();
        for entry in fs::read_dir(input).with_context(|| format!("listing {}", input.display()))? {
            let path = entry?.path();
            if path.is_file() && is_trace_file(&path) {
                found.push(path);
            }
        }
        found
    } else {
        let text = fs::read_to_string(input).with_context(|| format!("reading manifest {}", input.display()))?;
        let base = input.parent().unwrap_or(Path::new(""));
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| base.join(l))
            .collect()
    };
    paths.sort();
    let mut seen = BTreeMap::new();
    for p in &paths {
        if let Some(prev) = seen.insert(trace_id(p), p) {
            bail!("trace id {:?} used by both {} and {}", trace_id(p), prev.display(), p.display());
        }
    }
    Ok(paths)
}

pub fn cmd_sweep(input: &Path, stats: &StatsArgs, queue: &QueueArgs, out: &OutArgs) -> Result<Output> {
    let paths = sweep_inputs(input)?;
    ensure!(paths.len() >= 2, "sweep needs at least 2 traces, found {}", paths.len());
    let params = SweepParams {
        tau: stats.tau,
        low_freq_fraction: stats.freq_fraction,
        rho: queue.rho,
        buffer_packets: queue.buffer,
        convention: queue.buffer_convention.into(),
    };
    let mut output = Output::default();
    let mut traces = Vec::new();
    let mut unreadable = Vec::new();
    for p in &paths {
        match load_trace(p) {
            Ok(l) => {
                output.notes.extend(l.notes);
                traces.push((l.id, l.trace));
            }
            Err(e) => unreadable.push(SweepRow {
                trace_id: trace_id(p),
                skewness: None,
                hurst: None,
                loss_ratio: None,
                bandwidth: None,
                error: Some(format!("{e:#}")),
            }),
        }
    }
    let mut report = performance_sweep(&traces, &params)?;
    report.rows.extend(unreadable);
    report.rows.sort_by(|a, b| a.trace_id.cmp(&b.trace_id));
    for row in report.failed() {
        output.notes.push(format!("{}: failed: {}", row.trace_id, row.error.as_deref().unwrap_or("unknown error")));
        output.incomplete = true;
    }
    let mut table = Vec::new();
    report.write_csv(&mut table)?;
    if let Some(dir) = &out.out_dir {
        output.files.push((dir.join("sweep.csv"), table.clone()));
        output.files.push((dir.join("sweep.json"), to_json(&report)?.into_bytes()));
    }
    output.stdout = match out.format {
        Format::Json => to_json(&report)?,
        Format::Csv => String::from_utf8(table).expect("csv output is UTF-8"),
    };
    Ok(output)
}

fn encode_trace(trace: &Trace, dest: &Path) -> Result<Vec<u8>> {
    match dest.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("pcap" | "cap") => Ok(write_pcap(trace)),
        Some("csv") => {
            let mut buf = Vec::new();
            write_csv(trace, &mut buf)?;
            Ok(buf)
        }
        _ => bail!("cannot tell output format of {}; use a .pcap or .csv extension", dest.display()),
    }
}

pub fn truth_path(trace_out: &Path) -> PathBuf {
    let stem = trace_out.file_stem().unwrap_or_default().to_string_lossy();
    trace_out.with_file_name(format!("{stem}.truth.json"))
}

pub fn cmd_synth(config: &Path, out: &Path, seed: Option<u64>, duration: Option<f64>) -> Result<Output> {
    let text = fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let mut cfg = SynthConfig::from_toml(&text)?;
    if seed.is_some() {
        cfg.seed = seed;
    }
    if duration.is_some() {
        cfg.duration = duration;
    }
    let (model, duration) = cfg.resolve()?;
    let (trace, truth) = generate(&model, duration)?;
    let body = encode_trace(&trace, out)?;
    let truth_out = truth_path(out);
    let mut output = Output::default();
    output.notes.push(format!(
        "{} packets over {duration} s from {} sources; theoretical H {}",
        trace.len(),
        model.n_sources,
        truth.theoretical_h
    ));
    output.files.push((out.to_path_buf(), body));
    output.files.push((truth_out, to_json(&truth)?.into_bytes()));
    Ok(output)
}

pub fn cmd_convert(input: &Path, dest: &Path) -> Result<Output> {
    let loaded = load_trace(input)?;
    let body = encode_trace(&loaded.trace, dest)?;
    let mut output = Output { notes: loaded.notes, ..Default::default() };
    output.notes.push(format!("{} packets written to {}", loaded.trace.len(), dest.display()));
    output.files.push((dest.to_path_buf(), body));
    Ok(output)
}
