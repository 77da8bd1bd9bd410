use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use tracekit::analysis::{analyze, AnalysisParams, AnalysisReport};
use tracekit::synth::{generate, RateModel, SourceModel};
use tracekit::trace::csv::to_csv_string;
use tracekit::trace::{read_csv, read_pcap};
use tracekit::Trace;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tracekit")).args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn bursty(seed: u64) -> Trace {
    let m = SourceModel {
        n_sources: 30,
        seed,
        mean_on: 0.2,
        mean_off: 1.0,
        rates: RateModel::Pareto { shape: 1.3, min_pps: 50.0, max_pps: Some(10_000.0) },
        ..Default::default()
    };
    generate(&m, 60.0).unwrap().0
}

fn write_trace(dir: &Path, name: &str, trace: &Trace) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, to_csv_string(trace)).unwrap();
    p
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    names
}

#[test]
fn missing_file_fails_without_outputs() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let r = run(&["analyze", s(&tmp.path().join("absent.csv")), "--out-dir", s(&out)]);
    assert!(!r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("absent.csv"));
    assert!(!out.exists());
}

#[test]
fn malformed_trace_fails_without_outputs() {
    let tmp = TempDir::new().unwrap();
    let bad = tmp.path().join("bad.csv");
    fs::write(&bad, "timestamp,size\n0.1,zzz\n").unwrap();
    let out = tmp.path().join("out");
    let r = run(&["analyze", s(&bad), "--out-dir", s(&out)]);
    assert!(!r.status.success());
    assert!(!out.exists());
}

#[test]
fn one_way_trace_succeeds_with_path_sections_unavailable() {
    let tmp = TempDir::new().unwrap();
    let path = write_trace(tmp.path(), "oneway.csv", &bursty(1));
    let out = tmp.path().join("out");
    let r = run(&["analyze", s(&path), "--out-dir", s(&out)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let report: Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert!(report["hops"]["unavailable"]["reason"].is_string());
    assert!(report["rtt_vs_hops"]["unavailable"].is_object());
    assert_eq!(
        listing(&out),
        ["flows_per_bin.csv", "llcd.csv", "marginal.csv", "report.json", "spectrum.csv", "throughput.csv"]
    );
}

#[test]
fn report_matches_direct_invocation() {
    let tmp = TempDir::new().unwrap();
    let trace = bursty(2);
    let path = write_trace(tmp.path(), "direct.csv", &trace);
    let out = tmp.path().join("out");
    let r = run(&["analyze", s(&path), "--tau", "0.2", "--freq-fraction", "0.05", "--out-dir", s(&out)]);
    assert!(r.status.success());
    let from_cli: AnalysisReport = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    let params = AnalysisParams { tau: 0.2, low_freq_fraction: 0.05, ..Default::default() };
    // the CSV reader takes the duration from the last packet
    let reread = read_csv(to_csv_string(&trace).as_bytes()).unwrap();
    let direct = analyze("direct", &reread, &params).unwrap();
    assert_eq!(from_cli, direct.report);
    assert_eq!(String::from_utf8(r.stdout).unwrap(), fs::read_to_string(out.join("report.json")).unwrap());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let path = write_trace(tmp.path(), "rep.csv", &bursty(3));
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        assert!(run(&["analyze", s(&path), "--out-dir", s(dir)]).status.success());
    }
    for name in listing(&a) {
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name}");
    }
}

#[test]
fn csv_format_flattens_the_report() {
    let tmp = TempDir::new().unwrap();
    let path = write_trace(tmp.path(), "flat.csv", &bursty(4));
    let r = run(&["analyze", s(&path), "--format", "csv"]);
    let text = String::from_utf8(r.stdout).unwrap();
    assert!(text.starts_with("field,value\n"));
    assert!(text.contains("\nformat_version,1\n"));
    assert!(text.contains("\ntrace_id,flat\n"));
    assert!(text.contains("\nparams.tau,0.1\n"));
}

#[test]
fn simulate_hand_oracle_and_defaults() {
    let tmp = TempDir::new().unwrap();
    let burst = tmp.path().join("burst.csv");
    let row = "0.000000,1000,10.0.0.1,10.0.0.2,1,2,17,64,0\n";
    fs::write(&burst, format!("timestamp,size,src_ip,dst_ip,src_port,dst_port,protocol,ttl,tcp_flags\n{}", row.repeat(5))).unwrap();
    let r = run(&["simulate", s(&burst), "--bandwidth", "8000000", "--buffer", "3"]);
    assert!(r.status.success());
    let v: Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(v["result"]["dropped_packets"], 2);
    assert_eq!(v["result"]["loss_ratio"], 0.4);
    assert!(v["rho"].is_null());

    let path = write_trace(tmp.path(), "sim.csv", &bursty(5));
    let r = run(&["simulate", s(&path)]);
    let v: Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(v["rho"], 0.6);
    assert_eq!(v["result"]["buffer_packets"], 50);
    assert!(String::from_utf8_lossy(&r.stderr).contains("bandwidth"));

    let r = run(&["simulate", s(&path), "--rho", "0.0001"]);
    let v: Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(v["result"]["loss_ratio"], 0.0);
}

#[test]
fn sweep_orders_rows_and_flags_failures() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("traces");
    fs::create_dir(&dir).unwrap();
    for (name, seed) in [("c.csv", 6), ("a.csv", 7), ("b.csv", 8)] {
        write_trace(&dir, name, &bursty(seed));
    }
    fs::write(dir.join("notes.txt"), "ignored").unwrap();
    let out = tmp.path().join("out");
    let r = run(&["sweep", s(&dir), "--out-dir", s(&out), "--format", "csv"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let table = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let ids: Vec<&str> = table.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ids, ["a", "b", "c"]);
    assert_eq!(String::from_utf8(r.stdout).unwrap(), table);
    let json: Value = serde_json::from_slice(&fs::read(out.join("sweep.json")).unwrap()).unwrap();
    assert!(json["skewness_vs_loss"]["value"].is_number());
    assert!(json["hurst_vs_loss"]["value"].is_number());

    // an unreadable trace is reported as a failed row and the exit code says so
    fs::write(dir.join("0broken.csv"), "not a trace").unwrap();
    let r = run(&["sweep", s(&dir)]);
    assert_eq!(r.status.code(), Some(2));
    let json: Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(json["rows"][0]["trace_id"], "0broken");
    assert!(json["rows"][0]["error"].is_string());
    assert!(json["skewness_vs_loss"]["value"].is_number());
}

#[test]
fn sweep_reads_manifests_and_needs_two_traces() {
    let tmp = TempDir::new().unwrap();
    write_trace(tmp.path(), "x.csv", &bursty(9));
    write_trace(tmp.path(), "y.csv", &bursty(10));
    let manifest = tmp.path().join("list.txt");
    fs::write(&manifest, "# ensemble\ny.csv\n\nx.csv\n").unwrap();
    let r = run(&["sweep", s(&manifest), "--format", "csv"]);
    assert!(r.status.success());
    let text = String::from_utf8(r.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("x,"));

    fs::write(&manifest, "x.csv\n").unwrap();
    assert!(!run(&["sweep", s(&manifest)]).status.success());
}

#[test]
fn synth_is_deterministic_and_validates() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("model.toml");
    fs::write(&cfg, "n_sources = 12\nseed = 3\nduration = 20.0\n").unwrap();
    let (a, b) = (tmp.path().join("a.csv"), tmp.path().join("b.csv"));
    assert!(run(&["synth", s(&cfg), "--out", s(&a)]).status.success());
    assert!(run(&["synth", s(&cfg), "--out", s(&b)]).status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(fs::read(tmp.path().join("a.truth.json")).unwrap(), fs::read(tmp.path().join("b.truth.json")).unwrap());

    let c = tmp.path().join("c.csv");
    assert!(run(&["synth", s(&cfg), "--out", s(&c), "--seed", "4"]).status.success());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());

    fs::write(&cfg, "n_sources = 12\non_shape = 2.5\n").unwrap();
    let d = tmp.path().join("d.csv");
    assert!(!run(&["synth", s(&cfg), "--out", s(&d)]).status.success());
    assert!(!d.exists());
    assert!(!tmp.path().join("d.truth.json").exists());
}

#[test]
fn convert_round_trips_through_pcap() {
    let tmp = TempDir::new().unwrap();
    let src = write_trace(tmp.path(), "src.csv", &bursty(11));
    let pcap = tmp.path().join("mid.pcap");
    let back = tmp.path().join("back.csv");
    assert!(run(&["convert", s(&src), s(&pcap)]).status.success());
    assert!(read_pcap(&fs::read(&pcap).unwrap()).is_ok());
    assert!(run(&["convert", s(&pcap), s(&back)]).status.success());
    // the synthetic trace starts at t = 0, so rebasing is a no-op
    assert_eq!(fs::read(&src).unwrap(), fs::read(&back).unwrap());
    assert!(!run(&["convert", s(&src), s(&tmp.path().join("out.bin"))]).status.success());
}
