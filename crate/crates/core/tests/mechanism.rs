use tracekit::flows::{alpha_vs_skewness, write_alpha_skewness_csv};
use tracekit::sim::{performance_sweep, SweepParams};
use tracekit::synth::{generate, RateModel, SourceModel};
use tracekit::{Error, Timestamp, Trace};

fn heavy(seed: u64, shape: f64) -> Trace {
    let m = SourceModel {
        n_sources: 40,
        seed,
        mean_on: 0.2,
        mean_off: 1.0,
        rates: RateModel::Pareto { shape, min_pps: 50.0, max_pps: Some(10_000.0) },
        ..Default::default()
    };
    generate(&m, 60.0).unwrap().0
}

#[test]
fn identical_traces_give_identical_points() {
    let t = heavy(1, 1.4);
    let pts = alpha_vs_skewness(&[("a".into(), t.clone()), ("b".into(), t)], 0.1, 10).unwrap();
    assert_eq!(pts.len(), 2);
    assert_eq!((pts[0].alpha, pts[0].skewness), (pts[1].alpha, pts[1].skewness));
    assert_eq!((pts[0].trace_id.as_str(), pts[1].trace_id.as_str()), ("a", "b"));
    let mut csv = Vec::new();
    write_alpha_skewness_csv(&pts, &mut csv).unwrap();
    assert!(String::from_utf8(csv).unwrap().starts_with("trace,alpha,skewness\n"));
}

#[test]
fn alpha_errors_name_the_trace() {
    let quiet = Trace::empty(Timestamp(10_000_000));
    let err = alpha_vs_skewness(&[("ok".into(), heavy(2, 1.4)), ("quiet".into(), quiet)], 0.1, 10).unwrap_err();
    assert!(err.to_string().contains("quiet"), "{err}");
}

#[test]
fn duplicate_traces_leave_correlations_undefined() {
    let t = heavy(3, 1.3);
    let report = performance_sweep(&[("x".into(), t.clone()), ("y".into(), t)], &SweepParams::default()).unwrap();
    assert_eq!(report.rows[0].skewness, report.rows[1].skewness);
    assert_eq!(report.rows[0].loss_ratio, report.rows[1].loss_ratio);
    assert!(report.skewness_vs_loss.value.is_none());
    assert!(report.skewness_vs_loss.undefined_reason.is_some());
    assert!(report.hurst_vs_loss.value.is_none());
}

#[test]
fn failed_rows_are_reported_and_excluded() {
    let traces = vec![
        ("c".to_string(), heavy(4, 1.2)),
        ("a".to_string(), heavy(5, 2.0)),
        ("b".to_string(), Trace::empty(Timestamp(1_000))),
        ("d".to_string(), heavy(6, 1.6)),
    ];
    let report = performance_sweep(&traces, &SweepParams::default()).unwrap();
    let ids: Vec<&str> = report.rows.iter().map(|r| r.trace_id.as_str()).collect();
    assert_eq!(ids, ["a", "b", "c", "d"]);
    assert_eq!(report.failed().count(), 1);
    assert!(report.rows[1].error.is_some());
    assert!(report.skewness_vs_loss.value.is_some());
    let mut csv = Vec::new();
    report.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("trace,skewness,hurst,loss_ratio\n"));
    assert!(text.contains("\nb,,,\n"));
}

#[test]
fn sweep_needs_two_traces() {
    let one = vec![("only".to_string(), heavy(7, 1.5))];
    assert!(matches!(performance_sweep(&one, &SweepParams::default()), Err(Error::InsufficientData(_))));
}
