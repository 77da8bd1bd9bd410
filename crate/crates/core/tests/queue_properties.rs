use std::net::Ipv4Addr;

use proptest::prelude::*;
use tracekit::sim::{derive_bandwidth, performance_sweep, simulate, SimConfig, SweepParams};
use tracekit::stats::{hurst_periodogram, throughput_series};
use tracekit::synth::{block_shuffle, generate, RateModel, SourceModel};
use tracekit::{PacketRecord, Timestamp, Trace};

fn bursty(seed: u64) -> Trace {
    let m = SourceModel {
        n_sources: 60,
        seed,
        mean_on: 0.2,
        mean_off: 1.0,
        rates: RateModel::Pareto { shape: 1.3, min_pps: 50.0, max_pps: Some(10_000.0) },
        ..Default::default()
    };
    generate(&m, 120.0).unwrap().0
}

#[test]
fn loss_is_monotone_over_grid() {
    let trace = bursty(21);
    let base = derive_bandwidth(&trace, 0.6).unwrap();
    let factors = [0.6, 0.8, 1.0, 1.3, 1.8];
    let buffers = [1, 5, 20, 50, 200];
    let loss: Vec<Vec<f64>> = factors
        .iter()
        .map(|f| {
            buffers
                .iter()
                .map(|&b| simulate(&trace, &SimConfig::at_bandwidth(base * f, b)).unwrap().loss_ratio)
                .collect()
        })
        .collect();
    for i in 0..factors.len() {
        for j in 0..buffers.len() {
            if i + 1 < factors.len() {
                assert!(loss[i + 1][j] <= loss[i][j], "bandwidth step at {i},{j}: {loss:?}");
            }
            if j + 1 < buffers.len() {
                assert!(loss[i][j + 1] <= loss[i][j], "buffer step at {i},{j}: {loss:?}");
            }
        }
    }
    assert!(loss[0][0] > 0.0);
}

#[test]
fn vanishing_utilisation_means_vanishing_loss() {
    let trace = bursty(22);
    let heavy = simulate(&trace, &SimConfig::at_utilization(0.9, 50)).unwrap().loss_ratio;
    let light = simulate(&trace, &SimConfig::at_utilization(0.001, 50)).unwrap().loss_ratio;
    assert!(heavy > 0.0);
    assert_eq!(light, 0.0);
}

fn spaced_trace(gaps: &[(u32, u16)]) -> Trace {
    let mut t = 0u64;
    let packets = gaps
        .iter()
        .map(|&(gap, size)| {
            t += u64::from(gap);
            PacketRecord {
                timestamp: Timestamp(t),
                size,
                src_ip: Ipv4Addr::new(10, 0, 0, 1),
                dst_ip: Ipv4Addr::new(10, 0, 0, 2),
                src_port: 1,
                dst_port: 2,
                protocol: 17,
                ttl: 64,
                tcp_flags: 0,
            }
        })
        .collect();
    Trace::from_packets(packets).unwrap()
}

proptest! {
    #[test]
    fn peak_bandwidth_never_drops(gaps in proptest::collection::vec((1u32..50_000, 20u16..1500), 2..200)) {
        let trace = spaced_trace(&gaps);
        // every gap covers the previous packet's service time
        let peak = trace
            .packets()
            .windows(2)
            .map(|w| f64::from(w[0].size) * 8.0 / (w[1].timestamp.micros() - w[0].timestamp.micros()) as f64 * 1e6)
            .fold(0.0, f64::max);
        let r = simulate(&trace, &SimConfig::at_bandwidth(peak * (1.0 + 1e-9), 1)).unwrap();
        prop_assert_eq!(r.dropped_packets, 0);
    }
}

#[test]
fn shuffled_marginals_decouple_hurst_from_loss() {
    // same bins in 20 random orders: identical marginal, different correlation structure
    let base = bursty(23);
    let traces: Vec<(String, Trace)> = (0..20u64)
        .map(|s| (format!("s{s:02}"), block_shuffle(&base, 0.1, 5, 100 + s).unwrap()))
        .collect();
    let report = performance_sweep(&traces, &SweepParams::default()).unwrap();
    let col = |f: fn(&tracekit::sim::SweepRow) -> Option<f64>| report.rows.iter().map(|r| f(r).unwrap()).collect::<Vec<f64>>();
    let (skew, hurst, loss) = (col(|r| r.skewness), col(|r| r.hurst), col(|r| r.loss_ratio));
    let range = |v: &[f64]| v.iter().fold((f64::MAX, f64::MIN), |(l, h), &x| (l.min(x), h.max(x)));

    assert!(skew.iter().all(|s| (s - skew[0]).abs() < 1e-9));
    let (h_lo, h_hi) = range(&hurst);
    assert!(h_hi - h_lo > 0.2, "H range {h_lo}..{h_hi}");
    let original = hurst_periodogram(&throughput_series(&base, 0.1).unwrap(), 0.1).unwrap().h;
    assert!(original > h_hi, "shuffling should lower H: {original} vs {h_hi}");
    let (l_lo, l_hi) = range(&loss);
    let mean_loss = loss.iter().sum::<f64>() / loss.len() as f64;
    assert!(mean_loss > 0.0);
    assert!((l_hi - l_lo) / mean_loss < 0.02, "loss range {l_lo}..{l_hi}");
    let r = report.hurst_vs_loss.value.unwrap();
    assert!(r.abs() < 0.3, "corr(H, loss) = {r}");
}
