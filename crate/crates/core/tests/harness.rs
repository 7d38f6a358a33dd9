use qheat_core::evolution::time_grid;
use qheat_core::harness::{self, Kind, SweepSettings, TraceSettings};
use qheat_core::model::{self, Bath, CouplingDistribution, ValveConfig};
use qheat_core::output;
use qheat_core::Execution;

fn sweep_csv(config: &ValveConfig, settings: &SweepSettings) -> Vec<u8> {
    let records = harness::run_sweep(config, &[0.0, 0.2, 0.5], settings).unwrap();
    let mut buf = Vec::new();
    output::write_sweep(&mut buf, &records).unwrap();
    buf
}

#[test]
fn sweep_is_deterministic_and_order_independent() {
    let mut config = ValveConfig::new(30, 0.1, 1.0, 0.0);
    config.seed = 42;
    let par = SweepSettings {
        realizations: 3,
        ..Default::default()
    };
    let seq = SweepSettings {
        exec: Execution::Sequential,
        ..par.clone()
    };
    let a = sweep_csv(&config, &par);
    assert_eq!(a, sweep_csv(&config, &par));
    assert_eq!(a, sweep_csv(&config, &seq));
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 2 + 3 * 2);
    assert_eq!(text.lines().nth(1).unwrap(), output::SWEEP_HEADER);

    config.seed = 43;
    assert_ne!(text.as_bytes(), sweep_csv(&config, &par));
}

#[test]
fn extending_the_grid_keeps_existing_points() {
    let config = ValveConfig::new(20, 0.1, 1.0, 0.0);
    let settings = SweepSettings {
        realizations: 2,
        kinds: vec![Kind::Rwa],
        ..Default::default()
    };
    let short = harness::run_sweep(&config, &[0.3], &settings).unwrap();
    let long = harness::run_sweep(&config, &[0.3, 0.6], &settings).unwrap();
    assert_eq!(short[0], long[0]);
}

#[test]
fn sweep_records_are_consistent() {
    let config = ValveConfig::new(25, 0.1, 1.0, 0.0);
    let settings = SweepSettings {
        realizations: 4,
        ..Default::default()
    };
    let records = harness::run_sweep(&config, &[0.2, 0.4], &settings).unwrap();
    let kinds: Vec<Kind> = records.iter().map(|r| r.kind).collect();
    assert_eq!(kinds, [Kind::Exact, Kind::Rwa, Kind::Exact, Kind::Rwa]);
    for r in &records {
        assert!(r.std_current >= 0.0);
        assert_eq!(r.samples.len(), 4);
        assert!(r.mean_current > 0.0);
        assert!(r.landauer > 0.0 && r.weak_coupling > 0.0);
    }
    assert_eq!(records[0].landauer, records[1].landauer);
}

#[test]
fn trace_columns() {
    let mut config = ValveConfig::new(40, 0.4, 1.0, 0.0);
    config.seed = 3;
    let times = time_grid(0.0, 10.0, 0.05);
    let records = harness::run_trace(&config, &times, &TraceSettings::default()).unwrap();
    assert_eq!(records.len(), 2 * times.len());
    for r in &records {
        assert!((r.total - r.normal - r.anomalous).abs() < 1e-10);
        if r.kind == Kind::Rwa {
            assert_eq!(r.anomalous, 0.0);
        }
    }
    let exact: Vec<_> = records.iter().filter(|r| r.kind == Kind::Exact).collect();
    assert!(exact.windows(2).all(|w| w[1].time > w[0].time));
    assert!(exact.iter().any(|r| r.anomalous.abs() > 1e-6));
    // both kinds see the same bath draw, so the overlay is shared
    let rwa: Vec<_> = records.iter().filter(|r| r.kind == Kind::Rwa).collect();
    assert!(exact.iter().zip(&rwa).all(|(a, b)| a.pert_anomalous == b.pert_anomalous));

    let mut buf = Vec::new();
    output::write_trace(&mut buf, &records).unwrap();
    let text = String::from_utf8(buf).unwrap();
    for line in text.lines().skip(2).filter(|l| l.contains(",rwa,")) {
        assert_eq!(line.split(',').nth(5), Some("0.0"));
    }
}

#[test]
fn zero_coupling_trace_is_silent() {
    let config = ValveConfig::new(10, 0.0, 1.0, 0.0);
    let times = time_grid(0.0, 5.0, 0.5);
    for r in harness::run_trace(&config, &times, &TraceSettings::default()).unwrap() {
        assert_eq!(r.total, 0.0);
        assert_eq!(r.pert_anomalous, 0.0);
    }
}

#[test]
fn distributions_at_zero_coupling_agree() {
    let config = ValveConfig::new(10, 0.1, 1.0, 0.0);
    let settings = SweepSettings {
        realizations: 2,
        kinds: vec![Kind::Rwa],
        ..Default::default()
    };
    let sets = harness::run_distribution_comparison(&config, &[0.0], &settings).unwrap();
    assert_eq!(sets.len(), 3);
    for (_, records) in &sets {
        assert_eq!(records[0].mean_current, 0.0);
        assert_eq!(records[0].std_current, 0.0);
    }
}

#[test]
fn distributions_share_second_moment() {
    let n = 100_000;
    let target = 0.3f64.powi(2) / (3.0 * n as f64);
    for dist in CouplingDistribution::ALL {
        let mut config = ValveConfig::new(n, 0.3, 1.0, 0.0);
        config.coupling_dist = dist;
        config.seed = 12;
        let bath = model::sample_bath(&config).unwrap();
        for b in [Bath::One, Bath::Two] {
            let m = bath.empirical_mean_coupling_sq(b);
            assert!((m / target - 1.0).abs() < 0.01, "{dist:?}: {m} vs {target}");
        }
    }
}
