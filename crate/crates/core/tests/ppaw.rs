mod support;

use ppaw_core::ingest::{MinuteRecord, SynthConfig};
use ppaw_core::eval::{run_ppaw_experiment, sweep_o};
use ppaw_core::ppaw::{parse_trace_csv, ppaw_run, write_trace_csv, PpawConfig, StepOutcome};
use ppaw_core::regress::TreeParams;
use support::{ppaw_oracle, scalar_features, scripted_stream, stationary_config, synth_records, OracleParams};

fn scripted_config() -> PpawConfig {
    PpawConfig {
        n_learners: 2,
        history: 5,
        uncertainty: 1.0,
        error_threshold: 5.0,
        ttl: 10,
        tree: TreeParams { max_depth: 1, ..Default::default() },
        seed: 42,
    }
}

fn scripted_records() -> Vec<MinuteRecord> {
    scripted_stream()
        .into_iter()
        .enumerate()
        .map(|(m, (x, bpm))| MinuteRecord {
            minute_index: m as u64,
            features: scalar_features(x),
            bpm: Some(bpm),
            phase: u32::from(m >= 12),
        })
        .collect()
}

/// Outcome of the scripted stream, frozen from the stump oracle:
/// (queried, retrained_on_error, retrained_on_ttl) per minute.
const FROZEN: [(bool, u32, u32); 20] = [
    (true, 0, 0),
    (true, 0, 0),
    (true, 0, 0),
    (true, 0, 0),
    (true, 0, 0),
    (true, 1, 0),
    (true, 0, 0),
    (true, 1, 0),
    (true, 2, 0),
    (true, 2, 0),
    (true, 1, 0),
    (false, 0, 0),
    (false, 0, 0),
    (false, 0, 0),
    (false, 0, 0),
    (false, 0, 0),
    (false, 0, 0),
    (false, 0, 0),
    (false, 0, 0),
    (false, 0, 1),
];

#[test]
fn scripted_stream_matches_hand_stepped_oracle() {
    let cfg = scripted_config();
    let got = ppaw_run(&cfg, &scripted_records()).unwrap();
    let want = ppaw_oracle(
        &OracleParams { l: 2, n: 5, o: 1.0, t: 5.0, ttl: 10, seed: 42 },
        &scripted_stream(),
    );
    assert_eq!(got.len(), 20);
    for (m, (g, w)) in got.iter().zip(&want).enumerate() {
        assert_eq!(g.queried, w.queried, "minute {m}");
        assert_eq!(g.retrained_on_error, w.retrained_on_error, "minute {m}");
        assert_eq!(g.retrained_on_ttl, w.retrained_on_ttl, "minute {m}");
        assert!((g.predicted_bpm - w.predicted).abs() < 1e-9, "minute {m}");
        assert!((g.variance - w.variance).abs() < 1e-9, "minute {m}");
    }
    let frozen: Vec<_> = got.iter().map(|o| (o.queried, o.retrained_on_error, o.retrained_on_ttl)).collect();
    assert_eq!(frozen, FROZEN);
}

#[test]
fn stationary_stream_stops_querying() {
    let recs = synth_records(&stationary_config(120));
    let cfg = PpawConfig::default();
    let trace = ppaw_run(&cfg, &recs).unwrap();
    // initialisation, then cold start until the variance history fills
    assert!(trace[..2 * cfg.history].iter().all(|o| o.queried));
    assert!(trace[2 * cfg.history..].iter().all(|o| !o.queried));
    let (report, _) = run_ppaw_experiment(&recs, &cfg).unwrap();
    assert!(report.mae < 0.5, "{}", report.mae);
}

#[test]
fn runs_are_deterministic_and_traces_roundtrip() {
    let recs = synth_records(&SynthConfig { n_minutes_per_phase: 120, ..Default::default() });
    let a = ppaw_run(&PpawConfig::default(), &recs).unwrap();
    let b = ppaw_run(&PpawConfig::default(), &recs).unwrap();
    assert_eq!(a, b);
    let mut csv = Vec::new();
    write_trace_csv(&mut csv, &a).unwrap();
    let back: Vec<StepOutcome> = parse_trace_csv(&csv[..]).unwrap();
    assert_eq!(back, a);
}

#[test]
fn invariants_hold_on_drift_stream() {
    let recs = synth_records(&SynthConfig { n_minutes_per_phase: 200, ..Default::default() });
    let cfg = PpawConfig::default();
    let trace = ppaw_run(&cfg, &recs).unwrap();
    for (o, r) in trace.iter().zip(&recs) {
        assert_eq!(o.queried, o.true_bpm.is_some());
        if let Some(t) = o.true_bpm {
            assert_eq!(Some(t), r.bpm);
        }
        assert!(o.retrained_on_error as usize <= cfg.n_learners);
        assert!(o.retrained_on_ttl as usize <= cfg.n_learners);
    }
}

// Each query changes the model, so runs with different O follow different
// paths and monotonicity is a tendency, not a per-stream guarantee: seed 1 at
// 400 minutes per phase queries 96 times at O=3 and 95 at O=2. The fixed
// default stream is where the trend is asserted.
#[test]
fn query_fraction_non_increasing_in_o() {
    let recs = synth_records(&SynthConfig::default());
    let reports = sweep_o(&recs, &PpawConfig::default(), &[1.0, 2.0, 3.0]).unwrap();
    let q: Vec<f64> = reports.iter().map(|r| r.query_fraction).collect();
    assert!(q[0] >= q[1] && q[1] >= q[2], "{q:?}");
    assert!(q[0] > q[2]);
}

/// Summed over many seeds, the ten minutes after a phase boundary should see
/// more queries than the ten before. Heart-rate drift that leaves the
/// acceleration untouched does not move the ensemble's spread, so the
/// uncertainty test has nothing to react to until labels from the new phase
/// reach the buffer by chance; measured counts are about equal.
#[test]
#[ignore = "posterior-only drift is invisible to the variance test; see README"]
fn more_queries_after_phase_boundary() {
    let (mut before, mut after) = (0, 0);
    for seed in 0..24 {
        let recs = synth_records(&SynthConfig { n_minutes_per_phase: 300, seed, ..Default::default() });
        let trace = ppaw_run(&PpawConfig::default(), &recs).unwrap();
        let b = recs.iter().position(|r| r.phase == 1).unwrap();
        before += trace[b - 10..b].iter().filter(|o| o.queried).count();
        after += trace[b..b + 10].iter().filter(|o| o.queried).count();
    }
    assert!(after > before, "after {after}, before {before}");
}
