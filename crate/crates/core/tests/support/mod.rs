//! Independent reference implementations shared by the integration tests.
//! Nothing here calls the code under test except for the seeded random
//! streams, which the online-loop oracle has to reproduce.
#![allow(dead_code)]

use std::f64::consts::PI;

use ppaw_core::features::FeatureVector;
use ppaw_core::ingest::{align_minutes, label_phases, synth_stream, ActivityRegime, MinuteRecord, SynthConfig};
use ppaw_core::regress::{bootstrap_indices, learner_rng, mix_seed};
use rand::RngCore;

// ---------------------------------------------------------------- features

/// |X_k|^2 for k in 0..M by the O(M^2) definition.
pub fn dft_power(s: &[f64]) -> Vec<f64> {
    let m = s.len();
    (0..m)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (n, &v) in s.iter().enumerate() {
                let a = -2.0 * PI * ((k * n) % m) as f64 / m as f64;
                re += v * a.cos();
                im += v * a.sin();
            }
            re * re + im * im
        })
        .collect()
}

/// k-th smallest value (0-based) by counting, no sorting.
fn order_stat(s: &[f64], k: usize) -> f64 {
    for &v in s {
        let below = s.iter().filter(|&&u| u < v).count();
        let equal = s.iter().filter(|&&u| u == v).count();
        if below <= k && k < below + equal {
            return v;
        }
    }
    unreachable!("order statistic always exists")
}

fn quantile(s: &[f64], q: f64) -> f64 {
    let pos = q * (s.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let a = order_stat(s, lo);
    let b = order_stat(s, hi);
    a + (b - a) * (pos - lo as f64)
}

/// The 13 per-axis values in storage order.
pub fn axis_oracle(s: &[f64]) -> [f64; 13] {
    let n = s.len() as f64;
    let mean = s.iter().sum::<f64>() / n;
    let m2 = s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m3 = s.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    let m4 = s.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    let (skew, kurt) = if m2 < 1e-12 {
        (0.0, 0.0)
    } else {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    };

    let mut zc = 0;
    let mut last_sign = 0.0;
    for v in s {
        let c = v - mean;
        if c == 0.0 {
            continue;
        }
        let sign = c.signum();
        if last_sign != 0.0 && sign != last_sign {
            zc += 1;
        }
        last_sign = sign;
    }

    let power = dft_power(s);
    let energy = power.iter().sum::<f64>() / n;
    let half = &power[..=s.len() / 2];
    let total: f64 = half.iter().sum();
    let entropy = if total < 1e-12 {
        0.0
    } else {
        -half
            .iter()
            .map(|p| p / total)
            .filter(|&p| p > 0.0)
            .map(|p| p * p.ln())
            .sum::<f64>()
    };

    let p25 = quantile(s, 0.25);
    let p75 = quantile(s, 0.75);
    [
        order_stat(s, 0),
        order_stat(s, s.len() - 1),
        m2.sqrt(),
        quantile(s, 0.5),
        mean,
        p25,
        p75,
        p75 - p25,
        skew,
        kurt,
        zc as f64,
        energy,
        entropy,
    ]
}

pub fn window_oracle(x: &[f64], y: &[f64], z: &[f64]) -> [f64; 39] {
    let mut out = [0.0; 39];
    for (a, s) in [x, y, z].into_iter().enumerate() {
        out[a * 13..(a + 1) * 13].copy_from_slice(&axis_oracle(s));
    }
    out
}

/// `|a - b| <= tol * max(1, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

// ------------------------------------------------------------------ trees

/// Best single split by brute force: for every feature and every observed
/// value `v`, send `x <= v` left and measure the SSE directly. Ties go to the
/// lowest feature, then the lowest `v`. Returns (feature, left-row mask, sse).
pub fn exhaustive_root_split(x: &[Vec<f64>], y: &[f64]) -> Option<(usize, Vec<bool>, f64)> {
    let sse = |rows: &[usize]| -> f64 {
        if rows.is_empty() {
            return 0.0;
        }
        let m = rows.iter().map(|&i| y[i]).sum::<f64>() / rows.len() as f64;
        rows.iter().map(|&i| (y[i] - m).powi(2)).sum()
    };
    let all: Vec<usize> = (0..y.len()).collect();
    let parent = sse(&all);
    if parent <= 1e-12 {
        return None;
    }
    let tol = 1e-12 * parent;
    let mut best: Option<(usize, f64, Vec<bool>, f64)> = None;
    for f in 0..x[0].len() {
        let mut values: Vec<f64> = x.iter().map(|r| r[f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for &v in &values[..values.len() - 1] {
            let mask: Vec<bool> = x.iter().map(|r| r[f] <= v).collect();
            let left: Vec<usize> = all.iter().copied().filter(|&i| mask[i]).collect();
            let right: Vec<usize> = all.iter().copied().filter(|&i| !mask[i]).collect();
            let s = sse(&left) + sse(&right);
            let better = match &best {
                None => true,
                Some((_, _, _, b)) => s < b - tol,
            };
            if better {
                best = Some((f, v, mask, s));
            }
        }
    }
    best.filter(|b| b.3 < parent - tol).map(|(f, _, m, s)| (f, m, s))
}

/// Walks a serialized tree without using the library's node types.
pub fn predict_from_json(tree: &serde_json::Value, x: &[f64]) -> f64 {
    let nodes = tree["nodes"].as_array().expect("nodes array");
    let mut i = 0;
    loop {
        let n = &nodes[i];
        match n["kind"].as_str().expect("kind") {
            "leaf" => return n["value"].as_f64().expect("value"),
            "split" => {
                let f = n["feature"].as_u64().expect("feature") as usize;
                let t = n["threshold"].as_f64().expect("threshold");
                let next = if x[f] <= t { &n["left"] } else { &n["right"] };
                i = next.as_u64().expect("child") as usize;
            }
            k => panic!("unknown node kind {k}"),
        }
    }
}

// ------------------------------------------------------------- online loop

/// Depth-1 regression stump on a single scalar input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stump {
    Leaf(f64),
    Split { threshold: f64, left: f64, right: f64 },
}

impl Stump {
    pub fn fit(rows: &[(f64, f64)]) -> Stump {
        let mean = |r: &[(f64, f64)]| r.iter().map(|p| p.1).sum::<f64>() / r.len() as f64;
        let sse = |r: &[(f64, f64)]| {
            let m = mean(r);
            r.iter().map(|p| (p.1 - m).powi(2)).sum::<f64>()
        };
        let parent = sse(rows);
        let leaf = Stump::Leaf(mean(rows));
        if parent <= 1e-12 {
            return leaf;
        }
        let mut xs: Vec<f64> = rows.iter().map(|p| p.0).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let mut best: Option<(f64, f64)> = None;
        for w in xs.windows(2) {
            let (l, r): (Vec<_>, Vec<_>) = rows.iter().partition(|p| p.0 <= w[0]);
            let s = sse(&l) + sse(&r);
            if best.is_none_or(|(_, b)| s < b - 1e-12 * parent) {
                best = Some((w[0], s));
            }
        }
        match best {
            Some((lo, s)) if s < parent - 1e-12 * parent => {
                let hi = xs[xs.iter().position(|&v| v == lo).unwrap() + 1];
                let (l, r): (Vec<_>, Vec<_>) = rows.iter().partition(|p| p.0 <= lo);
                Stump::Split {
                    threshold: lo + (hi - lo) / 2.0,
                    left: mean(&l),
                    right: mean(&r),
                }
            }
            _ => leaf,
        }
    }

    pub fn predict(&self, x: f64) -> f64 {
        match *self {
            Stump::Leaf(v) => v,
            Stump::Split { threshold, left, right } => {
                if x <= threshold {
                    left
                } else {
                    right
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleStep {
    pub predicted: f64,
    pub variance: f64,
    pub queried: bool,
    pub retrained_on_error: u32,
    pub retrained_on_ttl: u32,
}

pub struct OracleParams {
    pub l: usize,
    pub n: usize,
    pub o: f64,
    pub t: f64,
    pub ttl: u64,
    pub seed: u64,
}

fn resample(seed: u64, learner: usize, rows: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut rng = learner_rng(seed, learner as u64);
    let idx = bootstrap_indices(&mut rng, rows.len());
    let _tree_seed = rng.next_u64();
    idx.into_iter().map(|i| rows[i]).collect()
}

/// The online loop stepped by hand on scalar inputs with stump learners.
/// Initialisation minutes are reported as measured with zero variance.
pub fn ppaw_oracle(p: &OracleParams, stream: &[(f64, f64)]) -> Vec<OracleStep> {
    let mut out = Vec::new();
    let mut buffer: Vec<(f64, f64)> = stream[..p.n].to_vec();
    for &(_, bpm) in &buffer {
        out.push(OracleStep {
            predicted: bpm,
            variance: 0.0,
            queried: true,
            retrained_on_error: 0,
            retrained_on_ttl: 0,
        });
    }
    let mut learners: Vec<Stump> = (0..p.l).map(|i| Stump::fit(&resample(p.seed, i, &buffer))).collect();
    let mut ages = vec![0u64; p.l];
    let mut history: Vec<f64> = Vec::new();

    for (step, &(x, bpm)) in stream[p.n..].iter().enumerate() {
        let salt = |purpose: u64| mix_seed(p.seed, step as u64 * 4 + purpose);
        for a in &mut ages {
            *a += 1;
        }
        let preds: Vec<f64> = learners.iter().map(|s| s.predict(x)).collect();
        let all_equal = preds.iter().all(|&v| v == preds[0]);
        let mean = preds.iter().sum::<f64>() / p.l as f64;
        let var = if all_equal {
            0.0
        } else {
            preds.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / p.l as f64
        };
        let outlier = if history.len() < p.n {
            true
        } else {
            let hm = history.iter().sum::<f64>() / p.n as f64;
            let hs = (history.iter().map(|h| (h - hm).powi(2)).sum::<f64>() / p.n as f64).sqrt();
            var > hm + p.o * hs
        };
        history.push(var);
        if history.len() > p.n {
            history.remove(0);
        }
        let mut o = OracleStep {
            predicted: if all_equal { preds[0] } else { mean },
            variance: var,
            queried: outlier,
            retrained_on_error: 0,
            retrained_on_ttl: 0,
        };
        if outlier {
            buffer.push((x, bpm));
            if buffer.len() > p.n {
                buffer.remove(0);
            }
            for (i, l) in learners.iter_mut().enumerate() {
                *l = Stump::fit(&resample(salt(1), i, &buffer));
            }
            for i in 0..p.l {
                if (preds[i] - bpm).abs() > p.t {
                    learners[i] = Stump::fit(&resample(salt(2), i, &buffer));
                    ages[i] = 0;
                    o.retrained_on_error += 1;
                }
            }
        }
        for i in 0..p.l {
            if ages[i] >= p.ttl {
                learners[i] = Stump::fit(&resample(salt(3), i, &buffer));
                ages[i] = 0;
                o.retrained_on_ttl += 1;
            }
        }
        out.push(o);
    }
    out
}

/// Scalar input placed in a feature vector whose other fields are zero.
pub fn scalar_features(x: f64) -> FeatureVector {
    let mut v = [0.0; 39];
    v[4] = x; // x_mean
    FeatureVector::from_array(v)
}

/// The scripted 20-minute stream: a rest/walk pattern whose heart-rate
/// mapping jumps by 15 bpm at minute 12.
pub fn scripted_stream() -> Vec<(f64, f64)> {
    let x = [
        0.05, 0.40, 0.10, 0.80, 0.45, 0.07, 0.42, 0.90, 0.12, 0.38, 0.85, 0.50, 0.06, 0.44, 0.95, 0.11, 0.41,
        0.83, 0.09, 0.47,
    ];
    x.iter()
        .enumerate()
        .map(|(m, &v)| {
            let shift = if m >= 12 { 15.0 } else { 0.0 };
            (v, 60.0 + 50.0 * v + shift + if m % 3 == 0 { 1.5 } else { -0.5 })
        })
        .collect()
}

// ------------------------------------------------------------- synthetic

/// Generated, aligned and phase-labelled minutes.
pub fn synth_records(cfg: &SynthConfig) -> Vec<MinuteRecord> {
    let (accel, hr) = synth_stream(cfg).expect("valid synthetic config");
    let mut recs = align_minutes(&accel, &hr, cfg.sample_rate_hz).expect("aligned");
    label_phases(&mut recs, &cfg.phase_boundaries());
    recs
}

pub fn phase(records: &[MinuteRecord], p: u32) -> Vec<MinuteRecord> {
    records.iter().filter(|r| r.phase == p).copied().collect()
}

/// Constant-intensity activity, no noise, no drift: every minute looks the
/// same and carries the same heart rate.
pub fn stationary_config(minutes: u64) -> SynthConfig {
    SynthConfig {
        n_minutes_per_phase: minutes,
        n_phases: 1,
        drift_strength: 0.0,
        noise_bpm_std: 0.0,
        accel_noise_g: 0.0,
        activity_regimes: vec![ActivityRegime::new((60, 60), (0.4, 0.4))],
        ..Default::default()
    }
}
