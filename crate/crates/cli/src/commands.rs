use std::fmt::Display;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::time::Duration;

use ppaw_core::eval::{
    run_offline_cross_phase, run_offline_same_phase, run_ppaw_experiment, sweep_o, write_plot_csv, write_sweep_csv,
    EvalError, OfflineConfig,
};
use ppaw_core::features::{parse_feature_csv, write_feature_csv};
use ppaw_core::ingest::{
    label_phases, load_manifest_records, parse_hr_csv, synth_write, AccelReader, IngestError, Manifest, MinuteAligner,
    MinuteRecord, SynthConfig,
};
use ppaw_core::link::{
    gateway_accept, gateway_serve, wearable_replay, EnergyModel, GatewayConfig, GatewayOutcome, ProtocolError,
    WearableConfig,
};
use ppaw_core::ppaw::{parse_trace_csv, write_trace_csv, PpawConfig};
use ppaw_core::regress::TreeParams;

use crate::args::*;

/// A failed command: exit code plus the `error: <category>: <detail>` line.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub category: &'static str,
    pub detail: String,
}

impl Failure {
    pub fn usage(detail: impl Display) -> Self {
        Self { code: 1, category: "usage", detail: detail.to_string() }
    }

    fn data(category: &'static str, detail: impl Display) -> Self {
        Self { code: 2, category, detail: detail.to_string() }
    }
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Io(e) => Failure::data("io", e),
            e => Failure::data("input", e),
        }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Metric(_) | EvalError::Experiment(_) => Failure::data("experiment", e),
            e => Failure::data("model", e),
        }
    }
}

impl From<ProtocolError> for Failure {
    fn from(e: ProtocolError) -> Self {
        match e {
            ProtocolError::Io(_) => Failure::data("io", e),
            ProtocolError::Input(_) => Failure::data("input", e),
            e => Failure::data("protocol", e),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::data("io", e)
    }
}

type Result<T = ()> = std::result::Result<T, Failure>;

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Failure::data("io", format!("{}: {e}", dir.display())))?;
    }
    let f = File::create(path).map_err(|e| Failure::data("io", format!("{}: {e}", path.display())))?;
    Ok(BufWriter::with_capacity(1 << 16, f))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).map_err(|e| Failure::data("io", format!("{}: {e}", path.display())))?;
    Ok(BufReader::with_capacity(1 << 20, f))
}

fn write_file(path: &Path, text: &str) -> Result {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn load_records(src: &DataSource) -> Result<Vec<MinuteRecord>> {
    match (&src.data, &src.features) {
        (Some(m), _) => Ok(load_manifest_records(m)?.1),
        (None, Some(f)) => Ok(parse_feature_csv(open(f)?)?),
        (None, None) => Err(Failure::usage("one of --data or --features is required")),
    }
}

fn tree_params(m: &ModelArgs) -> Result<TreeParams> {
    let t = TreeParams { max_depth: m.max_depth, min_samples_leaf: m.min_samples_leaf, n_candidate_splits: None };
    t.validate().map_err(Failure::usage)?;
    Ok(t)
}

fn ppaw_config(o: f64, online: &OnlineArgs, model: &ModelArgs) -> Result<PpawConfig> {
    let cfg = PpawConfig {
        n_learners: model.l,
        history: online.n,
        uncertainty: o,
        error_threshold: online.t,
        ttl: online.ttl,
        tree: tree_params(model)?,
        seed: model.seed,
    };
    cfg.validate().map_err(Failure::usage)?;
    Ok(cfg)
}

fn energy_model(e: &EnergyArgs) -> Result<EnergyModel> {
    let m = EnergyModel { accel_cost_per_minute: e.accel_cost, ppg_cost_per_query: e.ppg_cost };
    m.validate().map_err(Failure::usage)?;
    Ok(m)
}

fn check_rate(rate: u32) -> Result {
    if !(2..=1000).contains(&rate) {
        return Err(Failure::usage("--rate must be in [2, 1000]"));
    }
    Ok(())
}

fn print(text: &str) -> Result {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

pub fn synth(a: &SynthArgs) -> Result {
    let cfg = SynthConfig {
        n_minutes_per_phase: a.minutes_per_phase,
        n_phases: a.phases,
        sample_rate_hz: a.rate,
        seed: a.seed,
        drift_strength: a.drift,
        noise_bpm_std: a.noise,
        accel_noise_g: a.accel_noise,
        ..Default::default()
    };
    cfg.validate().map_err(Failure::usage)?;
    synth_write(&cfg, &a.out)?;
    print(&format!("{}\n", a.out.join("manifest.json").display()))
}

pub fn extract(a: &ExtractArgs) -> Result {
    let records = match (&a.data, &a.accel, &a.hr) {
        (Some(m), _, _) => load_manifest_records(m)?.1,
        (None, Some(accel), Some(hr)) => {
            check_rate(a.rate)?;
            if !a.phase_boundaries.windows(2).all(|w| w[0] < w[1]) {
                return Err(Failure::usage("--phase-boundaries must be strictly increasing"));
            }
            let hr = parse_hr_csv(open(hr)?)?;
            let mut aligner = MinuteAligner::new(&hr, a.rate);
            let mut records = Vec::new();
            for s in AccelReader::new(open(accel)?)? {
                records.extend(aligner.push(s?));
            }
            records.extend(aligner.finish());
            if records.is_empty() {
                return Err(IngestError::EmptyAlignment.into());
            }
            label_phases(&mut records, &a.phase_boundaries);
            records
        }
        _ => return Err(Failure::usage("give --data or both --accel and --hr")),
    };
    write_feature_csv(create(&a.out)?, &records)?;
    print(&format!("{}\n", a.out.display()))
}

fn phase_records(records: &[MinuteRecord], p: u32) -> Vec<MinuteRecord> {
    records.iter().filter(|r| r.phase == p).copied().collect()
}

pub fn offline(a: &OfflineArgs) -> Result {
    let cfg = OfflineConfig {
        n_learners: a.model.l,
        tree: tree_params(&a.model)?,
        train_frac: a.train_frac,
        seed: a.model.seed,
    };
    if cfg.n_learners < 1 {
        return Err(Failure::usage("--L must be >= 1"));
    }
    if !(a.train_frac > 0.0 && a.train_frac < 1.0) {
        return Err(Failure::usage("--train-frac must lie in (0, 1)"));
    }
    if a.mode == OfflineMode::CrossPhase && a.train_phase == a.test_phase {
        return Err(Failure::usage("--train-phase and --test-phase must differ"));
    }
    let records = load_records(&a.source)?;
    let train = phase_records(&records, a.train_phase);
    let report = match a.mode {
        OfflineMode::SamePhase => run_offline_same_phase(&train, &cfg)?,
        OfflineMode::CrossPhase => run_offline_cross_phase(&train, &phase_records(&records, a.test_phase), &cfg)?,
    };
    let json = report.to_json();
    write_file(&a.out.join("report.json"), &json)?;
    print(&json)
}

pub fn ppaw(a: &PpawArgs) -> Result {
    let cfg = ppaw_config(a.o, &a.online, &a.model)?;
    let records = load_records(&a.source)?;
    let (mut report, trace) = run_ppaw_experiment(&records, &cfg)?;
    write_trace_csv(create(&a.out.join("trace.csv"))?, &trace)?;
    report.trace_path = Some("trace.csv".into());
    let json = report.to_json();
    write_file(&a.out.join("report.json"), &json)?;
    print(&json)
}

pub fn sweep(a: &SweepArgs) -> Result {
    if a.o.is_empty() {
        return Err(Failure::usage("--O needs at least one value"));
    }
    let mut base = None;
    for &o in &a.o {
        base = Some(ppaw_config(o, &a.online, &a.model)?);
    }
    let records = load_records(&a.source)?;
    let reports = sweep_o(&records, &base.expect("non-empty"), &a.o)?;
    let mut csv = Vec::new();
    write_sweep_csv(&mut csv, &a.o, &reports)?;
    let csv = String::from_utf8(csv).expect("ascii");
    write_file(&a.out.join("sweep.csv"), &csv)?;
    print(&csv)
}

fn timeout(secs: f64) -> Result<Option<Duration>> {
    if !(secs.is_finite() && secs >= 0.0) {
        return Err(Failure::usage("--timeout must be finite and >= 0"));
    }
    // zero disables the timeout
    Ok((secs > 0.0).then(|| Duration::from_secs_f64(secs)))
}

fn save_session(dir: &Path, prefix: &str, o: &GatewayOutcome) -> Result<String> {
    let json = o.summary.to_json();
    write_file(&dir.join(format!("{prefix}summary.json")), &json)?;
    write_trace_csv(create(&dir.join(format!("{prefix}trace.csv")))?, &o.trace)?;
    Ok(json)
}

pub fn gateway(a: &GatewayArgs) -> Result {
    let cfg = GatewayConfig { ppaw: ppaw_config(a.o, &a.online, &a.model)?, energy: energy_model(&a.energy)? };
    let timeout = timeout(a.timeout)?;
    if a.sessions < 1 {
        return Err(Failure::usage("--sessions must be >= 1"));
    }
    let listener = TcpListener::bind(&a.listen).map_err(|e| Failure::data("io", format!("{}: {e}", a.listen)))?;
    eprintln!("listening {}", listener.local_addr()?);

    let outcomes = if a.sessions == 1 {
        let mut log = create(&a.out.join("transcript.txt"))?;
        let o = gateway_accept(&listener, &cfg, timeout, Some(&mut log))?;
        log.flush()?;
        let json = save_session(&a.out, "", &o)?;
        print(&json)?;
        vec![o]
    } else {
        let outcomes = gateway_serve(&listener, &cfg, timeout, a.sessions)?;
        for (i, o) in outcomes.iter().enumerate() {
            let json = save_session(&a.out, &format!("session-{i}-"), o)?;
            print(&json)?;
        }
        outcomes
    };
    match outcomes.into_iter().find_map(|o| o.error) {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

pub fn wearable(a: &WearableArgs) -> Result {
    let energy = energy_model(&a.energy)?;
    if let Some(p) = a.realtime {
        if !(p.is_finite() && p > 0.0) {
            return Err(Failure::usage("--realtime must be finite and > 0"));
        }
    }
    let (accel_path, hr_path, rate) = match (&a.data, &a.accel, &a.hr) {
        (Some(m), _, _) => {
            let manifest = Manifest::load(m)?;
            let dir = m.parent().map(Path::to_path_buf).unwrap_or_default();
            (dir.join(&manifest.accel_file), dir.join(&manifest.hr_file), manifest.config.sample_rate_hz)
        }
        (None, Some(accel), Some(hr)) => (accel.clone(), hr.clone(), a.rate),
        _ => return Err(Failure::usage("give --data or both --accel and --hr")),
    };
    check_rate(rate)?;
    let hr = parse_hr_csv(open(&hr_path)?)?;
    let samples = AccelReader::new(open(&accel_path)?)?;
    let cfg = WearableConfig { patient_id: a.patient_id.clone(), sample_rate_hz: rate, energy, pace: a.realtime };
    let stream =
        TcpStream::connect(&a.connect).map_err(|e| Failure::data("io", format!("{}: {e}", a.connect)))?;
    stream.set_nodelay(true)?;
    let outcome = wearable_replay(stream, samples, &hr, &cfg)?;
    let mut json = serde_json::to_string_pretty(&outcome.ledger).expect("ledger serializes");
    json.push('\n');
    write_file(&a.out.join("ledger.json"), &json)?;
    print(&json)
}

pub fn report(a: &ReportArgs) -> Result {
    let trace = parse_trace_csv(open(&a.trace)?)?;
    let records = match (&a.data, &a.features) {
        (Some(m), _) => Some(load_manifest_records(m)?.1),
        (None, Some(f)) => Some(parse_feature_csv(open(f)?)?),
        (None, None) => None,
    };
    let out: PathBuf = a.out.join("plot.csv");
    write_plot_csv(create(&out)?, &trace, records.as_deref())?;
    print(&format!("{}\n", out.display()))
}
