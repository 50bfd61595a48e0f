//! Configuration files, orchestration and the CSV/JSON result sink.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiments::{run_experiment, ExperimentConfig, ExperimentKind, ExperimentOutput, PlotSeries, ResultRow, Verdict};
use crate::stable::{Flavor, StableSpec};

/// Header of `results.csv`.
pub const CSV_COLUMNS: [&str; 9] = ["experiment", "param_json", "j", "mean", "stderr", "trials", "target", "z", "verdict"];

/// Environment variable that overrides the thread count.
pub const THREADS_ENV: &str = "LEVYHULL_THREADS";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    experiments: Vec<ExperimentConfig>,
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<Vec<ExperimentConfig>> {
    let file: ConfigFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if file.experiments.is_empty() {
        return Err(Error::Validation {
            field: "experiments".into(),
            message: "at least one experiment is required".into(),
        });
    }
    for (i, cfg) in file.experiments.iter().enumerate() {
        cfg.validate().map_err(|e| match e {
            Error::Validation { field, message } => Error::Validation {
                field: format!("experiments[{i}].{field}"),
                message,
            },
            other => other,
        })?;
    }
    Ok(file.experiments)
}

/// Reads a JSON config file with a top-level `experiments` array.
pub fn load_config(path: &Path) -> Result<Vec<ExperimentConfig>> {
    parse_config(&fs::read_to_string(path)?)
}

/// SHA-256 of the canonical JSON form of the resolved configs.
pub fn config_digest(configs: &[ExperimentConfig]) -> String {
    let json = serde_json::to_string(configs).expect("configs serialize");
    hex::encode(Sha256::digest(json.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub timestamp: String,
    pub config_digest: String,
    pub configs: Vec<ExperimentConfig>,
    pub results: Vec<ResultRow>,
    pub verdicts: BTreeMap<String, Verdict>,
    #[serde(skip)]
    pub series: Vec<PlotSeries>,
    #[serde(skip)]
    pub notes: BTreeMap<String, Vec<String>>,
}

impl RunManifest {
    /// 0 when every non-INFO verdict passed, 1 otherwise.
    pub fn exit_status(&self) -> i32 {
        if self.results.iter().any(|r| r.verdict == Verdict::Fail) {
            1
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub threads: Option<usize>,
    pub dump_polytopes: bool,
}

/// `LEVYHULL_THREADS` if set and valid, else the flag value.
pub fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_ENV}={v:?} is not a positive integer"))),
        },
        Err(_) => Ok(flag),
    }
}

/// Runs every config and writes `results.csv`, `summary.json`, `manifest.json`
/// and the plot series into `out_dir`.
pub fn run_all(configs: &[ExperimentConfig], out_dir: &Path) -> Result<RunManifest> {
    run_all_with(configs, out_dir, &RunOptions::default())
}

pub fn run_all_with(configs: &[ExperimentConfig], out_dir: &Path, opts: &RunOptions) -> Result<RunManifest> {
    fs::create_dir_all(out_dir)?;
    let outputs = with_threads(opts.threads, || configs.iter().map(run_experiment).collect::<Result<Vec<_>>>())??;
    let manifest = assemble(configs, &outputs);
    write_results_csv(&manifest.results, &out_dir.join("results.csv"))?;
    write_json(&out_dir.join("summary.json"), &summary(&manifest, &outputs))?;
    write_json(&out_dir.join("manifest.json"), &manifest)?;
    emit_plot_data(&manifest, out_dir)?;
    if opts.dump_polytopes {
        dump_polytopes(&outputs, out_dir)?;
    }
    Ok(manifest)
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T: Send>(_threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    Ok(f())
}

fn assemble(configs: &[ExperimentConfig], outputs: &[ExperimentOutput]) -> RunManifest {
    let digest = config_digest(configs);
    let now = chrono::Utc::now();
    RunManifest {
        run_id: format!("{}-{}", &digest[..12], now.format("%Y%m%dT%H%M%SZ")),
        timestamp: now.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        config_digest: digest,
        configs: configs.to_vec(),
        results: outputs.iter().flat_map(|o| o.rows.iter().cloned()).collect(),
        verdicts: outputs.iter().map(|o| (o.name.clone(), o.verdict())).collect(),
        series: outputs.iter().flat_map(|o| o.series.iter().cloned()).collect(),
        notes: outputs.iter().map(|o| (o.name.clone(), o.notes.clone())).collect(),
    }
}

fn summary(m: &RunManifest, outputs: &[ExperimentOutput]) -> serde_json::Value {
    let count = |v: Verdict| m.results.iter().filter(|r| r.verdict == v).count();
    let experiments: Vec<serde_json::Value> = outputs
        .iter()
        .map(|o| {
            serde_json::json!({
                "name": o.name,
                "verdict": o.verdict(),
                "rows": o.rows.len(),
                "notes": o.notes,
            })
        })
        .collect();
    serde_json::json!({
        "run_id": m.run_id,
        "config_digest": m.config_digest,
        "pass": count(Verdict::Pass),
        "fail": count(Verdict::Fail),
        "info": count(Verdict::Info),
        "exit_status": m.exit_status(),
        "experiments": experiments,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).expect("json serialize");
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(w)
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Serializes result rows with the fixed column order.
pub fn results_csv_bytes(rows: &[ResultRow]) -> Result<Vec<u8>> {
    let mut w = csv_writer(Vec::new());
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for r in rows {
        let e = &r.estimate;
        w.write_record([
            r.experiment.clone(),
            r.param_json(),
            r.j.map(|j| j.to_string()).unwrap_or_default(),
            e.mean.to_string(),
            e.stderr.to_string(),
            e.trials.to_string(),
            fmt_opt(e.target_value()),
            fmt_opt(e.z_score),
            r.verdict.as_str().to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn write_results_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    fs::write(path, results_csv_bytes(rows)?)?;
    Ok(())
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Writes one CSV per plot series into `out_dir/plots`; nothing when the
/// manifest has no series.
pub fn emit_plot_data(manifest: &RunManifest, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    if manifest.series.is_empty() {
        return Ok(files);
    }
    let dir = out_dir.join("plots");
    fs::create_dir_all(&dir)?;
    for s in &manifest.series {
        let path = dir.join(format!("{}.csv", file_stem(&s.name)));
        let mut w = csv_writer(Vec::new());
        w.write_record(&s.columns).map_err(csv_err)?;
        for row in &s.rows {
            w.write_record(row.iter().map(|v| v.to_string())).map_err(csv_err)?;
        }
        fs::write(&path, w.into_inner().map_err(|e| Error::Io(e.into_error()))?)?;
        files.push(path);
    }
    Ok(files)
}

fn dump_polytopes(outputs: &[ExperimentOutput], out_dir: &Path) -> Result<()> {
    let dir = out_dir.join("polytopes");
    fs::create_dir_all(&dir)?;
    for o in outputs {
        for (i, p) in o.sample_polytopes.iter().enumerate() {
            fs::write(dir.join(format!("{}_{i}.json", file_stem(&o.name))), p.to_json() + "\n")?;
        }
    }
    Ok(())
}

/// Short end-to-end suite: 200 trials per experiment.
pub fn smoke_suite(seed: u64) -> Vec<ExperimentConfig> {
    use ExperimentKind::*;
    let bm = StableSpec::brownian(2);
    let mk = |kind: ExperimentKind, spec: StableSpec, n: usize| {
        let mut c = ExperimentConfig::new(kind, spec);
        c.name = Some(format!("smoke_{}", kind.label()));
        c.trials = 200;
        c.n_steps = n;
        c.master_seed = seed;
        c
    };
    let mut iv = mk(IntrinsicVolumes, bm.clone(), 1000);
    iv.n_values = vec![100, 1000];
    let mut sc = mk(ScalingRatio, bm.clone(), 200);
    sc.horizons = vec![1.0, 4.0];
    let gram = mk(GramDeterminant, bm.clone(), 1);
    let mut faces = mk(FacesCount, bm.clone(), 100);
    faces.n_values = vec![10, 100];
    let mut lp = mk(LpBrownian, bm.clone(), 1000);
    lp.p_values = vec![1.0, 2.0];
    lp.quad_points = 512;
    let mut renewal = mk(Renewal, bm, 1);
    renewal.t_values = vec![5.0, 20.0];
    renewal.dt = Some(0.01);
    renewal.batch_trials = Some(2000);
    let heavy = StableSpec::new(
        1.5,
        1.0,
        2,
        Flavor::CompoundPoissonHeavy {
            tail_alpha: 1.5,
            jump_rate: 3.0,
            drift: vec![0.0, 0.0],
        },
    )
    .expect("valid smoke spec");
    let exit = mk(ExitTail, heavy, 1);
    vec![iv, sc, gram, faces, lp, renewal, exit]
}

/// `(label, description)` for every experiment kind.
pub fn list_experiments() -> Vec<(&'static str, &'static str)> {
    ExperimentKind::ALL.iter().map(|k| (k.label(), k.description())).collect()
}
