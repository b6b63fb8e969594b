//! Batch experiments driven by an [`ExperimentConfig`], writing CSV or JSON.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::dichotomy::{classify, consistency_with_commutator};
use crate::error::{LabError, Result};
use crate::fmt::sig;
use crate::lyapunov::{linspace, lyapunov_curve};
use crate::model::{load_measure, measure_to_json, sample_realization, DisorderMeasure, ModelFile};
use crate::spectra::{
    decay_csv, decay_fit, dynamical_moment, eigenpairs, eigenvalues, spectrum_csv, FiniteBox, DEFAULT_TOL,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Lyapunov,
    Dichotomy,
    Spectrum,
    Decay,
    Dynamics,
    Bands,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Lyapunov => "lyapunov",
            Experiment::Dichotomy => "dichotomy",
            Experiment::Spectrum => "spectrum",
            Experiment::Decay => "decay",
            Experiment::Dynamics => "dynamics",
            Experiment::Bands => "bands",
        }
    }

    fn default_format(self) -> Format {
        match self {
            Experiment::Dichotomy => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug)]
pub enum ModelSource {
    Path(PathBuf),
    Inline(DisorderMeasure),
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub model: ModelSource,
    pub experiment: Experiment,
    pub emin: f64,
    pub emax: f64,
    pub points: usize,
    pub cells: usize,
    pub steps: usize,
    pub replicas: usize,
    pub seed: u64,
    pub output: PathBuf,
    /// `None` picks CSV, or JSON for the dichotomy verdict.
    pub format: Option<Format>,
    /// Worker threads; `None` uses every processor.
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, model: ModelSource, output: impl Into<PathBuf>) -> Self {
        Self {
            model,
            experiment,
            emin: 0.5,
            emax: 30.0,
            points: 100,
            cells: 100,
            steps: crate::lyapunov::DEFAULT_STEPS,
            replicas: crate::lyapunov::DEFAULT_REPLICAS,
            seed: 0,
            output: output.into(),
            format: None,
            threads: None,
        }
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(self.experiment.default_format())
    }

    fn validate(&self) -> Result<()> {
        let bad = |field: &str, message: String| Err(LabError::Config { field: field.into(), message });
        if !(self.emin.is_finite() && self.emax.is_finite() && self.emin < self.emax) {
            return bad("emin", format!("need finite emin < emax, got [{}, {}]", self.emin, self.emax));
        }
        let uses_grid = matches!(self.experiment, Experiment::Lyapunov | Experiment::Bands | Experiment::Dynamics);
        if uses_grid && self.points < 2 {
            return bad("points", format!("need at least 2 grid points, got {}", self.points));
        }
        let spectral = matches!(self.experiment, Experiment::Spectrum | Experiment::Decay | Experiment::Dynamics);
        if spectral && self.cells < 2 {
            return bad("cells", format!("need at least 2 cells, got {}", self.cells));
        }
        if self.experiment == Experiment::Decay && self.cells < 40 {
            return bad("cells", format!("decay fits need at least 40 cells, got {}", self.cells));
        }
        if self.experiment == Experiment::Lyapunov {
            if self.steps < crate::lyapunov::MIN_STEPS {
                return bad("steps", format!("need at least {} steps", crate::lyapunov::MIN_STEPS));
            }
            if self.replicas == 0 {
                return bad("replicas", "need at least one replica".into());
            }
        }
        if self.threads == Some(0) {
            return bad("threads", "need at least one thread".into());
        }
        if self.format() == Format::Csv && self.experiment == Experiment::Dichotomy {
            return bad("format", "the dichotomy verdict is written as JSON".into());
        }
        Ok(())
    }

    fn load(&self) -> Result<DisorderMeasure> {
        match &self.model {
            ModelSource::Inline(m) => Ok(m.clone()),
            ModelSource::Path(p) => load_measure(p)
                .map_err(|e| LabError::Config { field: "model".into(), message: format!("{}: {e}", p.display()) }),
        }
    }

    /// SHA-256 over the experiment parameters and the model contents.
    /// Output path and thread count do not enter.
    pub fn hash(&self, measure: &DisorderMeasure) -> String {
        let canon = json!({
            "experiment": self.experiment,
            "model": ModelFile::from(measure),
            "emin": self.emin,
            "emax": self.emax,
            "points": self.points,
            "cells": self.cells,
            "steps": self.steps,
            "replicas": self.replicas,
            "seed": self.seed,
            "format": self.format(),
        });
        let digest = Sha256::digest(canon.to_string().as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

/// `LAB_SEED` from the environment when set, otherwise `fallback`.
pub fn resolve_seed(fallback: u64) -> Result<u64> {
    match std::env::var("LAB_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| LabError::Config {
            field: "LAB_SEED".into(),
            message: format!("`{v}` is not an unsigned 64-bit integer"),
        }),
        Err(_) => Ok(fallback),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub experiment: Experiment,
    pub model: String,
    pub seconds: f64,
    pub output: PathBuf,
}

impl std::fmt::Display for RunSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} model={} wall={:.3}s out={}",
            self.experiment.name(),
            self.model,
            self.seconds,
            self.output.display()
        )
    }
}

/// Process exit status for an error returned by [`run`].
pub fn exit_code(err: &LabError) -> i32 {
    match err {
        LabError::Config { .. } | LabError::InvalidModel(_) | LabError::UnsupportedModel(_) | LabError::Domain(_) => 2,
        LabError::Consistency(_) => 3,
        _ => 1,
    }
}

/// Where a consistency failure writes its diagnostic payload.
pub fn diagnostic_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".diagnostic.json");
    output.with_file_name(name)
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| LabError::Io(e.error))?;
    Ok(())
}

struct Header {
    lines: Vec<(String, String)>,
}

impl Header {
    fn comment(&self) -> String {
        self.lines.iter().map(|(k, v)| format!("{k}: {v}")).collect::<Vec<_>>().join("\n")
    }

    fn json(&self) -> serde_json::Value {
        serde_json::Value::Object(self.lines.iter().map(|(k, v)| (k.clone(), json!(v))).collect())
    }
}

pub fn run(config: &ExperimentConfig) -> Result<RunSummary> {
    config.validate()?;
    let measure = config.load()?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()
        .map_err(|e| LabError::Config { field: "threads".into(), message: e.to_string() })?;
    let header = Header {
        lines: vec![
            ("tool".into(), format!("pointlab {VERSION}")),
            ("experiment".into(), config.experiment.name().into()),
            ("model".into(), measure.name.clone()),
            ("config".into(), config.hash(&measure)),
            ("seed".into(), config.seed.to_string()),
        ],
    };
    let produced = pool.install(|| produce(config, &measure, &header));
    let body = match produced {
        Ok(b) => b,
        Err(err) => {
            if let LabError::Consistency(msg) = &err {
                let payload = json!({
                    "header": header.json(),
                    "error": msg,
                    "model": serde_json::from_str::<serde_json::Value>(&measure_to_json(&measure)?)?,
                });
                write_atomic(&diagnostic_path(&config.output), serde_json::to_string_pretty(&payload)?.as_bytes())?;
            }
            return Err(err);
        }
    };
    write_atomic(&config.output, body.as_bytes())?;
    Ok(RunSummary {
        experiment: config.experiment,
        model: measure.name.clone(),
        seconds: start.elapsed().as_secs_f64(),
        output: config.output.clone(),
    })
}

fn json_doc(header: &Header, key: &str, value: serde_json::Value) -> Result<String> {
    let mut doc = serde_json::Map::new();
    doc.insert("header".into(), header.json());
    doc.insert(key.into(), value);
    Ok(serde_json::to_string_pretty(&serde_json::Value::Object(doc))? + "\n")
}

/// The box used by the spectral experiments: sites centered on the origin
/// with Neumann ends.
pub fn experiment_box(measure: &DisorderMeasure, cells: usize, seed: u64) -> Result<FiniteBox> {
    let half = (cells / 2) as i64;
    let window = (1 - half)..=(cells as i64 - half);
    FiniteBox::neumann(&sample_realization(measure, seed, window)?)
}

fn produce(config: &ExperimentConfig, measure: &DisorderMeasure, header: &Header) -> Result<String> {
    let window = (config.emin, config.emax);
    match config.experiment {
        Experiment::Lyapunov => {
            let grid = linspace(config.emin, config.emax, config.points);
            let curve = lyapunov_curve(measure, &grid, config.steps, config.replicas, config.seed)?;
            match config.format() {
                Format::Csv => Ok(curve.to_csv(Some(&header.comment()))),
                Format::Json => json_doc(header, "curve", serde_json::to_value(&curve)?),
            }
        }
        Experiment::Dichotomy => {
            let verdict = classify(measure);
            let mut value = verdict.to_json();
            if !measure.has_separating() {
                value["commutator"] = serde_json::to_value(consistency_with_commutator(measure)?)?;
            }
            json_doc(header, "dichotomy", value)
        }
        Experiment::Spectrum => {
            let bx = experiment_box(measure, config.cells, config.seed)?;
            match config.format() {
                Format::Csv => Ok(spectrum_csv(&eigenvalues(&bx, window, DEFAULT_TOL)?, Some(&header.comment()))),
                Format::Json => {
                    json_doc(header, "eigenpairs", serde_json::to_value(eigenpairs(&bx, window, DEFAULT_TOL)?)?)
                }
            }
        }
        Experiment::Decay => {
            let bx = experiment_box(measure, config.cells, config.seed)?;
            let rows: Vec<_> = eigenpairs(&bx, window, DEFAULT_TOL)?
                .iter()
                .map(|p| {
                    let fit = decay_fit(p).unwrap_or(crate::spectra::DecayFit {
                        center: 0,
                        rate: f64::NAN,
                        r_squared: f64::NAN,
                        points: 0,
                    });
                    (p.energy, fit)
                })
                .collect();
            match config.format() {
                Format::Csv => Ok(decay_csv(&rows, Some(&header.comment()))),
                Format::Json => {
                    let list: Vec<_> = rows.iter().map(|(e, f)| json!({"E": e, "fit": f})).collect();
                    json_doc(header, "decay", json!(list))
                }
            }
        }
        Experiment::Dynamics => {
            let bx = experiment_box(measure, config.cells, config.seed)?;
            let times: Vec<f64> = linspace(0.0, 4.0, config.points).iter().map(|x| 10f64.powf(*x)).collect();
            let series = dynamical_moment(&bx, window, 2.0, (-1.0, 1.0), &times)?;
            match config.format() {
                Format::Csv => {
                    let mut s = comment_block(&header.comment());
                    s.push_str("t,moment\n");
                    for (t, m) in series.times.iter().zip(&series.moments) {
                        let _ = writeln!(s, "{},{}", sig(*t, 12), sig(*m, 12));
                    }
                    Ok(s)
                }
                Format::Json => json_doc(header, "dynamics", serde_json::to_value(&series)?),
            }
        }
        Experiment::Bands => {
            let rows = bands(measure, &linspace(config.emin, config.emax, config.points))?;
            match config.format() {
                Format::Csv => {
                    let mut s = comment_block(&header.comment());
                    s.push_str("E,trace,inBand\n");
                    for r in &rows {
                        let _ = writeln!(s, "{},{},{}", sig(r.energy, 12), sig(r.trace, 12), r.in_band);
                    }
                    Ok(s)
                }
                Format::Json => json_doc(header, "bands", serde_json::to_value(&rows)?),
            }
        }
    }
}

fn comment_block(text: &str) -> String {
    text.lines().map(|l| format!("# {l}\n")).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BandPoint {
    #[serde(rename = "E")]
    pub energy: f64,
    pub trace: f64,
    #[serde(rename = "inBand")]
    pub in_band: bool,
}

/// Trace of the one-step matrix of a single-atom measure and `|trace| ≤ 2`.
pub fn bands(measure: &DisorderMeasure, grid: &[f64]) -> Result<Vec<BandPoint>> {
    if measure.len() != 1 {
        return Err(LabError::Config {
            field: "model".into(),
            message: format!("bands need a single-atom measure, got {} atoms", measure.len()),
        });
    }
    let atom = measure.atoms()[0]
        .transfer_atom()
        .ok_or_else(|| LabError::Config { field: "model".into(), message: "bands need a connecting atom".into() })?;
    grid.iter()
        .map(|&e| {
            let trace = atom.transfer(e)?.trace();
            Ok(BandPoint { energy: e, trace, in_band: trace.abs() <= 2.0 })
        })
        .collect()
}
