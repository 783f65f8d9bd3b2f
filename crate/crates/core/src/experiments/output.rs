use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::norms::MomentEstimate;
use crate::stats::LinearFit;

use super::config::{StudyConfig, StudyKind};

/// One CSV line. Per-replica records have `agg = 0` and a replica index;
/// aggregates have `agg = 1` and carry an interval and a replica count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub agg: u8,
    pub label: String,
    pub n: Option<u32>,
    pub replica: Option<u64>,
    /// Abscissa: separation, time or distance, depending on the label.
    pub x: Option<f64>,
    pub p: Option<f64>,
    pub estimate: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub replicas: Option<usize>,
    /// For a record, 1 when its replica was gated out.
    pub gated_fraction: Option<f64>,
    pub root_seed: u64,
}

impl Row {
    pub fn record(label: &str, n: Option<u32>, replica: u64, x: Option<f64>, value: f64, gated_out: bool, seed: u64) -> Self {
        Row {
            agg: 0,
            label: label.to_string(),
            n,
            replica: Some(replica),
            x,
            p: None,
            estimate: value,
            ci_low: None,
            ci_high: None,
            replicas: None,
            gated_fraction: Some(if gated_out { 1.0 } else { 0.0 }),
            root_seed: seed,
        }
    }

    pub fn aggregate(e: &MomentEstimate, n: Option<u32>, x: Option<f64>, seed: u64) -> Self {
        Row {
            agg: 1,
            label: e.label.clone(),
            n,
            replica: None,
            x,
            p: (e.p > 0.0).then_some(e.p),
            estimate: e.estimate,
            ci_low: Some(e.ci_low),
            ci_high: Some(e.ci_high),
            replicas: Some(e.replicas),
            gated_fraction: Some(e.gated_out as f64 / e.replicas as f64),
            root_seed: seed,
        }
    }

    /// Deterministic aggregate without an interval.
    pub fn value(label: &str, n: Option<u32>, x: Option<f64>, value: f64, seed: u64) -> Self {
        Row {
            agg: 1,
            label: label.to_string(),
            n,
            replica: None,
            x,
            p: None,
            estimate: value,
            ci_low: None,
            ci_high: None,
            replicas: None,
            gated_fraction: None,
            root_seed: seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRow {
    pub label: String,
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub points: usize,
}

impl FitRow {
    pub fn new(label: &str, fit: LinearFit, points: usize) -> Self {
        FitRow { label: label.to_string(), slope: fit.slope, intercept: fit.intercept, slope_se: fit.slope_se, points }
    }
}

/// A pass/fail comparison against a fixed slack band.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn at_most(name: &str, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Check { name: name.into(), value, threshold, pass: value <= threshold, detail: detail.into() }
    }

    pub fn at_least(name: &str, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Check { name: name.into(), value, threshold, pass: value >= threshold, detail: detail.into() }
    }

    pub fn within(name: &str, value: f64, target: f64, tol: f64, detail: impl Into<String>) -> Self {
        Check { name: name.into(), value, threshold: tol, pass: (value - target).abs() <= tol, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub study: StudyKind,
    pub config_hash: String,
    pub root_seed: u64,
    #[serde(rename = "J")]
    pub modes: usize,
    pub q: u32,
    pub n_list: Vec<u32>,
    #[serde(rename = "M")]
    pub replicas: usize,
    pub code_version: String,
    /// Unix seconds.
    pub started_at: u64,
    pub wall_seconds: f64,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyResult {
    pub study: StudyKind,
    pub config_hash: String,
    pub root_seed: u64,
    pub rows: Vec<Row>,
    pub fits: Vec<FitRow>,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub manifest: Option<Manifest>,
}

impl StudyResult {
    pub fn new(cfg: &StudyConfig, study: StudyKind) -> Self {
        StudyResult {
            study,
            config_hash: cfg.hash(),
            root_seed: cfg.seed,
            rows: Vec::new(),
            fits: Vec::new(),
            checks: Vec::new(),
            manifest: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn fit(&self, label: &str) -> Option<&FitRow> {
        self.fits.iter().find(|f| f.label == label)
    }

    pub fn aggregates<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.agg == 1 && r.label == label)
    }

    pub fn csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }

    /// Rows, fits and checks as one JSON document (no timing fields).
    pub fn json_bytes(&self) -> Result<Vec<u8>> {
        let mut v = serde_json::to_vec_pretty(self)?;
        v.push(b'\n');
        Ok(v)
    }

    fn summary_bytes(&self) -> Result<Vec<u8>> {
        #[derive(Serialize)]
        struct Summary<'a> {
            study: StudyKind,
            config_hash: &'a str,
            root_seed: u64,
            fits: &'a [FitRow],
            checks: &'a [Check],
        }
        let s = Summary {
            study: self.study,
            config_hash: &self.config_hash,
            root_seed: self.root_seed,
            fits: &self.fits,
            checks: &self.checks,
        };
        let mut v = serde_json::to_vec_pretty(&s)?;
        v.push(b'\n');
        Ok(v)
    }

    /// Writes `<tag>.csv` (or `<tag>.json`), `<tag>_summary.json` and
    /// `manifest.json` into `dir`. Only the manifest holds timings.
    pub fn write(&self, dir: impl AsRef<Path>, format: OutputFormat) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let tag = self.study.tag();
        let mut written = Vec::new();
        let (name, bytes) = match format {
            OutputFormat::Csv => (format!("{tag}.csv"), self.csv_bytes()?),
            OutputFormat::Json => (format!("{tag}.json"), self.json_bytes()?),
        };
        for (name, bytes) in [(name, bytes), (format!("{tag}_summary.json"), self.summary_bytes()?)] {
            let path = dir.join(name);
            fs::File::create(&path)?.write_all(&bytes)?;
            written.push(path);
        }
        if let Some(m) = &self.manifest {
            let path = dir.join("manifest.json");
            let mut v = serde_json::to_vec_pretty(m)?;
            v.push(b'\n');
            fs::write(&path, v)?;
            written.push(path);
        }
        Ok(written)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}
