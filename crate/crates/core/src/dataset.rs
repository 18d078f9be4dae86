//! Batch generation of simulated surfaces over Latin-hypercube samples.
//!
//! Every sample is applied to a base document, simulated single-threaded,
//! written as `sample_NNNNN.srtf`, and scored. Samples run concurrently but
//! the manifest (JSON lines, `manifest.jsonl`) is written in index order.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{from_json, resolve, RawConfig};
use crate::engine::{simulate, Counters};
use crate::error::{Error, Result};
use crate::roughness::{areal_metrics, ArealMetrics, CellRange};
use crate::surface_io::{write_atomic, write_surface};
use crate::tool::Runout;

pub const SCHEMA_VERSION: u32 = 1;
pub const RNG_NAME: &str = "ChaCha8";
pub const MANIFEST_NAME: &str = "manifest.jsonl";

/// A sweepable input, in the document's units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parameter {
    CuttingSpeed,
    SpindleSpeed,
    FeedPerTooth,
    DepthOfCut,
    GridSpacing,
    RadialRake,
    AxialRake,
    Phase,
    /// 1-based tooth.
    RunoutRadial(usize),
    RunoutAxial(usize),
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parameter::CuttingSpeed => f.write_str("cutting_speed_m_min"),
            Parameter::SpindleSpeed => f.write_str("spindle_speed_rpm"),
            Parameter::FeedPerTooth => f.write_str("feed_per_tooth_mm"),
            Parameter::DepthOfCut => f.write_str("depth_of_cut_mm"),
            Parameter::GridSpacing => f.write_str("grid_spacing_mm"),
            Parameter::RadialRake => f.write_str("radial_rake_deg"),
            Parameter::AxialRake => f.write_str("axial_rake_deg"),
            Parameter::Phase => f.write_str("phase_deg"),
            Parameter::RunoutRadial(k) => write!(f, "runout_radial_mm:{k}"),
            Parameter::RunoutAxial(k) => write!(f, "runout_axial_mm:{k}"),
        }
    }
}

impl FromStr for Parameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config("ranges.name", format!("unknown parameter {s:?}"));
        Ok(match s {
            "cutting_speed_m_min" => Parameter::CuttingSpeed,
            "spindle_speed_rpm" => Parameter::SpindleSpeed,
            "feed_per_tooth_mm" => Parameter::FeedPerTooth,
            "depth_of_cut_mm" => Parameter::DepthOfCut,
            "grid_spacing_mm" => Parameter::GridSpacing,
            "radial_rake_deg" => Parameter::RadialRake,
            "axial_rake_deg" => Parameter::AxialRake,
            "phase_deg" => Parameter::Phase,
            _ => {
                let (name, tooth) = s.split_once(':').ok_or_else(bad)?;
                let k: usize = tooth.parse().map_err(|_| bad())?;
                if k == 0 {
                    return Err(bad());
                }
                match name {
                    "runout_radial_mm" => Parameter::RunoutRadial(k),
                    "runout_axial_mm" => Parameter::RunoutAxial(k),
                    _ => return Err(bad()),
                }
            }
        })
    }
}

impl Parameter {
    fn is_runout(&self) -> bool {
        matches!(self, Parameter::RunoutRadial(_) | Parameter::RunoutAxial(_))
    }

    /// Writes `v` into the document, replacing any alternative input for the
    /// same quantity (e.g. spindle speed when cutting speed is set).
    pub fn apply(&self, raw: &mut RawConfig, v: f64) {
        let p = &mut raw.process;
        match *self {
            Parameter::CuttingSpeed => {
                p.cutting_speed_m_min = Some(v);
                p.spindle_speed_rpm = None;
            }
            Parameter::SpindleSpeed => {
                p.spindle_speed_rpm = Some(v);
                p.cutting_speed_m_min = None;
            }
            Parameter::FeedPerTooth => {
                p.feed_per_tooth_mm = Some(v);
                p.feed_speed_mm_min = None;
            }
            Parameter::DepthOfCut => p.depth_of_cut_mm = v,
            Parameter::GridSpacing => raw.grid.spacing_mm = v,
            Parameter::RadialRake => raw.tool.radial_rake_deg = v,
            Parameter::AxialRake => raw.tool.axial_rake_deg = v,
            Parameter::Phase => p.phase_deg = v,
            Parameter::RunoutRadial(k) | Parameter::RunoutAxial(k) => {
                let t = &mut raw.tool;
                if t.runouts_mm.len() < t.teeth {
                    t.runouts_mm.resize(t.teeth, Runout::default());
                }
                if let Some(r) = t.runouts_mm.get_mut(k - 1) {
                    if let Parameter::RunoutRadial(_) = self {
                        r.radial = v;
                    } else {
                        r.axial = v;
                    }
                }
            }
        }
    }
}

/// As written in a dataset document. Either `lower` and `upper`, or (for
/// run-outs) a single `magnitude` meaning `[-magnitude, magnitude]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub magnitude: Option<f64>,
}

/// Linear sampling interval for one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterRange {
    pub parameter: Parameter,
    pub lower: f64,
    pub upper: f64,
}

impl ParameterRange {
    pub fn new(parameter: Parameter, lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::config(
                format!("ranges.{parameter}"),
                format!("need finite lower < upper, got [{lower}, {upper}]"),
            ));
        }
        Ok(Self {
            parameter,
            lower,
            upper,
        })
    }

    pub fn from_spec(spec: &RangeSpec) -> Result<Self> {
        let parameter: Parameter = spec.name.parse()?;
        match (spec.lower, spec.upper, spec.magnitude) {
            (Some(lo), Some(hi), None) => Self::new(parameter, lo, hi),
            (None, None, Some(m)) if parameter.is_runout() => Self::new(parameter, -m, m),
            _ => Err(Error::config(
                format!("ranges.{parameter}"),
                "give lower and upper (or magnitude, for run-outs only)",
            )),
        }
    }

    /// Checks the bounds against the physical domain implied by `base`.
    pub fn check_domain(&self, base: &RawConfig) -> Result<()> {
        let path = format!("ranges.{}", self.parameter);
        let err = |msg: String| Err(Error::config(path.clone(), msg));
        let r = base.tool.insert_radius_mm;
        match self.parameter {
            Parameter::CuttingSpeed
            | Parameter::SpindleSpeed
            | Parameter::FeedPerTooth
            | Parameter::GridSpacing
                if self.lower <= 0.0 =>
            {
                err(format!("lower bound must be > 0, got {}", self.lower))
            }
            Parameter::DepthOfCut if self.lower <= 0.0 || self.upper > r => {
                err(format!("must lie in (0, {r}] (insert radius)"))
            }
            Parameter::RadialRake | Parameter::AxialRake
                if self.lower <= -90.0 || self.upper >= 90.0 =>
            {
                err("must lie in (-90, 90) degrees".into())
            }
            Parameter::RunoutRadial(k) | Parameter::RunoutAxial(k) if k > base.tool.teeth => {
                err(format!("tooth {k} exceeds the {} teeth of the base tool", base.tool.teeth))
            }
            Parameter::RunoutRadial(_) | Parameter::RunoutAxial(_)
                if self.lower <= -r || self.upper >= r =>
            {
                err(format!("run-out must stay below the insert radius {r}"))
            }
            _ => Ok(()),
        }
    }
}

/// Latin-hypercube sample: `count` vectors, one entry per range. In every
/// dimension each of the `count` equal-width strata holds exactly one sample.
pub fn lhs_sample(ranges: &[ParameterRange], count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if count == 0 {
        return Err(Error::config("count", "must be at least 1"));
    }
    if ranges.is_empty() {
        return Err(Error::config("ranges", "need at least one range"));
    }
    for r in ranges {
        ParameterRange::new(r.parameter, r.lower, r.upper)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![Vec::with_capacity(ranges.len()); count];
    let n = count as f64;
    for r in ranges {
        let mut strata: Vec<usize> = (0..count).collect();
        strata.shuffle(&mut rng);
        let width = r.upper - r.lower;
        for (row, &k) in out.iter_mut().zip(&strata) {
            let u: f64 = rng.random();
            let x = r.lower + (k as f64 + u) / n * width;
            row.push(clamp_to_stratum(x, r, k, count));
        }
    }
    Ok(out)
}

/// Index of the stratum containing `x`.
pub fn stratum_of(x: f64, r: &ParameterRange, count: usize) -> usize {
    let k = ((x - r.lower) / (r.upper - r.lower) * count as f64).floor();
    (k.max(0.0) as usize).min(count - 1)
}

// Rounding can push a value onto a neighbouring stratum's boundary.
fn clamp_to_stratum(mut x: f64, r: &ParameterRange, k: usize, count: usize) -> f64 {
    for _ in 0..64 {
        let raw = ((x - r.lower) / (r.upper - r.lower) * count as f64).floor();
        if raw < k as f64 {
            x = x.next_up();
        } else if raw > k as f64 {
            x = x.next_down();
        } else {
            break;
        }
    }
    x
}

/// `base` may be inlined or given as a path relative to the dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BaseRef {
    Path(String),
    Inline(Box<RawConfig>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetDocument {
    pub base: BaseRef,
    pub ranges: Vec<RangeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

/// Parses a dataset document without touching the filesystem.
pub fn parse_dataset_document(text: &str) -> Result<DatasetDocument> {
    let doc: DatasetDocument = from_json(text)?;
    if doc.ranges.is_empty() {
        return Err(Error::config("ranges", "need at least one range"));
    }
    for (k, r) in doc.ranges.iter().enumerate() {
        ParameterRange::from_spec(r).map_err(|e| match e {
            Error::Config { message, .. } => Error::config(format!("ranges[{k}]"), message),
            other => other,
        })?;
    }
    Ok(doc)
}

/// Fully resolved batch job.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub base: RawConfig,
    pub ranges: Vec<ParameterRange>,
    pub count: usize,
    pub seed: u64,
    pub workers: usize,
}

impl DatasetDocument {
    /// Loads the base (reading it from `dir` when given by path) and checks
    /// every range against it. `count` and `seed` override the document.
    pub fn into_spec(
        self,
        dir: &Path,
        count: Option<usize>,
        seed: Option<u64>,
        workers: Option<usize>,
    ) -> Result<DatasetSpec> {
        let base = match self.base {
            BaseRef::Inline(raw) => *raw,
            BaseRef::Path(p) => {
                let path = dir.join(p);
                let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                crate::config::parse_config(&text)?.raw
            }
        };
        resolve(&base)?;
        let ranges = self
            .ranges
            .iter()
            .map(ParameterRange::from_spec)
            .collect::<Result<Vec<_>>>()?;
        for r in &ranges {
            r.check_domain(&base)?;
        }
        let count = count
            .or(self.count)
            .ok_or_else(|| Error::config("count", "sample count is required"))?;
        if count == 0 {
            return Err(Error::config("count", "must be at least 1"));
        }
        let workers = workers
            .or(self.workers)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        if workers == 0 {
            return Err(Error::config("workers", "must be at least 1"));
        }
        Ok(DatasetSpec {
            base,
            ranges,
            count,
            seed: seed.or(self.seed).unwrap_or(0),
            workers,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterRecord {
    pub time_steps: usize,
    pub trajectory_points: u64,
    pub cells_updated: usize,
}

impl From<Counters> for CounterRecord {
    fn from(c: Counters) -> Self {
        Self {
            time_steps: c.time_steps,
            trajectory_points: c.trajectory_points,
            cells_updated: c.cells_updated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub schema_version: u32,
    pub rng: String,
    pub seed: u64,
    pub index: usize,
    pub params: serde_json::Map<String, serde_json::Value>,
    pub surface: Option<String>,
    pub status: RowStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub metrics: Option<ArealMetrics>,
    pub counters: Option<CounterRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub seed: u64,
    pub count: usize,
    pub rows: Vec<ManifestRow>,
}

impl DatasetManifest {
    pub fn to_jsonl(&self) -> String {
        rows_to_jsonl(&self.rows)
    }

    pub fn failed(&self) -> usize {
        self.rows.iter().filter(|r| r.status == RowStatus::Failed).count()
    }
}

fn rows_to_jsonl(rows: &[ManifestRow]) -> String {
    let mut out = String::new();
    for r in rows {
        out.push_str(&serde_json::to_string(r).expect("rows always serialize"));
        out.push('\n');
    }
    out
}

pub fn surface_name(index: usize) -> String {
    format!("sample_{index:05}.srtf")
}

/// Simulation outcome of one sample; `Err` only for filesystem failures.
fn run_sample(
    spec: &DatasetSpec,
    index: usize,
    values: &[f64],
    dir: &Path,
) -> std::result::Result<ManifestRow, Error> {
    let mut params = serde_json::Map::new();
    let mut raw = spec.base.clone();
    for (r, &v) in spec.ranges.iter().zip(values) {
        r.parameter.apply(&mut raw, v);
        params.insert(r.parameter.to_string(), serde_json::Value::from(v));
    }
    raw.engine.workers = Some(1);
    let mut row = ManifestRow {
        schema_version: SCHEMA_VERSION,
        rng: RNG_NAME.into(),
        seed: spec.seed,
        index,
        params,
        surface: None,
        status: RowStatus::Failed,
        error: None,
        metrics: None,
        counters: None,
    };
    let result = resolve(&raw).and_then(|config| Ok((simulate(&config)?, config)));
    let (result, config) = match result {
        Ok(r) => r,
        Err(e) => {
            row.error = Some(e.to_string());
            return Ok(row);
        }
    };
    let name = surface_name(index);
    write_surface(&result.field, &dir.join(&name))?;
    let roi = match raw.output.roi_mm {
        Some(r) => CellRange::from_mm(&config.grid, r[0], r[1], r[2], r[3])?,
        None => CellRange::full(&config.grid),
    };
    match areal_metrics(&result.field, &roi) {
        Ok(m) => row.metrics = Some(m),
        Err(e) => row.error = Some(e.to_string()),
    }
    row.surface = Some(name);
    row.status = RowStatus::Ok;
    row.counters = Some(result.counters.into());
    Ok(row)
}

/// Samples the ranges and runs every sample. See [`generate_samples`].
pub fn generate_dataset(spec: &DatasetSpec, dir: &Path) -> Result<DatasetManifest> {
    let samples = lhs_sample(&spec.ranges, spec.count, spec.seed)?;
    generate_samples(spec, &samples, dir)
}

/// Runs the given parameter vectors (one entry per range) into `dir`.
///
/// Samples run on a pool of `spec.workers` threads in index-ordered batches;
/// after each batch the manifest is rewritten with every completed row. An
/// I/O failure stops the batch with the manifest covering the rows before it.
pub fn generate_samples(
    spec: &DatasetSpec,
    samples: &[Vec<f64>],
    dir: &Path,
) -> Result<DatasetManifest> {
    if samples.is_empty() {
        return Err(Error::config("count", "must be at least 1"));
    }
    if let Some(k) = samples.iter().position(|s| s.len() != spec.ranges.len()) {
        return Err(Error::config(
            "samples",
            format!("sample {k} has {} values for {} ranges", samples[k].len(), spec.ranges.len()),
        ));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| Error::io(PathBuf::from(dir), std::io::Error::other(e)))?;
    let manifest_path = dir.join(MANIFEST_NAME);
    let batch = (spec.workers * 4).max(1);
    let mut rows: Vec<ManifestRow> = Vec::with_capacity(samples.len());

    for start in (0..samples.len()).step_by(batch) {
        let end = (start + batch).min(samples.len());
        let results: Vec<Result<ManifestRow>> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|k| run_sample(spec, k, &samples[k], dir))
                .collect()
        });
        let mut failure = None;
        for r in results {
            match r {
                Ok(row) if failure.is_none() => rows.push(row),
                Ok(_) => {}
                Err(e) => {
                    failure.get_or_insert(e);
                }
            }
        }
        write_atomic(&manifest_path, rows_to_jsonl(&rows).as_bytes())?;
        if let Some(e) = failure {
            return Err(e);
        }
    }
    Ok(DatasetManifest {
        seed: spec.seed,
        count: samples.len(),
        rows,
    })
}
