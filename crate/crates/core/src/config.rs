//! JSON configuration documents.
//!
//! Units in the document are the shop-floor ones (mm, m/min, rpm, mm/min,
//! degrees); [`resolve`] converts them to the internal mm / s / rad and runs
//! every check before anything large is allocated. Unknown keys are rejected.
//!
//! ```json
//! {
//!   "tool":    { "diameter_mm": 10, "insert_radius_mm": 5, "teeth": 2,
//!                "radial_rake_deg": 0.6, "axial_rake_deg": 0,
//!                "runouts_mm": [{ "radial": 0.011, "axial": 0.003 }, { "radial": 0, "axial": 0 }] },
//!   "process": { "cutting_speed_m_min": 170, "feed_per_tooth_mm": 0.6,
//!                "depth_of_cut_mm": 0.5, "phase_deg": 0 },
//!   "grid":    { "spacing_mm": 0.01, "x_range_mm": [0, 10], "y_range_mm": [0, 5] },
//!   "engine":  { "max_angle_step_deg": 0.5, "workers": 4 },
//!   "output":  { "surface": "surface.srtf" }
//! }
//! ```

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::engine::{SimulationConfig, TimeStepPolicy, DEFAULT_MAX_ANGLE};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::kinematics::{derive_kinematics, Feed, ProcessParameters};
use crate::roughness::Direction;
use crate::tool::{effective_half_length, Runout, ToolDefinition};

pub const MAX_TEETH: usize = 64;
const REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolBlock {
    pub diameter_mm: f64,
    pub insert_radius_mm: f64,
    pub teeth: usize,
    #[serde(default)]
    pub radial_rake_deg: f64,
    #[serde(default)]
    pub axial_rake_deg: f64,
    /// One entry per tooth, or empty for an ideal cutter.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub runouts_mm: Vec<Runout>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutting_speed_m_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spindle_speed_rpm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feed_per_tooth_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feed_speed_mm_min: Option<f64>,
    pub depth_of_cut_mm: f64,
    #[serde(default)]
    pub phase_deg: f64,
    /// Spindle origin at `t = 0`. Defaults to the grid center in x, one tool
    /// reach before the grid in y, and z = 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_position_mm: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub spacing_mm: f64,
    pub x_range_mm: [f64; 2],
    pub y_range_mm: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_angle_step_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_step_s: Option<f64>,
    /// Cap the step at half a cell of outermost edge travel.
    #[serde(default = "yes")]
    pub sweep_coverage: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_points: Option<usize>,
    /// Defaults to the available parallelism.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span_s: Option<[f64; 2]>,
    #[serde(default)]
    pub record_trajectory: bool,
}

fn yes() -> bool {
    true
}

impl Default for EngineBlock {
    fn default() -> Self {
        Self {
            max_angle_step_deg: None,
            time_step_s: None,
            sweep_coverage: true,
            edge_points: None,
            workers: None,
            span_s: None,
            record_trajectory: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    /// File names are relative to the output directory.
    #[serde(default = "default_surface")]
    pub surface: String,
    #[serde(default = "yes")]
    pub heights_csv: bool,
    #[serde(default = "yes")]
    pub graymap: bool,
    #[serde(default = "yes")]
    pub metrics: bool,
    /// `[x0, y0, x1, y1]` in mm for metrics and exports; whole grid if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roi_mm: Option<[f64; 4]>,
}

fn default_surface() -> String {
    "surface.srtf".into()
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            surface: default_surface(),
            heights_csv: true,
            graymap: true,
            metrics: true,
            roi_mm: None,
        }
    }
}

/// The document exactly as written, in document units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub tool: ToolBlock,
    pub process: ProcessBlock,
    pub grid: GridBlock,
    #[serde(default)]
    pub engine: EngineBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

/// A validated configuration: the raw document plus the resolved simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDocument {
    pub raw: RawConfig,
    pub simulation: SimulationConfig,
}

impl ConfigDocument {
    pub fn to_json(&self) -> String {
        to_json(&self.raw)
    }
}

pub(crate) fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("config types always serialize")
}

/// Deserializes `text`, reporting the JSON path of the first failure.
pub(crate) fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "<root>".to_string() } else { path };
        Error::config(path, e.into_inner().to_string())
    })
}

pub fn parse_config(text: &str) -> Result<ConfigDocument> {
    let raw: RawConfig = from_json(text)?;
    let simulation = resolve(&raw)?;
    Ok(ConfigDocument { raw, simulation })
}

fn positive(path: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::config(path, format!("must be a finite value > 0, got {v}")))
    }
}

fn finite(path: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(path, format!("must be finite, got {v}")))
    }
}

/// Rewrites domain errors as configuration errors at `path`.
fn at(path: &'static str) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Domain(msg) => Error::config(path, msg),
        other => other,
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs())
}

fn range(path: &str, r: [f64; 2]) -> Result<(f64, f64)> {
    finite(path, r[0])?;
    finite(path, r[1])?;
    if r[1] <= r[0] {
        return Err(Error::config(path, format!("need min < max, got [{}, {}]", r[0], r[1])));
    }
    Ok((r[0], r[1]))
}

pub fn resolve_tool(t: &ToolBlock) -> Result<ToolDefinition> {
    positive("tool.diameter_mm", t.diameter_mm)?;
    positive("tool.insert_radius_mm", t.insert_radius_mm)?;
    if t.teeth == 0 || t.teeth > MAX_TEETH {
        return Err(Error::config("tool.teeth", format!("must be in 1..={MAX_TEETH}, got {}", t.teeth)));
    }
    for (path, v) in [
        ("tool.radial_rake_deg", t.radial_rake_deg),
        ("tool.axial_rake_deg", t.axial_rake_deg),
    ] {
        if !(v.is_finite() && v.abs() < 90.0) {
            return Err(Error::config(path, format!("must lie in (-90, 90), got {v}")));
        }
    }
    if !t.runouts_mm.is_empty() && t.runouts_mm.len() != t.teeth {
        return Err(Error::config(
            "tool.runouts_mm",
            format!("{} entries for {} teeth", t.runouts_mm.len(), t.teeth),
        ));
    }
    ToolDefinition::new(
        t.diameter_mm,
        t.insert_radius_mm,
        t.teeth,
        t.radial_rake_deg.to_radians(),
        t.axial_rake_deg.to_radians(),
        t.runouts_mm.clone(),
    )
    .map_err(at("tool.runouts_mm"))
}

fn resolve_speeds(p: &ProcessBlock, tool: &ToolDefinition) -> Result<ProcessKinematics> {
    let d = tool.diameter();
    let z = tool.teeth();
    let (vc, rpm) = match (p.cutting_speed_m_min, p.spindle_speed_rpm) {
        (Some(vc), Some(n)) => {
            positive("process.cutting_speed_m_min", vc)?;
            positive("process.spindle_speed_rpm", n)?;
            let implied = 1000.0 * vc / (std::f64::consts::PI * d);
            if !close(implied, n) {
                return Err(Error::config(
                    "process.cutting_speed_m_min, process.spindle_speed_rpm",
                    format!("{vc} m/min on a {d} mm cutter is {implied} rpm, not {n}"),
                ));
            }
            (Some(vc), None)
        }
        other => other,
    };
    let feed = match (p.feed_per_tooth_mm, p.feed_speed_mm_min) {
        (Some(fz), None) => Feed::PerTooth(fz),
        (None, Some(vf)) => Feed::Speed(positive("process.feed_speed_mm_min", vf)? / 60.0),
        (Some(fz), Some(vf)) => {
            positive("process.feed_per_tooth_mm", fz)?;
            positive("process.feed_speed_mm_min", vf)?;
            let kin = derive_kinematics(vc, rpm, Feed::PerTooth(fz), z, d)?;
            if !close(kin.feed_speed * 60.0, vf) {
                return Err(Error::config(
                    "process.feed_per_tooth_mm, process.feed_speed_mm_min",
                    format!(
                        "{fz} mm/tooth gives {} mm/min, not {vf}",
                        kin.feed_speed * 60.0
                    ),
                ));
            }
            Feed::PerTooth(fz)
        }
        (None, None) => {
            return Err(Error::config(
                "process.feed_per_tooth_mm, process.feed_speed_mm_min",
                "one of feed per tooth and feed speed is required",
            ))
        }
    };
    Ok(ProcessKinematics { vc, rpm, feed })
}

struct ProcessKinematics {
    vc: Option<f64>,
    rpm: Option<f64>,
    feed: Feed,
}

/// Validates `raw` and converts it into a [`SimulationConfig`].
pub fn resolve(raw: &RawConfig) -> Result<SimulationConfig> {
    let tool = resolve_tool(&raw.tool)?;

    let g = &raw.grid;
    positive("grid.spacing_mm", g.spacing_mm)?;
    let grid = GridSpec::new(
        g.spacing_mm,
        range("grid.x_range_mm", g.x_range_mm)?,
        range("grid.y_range_mm", g.y_range_mm)?,
    )
    .map_err(at("grid"))?;

    let p = &raw.process;
    let speeds = resolve_speeds(p, &tool)?;
    let kin = derive_kinematics(speeds.vc, speeds.rpm, speeds.feed, tool.teeth(), tool.diameter())?;
    let a_p = positive("process.depth_of_cut_mm", p.depth_of_cut_mm)?;
    let half = effective_half_length(
        tool.insert_radius(),
        a_p,
        kin.feed_per_tooth,
        tool.radial_rake(),
    )
    .map_err(at("process.depth_of_cut_mm"))?;
    let phase = finite("process.phase_deg", p.phase_deg)?.to_radians();
    let origin = match p.initial_position_mm {
        Some(o) => {
            for c in o {
                finite("process.initial_position_mm", c)?;
            }
            o
        }
        None => [
            (grid.x_min() + grid.x_max()) / 2.0,
            grid.y_min() - tool.reach(half),
            0.0,
        ],
    };
    let process = ProcessParameters::new(kin, a_p, phase, origin).map_err(at("process"))?;

    let e = &raw.engine;
    let time_step = match (e.max_angle_step_deg, e.time_step_s) {
        (Some(_), Some(_)) => {
            return Err(Error::config(
                "engine.max_angle_step_deg, engine.time_step_s",
                "give at most one of max angle step and time step",
            ))
        }
        (None, Some(dt)) => TimeStepPolicy::Fixed(positive("engine.time_step_s", dt)?),
        (angle, None) => {
            let a = match angle {
                Some(a) => positive("engine.max_angle_step_deg", a)?.to_radians(),
                None => DEFAULT_MAX_ANGLE,
            };
            if e.sweep_coverage {
                TimeStepPolicy::Coverage(a)
            } else {
                TimeStepPolicy::MaxAngle(a)
            }
        }
    };
    let workers = match e.workers {
        Some(0) => return Err(Error::config("engine.workers", "must be at least 1")),
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let span = match e.span_s {
        Some(s) => {
            if !(s[0].is_finite() && s[1].is_finite() && s[0] >= 0.0 && s[1] >= s[0]) {
                return Err(Error::config(
                    "engine.span_s",
                    format!("need 0 <= start <= end, got [{}, {}]", s[0], s[1]),
                ));
            }
            Some((s[0], s[1]))
        }
        None => None,
    };

    let o = &raw.output;
    if o.surface.is_empty() || o.surface.contains(['/', '\\']) || o.surface.starts_with('.') {
        return Err(Error::config("output.surface", "must be a plain file name"));
    }
    if let Some(r) = o.roi_mm {
        crate::roughness::CellRange::from_mm(&grid, r[0], r[1], r[2], r[3])
            .map_err(|e| match e {
                Error::Config { message, .. } => Error::config("output.roi_mm", message),
                other => other,
            })?;
    }

    let config = SimulationConfig {
        tool,
        process,
        grid,
        edge_points: e.edge_points,
        time_step,
        span,
        record_trajectory: e.record_trajectory,
        workers,
    };
    config.plan()?;
    Ok(config)
}

/// Parses `x0,y0,x1,y1` (mm).
pub fn parse_roi(text: &str) -> Result<[f64; 4]> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(Error::config("--roi", format!("expected x0,y0,x1,y1, got {text:?}")));
    }
    let mut out = [0.0; 4];
    for (slot, p) in out.iter_mut().zip(&parts) {
        *slot = p
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::config("--roi", format!("{p:?} is not a finite number")))?;
    }
    if out[2] < out[0] || out[3] < out[1] {
        return Err(Error::config("--roi", "need x0 <= x1 and y0 <= y1"));
    }
    Ok(out)
}

/// Parses `feed`, `pickfeed`, `feed:INDEX` or `pickfeed:INDEX`.
pub fn parse_profile_spec(text: &str) -> Result<(Direction, Option<usize>)> {
    let (dir, index) = match text.split_once(':') {
        Some((d, i)) => (d, Some(i)),
        None => (text, None),
    };
    let direction = match dir.trim() {
        "feed" => Direction::Feed,
        "pickfeed" | "pick-feed" => Direction::PickFeed,
        other => {
            return Err(Error::config(
                "--profile",
                format!("direction must be feed or pickfeed, got {other:?}"),
            ))
        }
    };
    let index = index
        .map(|i| {
            i.trim()
                .parse::<usize>()
                .map_err(|_| Error::config("--profile", format!("{i:?} is not a grid index")))
        })
        .transpose()?;
    Ok((direction, index))
}

/// Parses a comma-separated list of positive size multipliers.
pub fn parse_scale(text: &str) -> Result<Vec<usize>> {
    let sizes = text
        .split(',')
        .map(|s| match s.trim().parse::<usize>() {
            Ok(v) if (1..=4096).contains(&v) => Ok(v),
            _ => Err(Error::config("--scale", format!("{s:?} is not a size in 1..=4096"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(sizes)
}

/// Per-case overrides applied to a base document in a bench suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchCaseSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutting_speed_m_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feed_per_tooth_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_of_cut_mm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSuite {
    pub base: RawConfig,
    pub cases: Vec<BenchCaseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<Vec<usize>>,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
}

fn default_repeats() -> usize {
    3
}

impl BenchSuite {
    /// Resolves every case against the base document.
    pub fn cases(&self) -> Result<Vec<crate::engine::BenchCase>> {
        if self.cases.is_empty() {
            return Err(Error::config("cases", "need at least one case"));
        }
        self.cases
            .iter()
            .map(|c| {
                let mut raw = self.base.clone();
                if let Some(vc) = c.cutting_speed_m_min {
                    raw.process.cutting_speed_m_min = Some(vc);
                    raw.process.spindle_speed_rpm = None;
                }
                if let Some(fz) = c.feed_per_tooth_mm {
                    raw.process.feed_per_tooth_mm = Some(fz);
                    raw.process.feed_speed_mm_min = None;
                }
                if let Some(ap) = c.depth_of_cut_mm {
                    raw.process.depth_of_cut_mm = ap;
                }
                let config = resolve(&raw).map_err(|e| match e {
                    Error::Config { path, message } => {
                        Error::config(format!("cases[{}].{path}", c.id), message)
                    }
                    other => other,
                })?;
                Ok(crate::engine::BenchCase {
                    id: c.id.clone(),
                    config,
                })
            })
            .collect()
    }
}

/// Accepts either a suite (`base` + `cases`) or a single simulation document,
/// which becomes a one-case suite with id `"config"`.
pub fn parse_bench_config(text: &str) -> Result<BenchSuite> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::config("<root>", e.to_string()))?;
    if value.get("cases").is_some() {
        let suite: BenchSuite = from_json(text)?;
        suite.cases()?;
        Ok(suite)
    } else {
        let doc = parse_config(text)?;
        Ok(BenchSuite {
            base: doc.raw,
            cases: vec![BenchCaseSpec {
                id: "config".into(),
                cutting_speed_m_min: None,
                feed_per_tooth_mm: None,
                depth_of_cut_mm: None,
            }],
            scale: None,
            repeats: default_repeats(),
        })
    }
}
