//! Forward sweep of discretized cutting edges through the height field.
//!
//! Two kernels implement the same contract: [`simulate`] (precomputed
//! transforms, culling, parallel over time chunks) and [`simulate_reference`]
//! (rebuilds every matrix per point, allocates freely, single thread). They
//! must agree bit for bit on every configuration.

mod bench;
mod optimized;
mod reference;

use std::f64::consts::PI;

pub use bench::{linear_fit, run_benchmark, BenchCase, BenchReport, BenchRow, LinearFit};
pub use optimized::simulate;
pub use reference::simulate_reference;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, HeightField, TrajectoryRecord};
use crate::kinematics::ProcessParameters;
use crate::tool::{default_edge_points, effective_half_length, ToolDefinition};

/// Default largest spindle rotation per step: 0.5 degree.
pub const DEFAULT_MAX_ANGLE: f64 = 0.5 * PI / 180.0;

/// How the time step is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStepPolicy {
    /// `min(max_angle / ω, Δd / v_f)`.
    MaxAngle(f64),
    /// As `MaxAngle`, additionally capped where the outermost edge point
    /// travels `Δd / 2` per step.
    Coverage(f64),
    /// Explicit step in seconds.
    Fixed(f64),
}

impl Default for TimeStepPolicy {
    fn default() -> Self {
        TimeStepPolicy::Coverage(DEFAULT_MAX_ANGLE)
    }
}

/// Everything one simulation run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub tool: ToolDefinition,
    pub process: ProcessParameters,
    pub grid: GridSpec,
    /// Edge point count; `None` picks the smallest count with spacing at most
    /// half a grid cell.
    pub edge_points: Option<usize>,
    pub time_step: TimeStepPolicy,
    /// `[t_start, t_end]` in seconds; `None` covers tool-center travel from
    /// `y_min - margin` to `y_max + margin` with margin `D/2 + ΔL` (plus
    /// radial run-out).
    pub span: Option<(f64, f64)>,
    pub record_trajectory: bool,
    pub workers: usize,
}

impl SimulationConfig {
    pub fn new(tool: ToolDefinition, process: ProcessParameters, grid: GridSpec) -> Self {
        Self {
            tool,
            process,
            grid,
            edge_points: None,
            time_step: TimeStepPolicy::default(),
            span: None,
            record_trajectory: false,
            workers: 1,
        }
    }

    /// Validates the configuration and resolves every derived quantity the
    /// kernels need. All checks happen here, before any large allocation.
    pub fn plan(&self) -> Result<SimulationPlan> {
        let p = &self.process;
        p.validate(Some(self.tool.teeth()))?;
        if self.workers == 0 {
            return Err(Error::config("engine.workers", "must be at least 1"));
        }
        let half = effective_half_length(
            self.tool.insert_radius(),
            p.depth_of_cut,
            p.feed_per_tooth,
            self.tool.radial_rake(),
        )?;
        let edge_points = match self.edge_points {
            Some(n) if n < 2 => {
                return Err(Error::config("engine.edge_points", "must be at least 2"))
            }
            Some(n) => n,
            None => default_edge_points(half, self.grid.spacing()),
        };
        let dt = time_step(self, half)?;
        let (t_start, t_end) = match self.span {
            Some((a, b)) => {
                if !(a.is_finite() && b.is_finite() && a >= 0.0 && b >= a) {
                    return Err(Error::config(
                        "engine.span_s",
                        format!("need 0 <= start <= end, got [{a}, {b}]"),
                    ));
                }
                (a, b)
            }
            None => auto_span(self, half),
        };
        let steps = ((t_end - t_start) / dt).floor() + 1.0;
        if !(steps.is_finite() && steps <= u32::MAX as f64) {
            return Err(Error::config("engine", format!("{steps} time steps is too many")));
        }
        let steps = steps as usize;
        let trajectory_points = (steps as u64)
            .checked_mul(self.tool.teeth() as u64)
            .and_then(|v| v.checked_mul(edge_points as u64))
            .ok_or_else(|| Error::config("engine", "trajectory point count overflows"))?;
        Ok(SimulationPlan {
            half_length: half,
            edge_points,
            dt,
            t_start,
            steps,
            trajectory_points,
            stock: p.depth_of_cut,
        })
    }
}

/// Resolved discretization of a [`SimulationConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationPlan {
    pub half_length: f64,
    pub edge_points: usize,
    pub dt: f64,
    pub t_start: f64,
    pub steps: usize,
    pub trajectory_points: u64,
    /// Initial (uncut) height of every cell, equal to the depth of cut.
    pub stock: f64,
}

impl SimulationPlan {
    /// Time of step `k`. Computed from the index, never accumulated, so any
    /// chunking of the step range sees the same instants.
    #[inline(always)]
    pub fn time(&self, k: usize) -> f64 {
        self.t_start + k as f64 * self.dt
    }
}

/// Step size for `config` given the engaged half-length.
pub fn time_step(config: &SimulationConfig, half_length: f64) -> Result<f64> {
    let p = &config.process;
    let dd = config.grid.spacing();
    let dt = match config.time_step {
        TimeStepPolicy::Fixed(dt) => dt,
        TimeStepPolicy::MaxAngle(a) | TimeStepPolicy::Coverage(a) => {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::config(
                    "engine.max_angle_step_deg",
                    format!("must be > 0, got {}", a.to_degrees()),
                ));
            }
            let mut dt = (a / p.angular_velocity).min(dd / p.feed_speed);
            if let TimeStepPolicy::Coverage(_) = config.time_step {
                let r = config.tool.insert_radius();
                let lift = r - (r * r - half_length * half_length).max(0.0).sqrt();
                let reach = config.tool.reach(half_length + lift);
                dt = dt.min(dd / (2.0 * reach * p.angular_velocity));
            }
            dt
        }
    };
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::config("engine.time_step_s", format!("must be > 0, got {dt}")));
    }
    Ok(dt)
}

fn auto_span(config: &SimulationConfig, half: f64) -> (f64, f64) {
    let p = &config.process;
    let margin = config.tool.reach(half);
    let y0 = p.initial_position[1];
    let start = ((config.grid.y_min() - margin - y0) / p.feed_speed).max(0.0);
    let end = ((config.grid.y_max() + margin - y0) / p.feed_speed).max(start);
    (start, end)
}

/// Run statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counters {
    pub time_steps: usize,
    /// Always `time_steps * teeth * edge_points`.
    pub trajectory_points: u64,
    /// Cells lowered below the stock at least once.
    pub cells_updated: usize,
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub field: HeightField,
    pub trajectory: Option<TrajectoryRecord>,
    pub counters: Counters,
    /// Main loop only.
    pub wall_time_s: f64,
}
