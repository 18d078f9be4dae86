use std::ops::Range;
use std::time::Instant;

use rayon::prelude::*;

use super::{Counters, SimulationConfig, SimulationPlan, SimulationResult};
use crate::error::Result;
use crate::grid::{GridSpec, HeightField, TrajectoryEntry, TrajectoryRecord};
use crate::kinematics::{
    edge_to_tool_transform, rotation_for_angle, spindle_to_workpiece_transform, tooth_phase,
    Transform4,
};
use crate::tool::{discretize_half_length, CircularInsert};

/// Loop-invariant data shared read-only by all workers.
struct Kernel<'a> {
    plan: SimulationPlan,
    grid: &'a GridSpec,
    origin: [f64; 3],
    feed_speed: f64,
    angular_velocity: f64,
    /// Edge-to-tool transform per tooth.
    edge_to_tool: Vec<Transform4>,
    /// `φ + 2π(k-1)/z_n` per tooth.
    phase: Vec<f64>,
    edge_x: Vec<f64>,
    edge_z: Vec<f64>,
    max_lift: f64,
    /// Cull window: any point outside it is out of range for `cell_of`.
    window: [f64; 4],
    record: bool,
}

impl Kernel<'_> {
    /// Conservative test whether any edge point of `m` can land on the grid.
    /// The edge has `y_P = 0`, `x_P ∈ [-ΔL, ΔL]`, `z_P ∈ [0, max_lift]`.
    #[inline(always)]
    fn may_hit(&self, m: &Transform4) -> bool {
        let h = self.plan.half_length;
        let z = self.max_lift;
        let m = &m.0;
        let bound = |row: &[f64; 4]| {
            let spread = row[0].abs() * h;
            let lift = row[2] * z;
            (row[3] - spread + lift.min(0.0), row[3] + spread + lift.max(0.0))
        };
        let (x_lo, x_hi) = bound(&m[0]);
        let (y_lo, y_hi) = bound(&m[1]);
        x_hi >= self.window[0] && x_lo <= self.window[1] && y_hi >= self.window[2] && y_lo <= self.window[3]
    }

    fn run(&self, steps: Range<usize>, field: &mut HeightField, record: &mut TrajectoryRecord) {
        let teeth = self.edge_to_tool.len();
        let n = self.edge_x.len();
        for step in steps {
            let t = self.plan.time(step);
            let sw = spindle_to_workpiece_transform(self.origin, self.feed_speed, t);
            for k in 0..teeth {
                let ts = rotation_for_angle(self.phase[k] - self.angular_velocity * t);
                let m = Transform4::chain(&sw, &ts, &self.edge_to_tool[k]);
                if self.may_hit(&m) {
                    for p in 0..n {
                        let [x, y, z] = m.apply(self.edge_x[p], 0.0, self.edge_z[p]);
                        if let Some(idx) = self.grid.cell_of(x, y) {
                            field.lower(idx, z);
                        }
                    }
                }
                if self.record {
                    let mut best = 0;
                    let mut best_z = m.apply_z(self.edge_x[0], 0.0, self.edge_z[0]);
                    for p in 1..n {
                        let z = m.apply_z(self.edge_x[p], 0.0, self.edge_z[p]);
                        if z < best_z {
                            best = p;
                            best_z = z;
                        }
                    }
                    let [x, y, z] = m.apply(self.edge_x[best], 0.0, self.edge_z[best]);
                    record.push(TrajectoryEntry {
                        t,
                        tooth: k + 1,
                        x,
                        y,
                        z,
                    });
                }
            }
        }
    }
}

/// Optimized forward sweep.
///
/// Per-tooth edge transforms and phase offsets are computed once; per step
/// and tooth a single composite matrix is applied to every edge point. Edges
/// whose bounding box misses the grid are skipped. With `workers > 1` the
/// step range is split into contiguous chunks, each writing a private field
/// that is min-merged at the end. The result does not depend on the worker
/// count.
pub fn simulate(config: &SimulationConfig) -> Result<SimulationResult> {
    let plan = config.plan()?;
    let tool = &config.tool;
    let edge = discretize_half_length(
        &CircularInsert {
            radius: tool.insert_radius(),
        },
        plan.half_length,
        plan.edge_points,
    )?;
    let edge_to_tool = (1..=tool.teeth())
        .map(|k| edge_to_tool_transform(tool, k))
        .collect::<Result<Vec<_>>>()?;
    let phase = (1..=tool.teeth())
        .map(|k| tooth_phase(config.process.phase, k, tool.teeth()))
        .collect();
    let g = &config.grid;
    let margin = g.spacing();
    let kernel = Kernel {
        plan,
        grid: g,
        origin: config.process.initial_position,
        feed_speed: config.process.feed_speed,
        angular_velocity: config.process.angular_velocity,
        edge_to_tool,
        phase,
        edge_x: edge.points().iter().map(|p| p.x).collect(),
        edge_z: edge.points().iter().map(|p| p.z).collect(),
        max_lift: edge.max_height(),
        window: [g.x_min() - margin, g.x_max() + margin, g.y_min() - margin, g.y_max() + margin],
        record: config.record_trajectory,
    };

    let workers = config.workers.min(plan.steps).max(1);
    let per_tooth = tool.teeth();
    let chunks: Vec<Range<usize>> = (0..workers)
        .map(|w| plan.steps * w / workers..plan.steps * (w + 1) / workers)
        .collect();
    let mut fields = Vec::with_capacity(workers);
    let mut records = Vec::with_capacity(workers);
    for c in &chunks {
        fields.push(HeightField::new(*g, plan.stock)?);
        let cap = if kernel.record { c.len() * per_tooth } else { 0 };
        records.push(TrajectoryRecord::with_capacity(cap));
    }

    let start = Instant::now();
    if workers == 1 {
        kernel.run(chunks[0].clone(), &mut fields[0], &mut records[0]);
    } else {
        fields
            .par_iter_mut()
            .zip(records.par_iter_mut())
            .zip(chunks.par_iter())
            .for_each(|((f, r), c)| kernel.run(c.clone(), f, r));
    }
    let mut fields = fields.into_iter();
    let mut field = fields.next().expect("at least one worker");
    for f in fields {
        field.merge_min(&f)?;
    }
    let wall_time_s = start.elapsed().as_secs_f64();

    let trajectory = kernel.record.then(|| {
        let mut all = TrajectoryRecord::with_capacity(plan.steps * per_tooth);
        for r in records {
            all.extend(r);
        }
        all
    });
    let counters = Counters {
        time_steps: plan.steps,
        trajectory_points: plan.trajectory_points,
        cells_updated: field.machined_cells(),
    };
    Ok(SimulationResult {
        field,
        trajectory,
        counters,
        wall_time_s,
    })
}
