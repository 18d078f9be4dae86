use std::time::Instant;

use super::{Counters, SimulationConfig, SimulationResult};
use crate::error::Result;
use crate::grid::{HeightField, Location, TrajectoryRecord};
use crate::kinematics::{
    edge_to_tool_transform, spindle_to_workpiece_transform, tool_to_spindle_transform, Transform4,
    WorkpiecePoint,
};
use crate::tool::{edge_abscissa, edge_point};

type Matrix = Vec<Vec<f64>>;

fn to_matrix(t: &Transform4) -> Matrix {
    t.0.iter().map(|row| row.to_vec()).collect()
}

// Accumulates in index order starting from the first product, which is the
// same operation sequence as `Transform4`'s multiplication.
fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let mut c = vec![vec![0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = a[i][0] * b[0][j];
            for k in 1..4 {
                acc += a[i][k] * b[k][j];
            }
            c[i][j] = acc;
        }
    }
    c
}

fn matvec(m: &Matrix, v: &[f64]) -> Vec<f64> {
    (0..4)
        .map(|i| {
            let mut acc = m[i][0] * v[0];
            for k in 1..4 {
                acc += m[i][k] * v[k];
            }
            acc
        })
        .collect()
}

/// Straightforward forward sweep used as oracle and benchmark baseline.
///
/// Every edge point at every step rebuilds its coordinates and all three
/// transforms as heap matrices, multiplies them out, then locates and
/// updates the cell. Always single-threaded; `config.workers` is ignored.
pub fn simulate_reference(config: &SimulationConfig) -> Result<SimulationResult> {
    let plan = config.plan()?;
    let tool = &config.tool;
    let p = &config.process;
    let mut field = HeightField::new(config.grid, plan.stock)?;
    let mut trajectory = config
        .record_trajectory
        .then(|| TrajectoryRecord::with_capacity(plan.steps * tool.teeth()));

    let start = Instant::now();
    for step in 0..plan.steps {
        let t = plan.time(step);
        for k in 1..=tool.teeth() {
            let mut points: Vec<WorkpiecePoint> = Vec::new();
            for idx in 0..plan.edge_points {
                let l = edge_abscissa(plan.half_length, plan.edge_points, idx);
                let edge = edge_point(l, tool.insert_radius())?;
                let ct = to_matrix(&edge_to_tool_transform(tool, k)?);
                let ts = to_matrix(&tool_to_spindle_transform(
                    p.phase,
                    k,
                    tool.teeth(),
                    p.angular_velocity,
                    t,
                ));
                let sw = to_matrix(&spindle_to_workpiece_transform(
                    p.initial_position,
                    p.feed_speed,
                    t,
                ));
                let chain = matmul(&sw, &matmul(&ts, &ct));
                let w = matvec(&chain, &edge.homogeneous());
                let point = WorkpiecePoint {
                    x: w[0],
                    y: w[1],
                    z: w[2],
                    t,
                    tooth: k,
                };
                if let Location::Cell(cell) = config.grid.locate(&point)? {
                    field.update_min(cell, point.z)?;
                }
                points.push(point);
            }
            if let Some(record) = trajectory.as_mut() {
                record.record(t, k, &points)?;
            }
        }
    }
    let wall_time_s = start.elapsed().as_secs_f64();

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
