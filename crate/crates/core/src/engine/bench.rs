use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{simulate, simulate_reference, SimulationConfig, SimulationResult};
use crate::error::{Error, Result};

/// One named configuration to benchmark.
#[derive(Debug, Clone)]
pub struct BenchCase {
    pub id: String,
    pub config: SimulationConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub case: String,
    /// Edge point multiplier relative to the case's own discretization.
    pub size: usize,
    pub trajectory_points: u64,
    pub t_reference_s: f64,
    pub t_optimized_s: f64,
    pub speedup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    /// Aligned plain-text table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<8} {:>5} {:>14} {:>12} {:>12} {:>9}",
            "case", "size", "traj. points", "ref (s)", "opt (s)", "speedup"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<8} {:>5} {:>14} {:>12.4} {:>12.5} {:>8.1}x",
                r.case, r.size, r.trajectory_points, r.t_reference_s, r.t_optimized_s, r.speedup
            );
        }
        out
    }
}

/// Least-squares line `y = intercept + slope * x` with its R².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

fn check_equal(case: &str, a: &SimulationResult, b: &SimulationResult) -> Result<()> {
    let worst = a
        .field
        .heights()
        .iter()
        .zip(b.field.heights())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    if a.field.spec() != b.field.spec() || worst > 1e-12 {
        return Err(Error::KernelMismatch(format!(
            "case {case}: height fields differ by up to {worst} mm"
        )));
    }
    if a.trajectory != b.trajectory {
        return Err(Error::KernelMismatch(format!("case {case}: trajectory records differ")));
    }
    Ok(())
}

/// Runs both kernels on every case at every size, checks that the fields
/// agree, and reports main-loop wall times. For each case the reference runs
/// come first; the optimized kernel is then timed in `repeats` rounds over
/// all sizes and the best time per size is kept.
pub fn run_benchmark(cases: &[BenchCase], sizes: &[usize], repeats: usize) -> Result<BenchReport> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::config("bench.scale", "need at least one positive size"));
    }
    if cases.is_empty() {
        return Err(Error::config("bench.cases", "need at least one case"));
    }
    let mut rows = Vec::with_capacity(cases.len() * sizes.len());
    for case in cases {
        let base = case.config.plan()?.edge_points;
        let configs: Vec<SimulationConfig> = sizes
            .iter()
            .map(|&size| {
                let mut config = case.config.clone();
                config.edge_points = Some(base * size);
                config
            })
            .collect();
        let mut first = Vec::with_capacity(sizes.len());
        for config in &configs {
            let reference = simulate_reference(config)?;
            let optimized = simulate(config)?;
            check_equal(&case.id, &optimized, &reference)?;
            first.push((reference.wall_time_s, optimized));
        }
        let mut best: Vec<f64> = first.iter().map(|(_, o)| o.wall_time_s).collect();
        for _ in 1..repeats.max(1) {
            for (slot, config) in best.iter_mut().zip(&configs) {
                *slot = slot.min(simulate(config)?.wall_time_s);
            }
        }
        for ((&size, (t_reference_s, optimized)), t_optimized_s) in sizes.iter().zip(first).zip(best) {
            rows.push(BenchRow {
                case: case.id.clone(),
                size,
                trajectory_points: optimized.counters.trajectory_points,
                t_reference_s,
                t_optimized_s,
                speedup: t_reference_s / t_optimized_s.max(1e-12),
            });
        }
    }
    Ok(BenchReport { rows })
}
