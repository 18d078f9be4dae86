use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use facemill::config::{parse_bench_config, parse_profile_spec, parse_roi, parse_scale};
use facemill::dataset::{generate_dataset, parse_dataset_document, MANIFEST_NAME};
use facemill::engine::{linear_fit, run_benchmark};
use facemill::export::{export_views, trajectory_csv, ViewSelection};
use facemill::roughness::{areal_metrics, extract_profile, line_roughness, CellRange};
use facemill::surface_io::write_atomic;
use facemill::{parse_config, read_surface, simulate, write_surface, Error, Result};
use serde_json::json;

const DEFAULT_SCALE: [usize; 4] = [1, 2, 4, 8];

#[derive(Parser)]
#[command(name = "facemill", version, about = "Face milling surface topography simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one configuration and write the surface plus its views.
    Simulate(SimulateArgs),
    /// Areal metrics (and optionally one line profile) of a surface file.
    Roughness(RoughnessArgs),
    /// Latin hypercube batch of simulations.
    Dataset(DatasetArgs),
    /// Time the optimized kernel against the reference kernel.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
    /// Record every trajectory point into trajectory.csv.
    #[arg(long)]
    trajectory: bool,
}

#[derive(Args)]
struct RoughnessArgs {
    #[arg(long)]
    surface: PathBuf,
    /// x0,y0,x1,y1 in mm.
    #[arg(long, allow_hyphen_values = true)]
    roi: Option<String>,
    /// `feed` or `pickfeed`, optionally followed by `:INDEX`.
    #[arg(long)]
    profile: Option<String>,
}

#[derive(Args)]
struct DatasetArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated edge point multipliers.
    #[arg(long)]
    scale: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Simulate(a) => run_simulate(a),
        Command::Roughness(a) => run_roughness(a),
        Command::Dataset(a) => run_dataset(a),
        Command::Bench(a) => run_bench(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn run_simulate(a: SimulateArgs) -> Result<()> {
    let doc = parse_config(&read_text(&a.config)?)?;
    let mut config = doc.simulation;
    if let Some(w) = a.workers {
        if w == 0 {
            return Err(Error::Config {
                path: "--workers".into(),
                message: "must be at least 1".into(),
            });
        }
        config.workers = w;
    }
    config.record_trajectory |= a.trajectory;
    let plan = config.plan()?;
    eprintln!(
        "simulating {} time steps x {} teeth x {} edge points on {}x{} cells",
        plan.steps,
        config.tool.teeth(),
        plan.edge_points,
        config.grid.m() + 1,
        config.grid.n() + 1
    );

    let result = simulate(&config)?;
    create_dir(&a.out)?;
    let out = &doc.raw.output;
    write_surface(&result.field, &a.out.join(&out.surface))?;
    let roi = match out.roi_mm {
        Some(r) => CellRange::from_mm(result.field.spec(), r[0], r[1], r[2], r[3])?,
        None => CellRange::full(result.field.spec()),
    };
    let views = ViewSelection {
        heights_csv: out.heights_csv,
        graymap: out.graymap,
        metrics: out.metrics,
    };
    export_views(&result.field, &roi, &a.out, views)?;
    if let Some(record) = &result.trajectory {
        write_atomic(&a.out.join("trajectory.csv"), trajectory_csv(record).as_bytes())?;
    }
    let c = result.counters;
    let counters = json!({
        "time_steps": c.time_steps,
        "trajectory_points": c.trajectory_points,
        "cells_updated": c.cells_updated,
    });
    write_atomic(
        &a.out.join("counters.json"),
        (serde_json::to_string_pretty(&counters).expect("plain json") + "\n").as_bytes(),
    )?;
    eprintln!(
        "{} trajectory points, {} cells machined, main loop {:.3} s",
        c.trajectory_points, c.cells_updated, result.wall_time_s
    );
    if let Ok(m) = areal_metrics(&result.field, &roi) {
        eprint!("{}", m.to_table());
    }
    Ok(())
}

fn run_roughness(a: RoughnessArgs) -> Result<()> {
    let field = read_surface(&a.surface)?;
    let roi = match &a.roi {
        Some(text) => {
            let r = parse_roi(text)?;
            CellRange::from_mm(field.spec(), r[0], r[1], r[2], r[3])?
        }
        None => CellRange::full(field.spec()),
    };
    let metrics = areal_metrics(&field, &roi)?;
    eprint!("{}", metrics.to_table());
    let mut report = json!({ "roi": roi, "metrics": metrics });
    if let Some(text) = &a.profile {
        let (direction, index) = parse_profile_spec(text)?;
        let profile = extract_profile(&field, direction, index, Some(&roi))?;
        let ra = line_roughness(&profile)?;
        eprintln!("R_a = {ra:.4} um along {text}");
        report["profile"] = json!({
            "direction": profile.direction,
            "index": profile.index,
            "samples": profile.samples.len(),
            "R_a_um": ra,
        });
    }
    println!("{}", serde_json::to_string_pretty(&report).expect("plain json"));
    Ok(())
}

fn run_dataset(a: DatasetArgs) -> Result<()> {
    let doc = parse_dataset_document(&read_text(&a.config)?)?;
    let dir = a.config.parent().unwrap_or(Path::new("."));
    let spec = doc.into_spec(dir, a.samples, a.seed, a.workers)?;
    eprintln!(
        "generating {} samples over {} parameters (seed {}, {} workers)",
        spec.count,
        spec.ranges.len(),
        spec.seed,
        spec.workers
    );
    let manifest = generate_dataset(&spec, &a.out)?;
    let failed = manifest.failed();
    eprintln!(
        "{} ok, {} failed; manifest at {}",
        manifest.rows.len() - failed,
        failed,
        a.out.join(MANIFEST_NAME).display()
    );
    Ok(())
}

fn run_bench(a: BenchArgs) -> Result<()> {
    let suite = parse_bench_config(&read_text(&a.config)?)?;
    let sizes = match &a.scale {
        Some(text) => parse_scale(text)?,
        None => suite.scale.clone().unwrap_or_else(|| DEFAULT_SCALE.to_vec()),
    };
    let cases = suite.cases()?;
    eprintln!("benchmarking {} cases at sizes {:?}", cases.len(), sizes);
    let report = run_benchmark(&cases, &sizes, suite.repeats)?;
    eprint!("{}", report.to_table());
    for case in &cases {
        let rows: Vec<_> = report.rows.iter().filter(|r| r.case == case.id).collect();
        let xs: Vec<f64> = rows.iter().map(|r| r.trajectory_points as f64).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.t_optimized_s).collect();
        if let Some(fit) = linear_fit(&xs, &ys) {
            eprintln!(
                "{}: {:.3} ns/point, R^2 = {:.4}",
                case.id,
                fit.slope * 1e9,
                fit.r_squared
            );
        }
    }
    let text = serde_json::to_string_pretty(&report).expect("plain json") + "\n";
    write_atomic(&a.out, text.as_bytes())
}
