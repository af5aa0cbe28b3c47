use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use pcsbl::{NeighborGraph, OperatorDescriptor, SolverConfig};
use pcsbl_bench::experiments::{
    run_image_recover, run_patch_experiment, run_runtime_sweep, run_success_sweep,
    summarize_runtime, summarize_success, Algorithm, ExperimentConfig, PatchOutcome,
};
use pcsbl_bench::io::{read_vector, write_table_file, write_vector};
use pcsbl_bench::metrics::add_noise;
use pcsbl_bench::pgm::Image;
use pcsbl_bench::{BenchError, Result};

#[derive(Parser)]
#[command(name = "pcsbl", version, about = "Pattern-coupled sparse Bayesian recovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply a sensing operator to a signal and optionally add noise.
    Sense {
        /// Signal as CSV numbers or a PGM image.
        #[arg(long)]
        signal: PathBuf,
        /// Operator descriptor JSON.
        #[arg(long)]
        operator: PathBuf,
        #[arg(long)]
        snr_db: Option<f64>,
        #[arg(long, default_value_t = 0)]
        noise_seed: u64,
        /// Output directory for y.csv and operator.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover a sparse signal from measurements.
    Recover {
        #[arg(long)]
        y: PathBuf,
        #[arg(long)]
        operator: PathBuf,
        /// Solver configuration JSON; defaults apply when omitted.
        #[arg(long)]
        solver: Option<PathBuf>,
        #[arg(long, default_value = "pcsbl-gamp")]
        algorithm: Algorithm,
        /// Image height; with --cols selects the 2-D neighborhood and PGM output.
        #[arg(long, requires = "cols")]
        rows: Option<usize>,
        #[arg(long, requires = "rows")]
        cols: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Success rate versus M/N.
    BenchSuccess(BenchArgs),
    /// Runtime versus N.
    BenchRuntime(BenchArgs),
    /// 2-D patch or image recovery.
    BenchPatch(BenchArgs),
}

#[derive(clap::Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::FAILURE
        }
    }
}

fn error_json(e: &BenchError) -> serde_json::Value {
    let kind = match e {
        BenchError::Solver(_) => "solver",
        BenchError::Config(_) | BenchError::InfeasiblePlacement { .. } => "config",
        BenchError::Pgm(_) | BenchError::Csv(_) | BenchError::Json(_) => "format",
        BenchError::Io(_) => "io",
        _ => "input",
    };
    json!({ "error": kind, "message": e.to_string() })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sense {
            signal,
            operator,
            snr_db,
            noise_seed,
            out,
        } => sense(&signal, &operator, snr_db, noise_seed, &out),
        Command::Recover {
            y,
            operator,
            solver,
            algorithm,
            rows,
            cols,
            out,
        } => recover(&y, &operator, solver.as_deref(), algorithm, rows.zip(cols), &out),
        Command::BenchSuccess(a) => bench(&a, "success-sweep"),
        Command::BenchRuntime(a) => bench(&a, "runtime-sweep"),
        Command::BenchPatch(a) => bench(&a, "patch-2d"),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_slice(&fs::read(path)?)?)
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_vec_pretty(value)?)?;
    Ok(())
}

fn is_pgm(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
}

fn sense(
    signal: &Path,
    operator: &Path,
    snr_db: Option<f64>,
    noise_seed: u64,
    out: &Path,
) -> Result<()> {
    let x = if is_pgm(signal) {
        Image::read(signal)?.to_vector()
    } else {
        read_vector(signal)?
    };
    let desc: OperatorDescriptor = read_json(operator)?;
    let op = desc.build()?;
    let z = op.apply(&x)?;
    let (y, sigma2) = add_noise(&z, snr_db, noise_seed)?;
    fs::create_dir_all(out)?;
    write_vector(&y, &out.join("y.csv"))?;
    write_json(&op.descriptor(), &out.join("operator.json"))?;
    write_json(
        &json!({ "m": op.m(), "n": op.n(), "snr_db": snr_db, "noise_variance": sigma2 }),
        &out.join("sense.json"),
    )
}

fn recover(
    y: &Path,
    operator: &Path,
    solver: Option<&Path>,
    algorithm: Algorithm,
    dims: Option<(usize, usize)>,
    out: &Path,
) -> Result<()> {
    let y = read_vector(y)?;
    let op = read_json::<OperatorDescriptor>(operator)?.build()?;
    let cfg: SolverConfig = match solver {
        Some(p) => read_json(p)?,
        None => SolverConfig::default(),
    };
    let graph = match dims {
        Some((rows, cols)) => {
            if rows * cols != op.n() {
                return Err(BenchError::LengthMismatch(rows * cols, op.n()));
            }
            NeighborGraph::lattice(rows, cols)
        }
        None => NeighborGraph::chain(op.n()),
    };
    let report = algorithm.solve(&op, &y, &graph, &cfg)?;
    fs::create_dir_all(out)?;
    write_vector(&report.x_hat, &out.join("x_hat.csv"))?;
    if let Some((rows, cols)) = dims {
        Image::from_vector(&report.x_hat, rows, cols)?.write(&out.join("x_hat.pgm"))?;
    }
    write_json(&report, &out.join("report.json"))
}

fn bench(args: &BenchArgs, expected: &str) -> Result<()> {
    let cfg: ExperimentConfig = read_json(&args.config)?;
    cfg.validate()?;
    fs::create_dir_all(&args.out)?;
    let mismatch = || {
        BenchError::Config(format!(
            "this subcommand expects an experiment of type {expected:?}"
        ))
    };
    match (&cfg, expected) {
        (ExperimentConfig::SuccessSweep(c), "success-sweep") => {
            let records = run_success_sweep(c)?;
            let table = summarize_success(&records);
            write_table_file(&records, &args.out.join("trials.csv"))?;
            write_table_file(&table, &args.out.join("success.csv"))?;
            write_json(&json!({ "config": cfg, "summary": table }), &args.out.join("summary.json"))
        }
        (ExperimentConfig::RuntimeSweep(c), "runtime-sweep") => {
            let records = run_runtime_sweep(c)?;
            let table = summarize_runtime(&records);
            write_table_file(&records, &args.out.join("trials.csv"))?;
            write_table_file(&table, &args.out.join("runtime.csv"))?;
            write_json(&json!({ "config": cfg, "summary": table }), &args.out.join("summary.json"))
        }
        (ExperimentConfig::Patch2d(c), "patch-2d") => {
            let outcome = run_patch_experiment(c)?;
            write_patch_outputs(&cfg, &outcome, c.rows, c.cols, &args.out)
        }
        (ExperimentConfig::ImageRecover(c), "patch-2d") => {
            let img = Image::read(&c.image)?;
            let outcome = run_image_recover(c)?;
            write_patch_outputs(&cfg, &outcome, img.rows, img.cols, &args.out)
        }
        _ => Err(mismatch()),
    }
}

fn write_patch_outputs(
    cfg: &ExperimentConfig,
    outcome: &PatchOutcome,
    rows: usize,
    cols: usize,
    out: &Path,
) -> Result<()> {
    write_table_file(&outcome.records, &out.join("trials.csv"))?;
    for (trial, x, estimates) in &outcome.images {
        Image::from_vector(x, rows, cols)?.write(&out.join(format!("trial{trial:03}_truth.pgm")))?;
        for (alg, est) in estimates {
            Image::from_vector(est, rows, cols)?
                .write(&out.join(format!("trial{trial:03}_{}.pgm", alg.name())))?;
        }
    }
    let mut summary = Vec::new();
    let mut algs: Vec<Algorithm> = outcome.records.iter().map(|r| r.algorithm).collect();
    algs.sort();
    algs.dedup();
    for alg in algs {
        let mut v: Vec<f64> = outcome
            .records
            .iter()
            .filter(|r| r.algorithm == alg)
            .map(|r| r.nmse)
            .collect();
        let trials = v.len();
        summary.push(json!({
            "algorithm": alg,
            "median_nmse": pcsbl_bench::experiments::median(&mut v),
            "trials": trials,
        }));
    }
    write_json(&json!({ "config": cfg, "summary": summary }), &out.join("summary.json"))
}
