//! The `tentmle` command line: JSON in, JSON/CSV/SVG out, one manifest next
//! to every output file.
//!
//! Indices in all file formats are 1-based. Exit codes: 0 ok, 2 bad input,
//! 3 solver did not converge (output is still written), 4 size limit.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::duality;
use crate::experiments::{self, Dist};
use crate::geometry::{
    enumerate_regular_triangulations, gkz_vector, HeightVector, PointConfiguration, Subdivision,
};
use crate::manifest::RunManifest;
use crate::quadrature;
use crate::solver::{solve_mle, SolverOptions, WeightVector};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "tentmle",
    version,
    about = "Log-concave density estimation via tent functions and regular subdivisions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the weighted estimation problem for a point configuration.
    Solve(SolveArgs),
    /// Total mass of exp(tent) for given heights, with per-cell terms.
    Mass(IoArgs),
    /// Evaluate the symmetric function H at the given arguments.
    HEval(HEvalArgs),
    /// Normal-cone generators (heights -> weight vectors).
    Weights(IoArgs),
    /// Weights that realize a given regular subdivision as the optimum.
    Realize(RealizeArgs),
    /// Test whether weights lie in the normal cone at given heights.
    ConeTest(IoArgs),
    /// Enumerate all regular triangulations with their GKZ vectors.
    Secondary(IoArgs),
    /// Run a sampling experiment (stratum frequencies, shape census, ...).
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Input JSON: {"points": [[...]], "weights": [...], "labels": [...]}
    /// (weights optional; default is unit weights).
    #[arg(long)]
    pub input: PathBuf,
    /// Output JSON path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also emit a figure next to the output (d <= 2).
    #[arg(long)]
    pub svg: bool,
    #[arg(long, default_value_t = 1e-8)]
    pub grad_tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct IoArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HEvalArgs {
    /// Arguments u_1 ... u_d.
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    pub u: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RealizeArgs {
    /// Input JSON: {"points": [[...]], "subdivision": {"cells": [[...]]}}.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// One of: stratum, table1, dplus2, dplus3, alpha.
    #[arg(long)]
    pub kind: String,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sampling distribution for `table1`: `gaussian` or `circular:<a>`.
    #[arg(long)]
    pub dist: Option<String>,
    /// Configuration JSON for `stratum`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Ambient dimension for dplus2/dplus3/alpha.
    #[arg(long)]
    pub d: Option<usize>,
    /// Last-to-base weight ratio for dplus3.
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Split distance for the d+3 variant of dplus3.
    #[arg(long)]
    pub split: Option<f64>,
    /// Height gap for the alpha check.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Configuration plus optional weights, as read from input files.
#[derive(Debug, Deserialize)]
struct ConfigInput {
    points: Vec<Vec<f64>>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
    #[serde(default)]
    heights: Option<Vec<f64>>,
    #[serde(default)]
    subdivision: Option<Subdivision>,
    #[serde(default)]
    #[allow(dead_code)]
    labels: Option<Vec<String>>,
}

fn read_input(path: &Path) -> Result<ConfigInput> {
    let body = std::fs::read_to_string(path)?;
    let parsed: ConfigInput =
        serde_json::from_str(&body).map_err(|e| Error::InvalidInput(format!("{path:?}: {e}")))?;
    Ok(parsed)
}

fn config_from(input: &ConfigInput) -> Result<PointConfiguration> {
    PointConfiguration::new(input.points.clone())
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>, manifest: &mut RunManifest) -> Result<()> {
    let body = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => {
            std::fs::write(path, body)?;
            manifest.write_alongside(path)?;
        }
        None => println!("{body}"),
    }
    Ok(())
}

/// Run a parsed command; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let started = Instant::now();
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(args, started),
        Command::Mass(args) => cmd_mass(args, started),
        Command::HEval(args) => cmd_h_eval(args, started),
        Command::Weights(args) => cmd_weights(args, started),
        Command::Realize(args) => cmd_realize(args, started),
        Command::ConeTest(args) => cmd_cone_test(args, started),
        Command::Secondary(args) => cmd_secondary(args, started),
        Command::Experiment(args) => cmd_experiment(args, started),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::TooLarge { .. } => 4,
        Error::NotConverged(_) => 3,
        Error::DegenerateInput(_)
        | Error::DimensionMismatch(_)
        | Error::InvalidWeights(_)
        | Error::InvalidInput(_)
        | Error::NotRegular
        | Error::Json(_)
        | Error::Io(_) => 2,
        _ => 1,
    }
}

fn cmd_solve(args: SolveArgs, started: Instant) -> Result<i32> {
    let mut manifest = RunManifest::new(
        "solve",
        serde_json::json!({
            "input": args.input.display().to_string(),
            "svg": args.svg,
            "grad_tol": args.grad_tol,
            "max_iters": args.max_iters,
            "seed": args.seed,
        }),
        args.seed,
    );
    manifest.add_input(&args.input)?;
    let input = read_input(&args.input)?;
    let config = config_from(&input)?;
    let weights = match input.weights {
        Some(w) => WeightVector::new(w)?,
        None => WeightVector::unit(config.n()),
    };
    let options = SolverOptions {
        grad_tol: args.grad_tol,
        max_iters: args.max_iters,
        seed: args.seed,
        start: None,
    };
    let result = solve_mle(&config, &weights, &options)?;
    manifest.set_elapsed(started.elapsed());
    if args.svg {
        let figure = crate::svg::render(&config, result.heights.as_slice(), &result.subdivision);
        let path = match &args.out {
            Some(p) => p.with_extension("svg"),
            None => PathBuf::from("tentmle-solve.svg"),
        };
        std::fs::write(path, figure)?;
    }
    emit(&result, args.out.as_deref(), &mut manifest)?;
    Ok(if result.converged { 0 } else { 3 })
}

#[derive(Serialize)]
struct MassOutput {
    total_mass: f64,
    member: bool,
    per_cell: Vec<MassCell>,
}

#[derive(Serialize)]
struct MassCell {
    cell: Vec<usize>,
    mass: f64,
}

fn cmd_mass(args: IoArgs, started: Instant) -> Result<i32> {
    let mut manifest = RunManifest::new(
        "mass",
        serde_json::json!({"input": args.input.display().to_string()}),
        0,
    );
    manifest.add_input(&args.input)?;
    let input = read_input(&args.input)?;
    let config = config_from(&input)?;
    let heights = input
        .heights
        .ok_or_else(|| Error::InvalidInput("mass needs a \"heights\" array".into()))?;
    let mass = quadrature::total_mass(&config, &heights)?;
    let out = MassOutput {
        total_mass: mass.total_mass,
        member: mass.total_mass <= 1.0 + 1e-12,
        per_cell: mass
            .per_cell
            .iter()
            .map(|(c, m)| MassCell {
                cell: c.iter().map(|i| i + 1).collect(),
                mass: *m,
            })
            .collect(),
    };
    manifest.set_elapsed(started.elapsed());
    emit(&out, args.out.as_deref(), &mut manifest)?;
    Ok(0)
}

fn cmd_h_eval(args: HEvalArgs, started: Instant) -> Result<i32> {
    if args.u.is_empty() {
        return Err(Error::InvalidInput("h-eval needs at least one --u".into()));
    }
    let mut manifest = RunManifest::new("h-eval", serde_json::json!({"u": args.u}), 0);
    let value = crate::hfunc::h_eval(&args.u);
    manifest.set_elapsed(started.elapsed());
    let out = serde_json::json!({"u": args.u, "value": value});
    match &args.out {
        Some(path) => {
            std::fs::write(path, serde_json::to_string_pretty(&out)?)?;
            manifest.write_alongside(path)?;
        }
        None => println!("{value}"),
    }
    Ok(0)
}

#[derive(Serialize)]
struct WeightsOutput {
    base_heights: HeightVector,
    generators: Vec<GeneratorOutput>,
}

#[derive(Serialize)]
struct GeneratorOutput {
    triangulation: Subdivision,
    weights: Vec<f64>,
}

fn cmd_weights(args: IoArgs, started: Instant) -> Result<i32> {
    let mut manifest = RunManifest::new(
        "weights",
        serde_json::json!({"input": args.input.display().to_string()}),
        0,
    );
    manifest.add_input(&args.input)?;
    let input = read_input(&args.input)?;
    let config = config_from(&input)?;
    let heights = input
        .heights
        .ok_or_else(|| Error::InvalidInput("weights needs a \"heights\" array".into()))?;
    let cone = duality::normal_cone_generators(&config, &heights)?;
    let out = WeightsOutput {
        base_heights: cone.base_heights.clone(),
        generators: cone
            .generators
            .iter()
            .map(|(t, w)| GeneratorOutput {
                triangulation: t.as_subdivision(),
                weights: w.clone(),
            })
            .collect(),
    };
    manifest.set_elapsed(started.elapsed());
    emit(&out, args.out.as_deref(), &mut manifest)?;
    Ok(0)
}

#[derive(Serialize)]
struct RealizeOutput {
    weights: Vec<f64>,
    verified: bool,
}

fn cmd_realize(args: RealizeArgs, started: Instant) -> Result<i32> {
    let mut manifest = RunManifest::new(
        "realize",
        serde_json::json!({"input": args.input.display().to_string(), "seed": args.seed}),
        args.seed,
    );
    manifest.add_input(&args.input)?;
    let input = read_input(&args.input)?;
    let config = config_from(&input)?;
    let sub = input
        .subdivision
        .ok_or_else(|| Error::InvalidInput("realize needs a \"subdivision\" object".into()))?;
    let weights = duality::realize_subdivision(&config, &sub, args.seed)?;
    let out = RealizeOutput {
        weights: weights.as_slice().to_vec(),
        verified: true,
    };
    manifest.set_elapsed(started.elapsed());
    emit(&out, args.out.as_deref(), &mut manifest)?;
    Ok(0)
}

#[derive(Serialize)]
struct ConeTestOutput {
    member: bool,
    generators: usize,
}

fn cmd_cone_test(args: IoArgs, started: Instant) -> Result<i32> {
    let mut manifest = RunManifest::new(
        "cone-test",
        serde_json::json!({"input": args.input.display().to_string()}),
        0,
    );
    manifest.add_input(&args.input)?;
    let input = read_input(&args.input)?;
    let config = config_from(&input)?;
    let heights = input
        .heights
        .ok_or_else(|| Error::InvalidInput("cone-test needs a \"heights\" array".into()))?;
    let weights = input
        .weights
        .ok_or_else(|| Error::InvalidInput("cone-test needs a \"weights\" array".into()))?;
    let cone = duality::normal_cone_generators(&config, &heights)?;
    let gens: Vec<Vec<f64>> = cone.generators.iter().map(|(_, g)| g.clone()).collect();
    let out = ConeTestOutput {
        member: duality::cone_membership(&weights, &gens),
        generators: gens.len(),
    };
    manifest.set_elapsed(started.elapsed());
    emit(&out, args.out.as_deref(), &mut manifest)?;
    Ok(0)
}

#[derive(Serialize)]
struct SecondaryOutput {
    count: usize,
    triangulations: Vec<SecondaryEntry>,
}

#[derive(Serialize)]
struct SecondaryEntry {
    cells: Subdivision,
    gkz: Vec<f64>,
}

fn cmd_secondary(args: IoArgs, started: Instant) -> Result<i32> {
    let mut manifest = RunManifest::new(
        "secondary",
        serde_json::json!({"input": args.input.display().to_string()}),
        0,
    );
    manifest.add_input(&args.input)?;
    let input = read_input(&args.input)?;
    let config = config_from(&input)?;
    let tris = enumerate_regular_triangulations(&config)?;
    let out = SecondaryOutput {
        count: tris.len(),
        triangulations: tris
            .iter()
            .map(|t| SecondaryEntry {
                cells: t.as_subdivision(),
                gkz: gkz_vector(&config, t).entries,
            })
            .collect(),
    };
    manifest.set_elapsed(started.elapsed());
    emit(&out, args.out.as_deref(), &mut manifest)?;
    Ok(0)
}

fn cmd_experiment(args: ExperimentArgs, started: Instant) -> Result<i32> {
    let options = serde_json::json!({
        "kind": args.kind,
        "trials": args.trials,
        "seed": args.seed,
        "dist": args.dist,
        "input": args.input.as_ref().map(|p| p.display().to_string()),
        "d": args.d,
        "ratio": args.ratio,
        "split": args.split,
        "alpha": args.alpha,
    });
    let mut manifest = RunManifest::new("experiment", options, args.seed);
    if let Some(p) = &args.input {
        manifest.add_input(p)?;
    }
    match args.kind.as_str() {
        "stratum" => {
            let path = args.input.as_ref().ok_or_else(|| {
                Error::InvalidInput("stratum experiment needs --input config".into())
            })?;
            let config = config_from(&read_input(path)?)?;
            let report =
                experiments::stratum_frequency_experiment(&config, args.trials, args.seed)?;
            manifest.set_elapsed(started.elapsed());
            emit(&report, args.out.as_deref(), &mut manifest)?;
        }
        "table1" => {
            let dist = Dist::parse(args.dist.as_deref().unwrap_or("gaussian"))?;
            let census = experiments::cell_shape_experiment(dist, args.trials, args.seed)?;
            manifest.set_elapsed(started.elapsed());
            if let Some(out) = &args.out {
                let csv_path = out.with_extension("csv");
                std::fs::write(csv_path, experiments::records_to_csv(&census.records))?;
            }
            emit(&census, args.out.as_deref(), &mut manifest)?;
        }
        "dplus2" => {
            let d = args.d.unwrap_or(2);
            let report = experiments::d_plus_2_check(d, args.trials, args.seed)?;
            manifest.set_elapsed(started.elapsed());
            emit(&report, args.out.as_deref(), &mut manifest)?;
        }
        "dplus3" => {
            let d = args.d.unwrap_or(2);
            let ratio = args.ratio.unwrap_or(2.0);
            let con = experiments::d_plus_3_construction(d, ratio, args.split)?;
            let result = solve_mle(&con.config, &con.weights, &SolverOptions::default())?;
            let out = serde_json::json!({
                "points": con.config.points(),
                "weights": con.weights.as_slice(),
                "expect_star": con.expect_star,
                "star": con.star,
                "result": result,
                "is_star": result.subdivision == con.star,
            });
            manifest.set_elapsed(started.elapsed());
            emit(&out, args.out.as_deref(), &mut manifest)?;
        }
        "alpha" => {
            let d = args.d.unwrap_or(2);
            let alpha = args.alpha.unwrap_or(0.5);
            let report = experiments::alpha_heights_check(d, alpha)?;
            manifest.set_elapsed(started.elapsed());
            emit(&report, args.out.as_deref(), &mut manifest)?;
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown experiment kind {other:?}; use stratum|table1|dplus2|dplus3|alpha"
            )))
        }
    }
    Ok(0)
}
