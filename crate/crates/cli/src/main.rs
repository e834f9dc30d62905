use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Array1;
use serde::Serialize;

use robust_dro::baselines::{
    doro_cvar, doro_trimmed_mean, dro_objective_eval, erm_subgradient, oracle_solve, BaselineKind,
};
use robust_dro::data::io::{self, Sidecar};
use robust_dro::data::{contaminate, generate_synthetic, Adversary, ContaminationSpec, CovariateLaw, Dataset, LabelModel, SyntheticSpec};
use robust_dro::harness::{run_experiment, summarize, write_report, ExperimentConfig, ReportFormat};
use robust_dro::robust_mean::robust_mean_estimation_with_state;
use robust_dro::solver::{pipeline, PdhgConfig, SolveResult};
use robust_dro::{DualNorm, LossFamily, LossKind};

#[derive(Parser)]
#[command(name = "robust-dro", version, about = "Outlier-robust Wasserstein DRO for linear models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a synthetic dataset.
    Generate(GenerateArgs),
    /// Replace an ε-fraction of a dataset and write the replaced indices.
    Corrupt(CorruptArgs),
    /// Fit with the robust primal-dual pipeline.
    Solve(SolveArgs),
    /// Fit with a comparison method.
    Baseline(BaselineArgs),
    /// Robust mean of a point cloud.
    RobustMean(RobustMeanArgs),
    /// Run an experiment config and write its report.
    Bench(BenchArgs),
    /// Re-emit or summarize a JSON report.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Task {
    Regression,
    Classification,
}

#[derive(Args)]
struct GenerateArgs {
    /// Model dimension including the intercept.
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, value_enum, default_value = "classification")]
    task: Task,
    /// Label noise std (regression) or flip probability (classification).
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Coefficient on the first covariate of the planted model.
    #[arg(long, default_value_t = 1.0)]
    signal: f64,
    /// Student-t degrees of freedom; Gaussian covariates when absent.
    #[arg(long)]
    dof: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; `.bin` selects the binary format, anything else CSV.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum AdversaryArg {
    None,
    FarCluster,
    DoroCounterexample,
    LabelFlip,
}

#[derive(Args)]
struct CorruptArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "far-cluster")]
    adversary: AdversaryArg,
    #[arg(long)]
    magnitude: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
    /// Replaced-index file; defaults to `<output>.sidecar.json`.
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long, value_parser = parse_loss, default_value = "hinge")]
    loss: LossKind,
    /// Regularizer norm: 1, 2 or inf.
    #[arg(long = "reg-s", value_parser = parse_norm, default_value = "2")]
    reg_s: DualNorm,
    #[arg(long, default_value_t = 0.0)]
    rho: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long = "delta-const", default_value_t = 2.0)]
    delta_const: f64,
    #[arg(long = "w0-bound", default_value_t = 10.0)]
    w0_bound: f64,
    /// Fixed distance for the step size; searched when absent.
    #[arg(long = "gamma-dist")]
    gamma_dist: Option<f64>,
    /// Explicit Δ, required when epsilon is 0.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Oracle,
    Erm,
    Doro,
    TrimmedMean,
}

#[derive(Args)]
struct BaselineArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 2000)]
    iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RobustMeanArgs {
    /// CSV of points, one per row, with a header.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the CSV path from the config.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Overrides the JSON path from the config.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportKind {
    Csv,
    Json,
    Summary,
}

#[derive(Args)]
struct ReportArgs {
    /// JSON rows written by `bench`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "summary")]
    format: ReportKind,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_loss(s: &str) -> std::result::Result<LossKind, String> {
    s.parse().map_err(|e: robust_dro::DroError| e.to_string())
}

fn parse_norm(s: &str) -> std::result::Result<DualNorm, String> {
    s.parse().map_err(|e: robust_dro::DroError| e.to_string())
}

fn load_dataset(path: &Path, sigma: f64) -> Result<Dataset> {
    let data = if path.extension().is_some_and(|e| e == "bin") {
        io::load_binary(path)
    } else {
        io::load_csv(path, sigma)
    };
    data.with_context(|| format!("reading {}", path.display()))
}

fn save_dataset(data: &Dataset, path: &Path) -> Result<()> {
    let res = if path.extension().is_some_and(|e| e == "bin") {
        io::save_binary(data, path)
    } else {
        io::save_csv(data, path)
    };
    res.with_context(|| format!("writing {}", path.display()))
}

fn emit_json<T: Serialize>(value: &T, output: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match output {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<()> {
    let mut w = vec![0.0; args.d];
    if args.d > 1 {
        w[1] = args.signal;
    }
    let spec = SyntheticSpec {
        d: args.d,
        n: args.n,
        planted_w: w,
        sigma: args.sigma,
        law: match args.dof {
            Some(dof) => CovariateLaw::StudentT { dof },
            None => CovariateLaw::Gaussian,
        },
        labels: match args.task {
            Task::Regression => LabelModel::Regression { noise_std: args.noise },
            Task::Classification => LabelModel::Classification { flip_prob: args.noise },
        },
    };
    save_dataset(&generate_synthetic(&spec, args.seed)?, &args.output)
}

fn corrupt(args: CorruptArgs) -> Result<()> {
    let data = load_dataset(&args.input, args.sigma)?;
    let adversary = match args.adversary {
        AdversaryArg::None => Adversary::None,
        AdversaryArg::FarCluster => Adversary::FarCluster { direction: None, magnitude: args.magnitude },
        AdversaryArg::DoroCounterexample => Adversary::DoroCounterexample,
        AdversaryArg::LabelFlip => Adversary::LabelFlipPlusLeverage { magnitude: args.magnitude.unwrap_or(10.0) },
    };
    let out = contaminate(&data, &ContaminationSpec::new(args.epsilon, adversary), args.seed)?;
    save_dataset(&out, &args.output)?;
    let sidecar = args.sidecar.unwrap_or_else(|| {
        let mut p = args.output.clone().into_os_string();
        p.push(".sidecar.json");
        p.into()
    });
    io::save_sidecar(&Sidecar::from_dataset(&out, args.epsilon), &sidecar)?;
    Ok(())
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    #[serde(flatten)]
    result: &'a SolveResult,
    loss: LossKind,
    config: &'a PdhgConfig,
}

fn solve(args: SolveArgs) -> Result<()> {
    let p = &args.problem;
    let data = load_dataset(&p.input, p.sigma)?;
    let cfg = PdhgConfig {
        epsilon: p.epsilon,
        sigma: p.sigma,
        delta_constant: args.delta_const,
        w0_bound: args.w0_bound,
        gamma_dist: args.gamma_dist,
        s: p.reg_s,
        rho: p.rho,
        delta_override: args.delta,
        ..PdhgConfig::default()
    };
    let loss = LossFamily::new(p.loss);
    let res = pipeline(&data, &loss, &cfg.regularizer()?, &cfg)?;
    emit_json(&SolveOutput { result: &res, loss: p.loss, config: &cfg }, p.output.as_deref())
}

#[derive(Serialize)]
struct BaselineOutput {
    method: BaselineKind,
    w: Vec<f64>,
    /// Regularized objective on the input (with intercept); absent for mean estimation.
    objective: Option<f64>,
    converged: Option<bool>,
}

fn baseline(args: BaselineArgs) -> Result<()> {
    let p = &args.problem;
    let data = load_dataset(&p.input, p.sigma)?;
    let loss = LossFamily::new(p.loss);
    let reg = robust_dro::NormRegularizer::from_radius(p.reg_s, p.rho, loss.zeta)?;
    let design = data.prepend_ones();
    let objective = |w: &Array1<f64>| dro_objective_eval(w.view(), &design, &loss, &reg);
    let out = match args.method {
        MethodArg::Oracle => {
            let sol = oracle_solve(&design, &loss, &reg, args.tol)?;
            BaselineOutput { method: BaselineKind::OracleProxSubgradient, objective: Some(sol.objective), converged: Some(sol.converged), w: sol.w }
        }
        MethodArg::Erm => {
            let w = erm_subgradient(&design, &loss, &reg, args.iters)?;
            BaselineOutput { method: BaselineKind::VanillaErm, objective: Some(objective(&w)?), converged: None, w: w.to_vec() }
        }
        MethodArg::Doro => {
            let kind = BaselineKind::DoroCvar { alpha: args.alpha };
            kind.validate()?;
            let w = doro_cvar(&design, &loss, p.epsilon, args.alpha, args.iters, args.seed)?;
            BaselineOutput { method: kind, objective: Some(objective(&w)?), converged: None, w: w.to_vec() }
        }
        MethodArg::TrimmedMean => {
            let w = doro_trimmed_mean(data.covariates.view(), p.epsilon, args.iters)?;
            BaselineOutput { method: BaselineKind::TrimmedMeanEstimation, objective: None, converged: None, w: w.to_vec() }
        }
    };
    emit_json(&out, p.output.as_deref())
}

#[derive(Serialize)]
struct MeanOutput {
    mean: Vec<f64>,
    iterations: usize,
    remaining_weight: f64,
}

fn robust_mean(args: RobustMeanArgs) -> Result<()> {
    let file = std::fs::File::open(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let points = io::read_points_csv(file)?;
    let est = robust_mean_estimation_with_state(points.view(), args.epsilon)?;
    let out = MeanOutput {
        mean: est.mean.to_vec(),
        iterations: est.state.iterations,
        remaining_weight: est.state.total_weight(),
    };
    emit_json(&out, args.output.as_deref())
}

fn bench(args: BenchArgs) -> Result<bool> {
    let cfg = ExperimentConfig::from_path(&args.config).with_context(|| format!("loading {}", args.config.display()))?;
    let rows = run_experiment(&cfg)?;
    let csv = args.csv.or_else(|| cfg.output.csv.clone());
    let json = args.json.or_else(|| cfg.output.json.clone());
    if let Some(p) = &csv {
        write_report(&rows, ReportFormat::Csv, p)?;
    }
    if let Some(p) = &json {
        write_report(&rows, ReportFormat::Json, p)?;
    }
    if csv.is_none() && json.is_none() {
        robust_dro::harness::emit_report(&rows, ReportFormat::Csv, std::io::stdout().lock())?;
    }
    let failed: Vec<_> = rows.iter().filter(|r| !r.succeeded()).collect();
    for r in &failed {
        eprintln!(
            "row failed: method={} adversary={} epsilon={} seed={}: {}",
            r.method,
            r.adversary,
            r.epsilon,
            r.seed,
            r.error.as_deref().unwrap_or("")
        );
    }
    Ok(failed.is_empty())
}

fn report(args: ReportArgs) -> Result<()> {
    let file = std::fs::File::open(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let rows = robust_dro::harness::read_report_json(file)?;
    let mut out: Box<dyn std::io::Write> = match &args.output {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    match args.format {
        ReportKind::Csv => robust_dro::harness::emit_report(&rows, ReportFormat::Csv, out)?,
        ReportKind::Json => robust_dro::harness::emit_report(&rows, ReportFormat::Json, out)?,
        ReportKind::Summary => {
            writeln!(out, "method,adversary,epsilon,runs,failures,median_excess,median_param_error,median_w_star_norm")?;
            for s in summarize(&rows) {
                writeln!(
                    out,
                    "{},{},{:.8e},{},{},{:.8e},{:.8e},{:.8e}",
                    s.method, s.adversary, s.epsilon, s.runs, s.failures, s.median_excess, s.median_param_error, s.median_w_star_norm
                )?;
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Generate(a) => generate(a)?,
        Command::Corrupt(a) => corrupt(a)?,
        Command::Solve(a) => solve(a)?,
        Command::Baseline(a) => baseline(a)?,
        Command::RobustMean(a) => robust_mean(a)?,
        Command::Bench(a) => return bench(a),
        Command::Report(a) => report(a)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
