use ndarray::Array1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

use super::config::{ExperimentConfig, Method};
use crate::baselines::{doro_cvar_with, dro_objective_eval, erm_subgradient_with, oracle_solve_with, DoroOptions, GlmObjective};
use crate::data::{contaminate, generate_synthetic, Adversary, ContaminationSpec, Dataset};
use crate::error::{invalid, Result};
use crate::linalg::norm2;
use crate::losses::{LossFamily, NormRegularizer};
use crate::robust_mean::stability_filter;
use crate::solver::pipeline;

/// Environment variable bounding the worker pool.
pub const THREADS_ENV: &str = "RD_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub method: String,
    pub adversary: String,
    pub epsilon: f64,
    pub seed: u64,
    /// Objective on the clean stable subset minus that subset's optimum.
    #[serde(with = "nan_as_null")]
    pub excess_clean_objective: f64,
    /// `‖ŵ − w*‖₂` against the reference minimizer on the same subset.
    #[serde(with = "nan_as_null")]
    pub param_error: f64,
    #[serde(with = "nan_as_null")]
    pub w_star_norm: f64,
    pub wallclock: f64,
    pub oracle_calls: usize,
    /// Largest `|α_i|` over all solver iterations (NaN for non-primal-dual methods).
    #[serde(with = "nan_as_null")]
    pub max_abs_dual: f64,
    /// Largest `|β̄_i|` fed to the oracle (NaN for non-primal-dual methods).
    #[serde(with = "nan_as_null")]
    pub max_abs_extrapolation: f64,
    /// Set when the row failed; metrics are then NaN.
    pub error: Option<String>,
}

impl MetricsRow {
    pub fn succeeded(&self) -> bool {
        self.error.is_none()
    }
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_nan() {
            s.serialize_none()
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// Worker count from `RD_THREADS`, defaulting to the available parallelism.
pub fn worker_threads() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(invalid(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

/// Ground truth for one (seed, ε, adversary) cell.
struct Cell {
    corrupted: Dataset,
    eval: Dataset,
    w_star: Array1<f64>,
    f_star: f64,
}

fn prepare_cell(
    cfg: &ExperimentConfig,
    seed: u64,
    epsilon: f64,
    adversary: &Adversary,
    loss: &LossFamily,
    reg: &NormRegularizer,
) -> Result<Cell> {
    let clean = generate_synthetic(&cfg.data.synthetic_spec(), seed)?;
    let corrupted = if epsilon == 0.0 || matches!(adversary, Adversary::None) {
        clean.clone().with_corrupted(Some(Default::default()))
    } else {
        // distinct stream from the generator
        contaminate(&clean, &ContaminationSpec::new(epsilon, adversary.clone()), seed ^ 0x9e37_79b9_7f4a_7c15)?
    };
    let stable: Vec<usize> = if epsilon > 0.0 {
        stability_filter(&clean, epsilon)?
    } else {
        (0..clean.n()).collect()
    };
    let corrupted_set = corrupted.corrupted_indices().cloned().unwrap_or_default();
    let keep: Vec<usize> = stable.into_iter().filter(|i| !corrupted_set.contains(i)).collect();
    let eval = clean.subset(&keep).prepend_ones();
    let reference = oracle_solve_with(&eval, loss, reg, &cfg.reference)?;
    Ok(Cell { corrupted, eval, w_star: reference.w(), f_star: reference.objective })
}

struct Fit {
    w: Array1<f64>,
    oracle_calls: usize,
    max_abs_dual: f64,
    max_abs_extrapolation: f64,
}

impl Fit {
    fn plain(w: Array1<f64>) -> Self {
        Self { w, oracle_calls: 0, max_abs_dual: f64::NAN, max_abs_extrapolation: f64::NAN }
    }
}

fn run_method(
    cfg: &ExperimentConfig,
    cell: &Cell,
    method: Method,
    epsilon: f64,
    seed: u64,
    loss: &LossFamily,
    reg: &NormRegularizer,
) -> Result<Fit> {
    match method {
        Method::Pdhg => {
            let res = pipeline(&cell.corrupted, loss, reg, &cfg.solver_for(epsilon))?;
            Ok(Fit {
                w: res.w(),
                oracle_calls: res.oracle_calls,
                max_abs_dual: res.max_abs_alpha,
                max_abs_extrapolation: res.max_abs_beta,
            })
        }
        Method::Erm => Ok(Fit::plain(erm_subgradient_with(&cell.corrupted.prepend_ones(), loss, reg, &cfg.erm)?)),
        Method::Doro => {
            let design = cell.corrupted.prepend_ones();
            let opts = DoroOptions { iters: cfg.doro.iters, seed, ..DoroOptions::default() };
            Ok(Fit::plain(doro_cvar_with(&GlmObjective { data: &design, loss }, epsilon, cfg.doro.alpha, &opts)?))
        }
    }
}

fn failed_row(method: Method, adversary: &Adversary, epsilon: f64, seed: u64, wallclock: f64, err: String) -> MetricsRow {
    MetricsRow {
        method: method.name().into(),
        adversary: adversary.name().into(),
        epsilon,
        seed,
        excess_clean_objective: f64::NAN,
        param_error: f64::NAN,
        w_star_norm: f64::NAN,
        wallclock,
        oracle_calls: 0,
        max_abs_dual: f64::NAN,
        max_abs_extrapolation: f64::NAN,
        error: Some(err),
    }
}

fn run_cell(cfg: &ExperimentConfig, seed: u64, epsilon: f64, adversary: &Adversary) -> Vec<MetricsRow> {
    let loss = LossFamily::new(cfg.loss);
    let reg = match cfg.solver_for(epsilon).regularizer() {
        Ok(r) => r,
        Err(e) => return cfg.methods.iter().map(|&m| failed_row(m, adversary, epsilon, seed, 0.0, e.to_string())).collect(),
    };
    let start = Instant::now();
    let cell = match prepare_cell(cfg, seed, epsilon, adversary, &loss, &reg) {
        Ok(c) => c,
        Err(e) => {
            let t = start.elapsed().as_secs_f64();
            return cfg.methods.iter().map(|&m| failed_row(m, adversary, epsilon, seed, t, e.to_string())).collect();
        }
    };
    cfg.methods
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let outcome = run_method(cfg, &cell, method, epsilon, seed, &loss, &reg)
                .and_then(|fit| Ok((dro_objective_eval(fit.w.view(), &cell.eval, &loss, &reg)?, fit)));
            let wallclock = start.elapsed().as_secs_f64();
            match outcome {
                Ok((f, fit)) => MetricsRow {
                    method: method.name().into(),
                    adversary: adversary.name().into(),
                    epsilon,
                    seed,
                    excess_clean_objective: f - cell.f_star,
                    param_error: norm2((&fit.w - &cell.w_star).view()),
                    w_star_norm: norm2(cell.w_star.view()),
                    wallclock,
                    oracle_calls: fit.oracle_calls,
                    max_abs_dual: fit.max_abs_dual,
                    max_abs_extrapolation: fit.max_abs_extrapolation,
                    error: None,
                },
                Err(e) => failed_row(method, adversary, epsilon, seed, wallclock, e.to_string()),
            }
        })
        .collect()
}

/// Runs every (seed, ε, adversary, method) combination. Rows come back in
/// config order whatever the completion order; failures become rows with
/// `error` set. The pool size is taken from `RD_THREADS`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<MetricsRow>> {
    run_experiment_with_threads(cfg, worker_threads()?)
}

pub fn run_experiment_with_threads(cfg: &ExperimentConfig, threads: usize) -> Result<Vec<MetricsRow>> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for &seed in &cfg.data.seeds {
        for &epsilon in &cfg.sweep {
            for adversary in &cfg.adversaries {
                cells.push((seed, epsilon, adversary));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| invalid(format!("cannot build worker pool: {e}")))?;
    let rows: Vec<Vec<MetricsRow>> =
        pool.install(|| cells.par_iter().map(|&(seed, eps, adv)| run_cell(cfg, seed, eps, adv)).collect());
    Ok(rows.into_iter().flatten().collect())
}
