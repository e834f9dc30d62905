use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{invalid, DroError, Result};
use crate::linalg::norm2;
use crate::losses::{moreau_envelope, reg_prox, LossFamily, LossKind, NormRegularizer};
use crate::robust_mean::top_eigenvector;

/// Iteration scheme of the reference solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceSchedule {
    /// Accelerated proximal gradient with gradient restarts on Moreau-smoothed
    /// losses; the smoothing parameter shrinks by `shrink` per stage down to
    /// the tolerance.
    SmoothedFista { shrink: f64 },
    /// Proximal subgradient steps `c/√k` with `c` scaled by the first
    /// subgradient norm.
    ProxSubgradient,
}

impl Default for ReferenceSchedule {
    fn default() -> Self {
        ReferenceSchedule::SmoothedFista { shrink: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReferenceOptions {
    pub tol: f64,
    pub max_iters: usize,
    /// Stop once the best objective improves by less than `tol` over this many
    /// iterations.
    pub window: usize,
    pub schedule: ReferenceSchedule,
    pub w_init: Option<Vec<f64>>,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_iters: 1_000_000, window: 500, schedule: ReferenceSchedule::default(), w_init: None }
    }
}

impl ReferenceOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSolution {
    pub w: Vec<f64>,
    pub objective: f64,
    /// False when the iteration budget ran out before the stopping rule fired.
    pub converged: bool,
    pub iterations: usize,
}

impl ReferenceSolution {
    pub fn w(&self) -> Array1<f64> {
        Array1::from(self.w.clone())
    }
}

/// High-accuracy minimizer of `(1/N) Σ ℓ_{y_i}(x_i·w) + ψ(w)` for small
/// instances; returns the best iterate found.
pub fn oracle_solve(data: &Dataset, loss: &LossFamily, reg: &NormRegularizer, tol: f64) -> Result<ReferenceSolution> {
    oracle_solve_with(data, loss, reg, &ReferenceOptions::with_tol(tol))
}

pub fn oracle_solve_with(
    data: &Dataset,
    loss: &LossFamily,
    reg: &NormRegularizer,
    opts: &ReferenceOptions,
) -> Result<ReferenceSolution> {
    if !(opts.tol > 0.0) {
        return Err(invalid(format!("tol must be positive, got {}", opts.tol)));
    }
    for &y in data.labels.iter() {
        loss.check_label(y)?;
    }
    let d = data.dim();
    let w0 = match &opts.w_init {
        None => Array1::zeros(d),
        Some(w) if w.len() == d => Array1::from(w.clone()),
        Some(w) => return Err(DroError::DimensionMismatch { expected: d, found: w.len() }),
    };
    if data.n() == 0 || d == 0 {
        let objective = reg.eval(w0.view()) + if data.n() == 0 { 0.0 } else { mean_loss(data, loss, &Array1::zeros(data.n())) };
        return Ok(ReferenceSolution { w: w0.to_vec(), objective, converged: true, iterations: 0 });
    }
    let problem = Problem { data, loss, reg };
    match opts.schedule {
        ReferenceSchedule::SmoothedFista { shrink } => {
            if !(shrink > 0.0 && shrink < 1.0) {
                return Err(invalid(format!("shrink must lie in (0, 1), got {shrink}")));
            }
            smoothed_fista(&problem, w0, shrink, opts)
        }
        ReferenceSchedule::ProxSubgradient => prox_subgradient(&problem, w0, opts),
    }
}

struct Problem<'a> {
    data: &'a Dataset,
    loss: &'a LossFamily,
    reg: &'a NormRegularizer,
}

impl Problem<'_> {
    fn scores(&self, w: &Array1<f64>) -> Array1<f64> {
        self.data.covariates.dot(w)
    }

    fn objective(&self, w: &Array1<f64>, scores: &Array1<f64>) -> f64 {
        mean_loss(self.data, self.loss, scores) + self.reg.eval(w.view())
    }

    /// `(1/N) Xᵀ g`.
    fn pullback(&self, g: &Array1<f64>) -> Array1<f64> {
        self.data.covariates.t().dot(g) / self.data.n() as f64
    }
}

fn mean_loss(data: &Dataset, loss: &LossFamily, scores: &Array1<f64>) -> f64 {
    let total: f64 = scores.iter().zip(data.labels.iter()).map(|(&z, &y)| loss.eval_unchecked(y, z)).sum();
    total / data.n() as f64
}

/// Tracks the best iterate and the sliding-window stopping rule.
struct Tracker {
    best_w: Array1<f64>,
    best_f: f64,
    history: std::collections::VecDeque<f64>,
    window: usize,
}

impl Tracker {
    fn new(w: Array1<f64>, f: f64, window: usize) -> Self {
        Self { best_w: w, best_f: f, history: std::collections::VecDeque::from([f]), window: window.max(1) }
    }

    fn offer(&mut self, w: &Array1<f64>, f: f64) {
        if f < self.best_f {
            self.best_f = f;
            self.best_w.assign(w);
        }
        self.history.push_back(self.best_f);
        if self.history.len() > self.window + 1 {
            self.history.pop_front();
        }
    }

    fn stalled(&self, tol: f64) -> bool {
        self.history.len() > self.window && self.history.front().unwrap() - self.best_f < tol
    }

    fn reset_window(&mut self) {
        self.history.clear();
        self.history.push_back(self.best_f);
    }
}

fn smoothed_fista(p: &Problem, w0: Array1<f64>, shrink: f64, opts: &ReferenceOptions) -> Result<ReferenceSolution> {
    let x = p.data.covariates.view();
    let gram = x.t().dot(&x) / p.data.n() as f64;
    let (_, lx) = top_eigenvector(gram.view())?;
    let lx = lx.max(f64::MIN_POSITIVE);
    let zeta = p.loss.zeta;
    let native = match p.loss.kind {
        LossKind::Logistic => Some(0.25),
        LossKind::Huber => Some(1.0),
        LossKind::Lad | LossKind::Hinge => None,
    };
    let mu_min = opts.tol / (zeta * zeta);
    let mut mu = if native.is_some() { mu_min } else { 1.0_f64.max(mu_min) };

    let s0 = p.scores(&w0);
    let f0 = p.objective(&w0, &s0);
    let mut tracker = Tracker::new(w0.clone(), f0, opts.window);
    let mut w = w0;
    let mut iterations = 0;

    loop {
        let last_stage = native.is_some() || mu <= mu_min;
        let curvature = native.unwrap_or(1.0 / mu);
        let step = 1.0 / (lx * curvature);
        let grad_of = |z: f64, y: f64| -> (f64, f64) {
            match native {
                Some(_) => (p.loss.eval_unchecked(y, z), p.loss.subgradient(y, z)),
                None => moreau_envelope(p.loss, y, z, mu),
            }
        };

        // every stage restarts from the best point found so far
        w.assign(&tracker.best_w);
        let mut xw = p.scores(&w);
        let mut y = w.clone();
        let mut xy = xw.clone();
        let mut t = 1.0_f64;
        let mut smooth_hist: std::collections::VecDeque<f64> = std::collections::VecDeque::new();
        tracker.reset_window();

        loop {
            if iterations >= opts.max_iters {
                return Ok(finish(tracker, false, iterations));
            }
            iterations += 1;
            let g: Array1<f64> = xy.iter().zip(p.data.labels.iter()).map(|(&z, &lab)| grad_of(z, lab).1).collect();
            let grad = p.pullback(&g);
            let mut v = y.clone();
            v.scaled_add(-step, &grad);
            let w_new = reg_prox(p.reg, v.view(), step);
            let xw_new = p.scores(&w_new);

            tracker.offer(&w_new, p.objective(&w_new, &xw_new));
            let smoothed: f64 = xw_new.iter().zip(p.data.labels.iter()).map(|(&z, &lab)| grad_of(z, lab).0).sum::<f64>()
                / p.data.n() as f64
                + p.reg.eval(w_new.view());
            smooth_hist.push_back(smoothed);
            if smooth_hist.len() > opts.window + 1 {
                smooth_hist.pop_front();
            }

            let restart = (&y - &w_new).dot(&(&w_new - &w)) > 0.0;
            if restart {
                t = 1.0;
                y.assign(&w_new);
                xy.assign(&xw_new);
            } else {
                let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
                let beta = (t - 1.0) / t_next;
                y = &w_new + &((&w_new - &w) * beta);
                xy = &xw_new + &((&xw_new - &xw) * beta);
                t = t_next;
            }
            w = w_new;
            xw = xw_new;

            if last_stage {
                if tracker.stalled(opts.tol) {
                    return Ok(finish(tracker, true, iterations));
                }
            } else if smooth_hist.len() > opts.window {
                let lo = smooth_hist.iter().cloned().fold(f64::INFINITY, f64::min);
                if smooth_hist.front().unwrap() - lo < opts.tol.max(1e-3 * mu) {
                    break;
                }
            }
        }
        mu = (mu * shrink).max(mu_min);
    }
}

fn prox_subgradient(p: &Problem, w0: Array1<f64>, opts: &ReferenceOptions) -> Result<ReferenceSolution> {
    let s0 = p.scores(&w0);
    let mut tracker = Tracker::new(w0.clone(), p.objective(&w0, &s0), opts.window);
    let g0: Array1<f64> = s0.iter().zip(p.data.labels.iter()).map(|(&z, &y)| p.loss.subgradient(y, z)).collect();
    let g0_norm = norm2(p.pullback(&g0).view()) + p.reg.weight;
    let c = norm2(w0.view()).max(1.0) / g0_norm.max(1e-12);
    let mut w = w0;
    let mut scores = s0;
    for k in 1..=opts.max_iters {
        let g: Array1<f64> = scores.iter().zip(p.data.labels.iter()).map(|(&z, &y)| p.loss.subgradient(y, z)).collect();
        let grad = p.pullback(&g);
        let step = c / (k as f64).sqrt();
        let mut v = w.clone();
        v.scaled_add(-step, &grad);
        w = reg_prox(p.reg, v.view(), step);
        scores = p.scores(&w);
        tracker.offer(&w, p.objective(&w, &scores));
        if tracker.stalled(opts.tol) {
            return Ok(finish(tracker, true, k));
        }
    }
    Ok(finish(tracker, false, opts.max_iters))
}

fn finish(tracker: Tracker, converged: bool, iterations: usize) -> ReferenceSolution {
    ReferenceSolution { w: tracker.best_w.to_vec(), objective: tracker.best_f, converged, iterations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn single_lad_point() {
        let data = Dataset::new(array![[1.0, 0.0]], array![0.0], 1.0).unwrap();
        let sol = oracle_solve(&data, &LossFamily::new(LossKind::Lad), &NormRegularizer::none(), 1e-6).unwrap();
        assert!(sol.objective.abs() < 1e-9);
        assert!(sol.w[0].abs() < 1e-9);
    }

    #[test]
    fn separable_hinge_reaches_zero() {
        let x = array![[1.0, 2.0, 1.0], [1.0, -2.0, -1.0], [1.0, 3.0, 0.5], [1.0, -1.5, -2.0]];
        let data = Dataset::new(x, array![1.0, -1.0, 1.0, -1.0], 1.0).unwrap();
        let sol = oracle_solve(&data, &LossFamily::new(LossKind::Hinge), &NormRegularizer::none(), 1e-6).unwrap();
        assert!(sol.objective < 1e-6, "{sol:?}");
        assert!(sol.converged);
    }

    #[test]
    fn lad_median() {
        // intercept-only LAD is minimized at the median
        let data = Dataset::new(array![[1.0], [1.0], [1.0], [1.0], [1.0]], array![0.0, 1.0, 5.0, 2.0, 9.0], 1.0).unwrap();
        let sol = oracle_solve(&data, &LossFamily::new(LossKind::Lad), &NormRegularizer::none(), 1e-7).unwrap();
        assert!((sol.objective - 13.0 / 5.0).abs() < 1e-6, "{sol:?}");
        assert!((sol.w[0] - 2.0).abs() < 1e-3);
    }
}
