use ndarray::{Array1, ArrayView1, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{invalid, DroError, Result};
use crate::linalg::mean_rows;
use crate::losses::LossFamily;

/// Per-sample losses with gradients in the parameter.
pub trait SampleObjective {
    fn n(&self) -> usize;
    fn dim(&self) -> usize;
    fn sample_loss(&self, w: ArrayView1<f64>, i: usize) -> f64;
    /// `out += scale·∇_w loss_i(w)`.
    fn add_gradient(&self, w: ArrayView1<f64>, i: usize, scale: f64, out: &mut Array1<f64>);
}

/// `ℓ_{y_i}(x_i·w)` over a dataset.
pub struct GlmObjective<'a> {
    pub data: &'a Dataset,
    pub loss: &'a LossFamily,
}

impl SampleObjective for GlmObjective<'_> {
    fn n(&self) -> usize {
        self.data.n()
    }

    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn sample_loss(&self, w: ArrayView1<f64>, i: usize) -> f64 {
        self.loss.eval_unchecked(self.data.labels[i], self.data.covariates.row(i).dot(&w))
    }

    fn add_gradient(&self, w: ArrayView1<f64>, i: usize, scale: f64, out: &mut Array1<f64>) {
        let row = self.data.covariates.row(i);
        let g = self.loss.subgradient(self.data.labels[i], row.dot(&w));
        out.scaled_add(scale * g, &row);
    }
}

/// `‖w − ξ_i‖₂²`: mean estimation as loss minimization.
pub struct SquaredDistance<'a> {
    pub points: ArrayView2<'a, f64>,
}

impl SampleObjective for SquaredDistance<'_> {
    fn n(&self) -> usize {
        self.points.nrows()
    }

    fn dim(&self) -> usize {
        self.points.ncols()
    }

    fn sample_loss(&self, w: ArrayView1<f64>, i: usize) -> f64 {
        self.points.row(i).iter().zip(w.iter()).map(|(p, q)| (q - p) * (q - p)).sum()
    }

    fn add_gradient(&self, w: ArrayView1<f64>, i: usize, scale: f64, out: &mut Array1<f64>) {
        let row = self.points.row(i);
        for j in 0..out.len() {
            out[j] += scale * 2.0 * (w[j] - row[j]);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "scale", rename_all = "snake_case")]
pub enum StepRule {
    Constant(f64),
    InvSqrt(f64),
}

impl StepRule {
    pub fn at(self, k: usize) -> f64 {
        match self {
            StepRule::Constant(c) => c,
            StepRule::InvSqrt(c) => c / (k as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoroOptions {
    pub iters: usize,
    pub step: StepRule,
    /// Minibatch size; the full sample when absent.
    pub batch_size: Option<usize>,
    pub seed: u64,
    pub w_init: Option<Vec<f64>>,
}

impl Default for DoroOptions {
    fn default() -> Self {
        Self { iters: 1000, step: StepRule::InvSqrt(1.0), batch_size: None, seed: 0, w_init: None }
    }
}

/// `argmin_η α⁻¹·mean((ℓ_j − η)_+) + η` over the kept losses, found by scanning
/// the sorted losses (the minimum is attained at one of them).
pub fn doro_eta(kept: &[f64], alpha: f64) -> f64 {
    if kept.is_empty() {
        return 0.0;
    }
    let mut sorted = kept.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let m = sorted.len() as f64;
    let (mut best_g, mut best_eta) = (f64::INFINITY, sorted[0]);
    let mut prefix = 0.0;
    for (j, &eta) in sorted.iter().enumerate() {
        let excess = prefix - j as f64 * eta;
        let g = excess / (alpha * m) + eta;
        if g < best_g {
            best_g = g;
            best_eta = eta;
        }
        prefix += eta;
    }
    best_eta
}

/// Trimmed-loss iteration for `CVaR^α`: each step drops the `⌊εB⌋`
/// highest-loss samples of the batch, fits `η*` on the rest and takes one
/// subgradient step on `G(η*; w)`.
pub fn doro_cvar(data: &Dataset, loss: &LossFamily, epsilon: f64, alpha: f64, iters: usize, seed: u64) -> Result<Array1<f64>> {
    for &y in data.labels.iter() {
        loss.check_label(y)?;
    }
    let opts = DoroOptions { iters, seed, ..DoroOptions::default() };
    doro_cvar_with(&GlmObjective { data, loss }, epsilon, alpha, &opts)
}

pub fn doro_cvar_with<O: SampleObjective>(obj: &O, epsilon: f64, alpha: f64, opts: &DoroOptions) -> Result<Array1<f64>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if !(0.0..0.5).contains(&epsilon) {
        return Err(invalid(format!("epsilon must lie in [0, 1/2), got {epsilon}")));
    }
    let (n, d) = (obj.n(), obj.dim());
    let mut w = match &opts.w_init {
        None => Array1::zeros(d),
        Some(v) if v.len() == d => Array1::from(v.clone()),
        Some(v) => return Err(DroError::DimensionMismatch { expected: d, found: v.len() }),
    };
    if n == 0 {
        return Ok(w);
    }
    let batch = opts.batch_size.unwrap_or(n).clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut idx: Vec<usize> = (0..n).collect();
    let mut losses: Vec<(f64, usize)> = Vec::with_capacity(batch);

    for k in 1..=opts.iters {
        if batch < n {
            idx = rand::seq::index::sample(&mut rng, n, batch).into_vec();
        }
        losses.clear();
        losses.extend(idx.iter().map(|&i| (obj.sample_loss(w.view(), i), i)));
        losses.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let dropped = (epsilon * batch as f64 + 1e-9).floor() as usize;
        let kept = &losses[dropped..];
        let kept_values: Vec<f64> = kept.iter().map(|p| p.0).collect();
        let eta = doro_eta(&kept_values, alpha);

        let scale = 1.0 / (alpha * kept.len() as f64);
        let mut grad = Array1::zeros(d);
        for &(l, i) in kept {
            if l >= eta {
                obj.add_gradient(w.view(), i, scale, &mut grad);
            }
        }
        w.scaled_add(-opts.step.at(k), &grad);
    }
    Ok(w)
}

/// Iterated trimmed mean: the `α = 1` trimmed-loss iteration on squared
/// distances with step `½`, started at the contaminated sample mean.
pub fn doro_trimmed_mean(points: ArrayView2<f64>, epsilon: f64, iters: usize) -> Result<Array1<f64>> {
    let opts = DoroOptions {
        iters,
        step: StepRule::Constant(0.5),
        batch_size: None,
        seed: 0,
        w_init: Some(mean_rows(points).to_vec()),
    };
    doro_cvar_with(&SquaredDistance { points }, epsilon, 1.0, &opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn eta_for_full_alpha_is_min_kept_loss() {
        assert_eq!(doro_eta(&[3.0, 1.0, 2.0], 1.0), 1.0);
    }

    #[test]
    fn eta_is_upper_quantile_for_small_alpha() {
        let losses: Vec<f64> = (1..=10).map(f64::from).collect();
        // G minimized where the tail count drops to αm = 3
        let eta = doro_eta(&losses, 0.3);
        assert!((7.0..=8.0).contains(&eta), "{eta}");
    }

    #[test]
    fn squared_loss_without_trimming_reaches_mean() {
        let p = array![[0.0, 1.0], [2.0, 3.0], [4.0, -1.0]];
        let opts = DoroOptions { iters: 1, step: StepRule::Constant(0.5), ..DoroOptions::default() };
        let w = doro_cvar_with(&SquaredDistance { points: p.view() }, 0.0, 1.0, &opts).unwrap();
        assert_eq!(w, array![2.0, 1.0]);
    }

    #[test]
    fn trimming_drops_farthest() {
        let p = array![[0.0], [1.0], [2.0], [100.0]];
        let w = doro_trimmed_mean(p.view(), 0.25, 5).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parameter_checks() {
        let p = array![[0.0]];
        let obj = SquaredDistance { points: p.view() };
        assert!(doro_cvar_with(&obj, 0.1, 0.0, &DoroOptions::default()).is_err());
        assert!(doro_cvar_with(&obj, 0.5, 1.0, &DoroOptions::default()).is_err());
    }
}
