use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{DroError, Result};
use crate::linalg::norm2;
use crate::losses::{reg_prox, LossFamily, NormRegularizer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ErmOptions {
    pub iters: usize,
    /// Distance scale `R` in the steps `R/(‖g₁‖√k)`.
    pub radius: f64,
    pub w_init: Option<Vec<f64>>,
}

impl Default for ErmOptions {
    fn default() -> Self {
        Self { iters: 2000, radius: 1.0, w_init: None }
    }
}

/// Averaged proximal subgradient descent on the empirical objective, with no
/// protection against outliers.
pub fn erm_subgradient(data: &Dataset, loss: &LossFamily, reg: &NormRegularizer, iters: usize) -> Result<Array1<f64>> {
    erm_subgradient_with(data, loss, reg, &ErmOptions { iters, ..ErmOptions::default() })
}

pub fn erm_subgradient_with(
    data: &Dataset,
    loss: &LossFamily,
    reg: &NormRegularizer,
    opts: &ErmOptions,
) -> Result<Array1<f64>> {
    let (n, d) = data.covariates.dim();
    let mut w = match &opts.w_init {
        None => Array1::zeros(d),
        Some(v) if v.len() == d => Array1::from(v.clone()),
        Some(v) => return Err(DroError::DimensionMismatch { expected: d, found: v.len() }),
    };
    if opts.iters == 0 || n == 0 {
        return Ok(w);
    }
    for &y in data.labels.iter() {
        loss.check_label(y)?;
    }
    let gradient = |w: &Array1<f64>| -> Array1<f64> {
        let scores = data.covariates.dot(w);
        let g: Array1<f64> = scores.iter().zip(data.labels.iter()).map(|(&z, &y)| loss.subgradient(y, z)).collect();
        data.covariates.t().dot(&g) / n as f64
    };
    let mut avg = Array1::<f64>::zeros(d);
    let mut scale = None;
    for k in 1..=opts.iters {
        let g = gradient(&w);
        let c = *scale.get_or_insert_with(|| opts.radius / (norm2(g.view()) + reg.weight).max(1e-12));
        let step = c / (k as f64).sqrt();
        let mut v = w.clone();
        v.scaled_add(-step, &g);
        w = reg_prox(reg, v.view(), step);
        avg.scaled_add(1.0 / opts.iters as f64, &w);
    }
    Ok(avg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::LossKind;
    use ndarray::array;

    #[test]
    fn zero_iterations_returns_start() {
        let data = Dataset::new(array![[1.0, 2.0]], array![1.0], 1.0).unwrap();
        let opts = ErmOptions { iters: 0, w_init: Some(vec![0.5, -1.0]), ..ErmOptions::default() };
        let w = erm_subgradient_with(&data, &LossFamily::new(LossKind::Hinge), &NormRegularizer::none(), &opts).unwrap();
        assert_eq!(w, array![0.5, -1.0]);
    }

    #[test]
    fn lad_intercept_moves_toward_median() {
        let data = Dataset::new(array![[1.0], [1.0], [1.0]], array![1.0, 2.0, 3.0], 1.0).unwrap();
        let w = erm_subgradient(&data, &LossFamily::new(LossKind::Lad), &NormRegularizer::none(), 5000).unwrap();
        assert!((w[0] - 2.0).abs() < 0.1, "{w}");
    }
}
