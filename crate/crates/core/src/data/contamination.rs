use ndarray::{Array1, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use super::Dataset;
use crate::error::{invalid, Result};

/// How the adversary rewrites the rows it replaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Adversary {
    None,
    /// All outliers sit at `magnitude·direction` (defaults: `e₁` and
    /// `10σ√(k/ε)` for `k` covariate dimensions) with labels chosen against
    /// the adversary's estimate of the signal direction.
    FarCluster {
        #[serde(default)]
        direction: Option<Vec<f64>>,
        #[serde(default)]
        magnitude: Option<f64>,
    },
    /// Outliers at `√k·e₁`: same norm as typical clean Gaussian points, so a
    /// norm-based filter cannot separate them.
    DoroCounterexample,
    /// Flip the label and scale the covariates of each replaced row.
    LabelFlipPlusLeverage { magnitude: f64 },
}

impl Adversary {
    pub fn name(&self) -> &'static str {
        match self {
            Adversary::None => "none",
            Adversary::FarCluster { .. } => "far_cluster",
            Adversary::DoroCounterexample => "doro_counterexample",
            Adversary::LabelFlipPlusLeverage { .. } => "label_flip_plus_leverage",
        }
    }

    pub fn far_cluster() -> Self {
        Adversary::FarCluster { direction: None, magnitude: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContaminationSpec {
    pub epsilon: f64,
    pub adversary: Adversary,
}

impl ContaminationSpec {
    pub fn new(epsilon: f64, adversary: Adversary) -> Self {
        Self { epsilon, adversary }
    }

    /// `⌊εN⌋`, guarded against representation error in `εN`.
    pub fn corrupted_count(&self, n: usize) -> usize {
        (self.epsilon * n as f64 + 1e-9).floor() as usize
    }
}

/// Strong-contamination simulator: the adversary sees every clean row, then
/// replaces exactly `⌊εN⌋` of them. Which rows are replaced is a seeded
/// deterministic choice.
pub fn contaminate(data: &Dataset, spec: &ContaminationSpec, seed: u64) -> Result<Dataset> {
    if matches!(spec.adversary, Adversary::None) {
        return Ok(data.clone().with_corrupted(Some(BTreeSet::new())));
    }
    if !(spec.epsilon > 0.0 && spec.epsilon < 0.5) {
        return Err(invalid(format!("epsilon must lie in (0, 1/2), got {}", spec.epsilon)));
    }
    let n = data.n();
    let m = spec.corrupted_count(n);
    if m == 0 {
        return Err(invalid(format!("epsilon·N = {} replaces no samples", spec.epsilon * n as f64)));
    }
    let k = data.dim();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut chosen: Vec<usize> = order[..m].to_vec();
    chosen.sort_unstable();

    let mut out = data.clone();
    match &spec.adversary {
        Adversary::None => unreachable!(),
        Adversary::FarCluster { direction, magnitude } => {
            if k == 0 {
                return Err(invalid("far-cluster adversary needs at least one covariate"));
            }
            let dir = match direction {
                Some(v) => {
                    if v.len() != k {
                        return Err(crate::error::DroError::DimensionMismatch { expected: k, found: v.len() });
                    }
                    let v = Array1::from(v.clone());
                    let norm = v.dot(&v).sqrt();
                    if norm == 0.0 {
                        return Err(invalid("far-cluster direction must be nonzero"));
                    }
                    v / norm
                }
                None => {
                    let mut e = Array1::zeros(k);
                    e[0] = 1.0;
                    e
                }
            };
            let mag = magnitude.unwrap_or(10.0 * data.sigma * (k as f64 / spec.epsilon).sqrt());
            let point = &dir * mag;
            let label = adversarial_label(data, point.view());
            for &i in &chosen {
                out.covariates.row_mut(i).assign(&point);
                out.labels[i] = label;
            }
        }
        Adversary::DoroCounterexample => {
            if k == 0 {
                return Err(invalid("counterexample adversary needs at least one covariate"));
            }
            let mut point = Array1::zeros(k);
            point[0] = (k as f64).sqrt();
            for &i in &chosen {
                out.covariates.row_mut(i).assign(&point);
            }
        }
        Adversary::LabelFlipPlusLeverage { magnitude } => {
            for &i in &chosen {
                out.covariates.row_mut(i).mapv_inplace(|v| v * magnitude);
                out.labels[i] = -out.labels[i];
            }
        }
    }
    Ok(out.with_corrupted(Some(chosen.into_iter().collect())))
}

/// Label that maximizes the loss of the adversary's plug-in predictor
/// `t = mean(y_i x_i)` at the outlier location.
fn adversarial_label(data: &Dataset, point: ndarray::ArrayView1<f64>) -> f64 {
    let n = data.n().max(1) as f64;
    let target = (&data.covariates * &data.labels.view().insert_axis(Axis(1))).sum_axis(Axis(0)) / n;
    let pred = target.dot(&point);
    let classification = data.labels.iter().all(|&y| y == 1.0 || y == -1.0);
    if classification {
        if pred > 0.0 {
            -1.0
        } else {
            1.0
        }
    } else {
        -pred
    }
}
