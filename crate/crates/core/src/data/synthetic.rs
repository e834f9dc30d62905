use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum CovariateLaw {
    Gaussian,
    /// Coordinates are independent Student-t draws rescaled to variance σ².
    StudentT { dof: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum LabelModel {
    /// `y = w₀ + w̃·x̃ + noise_std·g`.
    Regression { noise_std: f64 },
    /// `y = sign(w₀ + w̃·x̃)`, flipped independently with `flip_prob`.
    Classification { flip_prob: f64 },
}

/// Parameters of a synthetic draw. `planted_w` has length `d` and holds the
/// intercept first; the generated covariates have `d − 1` columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub d: usize,
    pub n: usize,
    pub planted_w: Vec<f64>,
    pub sigma: f64,
    pub law: CovariateLaw,
    pub labels: LabelModel,
}

impl SyntheticSpec {
    pub fn gaussian_regression(d: usize, n: usize, planted_w: Vec<f64>, noise_std: f64) -> Self {
        Self { d, n, planted_w, sigma: 1.0, law: CovariateLaw::Gaussian, labels: LabelModel::Regression { noise_std } }
    }

    pub fn gaussian_classification(d: usize, n: usize, planted_w: Vec<f64>, flip_prob: f64) -> Self {
        Self {
            d,
            n,
            planted_w,
            sigma: 1.0,
            law: CovariateLaw::Gaussian,
            labels: LabelModel::Classification { flip_prob },
        }
    }
}

/// Draw covariates with mean zero and covariance `σ²I`, then labels from the
/// planted model. Bitwise reproducible for a fixed seed.
pub fn generate_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<Dataset> {
    if spec.d == 0 {
        return Err(invalid("model dimension d must be at least 1 (the intercept)"));
    }
    if spec.planted_w.len() != spec.d {
        return Err(crate::error::DroError::DimensionMismatch { expected: spec.d, found: spec.planted_w.len() });
    }
    if !(spec.sigma > 0.0) {
        return Err(invalid(format!("sigma must be positive, got {}", spec.sigma)));
    }
    let k = spec.d - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Array2::<f64>::zeros((spec.n, k));
    match spec.law {
        CovariateLaw::Gaussian => {
            for v in x.iter_mut() {
                let g: f64 = StandardNormal.sample(&mut rng);
                *v = spec.sigma * g;
            }
        }
        CovariateLaw::StudentT { dof } => {
            if !(dof > 2.0) {
                return Err(invalid(format!("Student-t needs dof > 2 for finite variance, got {dof}")));
            }
            let t = StudentT::new(dof).map_err(|e| invalid(e.to_string()))?;
            let scale = spec.sigma * ((dof - 2.0) / dof).sqrt();
            for v in x.iter_mut() {
                *v = scale * t.sample(&mut rng);
            }
        }
    }

    let w0 = spec.planted_w[0];
    let w = Array1::from(spec.planted_w[1..].to_vec());
    let scores = x.dot(&w) + w0;
    let y = match spec.labels {
        LabelModel::Regression { noise_std } => {
            if !(noise_std >= 0.0) {
                return Err(invalid(format!("noise_std must be >= 0, got {noise_std}")));
            }
            scores.mapv(|s| {
                let g: f64 = StandardNormal.sample(&mut rng);
                s + noise_std * g
            })
        }
        LabelModel::Classification { flip_prob } => {
            let flip = Bernoulli::new(flip_prob).map_err(|e| invalid(e.to_string()))?;
            scores.mapv(|s| {
                let label = if s >= 0.0 { 1.0 } else { -1.0 };
                if flip.sample(&mut rng) {
                    -label
                } else {
                    label
                }
            })
        }
    };
    Dataset::new(x, y, spec.sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{covariance_about, mean_rows, norm2};
    use crate::robust_mean::top_eigenvector;

    #[test]
    fn pure_noise_labels_and_centered_covariates() {
        let spec = SyntheticSpec::gaussian_regression(2, 1000, vec![0.0, 0.0], 1.0);
        let d = generate_synthetic(&spec, 7).unwrap();
        assert_eq!(d.dim(), 1);
        let mean = mean_rows(d.covariates.view());
        assert!(norm2(mean.view()) <= 5.0 / 1000f64.sqrt());
    }

    #[test]
    fn covariance_operator_norm_near_sigma_squared() {
        let spec = SyntheticSpec::gaussian_regression(5, 10_000, vec![0.0; 5], 1.0);
        let d = generate_synthetic(&spec, 11).unwrap();
        let cov = covariance_about(d.covariates.view(), mean_rows(d.covariates.view()).view());
        let (_, lambda) = top_eigenvector(cov.view()).unwrap();
        assert!((0.8..=1.3).contains(&lambda), "{lambda}");
    }

    #[test]
    fn student_t_needs_finite_variance() {
        let mut spec = SyntheticSpec::gaussian_regression(3, 10, vec![0.0; 3], 1.0);
        spec.law = CovariateLaw::StudentT { dof: 2.0 };
        assert!(generate_synthetic(&spec, 1).is_err());
        spec.law = CovariateLaw::StudentT { dof: 5.0 };
        assert!(generate_synthetic(&spec, 1).is_ok());
    }

    #[test]
    fn reproducible_for_fixed_seed() {
        let spec = SyntheticSpec::gaussian_classification(4, 200, vec![0.1, 1.0, -0.5, 0.0], 0.1);
        let a = generate_synthetic(&spec, 42).unwrap();
        let b = generate_synthetic(&spec, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.labels.iter().all(|&y| y == 1.0 || y == -1.0));
        let c = generate_synthetic(&spec, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn planted_dimension_checked() {
        let spec = SyntheticSpec::gaussian_regression(3, 10, vec![0.0; 2], 1.0);
        assert!(generate_synthetic(&spec, 0).is_err());
    }
}
