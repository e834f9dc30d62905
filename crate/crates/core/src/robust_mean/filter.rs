use ndarray::{Array1, ArrayView2};

use super::spectral::{power_iteration, PowerOptions};
use crate::error::{invalid, Result};
use crate::linalg::weighted_covariance;

/// Per-sample weights and diagnostics of the spectral filtering loop.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    pub weights: Vec<f64>,
    pub iterations: usize,
    /// Weight mass removed in each pass.
    pub removed_mass_history: Vec<f64>,
}

impl FilterState {
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct RobustMeanEstimate {
    pub mean: Array1<f64>,
    pub state: FilterState,
}

// Top direction only steers the filter; a loose eigen-solve is enough and
// each pass warm-starts from the previous direction.
const FILTER_POWER: PowerOptions = PowerOptions { tol: 1e-6, max_iter: 300 };

/// Robust mean of an `ε`-corrupted point set by iterative spectral
/// down-weighting.
///
/// Starting from uniform weights `1/N`, each pass computes the weighted mean
/// and covariance, scores every point by its squared projection on the top
/// eigenvector, and multiplicatively shrinks the weight of the highest-scoring
/// `ε` mass in proportion to its score. The loop runs while the total weight is
/// at least `1 − 2ε` and returns the last weighted mean. Neither `σ` nor any
/// stability parameter is needed.
pub fn robust_mean_estimation(points: ArrayView2<f64>, epsilon: f64) -> Result<Array1<f64>> {
    Ok(robust_mean_estimation_with_state(points, epsilon)?.mean)
}

pub fn robust_mean_estimation_with_state(points: ArrayView2<f64>, epsilon: f64) -> Result<RobustMeanEstimate> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(invalid(format!("epsilon must lie in (0, 1/2), got {epsilon}")));
    }
    let (n, k) = points.dim();
    if n < 2 {
        return Err(invalid(format!("robust mean estimation needs at least 2 points, got {n}")));
    }
    if k == 0 {
        return Ok(RobustMeanEstimate {
            mean: Array1::zeros(0),
            state: FilterState { weights: vec![1.0 / n as f64; n], iterations: 0, removed_mass_history: vec![] },
        });
    }

    let mut q = vec![1.0 / n as f64; n];
    let mut total: f64 = q.iter().sum();
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut direction: Option<Array1<f64>> = None;
    let mut mean = Array1::zeros(k);
    let mut scores = vec![0.0; n];
    let mut order: Vec<usize> = Vec::with_capacity(n);

    while total >= 1.0 - 2.0 * epsilon {
        // each pass zeroes at least the top-scoring point
        if iterations > n {
            return Err(invalid("filter failed to terminate within N passes"));
        }
        iterations += 1;

        mean.fill(0.0);
        for (i, row) in points.rows().into_iter().enumerate() {
            if q[i] > 0.0 {
                mean.scaled_add(q[i], &row);
            }
        }
        mean /= total;
        let cov = weighted_covariance(points, &q, mean.view(), total);
        let (v, _) = power_iteration(cov.view(), direction.as_ref().map(|d| d.view()), FILTER_POWER)?;

        order.clear();
        let mut max_score = 0.0_f64;
        for (i, row) in points.rows().into_iter().enumerate() {
            if q[i] > 0.0 {
                let p = row.dot(&v) - mean.dot(&v);
                scores[i] = p * p;
                max_score = max_score.max(scores[i]);
                order.push(i);
            } else {
                scores[i] = 0.0;
            }
        }
        if max_score <= 0.0 {
            // all remaining mass sits at the mean
            break;
        }

        // largest t with weight of {h ≥ t} at least ε
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
        let mut mass = 0.0;
        let mut threshold = scores[*order.last().unwrap()];
        for &i in &order {
            mass += q[i];
            if mass >= epsilon {
                threshold = scores[i];
                break;
            }
        }

        let mut removed = 0.0;
        for &i in &order {
            if scores[i] < threshold {
                break;
            }
            let shrink = scores[i] / max_score;
            let dq = q[i] * shrink;
            q[i] = if shrink >= 1.0 { 0.0 } else { q[i] - dq };
            removed += dq;
        }
        history.push(removed);
        total = q.iter().sum();
        direction = Some(v);
    }

    Ok(RobustMeanEstimate { mean, state: FilterState { weights: q, iterations, removed_mass_history: history } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{Array2, Axis};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(n: usize, k: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((n, k), |_| StandardNormal.sample(&mut rng))
    }

    #[test]
    fn identical_points_return_the_point() {
        let p = Array2::from_shape_fn((30, 3), |(_, j)| j as f64 - 0.5);
        let est = robust_mean_estimation_with_state(p.view(), 0.1).unwrap();
        for (m, want) in est.mean.iter().zip([-0.5, 0.5, 1.5]) {
            assert!((m - want).abs() < 1e-12);
        }
        assert_eq!(est.state.iterations, 1);
    }

    #[test]
    fn clean_gaussian_close_to_sample_mean() {
        let (n, k) = (4000, 8);
        let x = gaussian(n, k, 5);
        let sample_mean = x.mean_axis(Axis(0)).unwrap();
        let est = robust_mean_estimation(x.view(), 0.05).unwrap();
        let err = (&est - &sample_mean).mapv(|v| v * v).sum().sqrt();
        assert!(err <= 4.0 * (k as f64 / n as f64).sqrt(), "{err}");
    }

    #[test]
    fn weights_shrink_and_loop_terminates() {
        let mut x = gaussian(1000, 5, 8);
        for i in 0..100 {
            x.row_mut(i).fill(0.0);
            x[[i, 0]] = 30.0;
        }
        let est = robust_mean_estimation_with_state(x.view(), 0.1).unwrap();
        assert!(est.state.iterations <= 1000);
        assert!(est.state.total_weight() < 0.8);
        assert!(est.state.weights.iter().all(|&w| (0.0..=1.0 / 1000.0).contains(&w)));
        assert_eq!(est.state.removed_mass_history.len(), est.state.iterations);
        // outliers are gone after the first pass
        assert!(est.state.weights[..100].iter().all(|&w| w == 0.0));
        assert!(est.mean[0].abs() < 0.3, "{}", est.mean);
    }

    #[test]
    fn deterministic() {
        let x = gaussian(500, 4, 1);
        let a = robust_mean_estimation(x.view(), 0.1).unwrap();
        let b = robust_mean_estimation(x.view(), 0.1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parameter_checks() {
        let x = gaussian(10, 2, 1);
        assert!(robust_mean_estimation(x.view(), 0.0).is_err());
        assert!(robust_mean_estimation(x.view(), 0.5).is_err());
        assert!(robust_mean_estimation(x.slice(ndarray::s![..1, ..]), 0.1).is_err());
    }
}
