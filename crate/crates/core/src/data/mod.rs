//! Datasets, synthetic generation, covariate transforms and contamination.

mod contamination;
pub mod io;
mod synthetic;

pub use contamination::{contaminate, Adversary, ContaminationSpec};
pub use synthetic::{generate_synthetic, CovariateLaw, LabelModel, SyntheticSpec};

use ndarray::{s, Array1, Array2, ArrayView1, Axis};
use std::collections::BTreeSet;

use crate::error::{DroError, Result};

/// Covariates and labels, plus the ground-truth set of replaced rows when the
/// dataset came out of [`contaminate`]. Solvers only read covariates and
/// labels; the corrupted set exists for test-time accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub covariates: Array2<f64>,
    pub labels: Array1<f64>,
    /// Square root of the known bound on the covariance operator norm.
    pub sigma: f64,
    corrupted: Option<BTreeSet<usize>>,
}

impl Dataset {
    pub fn new(covariates: Array2<f64>, labels: Array1<f64>, sigma: f64) -> Result<Self> {
        if covariates.nrows() != labels.len() {
            return Err(DroError::DimensionMismatch { expected: covariates.nrows(), found: labels.len() });
        }
        if !(sigma > 0.0) {
            return Err(DroError::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self { covariates, labels, sigma, corrupted: None })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.covariates.ncols()
    }

    pub fn corrupted_indices(&self) -> Option<&BTreeSet<usize>> {
        self.corrupted.as_ref()
    }

    pub fn with_corrupted(mut self, set: Option<BTreeSet<usize>>) -> Self {
        self.corrupted = set;
        self
    }

    /// Indices not marked as corrupted.
    pub fn clean_indices(&self) -> Vec<usize> {
        match &self.corrupted {
            Some(bad) => (0..self.n()).filter(|i| !bad.contains(i)).collect(),
            None => (0..self.n()).collect(),
        }
    }

    /// Rows at `indices`, in the given order. Provenance is dropped.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            covariates: self.covariates.select(Axis(0), indices),
            labels: self.labels.select(Axis(0), indices),
            sigma: self.sigma,
            corrupted: None,
        }
    }

    /// `x ↦ [1, x]`. The covariance of the non-constant part is untouched, so
    /// `sigma` carries over.
    pub fn prepend_ones(&self) -> Dataset {
        let (n, d) = self.covariates.dim();
        let mut cov = Array2::<f64>::ones((n, d + 1));
        cov.slice_mut(s![.., 1..]).assign(&self.covariates);
        Dataset { covariates: cov, labels: self.labels.clone(), sigma: self.sigma, corrupted: self.corrupted.clone() }
    }

    /// Subtract `mu_hat` from every covariate row.
    pub fn center_with_estimate(&self, mu_hat: ArrayView1<f64>) -> Result<Dataset> {
        if mu_hat.len() != self.dim() {
            return Err(DroError::DimensionMismatch { expected: self.dim(), found: mu_hat.len() });
        }
        let cov = &self.covariates - &mu_hat.insert_axis(Axis(0));
        Ok(Dataset { covariates: cov, labels: self.labels.clone(), sigma: self.sigma, corrupted: self.corrupted.clone() })
    }
}

/// Free-function forms of the transforms.
pub fn prepend_ones(data: &Dataset) -> Dataset {
    data.prepend_ones()
}

pub fn center_with_estimate(data: &Dataset, mu_hat: ArrayView1<f64>) -> Result<Dataset> {
    data.center_with_estimate(mu_hat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{covariance_about, mean_rows};
    use ndarray::array;

    #[test]
    fn prepend_small() {
        let d = Dataset::new(array![[2.0], [3.0]], array![0.0, 1.0], 1.0).unwrap();
        assert_eq!(d.prepend_ones().covariates, array![[1.0, 2.0], [1.0, 3.0]]);
    }

    #[test]
    fn prepend_empty() {
        let d = Dataset::new(Array2::zeros((0, 3)), Array1::zeros(0), 1.0).unwrap();
        let p = d.prepend_ones();
        assert_eq!(p.covariates.dim(), (0, 4));
    }

    #[test]
    fn prepend_keeps_covariance_block_diagonal() {
        let x = array![[0.5, -1.0], [2.0, 0.3], [-1.2, 0.8], [0.1, 0.1]];
        let d = Dataset::new(x.clone(), Array1::zeros(4), 1.0).unwrap();
        let before = covariance_about(x.view(), mean_rows(x.view()).view());
        let p = d.prepend_ones();
        let after = covariance_about(p.covariates.view(), mean_rows(p.covariates.view()).view());
        for j in 0..3 {
            assert!(after[[0, j]].abs() < 1e-12 && after[[j, 0]].abs() < 1e-12);
        }
        for i in 0..2 {
            for j in 0..2 {
                assert!((after[[i + 1, j + 1]] - before[[i, j]]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn centering() {
        let d = Dataset::new(array![[1.0, 2.0], [3.0, 4.0]], array![0.0, 0.0], 1.0).unwrap();
        assert_eq!(d.center_with_estimate(array![0.0, 0.0].view()).unwrap(), d);
        let single = Dataset::new(array![[1.5, -2.0]], array![1.0], 1.0).unwrap();
        let c = single.center_with_estimate(array![1.5, -2.0].view()).unwrap();
        assert_eq!(c.covariates, array![[0.0, 0.0]]);
        assert!(matches!(
            d.center_with_estimate(array![0.0].view()),
            Err(DroError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn row_count_must_match() {
        assert!(Dataset::new(Array2::zeros((3, 2)), Array1::zeros(2), 1.0).is_err());
        assert!(Dataset::new(Array2::zeros((3, 2)), Array1::zeros(3), 0.0).is_err());
    }
}
