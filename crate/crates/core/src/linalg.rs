use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

pub(crate) fn norm2(v: ArrayView1<f64>) -> f64 {
    v.dot(&v).sqrt()
}

/// Column means of `points`.
pub(crate) fn mean_rows(points: ArrayView2<f64>) -> Array1<f64> {
    let n = points.nrows();
    if n == 0 {
        return Array1::zeros(points.ncols());
    }
    points.sum_axis(Axis(0)) / n as f64
}

/// `(1/n) Σ (x_i − μ)(x_i − μ)ᵀ` about the supplied center.
pub(crate) fn covariance_about(points: ArrayView2<f64>, center: ArrayView1<f64>) -> Array2<f64> {
    let n = points.nrows();
    let k = points.ncols();
    if n == 0 {
        return Array2::zeros((k, k));
    }
    let centered = &points - &center.insert_axis(Axis(0));
    centered.t().dot(&centered) / n as f64
}

/// Weighted covariance `Σ q_i (x_i − μ)(x_i − μ)ᵀ / Σ q_i`, skipping zero weights.
pub(crate) fn weighted_covariance(
    points: ArrayView2<f64>,
    weights: &[f64],
    center: ArrayView1<f64>,
    total: f64,
) -> Array2<f64> {
    let k = points.ncols();
    let active: Vec<usize> = (0..points.nrows()).filter(|&i| weights[i] > 0.0).collect();
    let mut scaled = Array2::<f64>::zeros((active.len(), k));
    for (row, &i) in active.iter().enumerate() {
        let s = weights[i].sqrt();
        let src = points.row(i);
        let mut dst = scaled.row_mut(row);
        for j in 0..k {
            dst[j] = s * (src[j] - center[j]);
        }
    }
    scaled.t().dot(&scaled) / total
}
