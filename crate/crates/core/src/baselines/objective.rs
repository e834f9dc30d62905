use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{invalid, DroError, Result};
use crate::losses::{DualNorm, LossFamily, NormRegularizer};

/// `(1/N) Σ ℓ_{y_i}(x_i·w) + ψ(w)`, which equals the Wasserstein-1 worst case
/// when `ψ = ρζ‖·‖_s`.
pub fn dro_objective_eval(w: ArrayView1<f64>, data: &Dataset, loss: &LossFamily, reg: &NormRegularizer) -> Result<f64> {
    if w.len() != data.dim() {
        return Err(DroError::DimensionMismatch { expected: data.dim(), found: w.len() });
    }
    if data.n() == 0 {
        return Ok(reg.eval(w));
    }
    let scores = data.covariates.dot(&w);
    let mut total = 0.0;
    for (&z, &y) in scores.iter().zip(data.labels.iter()) {
        total += loss.eval(y, z)?;
    }
    Ok(total / data.n() as f64 + reg.eval(w))
}

/// Resolution of the transport-plan search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupGrid {
    /// Angular spacing of the direction grid, in radians.
    pub angle_step: f64,
    /// Number of magnitude levels between zero and the full budget.
    pub magnitude_levels: usize,
}

impl SupGrid {
    pub fn uniform(step: f64) -> Self {
        Self { angle_step: step, magnitude_levels: ((1.0 / step).round() as usize).clamp(1, 100_000) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupBound {
    pub value: f64,
    /// The best plan used the smallest nonzero magnitude, so the grid may be too
    /// coarse to resolve it.
    pub coarse: bool,
}

/// Lower bound on `sup_Q E_Q[ℓ_y(x·w)]` over distributions within
/// Wasserstein-1 distance `rho` of the empirical one, under the cost
/// `‖x − x′‖_r` with labels held fixed.
///
/// Two families of feasible plans are searched: moving a single sample by up
/// to `ρN` along a grid direction, and moving every sample by `ρ` along its own
/// best grid direction. Directions come from an angular grid normalized to
/// unit `r`-norm plus signed axis and sign vectors.
pub fn dro_sup_lower_bound(
    w: ArrayView1<f64>,
    data: &Dataset,
    loss: &LossFamily,
    rho: f64,
    r: DualNorm,
    grid: &SupGrid,
) -> Result<SupBound> {
    let (n, d) = data.covariates.dim();
    if w.len() != d {
        return Err(DroError::DimensionMismatch { expected: d, found: w.len() });
    }
    if !(rho >= 0.0) {
        return Err(invalid(format!("rho must be >= 0, got {rho}")));
    }
    if !(grid.angle_step > 0.0) || grid.magnitude_levels == 0 {
        return Err(invalid("grid needs a positive angle step and at least one magnitude level"));
    }
    if n == 0 {
        return Ok(SupBound { value: 0.0, coarse: false });
    }
    let scores = data.covariates.dot(&w);
    let base: Vec<f64> = scores
        .iter()
        .zip(data.labels.iter())
        .map(|(&z, &y)| loss.eval(y, z))
        .collect::<Result<_>>()?;
    let empirical = base.iter().sum::<f64>() / n as f64;
    if rho == 0.0 || d == 0 {
        return Ok(SupBound { value: empirical, coarse: false });
    }

    // only u·w matters for a GLM loss
    let slopes: Vec<f64> = directions(d, grid.angle_step, r).iter().map(|u| u.dot(&w)).collect();
    let levels = grid.magnitude_levels;
    let budget = rho * n as f64;

    let mut best = empirical;
    let mut coarse = false;
    for i in 0..n {
        let (y, z) = (data.labels[i], scores[i]);
        for &slope in &slopes {
            for m in 1..=levels {
                let shift = budget * m as f64 / levels as f64 * slope;
                let v = empirical + (loss.eval_unchecked(y, z + shift) - base[i]) / n as f64;
                if v > best {
                    best = v;
                    coarse = m == 1 && levels > 1;
                }
            }
        }
    }

    let mut spread = 0.0;
    for i in 0..n {
        let (y, z) = (data.labels[i], scores[i]);
        spread += slopes.iter().map(|&s| loss.eval_unchecked(y, z + rho * s)).fold(base[i], f64::max);
    }
    let spread = spread / n as f64;
    if spread > best {
        best = spread;
        coarse = false;
    }
    Ok(SupBound { value: best, coarse })
}

fn directions(d: usize, step: f64, r: DualNorm) -> Vec<Array1<f64>> {
    let mut dirs: Vec<Array1<f64>> = Vec::new();
    for j in 0..d {
        for sgn in [1.0, -1.0] {
            let mut e = Array1::zeros(d);
            e[j] = sgn;
            dirs.push(e);
        }
    }
    if d <= 16 {
        for mask in 0..(1u32 << d) {
            dirs.push(Array1::from_iter((0..d).map(|j| if mask >> j & 1 == 1 { -1.0 } else { 1.0 })));
        }
    }
    let turns = ((2.0 * std::f64::consts::PI) / step).ceil() as usize;
    match d {
        1 => {}
        2 => {
            for t in 0..turns {
                let a = t as f64 * step;
                dirs.push(ndarray::array![a.cos(), a.sin()]);
            }
        }
        3 => {
            let rings = (std::f64::consts::PI / step).ceil() as usize;
            for p in 0..=rings {
                let polar = (p as f64 * step).min(std::f64::consts::PI);
                let around = ((turns as f64 * polar.sin()).ceil() as usize).max(1);
                for t in 0..around {
                    let a = 2.0 * std::f64::consts::PI * t as f64 / around as f64;
                    dirs.push(ndarray::array![polar.sin() * a.cos(), polar.sin() * a.sin(), polar.cos()]);
                }
            }
        }
        _ => {}
    }
    for u in dirs.iter_mut() {
        let norm = r.norm(u.view());
        *u /= norm;
    }
    dirs
}
