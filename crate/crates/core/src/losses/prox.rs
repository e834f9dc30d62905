use super::{LossFamily, LossKind};
use crate::error::{invalid, DroError, Result};

const BISECTION_TOL: f64 = 1e-12;
const BISECTION_MAX_ITERS: usize = 200;

/// Dual coordinate update of the primal-dual solver:
///
/// `argmax_v (a/N)(v·s − ℓ_y*(v)) − (γ/2)(v − α_prev)²` with `s = x·w`.
///
/// Equivalently `prox_{κ ℓ_y*}(α_prev + κ s)` with `κ = a/(Nγ)`.
pub fn conjugate_prox(
    family: &LossFamily,
    y: f64,
    x_dot_w: f64,
    alpha_prev: f64,
    a: f64,
    n: usize,
    gamma: f64,
) -> Result<f64> {
    if !(gamma > 0.0) || !(a > 0.0) || n == 0 {
        return Err(invalid(format!("conjugate_prox needs a > 0, N > 0, gamma > 0 (a={a}, N={n}, gamma={gamma})")));
    }
    family.check_label(y)?;
    let kappa = a / (n as f64 * gamma);
    conjugate_prox_kappa(family, y, x_dot_w, alpha_prev, kappa)
}

pub(crate) fn conjugate_prox_kappa(
    family: &LossFamily,
    y: f64,
    s: f64,
    alpha_prev: f64,
    kappa: f64,
) -> Result<f64> {
    let (lo, hi) = family.conjugate_domain(y);
    let v = match family.kind {
        LossKind::Lad => alpha_prev + kappa * (s - y),
        LossKind::Huber => (kappa * (s - y) + alpha_prev) / (kappa + 1.0),
        LossKind::Hinge => alpha_prev + kappa * (s - y),
        LossKind::Logistic => return logistic_conjugate_prox(y, s, alpha_prev, kappa),
    };
    Ok(v.clamp(lo, hi))
}

/// With `u = yv ∈ (−1, 0)` the optimality condition is
/// `log((1+u)/(−u)) − y·s + (u − y·α_prev)/κ = 0`, strictly increasing in `u`
/// and ranging over the whole real line, so bisection always brackets the root.
fn logistic_conjugate_prox(y: f64, s: f64, alpha_prev: f64, kappa: f64) -> Result<f64> {
    let ys = y * s;
    let target = y * alpha_prev;
    let stationarity = |u: f64| ((1.0 + u) / (-u)).ln() - ys + (u - target) / kappa;
    let (mut lo, mut hi) = (-1.0_f64, 0.0_f64);
    for _ in 0..BISECTION_MAX_ITERS {
        if hi - lo <= BISECTION_TOL {
            let u = 0.5 * (lo + hi);
            // root closer to a boundary than the tolerance: snap to the endpoint
            let u = if u - (-1.0) <= BISECTION_TOL {
                -1.0
            } else if -u <= BISECTION_TOL {
                0.0
            } else {
                u
            };
            return Ok(y * u);
        }
        let mid = 0.5 * (lo + hi);
        let g = stationarity(mid);
        if g.is_nan() {
            return Err(DroError::BisectionFailed(BISECTION_MAX_ITERS));
        }
        if g > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(DroError::BisectionFailed(BISECTION_MAX_ITERS))
}

/// `prox_{μ ℓ_y}(z) = argmin_u ℓ_y(u) + (u − z)²/(2μ)`.
///
/// Logistic has no closed form; a few Newton steps on the smooth optimality
/// condition are used instead.
pub fn loss_prox(family: &LossFamily, y: f64, z: f64, mu: f64) -> f64 {
    match family.kind {
        LossKind::Lad => {
            let t = z - y;
            y + t.signum() * (t.abs() - mu).max(0.0)
        }
        LossKind::Huber => {
            let t = z - y;
            if t.abs() <= 1.0 + mu {
                y + t / (1.0 + mu)
            } else {
                z - mu * t.signum()
            }
        }
        LossKind::Hinge => {
            let m = y * z;
            if m >= 1.0 {
                z
            } else if m <= 1.0 - mu {
                z + mu * y
            } else {
                y
            }
        }
        LossKind::Logistic => {
            // u − z + μ ℓ'(u) = 0, ℓ' bounded by 1 so the root is in [z − μ, z + μ]
            let mut u = z;
            for _ in 0..50 {
                let p = super::sigmoid(-y * u);
                let g = u - z - mu * y * p;
                let h = 1.0 + mu * p * (1.0 - p);
                let step = g / h;
                u -= step;
                if step.abs() < 1e-15 * (1.0 + u.abs()) {
                    break;
                }
            }
            u
        }
    }
}

/// Moreau envelope `ℓ^μ(z)` and its derivative `(z − prox_{μℓ}(z))/μ`.
pub fn moreau_envelope(family: &LossFamily, y: f64, z: f64, mu: f64) -> (f64, f64) {
    let u = loss_prox(family, y, z, mu);
    let value = family.eval_unchecked(y, u) + (z - u) * (z - u) / (2.0 * mu);
    (value, (z - u) / mu)
}
