use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, DroError, Result};

/// Exponent `s` of the regularizing norm. The transport cost uses the
/// conjugate exponent `r` with `1/r + 1/s = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DualNorm {
    L1,
    L2,
    Inf,
}

impl DualNorm {
    pub fn norm(self, v: ArrayView1<f64>) -> f64 {
        match self {
            DualNorm::L1 => v.iter().map(|x| x.abs()).sum(),
            DualNorm::L2 => v.dot(&v).sqrt(),
            DualNorm::Inf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    /// The exponent `r` paired with this `s`.
    pub fn conjugate(self) -> DualNorm {
        match self {
            DualNorm::L1 => DualNorm::Inf,
            DualNorm::L2 => DualNorm::L2,
            DualNorm::Inf => DualNorm::L1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DualNorm::L1 => "1",
            DualNorm::L2 => "2",
            DualNorm::Inf => "inf",
        }
    }
}

impl fmt::Display for DualNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DualNorm {
    type Err = DroError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" => Ok(DualNorm::L1),
            "2" => Ok(DualNorm::L2),
            "inf" | "infinity" => Ok(DualNorm::Inf),
            other => Err(invalid(format!("unknown norm exponent '{other}' (expected 1, 2 or inf)"))),
        }
    }
}

impl TryFrom<String> for DualNorm {
    type Error = DroError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<DualNorm> for String {
    fn from(s: DualNorm) -> String {
        s.as_str().to_string()
    }
}

/// `ψ(w) = weight·‖w‖_s`, with `weight = ρ·ζ` for the DRO reformulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormRegularizer {
    pub s: DualNorm,
    pub weight: f64,
}

impl NormRegularizer {
    pub fn new(s: DualNorm, weight: f64) -> Result<Self> {
        if !(weight >= 0.0) || !weight.is_finite() {
            return Err(invalid(format!("regularizer weight must be finite and >= 0, got {weight}")));
        }
        Ok(Self { s, weight })
    }

    /// Regularizer equivalent to a Wasserstein-1 ball of radius `rho` for a
    /// `zeta`-Lipschitz loss.
    pub fn from_radius(s: DualNorm, rho: f64, zeta: f64) -> Result<Self> {
        Self::new(s, rho * zeta)
    }

    pub fn none() -> Self {
        Self { s: DualNorm::L2, weight: 0.0 }
    }

    pub fn eval(&self, w: ArrayView1<f64>) -> f64 {
        if self.weight == 0.0 {
            0.0
        } else {
            self.weight * self.s.norm(w)
        }
    }

    pub fn prox(&self, v: ArrayView1<f64>, tau: f64) -> Array1<f64> {
        reg_prox(self, v, tau)
    }
}

/// `argmin_u τψ(u) + ½‖u − v‖²`.
pub fn reg_prox(reg: &NormRegularizer, v: ArrayView1<f64>, tau: f64) -> Array1<f64> {
    let t = tau * reg.weight;
    if t == 0.0 {
        return v.to_owned();
    }
    match reg.s {
        DualNorm::L2 => {
            let norm = v.dot(&v).sqrt();
            if norm <= t {
                Array1::zeros(v.len())
            } else {
                v.mapv(|x| x * (1.0 - t / norm))
            }
        }
        DualNorm::L1 => v.mapv(|x| x.signum() * (x.abs() - t).max(0.0)),
        // Moreau: prox of t‖·‖_∞ is v minus the projection onto the ℓ1 ball of radius t.
        DualNorm::Inf => &v - &project_l1_ball(v, t),
    }
}

/// Euclidean projection onto `{u : ‖u‖₁ ≤ radius}` by sorting magnitudes.
pub(crate) fn project_l1_ball(v: ArrayView1<f64>, radius: f64) -> Array1<f64> {
    let l1: f64 = v.iter().map(|x| x.abs()).sum();
    if l1 <= radius {
        return v.to_owned();
    }
    if radius <= 0.0 {
        return Array1::zeros(v.len());
    }
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &m) in mags.iter().enumerate() {
        cumsum += m;
        let candidate = (cumsum - radius) / (j + 1) as f64;
        if m > candidate {
            theta = candidate;
        } else {
            break;
        }
    }
    v.mapv(|x| x.signum() * (x.abs() - theta).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn prox_examples() {
        let l2 = NormRegularizer::new(DualNorm::L2, 1.0).unwrap();
        assert_eq!(reg_prox(&l2, array![0.0, 0.0].view(), 1.0), array![0.0, 0.0]);
        let p = reg_prox(&l2, array![3.0, 4.0].view(), 1.0);
        assert!((p[0] - 2.4).abs() < 1e-12 && (p[1] - 3.2).abs() < 1e-12);

        let l1 = NormRegularizer::new(DualNorm::L1, 1.0).unwrap();
        assert_eq!(reg_prox(&l1, array![0.5, -2.0].view(), 1.0), array![0.0, -1.0]);
    }

    #[test]
    fn zero_weight_is_identity() {
        for s in [DualNorm::L1, DualNorm::L2, DualNorm::Inf] {
            let r = NormRegularizer::new(s, 0.0).unwrap();
            let v = array![1.5, -0.25, 7.0];
            assert_eq!(reg_prox(&r, v.view(), 3.0), v);
        }
    }

    #[test]
    fn inf_prox_clips_largest_entries() {
        // prox of ‖·‖_∞ with t = 1 on (3, 1): projection onto the ℓ1 ball of
        // radius 1 is (1, 0), so the result is (2, 1).
        let r = NormRegularizer::new(DualNorm::Inf, 1.0).unwrap();
        assert_eq!(reg_prox(&r, array![3.0, 1.0].view(), 1.0), array![2.0, 1.0]);
        // inside the ℓ1 ball everything collapses to zero
        assert_eq!(reg_prox(&r, array![0.3, -0.2].view(), 1.0), array![0.0, 0.0]);
    }

    #[test]
    fn l1_projection_lands_on_sphere() {
        let p = project_l1_ball(array![2.0, -1.0, 0.5].view(), 1.5);
        let l1: f64 = p.iter().map(|x| x.abs()).sum();
        assert!((l1 - 1.5).abs() < 1e-12);
    }

    #[test]
    fn homogeneity_and_origin() {
        let r = NormRegularizer::new(DualNorm::Inf, 0.7).unwrap();
        let w = array![1.0, -3.0, 2.0];
        assert_eq!(r.eval(Array1::zeros(3).view()), 0.0);
        assert!((r.eval((&w * 2.5).view()) - 2.5 * r.eval(w.view())).abs() < 1e-12);
    }

    #[test]
    fn exponent_strings() {
        assert_eq!("inf".parse::<DualNorm>().unwrap(), DualNorm::Inf);
        assert_eq!(serde_json::to_string(&DualNorm::L1).unwrap(), "\"1\"");
        assert_eq!(serde_json::from_str::<DualNorm>("\"2\"").unwrap(), DualNorm::L2);
        assert!("3".parse::<DualNorm>().is_err());
        assert_eq!(DualNorm::L1.conjugate(), DualNorm::Inf);
    }
}
