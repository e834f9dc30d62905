//! Scalar GLM losses `ℓ_y(z)` with their convex conjugates and the norm
//! regularizer `ψ(w) = weight·‖w‖_s`.
//!
//! Every built-in loss is 1-Lipschitz in its scalar argument, so every
//! conjugate is finite only on a subset of `[-1, 1]`.
//!
//! Huber uses the continuous form `h(t) = t²/2` for `|t| ≤ 1` and
//! `|t| − 1/2` otherwise. The variant that jumps to `|t|` at `|t| = 1` is
//! neither continuous nor convex and has a different conjugate.

mod prox;
mod regularizer;

pub use prox::{conjugate_prox, loss_prox, moreau_envelope};
pub(crate) use prox::conjugate_prox_kappa;
pub use regularizer::{reg_prox, DualNorm, NormRegularizer};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{DroError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Lad,
    Huber,
    Hinge,
    Logistic,
}

impl LossKind {
    pub const ALL: [LossKind; 4] = [LossKind::Lad, LossKind::Huber, LossKind::Hinge, LossKind::Logistic];

    pub fn name(self) -> &'static str {
        match self {
            LossKind::Lad => "lad",
            LossKind::Huber => "huber",
            LossKind::Hinge => "hinge",
            LossKind::Logistic => "logistic",
        }
    }

    /// Hinge and logistic take `±1` labels; LAD and Huber take real labels.
    pub fn is_classification(self) -> bool {
        matches!(self, LossKind::Hinge | LossKind::Logistic)
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = DroError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lad" => Ok(LossKind::Lad),
            "huber" => Ok(LossKind::Huber),
            "hinge" => Ok(LossKind::Hinge),
            "logistic" => Ok(LossKind::Logistic),
            other => Err(DroError::InvalidParameter(format!("unknown loss '{other}'"))),
        }
    }
}

/// A loss together with its Lipschitz modulus `zeta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossFamily {
    pub kind: LossKind,
    pub zeta: f64,
}

impl LossFamily {
    pub fn new(kind: LossKind) -> Self {
        Self { kind, zeta: 1.0 }
    }

    pub fn check_label(&self, y: f64) -> Result<()> {
        if self.kind.is_classification() && y != 1.0 && y != -1.0 {
            return Err(DroError::InvalidLabel { loss: self.kind.name(), label: y });
        }
        Ok(())
    }

    /// `ℓ_y(z)`.
    pub fn eval(&self, y: f64, z: f64) -> Result<f64> {
        self.check_label(y)?;
        Ok(self.eval_unchecked(y, z))
    }

    pub(crate) fn eval_unchecked(&self, y: f64, z: f64) -> f64 {
        match self.kind {
            LossKind::Lad => (z - y).abs(),
            LossKind::Huber => huber(z - y),
            LossKind::Hinge => (1.0 - y * z).max(0.0),
            LossKind::Logistic => softplus(-y * z),
        }
    }

    /// A subgradient of `z ↦ ℓ_y(z)`.
    pub(crate) fn subgradient(&self, y: f64, z: f64) -> f64 {
        match self.kind {
            LossKind::Lad => sign(z - y),
            LossKind::Huber => (z - y).clamp(-1.0, 1.0),
            LossKind::Hinge => {
                if y * z < 1.0 {
                    -y
                } else {
                    0.0
                }
            }
            LossKind::Logistic => -y * sigmoid(-y * z),
        }
    }

    /// `ℓ_y*(α) = sup_z αz − ℓ_y(z)`.
    pub fn conjugate(&self, y: f64, alpha: f64) -> Result<Extended> {
        self.check_label(y)?;
        Ok(self.conjugate_unchecked(y, alpha))
    }

    pub(crate) fn conjugate_unchecked(&self, y: f64, alpha: f64) -> Extended {
        match self.kind {
            LossKind::Lad => {
                if alpha.abs() <= 1.0 {
                    Extended::Finite(alpha * y)
                } else {
                    Extended::PosInf
                }
            }
            LossKind::Huber => {
                if alpha.abs() <= 1.0 {
                    Extended::Finite(0.5 * alpha * alpha + alpha * y)
                } else {
                    Extended::PosInf
                }
            }
            // ℓ_y(z) = φ(yz) with y² = 1, so ℓ_y*(α) = φ*(yα).
            LossKind::Hinge => {
                let u = y * alpha;
                if (-1.0..=0.0).contains(&u) {
                    Extended::Finite(u)
                } else {
                    Extended::PosInf
                }
            }
            LossKind::Logistic => {
                let u = y * alpha;
                if (-1.0..=0.0).contains(&u) {
                    Extended::Finite(xlogx(-u) + xlogx(1.0 + u))
                } else {
                    Extended::PosInf
                }
            }
        }
    }

    /// Closed interval on which the conjugate is finite for label `y`.
    pub fn conjugate_domain(&self, y: f64) -> (f64, f64) {
        match self.kind {
            LossKind::Lad | LossKind::Huber => (-1.0, 1.0),
            LossKind::Hinge | LossKind::Logistic => {
                if y > 0.0 {
                    (-1.0, 0.0)
                } else {
                    (0.0, 1.0)
                }
            }
        }
    }
}

/// `ℓ_y(z)` as a free function.
pub fn loss_eval(family: &LossFamily, y: f64, z: f64) -> Result<f64> {
    family.eval(y, z)
}

/// `ℓ_y*(α)` as a free function; `+∞` outside the conjugate domain.
pub fn conjugate_eval(family: &LossFamily, y: f64, alpha: f64) -> Result<Extended> {
    family.conjugate(y, alpha)
}

/// Extended real used for conjugate values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    PosInf,
}

impl Extended {
    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::PosInf => None,
        }
    }
}

pub(crate) fn huber(t: f64) -> f64 {
    let a = t.abs();
    if a <= 1.0 {
        0.5 * t * t
    } else {
        a - 0.5
    }
}

/// `log(1 + e^x)` without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

// 0·log 0 := 0
fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}
