use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// `φ(x) = (1+|x|²)^{-δ/2}` with `0 < δ < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestProfile {
    pub delta: f64,
}

impl Default for TestProfile {
    fn default() -> Self {
        TestProfile { delta: 0.5 }
    }
}

impl TestProfile {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidSpec(format!("delta must lie in (0, 1), got {delta}")));
        }
        Ok(TestProfile { delta })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|c| c * c).sum();
        (1.0 + r2).powf(-0.5 * self.delta)
    }
}

/// Strictly positive, bounded, square-integrable weight `ψ`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type", rename_all = "snake_case"))]
pub enum PsiSpec {
    /// `(1+|x|)^{-d-θ}`.
    Poly { theta: f64 },
    /// `exp(-c|x|^θ)`.
    Exp { c: f64, theta: f64 },
}

impl PsiSpec {
    pub fn issues(&self) -> Vec<(&'static str, alloc::string::String)> {
        let mut out = Vec::new();
        match *self {
            PsiSpec::Poly { theta } => {
                if !(theta > 0.0 && theta.is_finite()) {
                    out.push(("/theta", format!("theta must be positive, got {theta}")));
                }
            }
            PsiSpec::Exp { c, theta } => {
                if !(c > 0.0 && c.is_finite()) {
                    out.push(("/c", format!("c must be positive, got {c}")));
                }
                if !(theta > 0.0 && theta.is_finite()) {
                    out.push(("/theta", format!("theta must be positive, got {theta}")));
                }
            }
        }
        out
    }

    /// `ψ` at radius `rho` in dimension `d`.
    pub fn eval_radial(&self, rho: f64, d: usize) -> f64 {
        match *self {
            PsiSpec::Poly { theta } => (1.0 + rho).powf(-(d as f64) - theta),
            PsiSpec::Exp { c, theta } => (-c * rho.powf(theta)).exp(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_radial(x.iter().map(|c| c * c).sum::<f64>().sqrt(), x.len())
    }

    /// `sup_{|z| ≤ radius} 1/ψ(z)`; `ψ` is radially decreasing.
    pub fn sup_inverse_on_ball(&self, radius: f64, d: usize) -> f64 {
        1.0 / self.eval_radial(radius, d)
    }
}

/// `1 − 3t² + 2t³` clamped to `[0, 1]`: equals 1 for `t ≤ 0`, 0 for `t ≥ 1`.
pub(crate) fn smooth_ramp(t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        1.0 - t * t * (3.0 - 2.0 * t)
    }
}

/// Radial cutoff: 1 on `|x| ≤ l`, 0 on `|x| ≥ 2l`, `|∇f| ≤ 1.5/l`.
pub fn cutoff_value(l: f64, rho: f64) -> f64 {
    smooth_ramp((rho - l) / l)
}

/// Grid samples of the cutoff `f_l`; its support `B(0, 2l)` must fit in the box.
pub fn cutoff_family(l: f64, grid: &GridSpec) -> Result<Vec<f64>> {
    if !(l > 0.0) {
        return Err(Error::InvalidSpec(format!("l must be positive, got {l}")));
    }
    if 2.0 * l > grid.half_width {
        return Err(Error::OutOfBox { two_l: 2.0 * l, half_width: grid.half_width });
    }
    Ok(grid.radii().into_iter().map(|r| cutoff_value(l, r)).collect())
}
