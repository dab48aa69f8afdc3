use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use super::angular::{sphere_area, Angular};
use super::measure::Measure;
use crate::error::{Error, Result};
use crate::quad::{try_integrate, QuadOptions};

/// Value of `β0(r)` together with the bound used for frequencies beyond the cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BetaZero {
    pub value: f64,
    pub tail_estimate: f64,
    pub cutoff: f64,
}

/// Upper bound for `Γ(s, x)` valid for `x > max(s - 1, 0)`.
fn upper_gamma_bound(s: f64, x: f64) -> f64 {
    let lead = x.powf(s - 1.0) * (-x).exp();
    if s <= 1.0 {
        lead
    } else {
        lead / (1.0 - (s - 1.0) / x)
    }
}

impl Measure {
    /// Probe directions used for symbol fits.
    fn probe_directions(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut dirs = Vec::new();
        if d == 1 {
            dirs.push(vec![1.0]);
        } else if d == 2 {
            for i in 0..16 {
                let t = PI * i as f64 / 16.0;
                dirs.push(vec![t.cos(), t.sin()]);
            }
        } else {
            for i in 0..d {
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                dirs.push(e);
            }
            let s = 1.0 / (d as f64).sqrt();
            dirs.push(vec![s; d]);
            for i in 0..d {
                let mut e = vec![s; d];
                e[i] = -s;
                dirs.push(e);
            }
        }
        dirs
    }

    /// `min φ(ξ) / (|ξ|² ∧ |ξ|^α)` over log-spaced `|ξ| ∈ [lo, hi]` and probe directions.
    pub fn symbol_constant(&self, lo: f64, hi: f64, samples: usize) -> Result<f64> {
        let alpha = self.min_alpha();
        let mut best = f64::INFINITY;
        let n = samples.max(2);
        for dir in self.probe_directions() {
            for i in 0..n {
                let rho = lo * (hi / lo).powf(i as f64 / (n - 1) as f64);
                let xi: Vec<f64> = dir.iter().map(|c| c * rho).collect();
                let phi = self.char_exponent(&xi)?;
                let scale = (rho * rho).min(rho.powf(alpha));
                best = best.min(phi / scale);
            }
        }
        Ok(best)
    }

    /// Bound on `∫_{|ξ|>cutoff} exp(-r c |ξ|^α) dξ` for the fitted symbol constant `c`.
    fn beta_tail(&self, r: f64, c: f64, cutoff: f64) -> f64 {
        let d = self.dim() as f64;
        let alpha = self.min_alpha();
        let a = r * c;
        let s = d / alpha;
        let x = a * cutoff.powf(alpha);
        if cutoff < 1.0 || x <= (s - 1.0).max(0.0) {
            return f64::INFINITY;
        }
        sphere_area(self.dim()) / alpha * a.powf(-s) * upper_gamma_bound(s, x)
    }

    /// `β0(r) = ∫ exp(-r φ(ξ)) dξ` over `|ξ| ≤ cutoff`, failing if the tail bound exceeds `tol` relative.
    pub fn beta_zero(&self, r: f64, cutoff: f64, tol: f64) -> Result<BetaZero> {
        if !(r > 0.0) {
            return Err(Error::InvalidSpec("beta_zero needs r > 0".into()));
        }
        let c = self.symbol_constant(0.1, 100.0, 24)?;
        if !(c > 0.0) {
            return Err(Error::InvalidSpec("symbol lower bound is not positive".into()));
        }
        let tail = self.beta_tail(r, c, cutoff);
        let value = self.beta_core(r, cutoff, tol * 0.1)?;
        if !(tail <= tol * value) {
            return Err(Error::CutoffTooSmall { cutoff, tail });
        }
        Ok(BetaZero { value: value + tail, tail_estimate: tail, cutoff })
    }

    /// [`Measure::beta_zero`] with a cutoff chosen from the fitted symbol constant.
    pub fn beta_zero_auto(&self, r: f64, tol: f64) -> Result<BetaZero> {
        let c = self.symbol_constant(0.1, 100.0, 24)?;
        let alpha = self.min_alpha();
        let target = (-(tol * 1e-3).ln()).max(10.0) + 10.0;
        let mut cutoff = (target / (r * c)).powf(1.0 / alpha).max((target / (r * c)).sqrt()).max(1.0);
        for _ in 0..8 {
            match self.beta_zero(r, cutoff, tol) {
                Err(Error::CutoffTooSmall { .. }) => cutoff *= 2.0,
                other => return other,
            }
        }
        self.beta_zero(r, cutoff, tol)
    }

    fn beta_core(&self, r: f64, cutoff: f64, tol: f64) -> Result<f64> {
        let d = self.dim();
        let mut breaks = Vec::new();
        let mut b = cutoff;
        while b > 1e-3 {
            b *= 0.5;
            breaks.push(b);
        }
        let opts = QuadOptions::rel(tol).with_abs(1e-300).with_max_evals(200_000);
        let sphere = Angular::Surface { offset: 0, k: d, cone: None };
        let mut xi = vec![0.0; d];
        sphere.integrate(
            d,
            |omega| {
                let res = try_integrate(
                    |rho: f64| {
                        for i in 0..d {
                            xi[i] = rho * omega[i];
                        }
                        let phi = self.char_exponent(&xi)?;
                        Ok::<f64, Error>((-r * phi).exp() * rho.powi(d as i32 - 1))
                    },
                    0.0,
                    cutoff,
                    &breaks,
                    opts,
                )?;
                Ok(res.value)
            },
            tol,
            &[],
            (4096, 0),
        )
    }
}
