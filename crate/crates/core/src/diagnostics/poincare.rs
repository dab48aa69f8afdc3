use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::generator::{certify, random_bump, ratio_with, sweep_directions, RatioOptions};
use super::profile::{smooth_ramp, PsiSpec, TestProfile};
use crate::assembly::{apply_form, SparseForm};
use crate::error::{Error, Result};
use crate::kernels::{LevyMeasureSpec, Measure};
use crate::rng::stream;
use crate::weights::{VLambdaSpec, WeightSpec};

/// Settings for [`super_poincare_profile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincareOptions {
    /// Base settings for the per-`r` certificates; `c` is overridden by `2/(2∧r)`.
    pub ratio: RatioOptions,
    pub trials: usize,
    pub seed: u64,
    /// Radii sampled in `B(0,R0)` when measuring `C0`.
    pub inner_samples: usize,
}

impl Default for PoincareOptions {
    fn default() -> Self {
        PoincareOptions { ratio: RatioOptions::default(), trials: 200, seed: 0, inner_samples: 64 }
    }
}

/// One row of the constructive super Poincaré profile.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PoincareEntry {
    pub r: f64,
    /// `C = 2/(2∧r)` used for the ratio bound.
    pub c: f64,
    pub lambda: f64,
    pub r0: f64,
    /// Largest negative part of the ratio on `B(0,R0)`.
    pub c0: f64,
    /// Cutoff constant `max(1/inf W, sup_x ∫(η(x+z)−η(x))² ν(dz))` over pairs at distance below 1.
    pub c3: f64,
    pub s: f64,
    pub beta0_s: f64,
    /// `β(r)`; absent when no certificate could be built.
    pub beta: Option<f64>,
    /// Fraction of random `f` satisfying `∫f² ≤ rE(f,f) + β(r)(∫|f|ψ)²`.
    pub empirical_pass: Option<f64>,
    /// Whether the constant function satisfies the inequality.
    pub constant_pass: Option<bool>,
    pub error: Option<String>,
}

fn negative_part_inside(m: &Measure, vlam: &VLambdaSpec, profile: &TestProfile, d: usize, samples: usize, tol: f64, seed: u64) -> Result<f64> {
    let dirs = sweep_directions(d, 8, seed);
    let mut points = Vec::new();
    for i in 0..=samples {
        let rho = vlam.r0 * i as f64 / samples as f64;
        for dir in &dirs {
            points.push(dir.iter().map(|c| c * rho).collect::<Vec<f64>>());
        }
    }
    let vals = crate::par::map(&points, |x| ratio_with(m, x, profile, vlam, tol));
    let mut worst: f64 = 0.0;
    for v in vals {
        worst = worst.max(-v?);
    }
    Ok(worst)
}

const MAX_DIM: usize = 16;

/// `sup_x ∫(η(x+z)−η(x))² ν(dz)` for the radial ramp `η` from `R0` to `R0+1`.
fn cutoff_constant(m: &Measure, r0: f64, d: usize, seed: u64) -> Result<f64> {
    if d > MAX_DIM {
        return Err(Error::Unsupported(format!("dimension {d} above {MAX_DIM}")));
    }
    let eta = |x: &[f64]| smooth_ramp(x.iter().map(|c| c * c).sum::<f64>().sqrt() - r0);
    let dirs = sweep_directions(d, 8, seed);
    let mut best: f64 = 0.0;
    for k in 0..=60 {
        let rho = (r0 - 1.0).max(0.0) + 3.0 * k as f64 / 60.0;
        for dir in &dirs {
            let x: Vec<f64> = dir.iter().map(|c| c * rho).collect();
            let ex = eta(&x);
            let v = m.integrate(
                |z| {
                    let mut y = [0.0f64; MAX_DIM];
                    for i in 0..d {
                        y[i] = x[i] + z[i];
                    }
                    let diff = eta(&y[..d]) - ex;
                    diff * diff
                },
                1e-8,
            );
            best = best.max(v?);
        }
    }
    Ok(best)
}

#[allow(clippy::too_many_arguments)]
fn entry_for(
    r: f64,
    m: &Measure,
    nu: &LevyMeasureSpec,
    w: &WeightSpec,
    a: &SparseForm,
    psi: &PsiSpec,
    opts: &PoincareOptions,
    inf_w: f64,
) -> Result<PoincareEntry> {
    let d = nu.dim;
    let rp = 0.5 * r.min(2.0);
    let c = 1.0 / rp;
    let ropts = RatioOptions { c, ..opts.ratio };
    let (cert, vlam) = certify(nu, w, &ropts)?;
    if !cert.valid {
        return Err(Error::CertificateUnavailable(format!("ratio {} < C = {c} at |x| = {}", cert.min_ratio_observed, cert.argmin_norm)));
    }
    let profile = TestProfile::new(opts.ratio.delta)?;
    let c0 = negative_part_inside(m, &vlam, &profile, d, opts.inner_samples, ropts.tol, opts.seed)?;
    let c3 = (1.0 / inf_w).max(cutoff_constant(m, vlam.r0, d, opts.seed)?);
    let s = rp / (2.0 * c3 * (1.0 + rp * c0));
    let beta0_s = m.beta_zero_auto(s, 1e-6)?.value;
    let alpha = beta0_s * (1.0 + rp * c0);
    let beta = 2.0 * alpha * psi.sup_inverse_on_ball(vlam.r0 + 1.0, d);

    let grid = a.grid;
    let cell = grid.cell_volume();
    let nodes = grid.nodes();
    let psi_at: Vec<f64> = nodes.iter().map(|x| psi.eval(x)).collect();
    let holds = |f: &[f64]| -> Result<bool> {
        let lhs = cell * f.iter().map(|v| v * v).sum::<f64>();
        let l1 = cell * f.iter().zip(&psi_at).map(|(v, p)| v.abs() * p).sum::<f64>();
        Ok(lhs <= r * apply_form(a, f)? + beta * l1 * l1)
    };
    let mut rng = stream(opts.seed, "poincare");
    let mut passed = 0usize;
    for _ in 0..opts.trials {
        if holds(&random_bump(&grid, &mut rng))? {
            passed += 1;
        }
    }
    let constant_pass = holds(&vec![1.0; grid.len()])?;
    Ok(PoincareEntry {
        r,
        c,
        lambda: cert.lambda,
        r0: vlam.r0,
        c0,
        c3,
        s,
        beta0_s,
        beta: Some(beta),
        empirical_pass: Some(if opts.trials == 0 { 1.0 } else { passed as f64 / opts.trials as f64 }),
        constant_pass: Some(constant_pass),
        error: None,
    })
}

/// Constructive `β(r)` of the super Poincaré inequality and its empirical check on the grid form `a`.
///
/// `w` must be the weight `a` was assembled with. Entries whose certificate cannot be built carry
/// the error and no `β`.
pub fn super_poincare_profile(
    rs: &[f64],
    nu: &LevyMeasureSpec,
    w: &WeightSpec,
    a: &SparseForm,
    psi: &PsiSpec,
    opts: &PoincareOptions,
) -> Result<Vec<PoincareEntry>> {
    if nu.dim != a.grid.d {
        return Err(Error::DimensionMismatch { expected: a.grid.d, found: nu.dim });
    }
    if let Some((p, msg)) = psi.issues().into_iter().next() {
        return Err(Error::InvalidSpec(format!("psi{p}: {msg}")));
    }
    let m = Measure::levy(nu)?;
    // W(x,y) ≥ U1(x)+U1(y) on near pairs.
    let inf_w = (0..=4096).map(|k| 2.0 * w.scale * w.u1.eval(k as f64 * opts.ratio.radius_budget.min(1e4) / 4096.0)).fold(f64::INFINITY, f64::min);
    let mut out = Vec::with_capacity(rs.len());
    for &r in rs {
        if !(r > 0.0) {
            return Err(Error::InvalidSpec(format!("r must be positive, got {r}")));
        }
        match entry_for(r, &m, nu, w, a, psi, opts, inf_w) {
            Ok(e) => out.push(e),
            Err(e @ (Error::CertificateUnavailable(_) | Error::GrowthInsufficient { .. } | Error::DominationFailed { .. })) => {
                out.push(PoincareEntry { r, c: 2.0 / r.min(2.0), error: Some(e.to_string()), ..Default::default() })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
