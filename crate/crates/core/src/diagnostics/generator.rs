use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use super::profile::TestProfile;
use crate::assembly::{apply_form, SparseForm};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::kernels::{LevyMeasureSpec, Measure};
use crate::quad::kronrod15;
use crate::rng::stream;
use crate::weights::{build_v_lambda, VLambdaSpec, WeightSpec};

/// `(−L_λφ/φ)(x)`, with `L_λ` the generator of the truncated form with weight `V_λ(x)+V_λ(y)`.
pub fn generator_ratio(x: &[f64], profile: &TestProfile, nu: &LevyMeasureSpec, vlam: &VLambdaSpec, tol: f64) -> Result<f64> {
    if x.len() != nu.dim {
        return Err(Error::DimensionMismatch { expected: nu.dim, found: x.len() });
    }
    ratio_with(&Measure::levy(nu)?, x, profile, vlam, tol)
}

pub(crate) fn ratio_with(m: &Measure, x: &[f64], profile: &TestProfile, vlam: &VLambdaSpec, tol: f64) -> Result<f64> {
    let delta = profile.delta;
    let rx2: f64 = x.iter().map(|c| c * c).sum();
    let rx = rx2.sqrt();
    let phi = (1.0 + rx2).powf(-0.5 * delta);
    let vx = vlam.eval(rx);
    // ∇φ(x) = grad·x
    let grad = -delta * (1.0 + rx2).powf(-0.5 * delta - 1.0);
    let g = |z: &[f64]| -> f64 {
        let r2: f64 = z.iter().map(|c| c * c).sum();
        if r2 == 0.0 {
            return 0.0;
        }
        let r = r2.sqrt();
        let xt = x.iter().zip(z).map(|(a, b)| a * b).sum::<f64>() / r;
        // Taylor remainder divided by r²; exact in s, no cancellation at small r.
        let rem = delta
            * kronrod15(
                |s| {
                    let q = 1.0 + rx2 + 2.0 * s * r * xt + s * s * r2;
                    let p = xt + s * r;
                    (1.0 - s) * ((delta + 2.0) * p * p - q) / q.powf(0.5 * delta + 2.0)
                },
                0.0,
                1.0,
            );
        let rp = (rx2 + 2.0 * r * xt + r2).max(0.0).sqrt();
        let rm = (rx2 - 2.0 * r * xt + r2).max(0.0).sqrt();
        let w = vx + vlam.eval(rp);
        // ½⟨∇φ, z⟩(V(x+z) − V(x−z)) / r², using ρ+ − ρ− = 4r⟨x,θ⟩/(ρ+ + ρ−).
        let drift = if rp + rm > 0.0 { 2.0 * grad * xt * xt * vlam.divided_difference(rp, rm) / (rp + rm) } else { 0.0 };
        r2 * (rem * w + drift)
    };
    let l = m.integrate(g, tol)?;
    Ok(-l / phi)
}

/// Settings for [`ratio_certificate`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RatioOptions {
    /// Target lower bound `C`.
    pub c: f64,
    pub delta: f64,
    /// Outer sweep radius as a multiple of `R0`.
    pub r_max_factor: f64,
    /// Log-spaced sweep radii.
    pub radii: usize,
    /// Sweep directions in `d ≥ 2`.
    pub directions: usize,
    /// Largest `R0` tried when building `V_λ`.
    pub radius_budget: f64,
    pub tol: f64,
    pub seed: u64,
}

impl Default for RatioOptions {
    fn default() -> Self {
        RatioOptions { c: 10.0, delta: 0.5, r_max_factor: 10.0, radii: 40, directions: 16, radius_budget: (1u64 << 20) as f64, tol: 1e-7, seed: 0 }
    }
}

impl RatioOptions {
    pub fn new(c: f64, delta: f64) -> Self {
        RatioOptions { c, delta, ..Self::default() }
    }
}

/// Outcome of the generator-ratio sweep over the annulus `R0 ≤ |x| ≤ R_max`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RatioCertificate {
    pub c: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub lambda: f64,
    pub gamma0: f64,
    pub r0: f64,
    pub r_max: f64,
    pub min_ratio_observed: f64,
    /// `|x|` at the observed minimum.
    pub argmin_norm: f64,
    pub samples: usize,
    pub valid: bool,
}

/// `ε = (1−δ)/8` and `λ = C/(δγ0((1−6ε) − (1+ε)δ))`.
pub fn certificate_constants(c: f64, delta: f64, gamma0: f64) -> (f64, f64) {
    let eps = (1.0 - delta) / 8.0;
    let lambda = c / (delta * gamma0 * ((1.0 - 6.0 * eps) - (1.0 + eps) * delta));
    (eps, lambda)
}

/// Unit sweep directions: `±e1` in `d = 1`, equispaced in `d = 2`, axes plus seeded draws above.
pub(crate) fn sweep_directions(d: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    match d {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count.max(1))
            .map(|k| {
                let t = 2.0 * PI * k as f64 / count.max(1) as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        _ => {
            let mut out = Vec::new();
            for i in 0..d {
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                out.push(e);
            }
            let mut rng = stream(seed, "ratio-directions");
            while out.len() < count.max(d) {
                let v: Vec<f64> = (0..d).map(|_| crate::kernels::gaussian_sample(&mut rng)).collect();
                let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                if n > 1e-12 {
                    out.push(v.iter().map(|c| c / n).collect());
                }
            }
            out
        }
    }
}

/// Certificate together with the `V_λ` it was built from.
pub(crate) fn certify(nu: &LevyMeasureSpec, w: &WeightSpec, opts: &RatioOptions) -> Result<(RatioCertificate, VLambdaSpec)> {
    let profile = TestProfile::new(opts.delta)?;
    if !(opts.c > 0.0) {
        return Err(Error::InvalidSpec(format!("C must be positive, got {}", opts.c)));
    }
    let m = Measure::levy(nu)?;
    let gamma0 = m.moments()?.gamma0;
    let (eps, lambda) = certificate_constants(opts.c, opts.delta, gamma0);
    let vlam = build_v_lambda(lambda, w, opts.radius_budget, opts.seed)?;
    let r0 = vlam.r0;
    let r_max = opts.r_max_factor * r0;
    let n = opts.radii.max(2);
    let dirs = sweep_directions(nu.dim, opts.directions, opts.seed);
    let mut points = Vec::with_capacity(n * dirs.len());
    for i in 0..n {
        let rho = r0 * (r_max / r0).powf(i as f64 / (n - 1) as f64);
        for dir in &dirs {
            points.push((rho, dir.iter().map(|c| c * rho).collect::<Vec<f64>>()));
        }
    }
    let ratios = crate::par::map(&points, |(_, x)| ratio_with(&m, x, &profile, &vlam, opts.tol));
    let mut min = f64::INFINITY;
    let mut arg = r0;
    for ((rho, _), v) in points.iter().zip(ratios) {
        let v = v?;
        if v < min {
            min = v;
            arg = *rho;
        }
    }
    let cert = RatioCertificate {
        c: opts.c,
        delta: opts.delta,
        epsilon: eps,
        lambda,
        gamma0,
        r0,
        r_max,
        min_ratio_observed: min,
        argmin_norm: arg,
        samples: points.len(),
        valid: min >= opts.c,
    };
    Ok((cert, vlam))
}

/// Build `V_λ` for the closed-form `λ` and check `−L_λφ/φ ≥ C` on a log-spaced annulus sweep.
pub fn ratio_certificate(nu: &LevyMeasureSpec, w: &WeightSpec, opts: &RatioOptions) -> Result<RatioCertificate> {
    let (cert, _) = certify(nu, w, opts)?;
    if cert.valid {
        Ok(cert)
    } else {
        Err(Error::CertificateFailed { x_norm: cert.argmin_norm, ratio: cert.min_ratio_observed, certificate: Box::new(cert) })
    }
}

/// Random Gaussian bump `exp(−|x−c|²/(2w²))` with centre in `[−L/2, L/2]^d` and width in `[2h, L/4]`.
pub(crate) fn random_bump<R: Rng>(grid: &GridSpec, rng: &mut R) -> Vec<f64> {
    let half = 0.5 * grid.half_width;
    let centre: Vec<f64> = (0..grid.d).map(|_| rng.random_range(-half..=half)).collect();
    let lo = 2.0 * grid.h;
    let hi = (0.25 * grid.half_width).max(lo);
    let width = if hi > lo { rng.random_range(lo..hi) } else { lo };
    gaussian_bump(grid, &centre, width)
}

pub(crate) fn gaussian_bump(grid: &GridSpec, centre: &[f64], width: f64) -> Vec<f64> {
    let mut x = vec![0.0; grid.d];
    (0..grid.len())
        .map(|i| {
            grid.node(i, &mut x);
            let r2: f64 = x.iter().zip(centre).map(|(a, b)| (a - b) * (a - b)).sum();
            (-0.5 * r2 / (width * width)).exp()
        })
        .collect()
}

/// Discrete Hardy margins `fᵀAf − 2h^d Σ ratio(x_i) f_i²` with their tolerances.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HardyReport {
    pub margins: Vec<f64>,
    /// `0.02 (|fᵀAf| + |2h^d Σ ratio f²|)` per trial.
    pub tolerances: Vec<f64>,
    pub violations: usize,
    pub min_node_ratio: f64,
}

/// Relative slack allowed for discretization error in [`hardy_check`].
pub const HARDY_RELATIVE_TOL: f64 = 0.02;

/// Test `E(f,f) ≥ 2∫(−L_λφ/φ)f²` on `trials` random Gaussian bumps.
pub fn hardy_check(a: &SparseForm, profile: &TestProfile, nu: &LevyMeasureSpec, vlam: &VLambdaSpec, trials: usize, seed: u64) -> Result<HardyReport> {
    let grid = a.grid;
    if nu.dim != grid.d {
        return Err(Error::DimensionMismatch { expected: grid.d, found: nu.dim });
    }
    let m = Measure::levy(nu)?;
    let nodes = grid.nodes();
    let ratios: Vec<f64> = crate::par::map(&nodes, |x| ratio_with(&m, x, profile, vlam, 1e-8)).into_iter().collect::<Result<_>>()?;
    let cell = grid.cell_volume();
    let mut rng = stream(seed, "hardy");
    let mut report = HardyReport { min_node_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min), ..Default::default() };
    for _ in 0..trials {
        let f = random_bump(&grid, &mut rng);
        let e = apply_form(a, &f)?;
        let rhs = 2.0 * cell * f.iter().zip(&ratios).map(|(v, r)| r * v * v).sum::<f64>();
        let margin = e - rhs;
        let tol = HARDY_RELATIVE_TOL * (e.abs() + rhs.abs());
        if margin < -tol {
            report.violations += 1;
        }
        report.margins.push(margin);
        report.tolerances.push(tol);
    }
    Ok(report)
}
