//! Angular parts: surface measure on a coordinate block (optionally a double cone)
//! or a finite set of atoms.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use super::{dot, norm};
use crate::error::{Error, Result};
use crate::quad::{try_integrate, QuadOptions};
use crate::rng::stream;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Cone {
    /// Unit axis in block coordinates.
    pub axis: Vec<f64>,
    pub cos_half: f64,
    pub half: f64,
}

impl Cone {
    pub fn contains(&self, theta_block: &[f64]) -> bool {
        dot(theta_block, &self.axis).abs() >= self.cos_half * norm(theta_block) * (1.0 - 1e-14)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Angular {
    /// Surface measure of the unit sphere of coordinates `offset..offset+k`.
    Surface { offset: usize, k: usize, cone: Option<Cone> },
    /// Unit directions with masses.
    Atoms(Vec<(Vec<f64>, f64)>),
}

/// `|S^{k-1}|`.
pub(crate) fn sphere_area(k: usize) -> f64 {
    let h = 0.5 * k as f64;
    2.0 * PI.powf(h) / libm::tgamma(h)
}

/// Unit-ball volume in dimension `k`.
pub(crate) fn ball_volume(k: usize) -> f64 {
    sphere_area(k) / k as f64
}

#[cfg(test)]
fn cap_polar_integral(k: usize, half: f64) -> f64 {
    // ∫_0^half sin^{k-2} t dt
    match k {
        2 => half,
        3 => 1.0 - half.cos(),
        _ => crate::quad::integrate(|t| t.sin().powi(k as i32 - 2), 0.0, half, &[], QuadOptions::rel(1e-14)).map(|r| r.value).unwrap_or(f64::NAN),
    }
}

/// Orthonormal completion of a unit 3-vector.
fn frame3(a: &[f64]) -> ([f64; 3], [f64; 3]) {
    let pick = if a[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = pick[0] * a[0] + pick[1] * a[1] + pick[2] * a[2];
    let mut e1 = [pick[0] - d * a[0], pick[1] - d * a[1], pick[2] - d * a[2]];
    let n1 = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    for c in e1.iter_mut() {
        *c /= n1;
    }
    let e2 = [a[1] * e1[2] - a[2] * e1[1], a[2] * e1[0] - a[0] * e1[2], a[0] * e1[1] - a[1] * e1[0]];
    (e1, e2)
}

impl Angular {
    #[cfg(test)]
    pub fn total_mass(&self) -> f64 {
        match self {
            Angular::Atoms(a) => a.iter().map(|(_, m)| m).sum(),
            Angular::Surface { k, cone: None, .. } => sphere_area(*k),
            Angular::Surface { k, cone: Some(c), .. } => {
                if *k == 1 {
                    2.0
                } else {
                    2.0 * sphere_area(k - 1) * cap_polar_integral(*k, c.half)
                }
            }
        }
    }

    /// `∫ f(θ) σ(dθ)` with `θ` embedded in `R^dim`.
    ///
    /// `breaks` lists polar angles (block-local) where `f` may jump; used when `k = 2`.
    pub fn integrate<F>(&self, dim: usize, mut f: F, tol: f64, breaks: &[f64], mc: (usize, u64)) -> Result<f64>
    where
        F: FnMut(&[f64]) -> Result<f64>,
    {
        match self {
            Angular::Atoms(atoms) => {
                let mut s = 0.0;
                for (theta, m) in atoms {
                    s += m * f(theta)?;
                }
                Ok(s)
            }
            Angular::Surface { offset, k, cone } => {
                let off = *offset;
                let mut theta = vec![0.0; dim];
                let opts = QuadOptions::rel(tol).with_abs(1e-300).with_max_evals(100_000);
                match *k {
                    1 => {
                        theta[off] = 1.0;
                        let a = f(&theta)?;
                        theta[off] = -1.0;
                        Ok(a + f(&theta)?)
                    }
                    2 => {
                        let arcs: Vec<(f64, f64)> = match cone {
                            None => vec![(0.0, 2.0 * PI)],
                            Some(c) => {
                                let phi = c.axis[1].atan2(c.axis[0]);
                                vec![(phi - c.half, phi + c.half), (phi + PI - c.half, phi + PI + c.half)]
                            }
                        };
                        let mut total = 0.0;
                        for (a, b) in arcs {
                            let mut pts: Vec<f64> = Vec::new();
                            let quarter = 0.5 * PI;
                            let mut q = (a / quarter).ceil() * quarter;
                            while q < b {
                                pts.push(q);
                                q += quarter;
                            }
                            for &br in breaks {
                                for s in -2..=2 {
                                    pts.push(br + s as f64 * 2.0 * PI);
                                }
                            }
                            let r = try_integrate(
                                |t: f64| {
                                    let (s, c) = t.sin_cos();
                                    theta[off] = c;
                                    theta[off + 1] = s;
                                    f(&theta)
                                },
                                a,
                                b,
                                &pts,
                                opts,
                            )?;
                            total += r.value;
                        }
                        Ok(total)
                    }
                    3 => {
                        let axis: Vec<f64> = match cone {
                            Some(c) => c.axis.clone(),
                            None => vec![0.0, 0.0, 1.0],
                        };
                        let (e1, e2) = frame3(&axis);
                        let ranges: Vec<(f64, f64)> = match cone {
                            None => vec![(0.0, PI)],
                            Some(c) => vec![(0.0, c.half), (PI - c.half, PI)],
                        };
                        let inner_opts = QuadOptions::rel(tol * 0.1).with_abs(1e-300).with_max_evals(50_000);
                        let mut total = 0.0;
                        for (a, b) in ranges {
                            let r = try_integrate(
                                |t: f64| {
                                    let (st, ct) = t.sin_cos();
                                    let inner = try_integrate(
                                        |s: f64| {
                                            let (ss, cs) = s.sin_cos();
                                            for i in 0..3 {
                                                theta[off + i] = ct * axis[i] + st * (cs * e1[i] + ss * e2[i]);
                                            }
                                            f(&theta)
                                        },
                                        0.0,
                                        2.0 * PI,
                                        &[0.5 * PI, PI, 1.5 * PI],
                                        inner_opts,
                                    )?;
                                    Ok::<f64, Error>(st * inner.value)
                                },
                                a,
                                b,
                                &[],
                                opts,
                            )?;
                            total += r.value;
                        }
                        Ok(total)
                    }
                    kk => {
                        // Seeded Monte Carlo over the sphere of the block.
                        let (samples, seed) = mc;
                        let mut rng = stream(seed, "sphere-directions");
                        let w = sphere_area(kk) / samples as f64;
                        let mut total = 0.0;
                        let mut g = vec![0.0; kk];
                        for _ in 0..samples {
                            for gi in g.iter_mut() {
                                *gi = gaussian(&mut rng);
                            }
                            let n = norm(&g);
                            if n == 0.0 {
                                continue;
                            }
                            for gi in g.iter_mut() {
                                *gi /= n;
                            }
                            if let Some(c) = cone {
                                if !c.contains(&g) {
                                    continue;
                                }
                            }
                            theta[off..off + kk].copy_from_slice(&g);
                            total += w * f(&theta)?;
                        }
                        Ok(total)
                    }
                }
            }
        }
    }
}

/// Standard normal variate by Box-Muller.
pub(crate) fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}
