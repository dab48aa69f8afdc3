use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::angular::{ball_volume, Angular, Cone};
use super::radial::RadialLaw;
use super::{dot, norm, unit, JumpKernelSpec, KernelRange, LevyMeasureSpec, LevyVariant};
use crate::error::{Error, Result};

/// Settings for the seeded Monte Carlo angular rule used on spheres of dimension four and up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarlo {
    pub samples: usize,
    pub seed: u64,
}

impl Default for MonteCarlo {
    fn default() -> Self {
        MonteCarlo { samples: 20_000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Piece {
    pub angular: Angular,
    pub law: RadialLaw,
}

/// A compiled symmetric measure `Σ σ_i(dθ) ⊗ r^{-1-α_i} dr`.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    dim: usize,
    pub(crate) pieces: Vec<Piece>,
    mc: MonteCarlo,
}

/// Second and fourth moments and the covariance matrix of a Lévy measure.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MomentSet {
    pub dim: usize,
    /// `∫ |z|² ν(dz)`.
    pub gamma0: f64,
    /// `∫ |z|⁴ ν(dz)`.
    pub c1: f64,
    /// Row-major `Q_ij = ∫ z_i z_j ν(dz)`.
    pub q: Vec<f64>,
    pub q_min_eigenvalue: f64,
    /// `false` when the smallest eigenvalue of `Q` is below `1e-10 γ0`.
    pub nondegenerate: bool,
}

impl MomentSet {
    /// `F(x) = ⟨Q x, x⟩ / |x|²`.
    pub fn f_at(&self, x: &[f64]) -> f64 {
        let d = self.dim;
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += x[i] * self.q[i * d + j] * x[j];
            }
        }
        s / dot(x, x)
    }
}

/// Ordered per-offset ν-masses on the grid lattice.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Stencil {
    pub entries: Vec<(Vec<i64>, f64)>,
}

fn lattice_step(theta: &[f64]) -> Option<Vec<i64>> {
    let m = theta.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    for q in 1..=24 {
        let scaled: Vec<f64> = theta.iter().map(|t| t / m * q as f64).collect();
        if scaled.iter().all(|s| (s - s.round()).abs() < 1e-9) {
            let v: Vec<i64> = scaled.iter().map(|s| s.round() as i64).collect();
            let g = v.iter().fold(0i64, |a, &b| gcd(a, b.abs()));
            return Some(v.iter().map(|x| x / g).collect());
        }
    }
    None
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn for_each_offset<F: FnMut(&[i64])>(k: usize, radius: i64, mut f: F) {
    if radius < 0 || k == 0 {
        return;
    }
    let mut idx = vec![-radius; k];
    loop {
        f(&idx);
        let mut p = 0;
        loop {
            if p == k {
                return;
            }
            if idx[p] < radius {
                idx[p] += 1;
                break;
            }
            idx[p] = -radius;
            p += 1;
        }
    }
}

fn ray_box(theta: &[f64], lo: &[f64], hi: &[f64]) -> Option<(f64, f64)> {
    let mut t0 = 0.0f64;
    let mut t1 = f64::INFINITY;
    for i in 0..theta.len() {
        if theta[i] == 0.0 {
            if lo[i] > 0.0 || hi[i] < 0.0 {
                return None;
            }
        } else {
            let a = lo[i] / theta[i];
            let b = hi[i] / theta[i];
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
    }
    if t1 > t0 {
        Some((t0, t1))
    } else {
        None
    }
}

impl Measure {
    fn compile(dim: usize, variant: &LevyVariant, r_max: f64) -> Result<Self> {
        variant.validate(dim)?;
        let surface =
            |alpha: f64, shells: bool| Piece { angular: Angular::Surface { offset: 0, k: dim, cone: None }, law: RadialLaw::new(alpha, shells, r_max) };
        let pieces = match variant {
            LevyVariant::IsotropicStable { alpha } => vec![surface(*alpha, false)],
            LevyVariant::DyadicShell { alpha } => vec![surface(*alpha, true)],
            LevyVariant::Cone { alpha, axis, half_angle } => {
                let cone = Cone { axis: unit(axis), cos_half: half_angle.cos(), half: *half_angle };
                vec![Piece { angular: Angular::Surface { offset: 0, k: dim, cone: Some(cone) }, law: RadialLaw::new(*alpha, false, r_max) }]
            }
            LevyVariant::Axis { alphas } => alphas
                .iter()
                .enumerate()
                .map(|(i, &a)| {
                    let mut e = vec![0.0; dim];
                    e[i] = 1.0;
                    let mut m = vec![0.0; dim];
                    m[i] = -1.0;
                    Piece { angular: Angular::Atoms(vec![(e, 1.0), (m, 1.0)]), law: RadialLaw::new(a, false, r_max) }
                })
                .collect(),
            LevyVariant::ProductStable { d1, d2, alpha1, alpha2 } => vec![
                Piece { angular: Angular::Surface { offset: 0, k: *d1, cone: None }, law: RadialLaw::new(*alpha1, false, r_max) },
                Piece { angular: Angular::Surface { offset: *d1, k: *d2, cone: None }, law: RadialLaw::new(*alpha2, false, r_max) },
            ],
            LevyVariant::Spherical { alpha, atoms } => {
                vec![Piece { angular: Angular::Atoms(atoms.iter().map(|a| (unit(&a.direction), a.mass)).collect()), law: RadialLaw::new(*alpha, false, r_max) }]
            }
        };
        Ok(Measure { dim, pieces, mc: MonteCarlo::default() })
    }

    /// Compile a Lévy measure supported in the unit ball.
    pub fn levy(spec: &LevyMeasureSpec) -> Result<Self> {
        Self::compile(spec.dim, &spec.variant, 1.0)
    }

    /// Compile a jump kernel; full-range kernels extend the radial law to infinity.
    pub fn jump(spec: &JumpKernelSpec) -> Result<Self> {
        let r_max = match spec.range {
            KernelRange::Finite => 1.0,
            KernelRange::Full => f64::INFINITY,
        };
        Self::compile(spec.dim, &spec.variant, r_max)
    }

    pub fn with_monte_carlo(mut self, mc: MonteCarlo) -> Self {
        self.mc = mc;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn min_alpha(&self) -> f64 {
        self.pieces.iter().map(|p| p.law.alpha).fold(f64::INFINITY, f64::min)
    }

    pub fn max_alpha(&self) -> f64 {
        self.pieces.iter().map(|p| p.law.alpha).fold(0.0, f64::max)
    }

    /// Largest radius charged by the measure (`∞` for full-range kernels).
    pub fn reach(&self) -> f64 {
        self.pieces.iter().map(|p| p.law.r_max).fold(0.0, f64::max)
    }

    fn mc(&self) -> (usize, u64) {
        (self.mc.samples, self.mc.seed)
    }

    /// `Σ_pieces ∫ σ(dθ) h(θ, law)`.
    pub(crate) fn integrate_rays<H>(&self, mut h: H, tol: f64, breaks: &[f64]) -> Result<f64>
    where
        H: FnMut(&[f64], &RadialLaw) -> Result<f64>,
    {
        let mut total = 0.0;
        for p in &self.pieces {
            let law = p.law;
            total += p.angular.integrate(self.dim, |t| h(t, &law), tol, breaks, self.mc())?;
        }
        Ok(total)
    }

    /// `∫ g dν` for `g = O(|z|²)` modulo an odd part; odd parts cancel by symmetry.
    pub fn integrate<G: Fn(&[f64]) -> f64>(&self, g: G, tol: f64) -> Result<f64> {
        self.integrate_with(g, tol, &[], 0.0)
    }

    /// As [`Measure::integrate`], with radial breakpoints and a growth exponent for the tail.
    pub fn integrate_with<G: Fn(&[f64]) -> f64>(&self, g: G, tol: f64, radial_breaks: &[f64], tail_growth: f64) -> Result<f64> {
        let d = self.dim;
        let mut z = vec![0.0; d];
        let mut zm = vec![0.0; d];
        self.integrate_rays(
            |theta, law| {
                law.integrate_scaled(
                    |r| {
                        for i in 0..d {
                            z[i] = r * theta[i];
                            zm[i] = -z[i];
                        }
                        Ok(0.5 * (g(&z) + g(&zm)) / (r * r))
                    },
                    0.0,
                    law.r_max,
                    radial_breaks,
                    tail_growth,
                    tol,
                )
            },
            tol,
            &[],
        )
    }

    /// Second and fourth moments and covariance.
    pub fn moments(&self) -> Result<MomentSet> {
        if !self.reach().is_finite() {
            return Err(Error::InvalidSpec("moments of a full-range kernel are infinite".into()));
        }
        let d = self.dim;
        let tol = 1e-13;
        let gamma0 = self.integrate_rays(|_, law| Ok(law.power_moment(2.0, 0.0, law.r_max)), tol, &[])?;
        let c1 = self.integrate_rays(|_, law| Ok(law.power_moment(4.0, 0.0, law.r_max)), tol, &[])?;
        let mut q = vec![0.0; d * d];
        for i in 0..d {
            for j in i..d {
                let v = self.integrate_rays(|t, law| Ok(t[i] * t[j] * law.power_moment(2.0, 0.0, law.r_max)), tol, &[])?;
                q[i * d + j] = v;
                q[j * d + i] = v;
            }
        }
        let mat = nalgebra::DMatrix::from_row_slice(d, d, &q);
        let q_min = mat.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        Ok(MomentSet { dim: d, gamma0, c1, q, q_min_eigenvalue: q_min, nondegenerate: q_min > 1e-10 * gamma0 })
    }

    /// `ν([lo, hi])` for a box whose closure avoids the origin.
    pub fn box_measure(&self, lo: &[f64], hi: &[f64]) -> Result<f64> {
        let d = self.dim;
        if lo.len() != d || hi.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: lo.len().min(hi.len()) });
        }
        if lo.iter().zip(hi).any(|(a, b)| !(a <= b)) {
            return Err(Error::InvalidSpec("box corners must satisfy lo <= hi".into()));
        }
        if lo.iter().zip(hi).all(|(a, b)| *a <= 0.0 && *b >= 0.0) {
            return Err(Error::InvalidSpec("box must not contain the origin".into()));
        }
        let mut total = 0.0;
        for p in &self.pieces {
            let law = p.law;
            let breaks: Vec<f64> = match p.angular {
                Angular::Surface { offset, k: 2, .. } => {
                    let mut v = Vec::new();
                    for x in [lo[offset], hi[offset]] {
                        for y in [lo[offset + 1], hi[offset + 1]] {
                            v.push(y.atan2(x));
                        }
                    }
                    v
                }
                _ => Vec::new(),
            };
            let block_ok = |t: &[f64]| ray_box(t, lo, hi);
            total += p.angular.integrate(d, |t| Ok(block_ok(t).map(|(a, b)| law.mass(a.max(1e-300), b)).unwrap_or(0.0)), 1e-9, &breaks, self.mc())?;
        }
        Ok(total)
    }

    /// `φ(ξ) = ∫ (1 - cos⟨ξ, z⟩) ν(dz)`.
    pub fn char_exponent(&self, xi: &[f64]) -> Result<f64> {
        if xi.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: xi.len() });
        }
        self.integrate_rays(|t, law| law.cos_profile(dot(t, xi)), 1e-10, &[])
    }

    /// Per-offset ν-masses for a lattice of spacing `h`, offsets bounded by `reach` per coordinate.
    ///
    /// With `near_field` the mass of the excluded origin cell is moved, through its second
    /// moment, onto the nearest lattice neighbours.
    pub(crate) fn stencil(&self, h: f64, reach: usize, near_field: bool) -> Result<Stencil> {
        let d = self.dim;
        let reach_i = reach as i64;
        let mut map: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        for p in &self.pieces {
            let law = p.law;
            match &p.angular {
                Angular::Surface { offset, k, cone } => {
                    let k = *k;
                    let lim = if law.r_max.is_finite() { ((law.r_max / h).floor() as i64).min(reach_i) } else { reach_i };
                    let cell = h.powi(k as i32);
                    let mut full = vec![0i64; d];
                    for_each_offset(k, lim, |m| {
                        if m.iter().all(|&c| c == 0) {
                            return;
                        }
                        let mf: Vec<f64> = m.iter().map(|&c| c as f64).collect();
                        let r = h * norm(&mf);
                        if !law.contains(r) {
                            return;
                        }
                        if let Some(c) = cone {
                            if !c.contains(&mf) {
                                return;
                            }
                        }
                        full.iter_mut().for_each(|x| *x = 0);
                        full[*offset..*offset + k].copy_from_slice(m);
                        *map.entry(full.clone()).or_insert(0.0) += cell * r.powf(-(k as f64) - law.alpha);
                    });
                    if near_field {
                        let rho0 = h * ball_volume(k).powf(-1.0 / k as f64);
                        let radial = law.power_moment(2.0, 0.0, rho0);
                        for j in 0..k {
                            let ang = p.angular.integrate(d, |t| Ok(t[offset + j] * t[offset + j]), 1e-12, &[], self.mc())?;
                            let c = ang * radial / (2.0 * h * h);
                            for s in [-1i64, 1] {
                                let mut e = vec![0i64; d];
                                e[offset + j] = s;
                                *map.entry(e).or_insert(0.0) += c;
                            }
                        }
                    }
                }
                Angular::Atoms(atoms) => {
                    for (theta, mass) in atoms {
                        let step = lattice_step(theta).ok_or_else(|| Error::Unsupported(format!("atom direction {theta:?} is not a lattice direction")))?;
                        let stepf: Vec<f64> = step.iter().map(|&c| c as f64).collect();
                        let s = h * norm(&stepf);
                        let mut kk = 1i64;
                        loop {
                            let a = (kk as f64 - 0.5) * s;
                            if a >= law.r_max || step.iter().any(|&c| (c * kk).abs() > reach_i) {
                                break;
                            }
                            let b = ((kk as f64 + 0.5) * s).min(law.r_max);
                            let w = mass * law.mass(a, b);
                            let off: Vec<i64> = step.iter().map(|&c| c * kk).collect();
                            *map.entry(off).or_insert(0.0) += w;
                            kk += 1;
                        }
                        if near_field {
                            let c = mass * law.power_moment(2.0, 0.0, 0.5 * s) / (s * s);
                            *map.entry(step.clone()).or_insert(0.0) += c;
                        }
                    }
                }
            }
        }
        let mut entries = Vec::with_capacity(map.len());
        for (m, w) in &map {
            let neg: Vec<i64> = m.iter().map(|c| -c).collect();
            let wn = map.get(&neg).copied().unwrap_or(0.0);
            let ws = 0.5 * (w + wn);
            if ws > 0.0 {
                entries.push((m.clone(), ws));
            }
        }
        Ok(Stencil { entries })
    }
}
