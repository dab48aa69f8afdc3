//! Radial laws `r^{-1-α} dr` restricted to `(0, r_max)` or to dyadic shells.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::quad::{try_integrate, QuadOptions};

/// Radial part of a Lévy measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialLaw {
    pub alpha: f64,
    /// Restrict radii to `∪_{n ≥ 0} [2^{-(2n+1)}, 2^{-2n})`.
    pub shells: bool,
    /// Exclusive upper radius; `f64::INFINITY` for full-range kernels.
    pub r_max: f64,
}

/// Above this value of `r t` the cosine integral switches to its asymptotic expansion.
const OSC_SWITCH: f64 = 48.0;
const MAX_SHELLS: usize = 4000;

impl RadialLaw {
    pub fn new(alpha: f64, shells: bool, r_max: f64) -> Self {
        RadialLaw { alpha, shells, r_max }
    }

    /// Whether `r` lies in the support.
    pub fn contains(&self, r: f64) -> bool {
        if !(r > 0.0 && r < self.r_max) {
            return false;
        }
        if !self.shells {
            return true;
        }
        if r >= 1.0 {
            return false;
        }
        // r = m 2^e with m in [0.5, 1), so r lies in a shell iff e is even.
        let (_, e) = libm::frexp(r);
        e % 2 == 0
    }

    /// Support intervals meeting `[lo, hi]`, from the outermost inward; at most `limit`.
    fn intervals(&self, lo: f64, hi: f64, limit: usize) -> Vec<(f64, f64)> {
        let hi = hi.min(self.r_max);
        let mut out = Vec::new();
        if !(hi > lo) {
            return out;
        }
        if !self.shells {
            out.push((lo, hi));
            return out;
        }
        let mut n = 0;
        while out.len() < limit {
            let top = libm::ldexp(1.0, -2 * n);
            let bottom = libm::ldexp(1.0, -(2 * n + 1));
            if top <= lo {
                break;
            }
            let a = bottom.max(lo);
            let b = top.min(hi);
            if b > a {
                out.push((a, b));
            }
            n += 1;
            if n as usize > MAX_SHELLS {
                break;
            }
        }
        out
    }

    /// `∫_{lo}^{hi} r^{-1-α} dr` over the support, `lo > 0`.
    pub fn mass(&self, lo: f64, hi: f64) -> f64 {
        let a = self.alpha;
        if lo <= 0.0 {
            return f64::INFINITY;
        }
        self.intervals(lo, hi, MAX_SHELLS)
            .iter()
            .map(|&(x, y)| {
                let upper = if y.is_finite() { y.powf(-a) } else { 0.0 };
                (x.powf(-a) - upper) / a
            })
            .sum()
    }

    /// `∫_{lo}^{hi} r^{k-1-α} dr` over the support, for `k > α` when `lo = 0`.
    pub fn power_moment(&self, k: f64, lo: f64, hi: f64) -> f64 {
        let e = k - self.alpha;
        let hi = hi.min(self.r_max);
        if !hi.is_finite() && e >= 0.0 {
            return f64::INFINITY;
        }
        let prim = |r: f64| -> f64 {
            if e == 0.0 {
                r.ln()
            } else if r.is_finite() {
                r.powf(e) / e
            } else {
                0.0
            }
        };
        let mut total = 0.0;
        for (x, y) in self.intervals(lo, hi, MAX_SHELLS) {
            total += prim(y) - if x > 0.0 { prim(x) } else { 0.0 };
        }
        total
    }

    /// `∫_{lo}^{hi} q(r) r^{1-α} dr` over the support, i.e. `∫ g r^{-1-α} dr` with `q = g / r²`.
    ///
    /// `tail_growth` is an exponent `s < α` with `g(r) = O(r^s)` at infinity; it shapes the
    /// substitution used on unbounded intervals.
    pub fn integrate_scaled<Q>(&self, mut q: Q, lo: f64, hi: f64, breaks: &[f64], tail_growth: f64, tol: f64) -> Result<f64>
    where
        Q: FnMut(f64) -> Result<f64>,
    {
        let hi = hi.min(self.r_max);
        if !(hi > lo) {
            return Ok(0.0);
        }
        if lo == 0.0 {
            self.check_origin(&mut q, hi)?;
        }
        if !self.shells {
            return self.segment(&mut q, lo, hi, breaks, tail_growth, tol);
        }
        let mut total = 0.0;
        let mut prev = f64::INFINITY;
        let mut n = 0usize;
        let mut top = 1.0f64;
        loop {
            let bottom = 0.5 * top;
            if top <= lo || n > MAX_SHELLS {
                break;
            }
            let a = bottom.max(lo);
            let b = top.min(hi);
            if b > a {
                let c = self.segment(&mut q, a, b, breaks, tail_growth, tol)?;
                total += c;
                if lo == 0.0 && n >= 4 {
                    let ratio = if prev.abs() > 0.0 { (c / prev).abs() } else { 0.0 };
                    if c.abs() <= 1e-3 * tol * total.abs() && ratio < 1.0 {
                        total += c * ratio / (1.0 - ratio);
                        break;
                    }
                    if c == 0.0 && prev == 0.0 && n > 64 {
                        break;
                    }
                }
                prev = c;
            }
            top *= 0.25;
            n += 1;
        }
        Ok(total)
    }

    fn check_origin<Q: FnMut(f64) -> Result<f64>>(&self, q: &mut Q, hi: f64) -> Result<()> {
        // q(r) ~ r^{-s} is integrable against r^{1-α} dr iff s < 2 - α.
        let r1 = hi.min(1.0) * 1e-6;
        let r2 = r1 * 1e-3;
        let r3 = r2 * 1e-3;
        let v2 = q(r2)?.abs();
        let v3 = q(r3)?.abs();
        let v1 = q(r1)?.abs();
        if v3 > 0.0 && v2 > 0.0 && v3 > v2 && v2 > v1 {
            let s = (v3 / v2).ln() / 1e3f64.ln();
            if s >= 2.0 - self.alpha - 1e-3 {
                return Err(Error::NonIntegrable);
            }
        }
        Ok(())
    }

    fn segment<Q>(&self, q: &mut Q, a: f64, b: f64, breaks: &[f64], tail_growth: f64, tol: f64) -> Result<f64>
    where
        Q: FnMut(f64) -> Result<f64>,
    {
        let alpha = self.alpha;
        let e = 2.0 - alpha;
        let opts = QuadOptions::rel(tol).with_abs(1e-300).with_max_evals(400_000);
        let mut total = 0.0;
        let split = if b.is_finite() { b } else { a.max(1.0) };
        if split > a {
            let ua = a.powf(e);
            let ub = split.powf(e);
            let ubreaks: Vec<f64> = breaks.iter().filter(|&&r| r > a && r < split).map(|r| r.powf(e)).collect();
            let inv_e = 1.0 / e;
            let r = try_integrate(|u: f64| Ok::<f64, Error>(q(u.powf(inv_e))? * inv_e), ua, ub, &ubreaks, opts)?;
            total += r.value;
        }
        if !b.is_finite() {
            let c = split;
            let kappa = 1.0 / (alpha - tail_growth).max(1e-3);
            let scale = c.powf(-alpha) * kappa;
            let vbreaks: Vec<f64> = breaks.iter().filter(|&&r| r > c).map(|r| (c / r).powf(1.0 / kappa)).collect();
            let r = try_integrate(
                |v: f64| {
                    let r = c * v.powf(-kappa);
                    let qr = q(r)?;
                    Ok::<f64, Error>(qr * r * r * scale * v.powf(kappa * alpha - 1.0))
                },
                0.0,
                1.0,
                &vbreaks,
                opts,
            )?;
            total += r.value;
        }
        Ok(total)
    }

    /// `Φ(t) = ∫ (1 - cos(r t)) r^{-1-α} dr` over the support; requires a finite `r_max`.
    pub fn cos_profile(&self, t: f64) -> Result<f64> {
        if !self.r_max.is_finite() {
            return Err(Error::Unsupported("characteristic exponent of a full-range kernel".into()));
        }
        let t = t.abs();
        if t == 0.0 {
            return Ok(0.0);
        }
        let mut total = 0.0;
        let mut prev = f64::INFINITY;
        for (n, (a, b)) in self.intervals(0.0, self.r_max, MAX_SHELLS).into_iter().enumerate() {
            let c = self.cos_interval(a, b, t)?;
            total += c;
            if self.shells && n >= 4 {
                let ratio = if prev > 0.0 { c / prev } else { 0.0 };
                if c <= 1e-17 * total && ratio < 1.0 {
                    total += c * ratio / (1.0 - ratio);
                    break;
                }
            }
            prev = c;
        }
        Ok(total)
    }

    fn cos_interval(&self, a: f64, b: f64, t: f64) -> Result<f64> {
        let alpha = self.alpha;
        let rs = OSC_SWITCH / t;
        let mut v = 0.0;
        if a < rs {
            let top = b.min(rs);
            let e = 2.0 - alpha;
            let inv_e = 1.0 / e;
            let opts = QuadOptions::rel(1e-13).with_abs(1e-300).with_max_evals(200_000);
            let r = try_integrate(
                |u: f64| {
                    let r = u.powf(inv_e);
                    let s = (0.5 * r * t).sin();
                    let q = if r > 0.0 { 2.0 * s * s / (r * r) } else { 0.5 * t * t };
                    Ok::<f64, Error>(q * inv_e)
                },
                a.powf(e),
                top.powf(e),
                &[],
                opts,
            )?;
            v += r.value;
        }
        if b > rs {
            let r1 = a.max(rs);
            v += (r1.powf(-alpha) - b.powf(-alpha)) / alpha;
            v -= cos_tail(b, t, 1.0 + alpha) - cos_tail(r1, t, 1.0 + alpha);
        }
        Ok(v)
    }
}

/// Real part of an antiderivative of `cos(r t) r^{-μ}` for large `r t`.
fn cos_tail(r: f64, t: f64, mu: f64) -> f64 {
    // F(r) = e^{irt} Σ c_k r^{-μ-k},  c_0 = -i/t,  c_k = -i (μ+k-1) c_{k-1} / t
    let (mut cre, mut cim) = (0.0, -1.0 / t);
    let mut pw = r.powf(-mu);
    let (mut sre, mut sim) = (cre * pw, cim * pw);
    let mut last = (cim * pw).abs();
    for k in 1..200 {
        let f = (mu + k as f64 - 1.0) / t;
        let (nre, nim) = (f * cim, -f * cre);
        cre = nre;
        cim = nim;
        pw /= r;
        let (tre, tim) = (cre * pw, cim * pw);
        let mag = tre.abs() + tim.abs();
        if mag > last {
            break;
        }
        sre += tre;
        sim += tim;
        last = mag;
        if mag < 1e-18 * (sre.abs() + sim.abs()) {
            break;
        }
    }
    let (s, c) = (r * t).sin_cos();
    c * sre - s * sim
}
