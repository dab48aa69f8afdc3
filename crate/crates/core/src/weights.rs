//! The weight `W(x,y)`, the dominated family `V_λ` and growth checks.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};
use crate::kernels::norm;
use crate::rng::stream;

/// A radial profile `ρ ↦ U(ρ)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type", rename_all = "snake_case"))]
pub enum RadialProfile {
    /// `(1 + ρ)^exponent`.
    Power { exponent: f64 },
    /// Piecewise linear through `(radii[i], values[i])`, constant outside the table.
    Table { radii: Vec<f64>, values: Vec<f64> },
}

impl RadialProfile {
    pub fn power(exponent: f64) -> Self {
        RadialProfile::Power { exponent }
    }

    /// Tabulated profile; radii must be strictly increasing and values finite and nonnegative.
    pub fn table(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let p = RadialProfile::Table { radii, values };
        let issues = p.issues();
        if issues.is_empty() {
            Ok(p)
        } else {
            Err(Error::InvalidSpec(issues.join("; ")))
        }
    }

    pub fn issues(&self) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            RadialProfile::Power { exponent } => {
                if !(*exponent >= 0.0 && exponent.is_finite()) {
                    out.push(format!("exponent must be finite and nonnegative, got {exponent}"));
                }
            }
            RadialProfile::Table { radii, values } => {
                if radii.is_empty() || radii.len() != values.len() {
                    out.push(String::from("table needs equally many radii and values, at least one"));
                }
                if radii.windows(2).any(|w| !(w[1] > w[0])) {
                    out.push(String::from("table radii must be strictly increasing"));
                }
                if radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
                    out.push(String::from("table radii must be finite and nonnegative"));
                }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    out.push(String::from("table values must be finite and nonnegative"));
                }
            }
        }
        out
    }

    pub fn eval(&self, rho: f64) -> f64 {
        match self {
            RadialProfile::Power { exponent } => {
                if *exponent == 0.0 {
                    1.0
                } else {
                    (1.0 + rho).powf(*exponent)
                }
            }
            RadialProfile::Table { radii, values } => {
                let n = radii.len();
                if rho <= radii[0] {
                    return values[0];
                }
                if rho >= radii[n - 1] {
                    return values[n - 1];
                }
                let i = radii.partition_point(|&r| r <= rho) - 1;
                let t = (rho - radii[i]) / (radii[i + 1] - radii[i]);
                values[i] + t * (values[i + 1] - values[i])
            }
        }
    }

    /// Exponent `s` with `U(ρ) = O(ρ^s)`.
    pub fn growth_exponent(&self) -> f64 {
        match self {
            RadialProfile::Power { exponent } => *exponent,
            RadialProfile::Table { .. } => 0.0,
        }
    }

    /// Radii where the profile has kinks.
    pub fn knots(&self) -> Vec<f64> {
        match self {
            RadialProfile::Power { .. } => Vec::new(),
            RadialProfile::Table { radii, .. } => radii.clone(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            RadialProfile::Power { exponent } => format!("(1+|x|)^{exponent}"),
            RadialProfile::Table { radii, .. } => format!("table({} knots)", radii.len()),
        }
    }
}

/// `W(x,y) = scale·(U1(x)+U1(y))` for `|x−y| < 1`, `scale·(U2(x)+U2(y))` otherwise.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeightSpec {
    pub u1: RadialProfile,
    pub u2: RadialProfile,
    pub scale: f64,
}

impl WeightSpec {
    pub fn new(u1: RadialProfile, u2: RadialProfile) -> Self {
        WeightSpec { u1, u2, scale: 1.0 }
    }

    /// Power-law weight with short-range exponent `p` and long-range exponent `q`.
    pub fn power(p: f64, q: f64) -> Self {
        WeightSpec::new(RadialProfile::power(p), RadialProfile::power(q))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        WeightSpec { scale: self.scale * factor, ..self.clone() }
    }

    pub fn issues(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        for m in self.u1.issues() {
            out.push(("/u1".into(), m));
        }
        for m in self.u2.issues() {
            out.push(("/u2".into(), m));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            out.push(("/scale".into(), "scale must be positive and finite".into()));
        }
        out
    }

    /// `W` from the radii `|x|`, `|y|` and the separation `|x−y|`.
    #[inline]
    pub fn eval_radial(&self, rx: f64, ry: f64, dist: f64) -> f64 {
        if dist < 1.0 {
            self.scale * (self.u1.eval(rx) + self.u1.eval(ry))
        } else {
            self.scale * (self.u2.eval(rx) + self.u2.eval(ry))
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let dist = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        self.eval_radial(norm(x), norm(y), dist)
    }

    pub fn label(&self) -> String {
        let base = format!("U1={},U2={}", self.u1.label(), self.u2.label());
        if self.scale == 1.0 {
            base
        } else {
            format!("{}*({base})", self.scale)
        }
    }
}

/// `W(x,y)` from the weights module, as a free function.
pub fn eval_w(x: &[f64], y: &[f64], spec: &WeightSpec) -> f64 {
    spec.eval(x, y)
}

/// Radial `V_λ`: constant `inner_floor` below `R0/2`, cubic Hermite on `[R0/2, R0]`, `λ(1+ρ²)` beyond.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VLambdaSpec {
    pub lambda: f64,
    pub r0: f64,
    pub inner_floor: f64,
    /// Coefficients of the blend in `t = (ρ − R0/2)/(R0/2)`.
    pub blend: [f64; 4],
}

impl VLambdaSpec {
    /// Blend data for given `λ`, `R0` and floor.
    pub fn new(lambda: f64, r0: f64, inner_floor: f64) -> Self {
        let w = 0.5 * r0;
        let f0 = inner_floor;
        let f1 = lambda * (1.0 + r0 * r0);
        let m1 = 2.0 * lambda * r0 * w;
        let c2 = 3.0 * (f1 - f0) - m1;
        let c3 = m1 - 2.0 * (f1 - f0);
        VLambdaSpec { lambda, r0, inner_floor, blend: [f0, 0.0, c2, c3] }
    }

    fn piece(&self, rho: f64) -> u8 {
        if rho < 0.5 * self.r0 {
            0
        } else if rho < self.r0 {
            1
        } else {
            2
        }
    }

    pub fn eval(&self, rho: f64) -> f64 {
        match self.piece(rho) {
            0 => self.inner_floor,
            1 => {
                let t = (rho - 0.5 * self.r0) / (0.5 * self.r0);
                let [c0, c1, c2, c3] = self.blend;
                c0 + t * (c1 + t * (c2 + t * c3))
            }
            _ => self.lambda * (1.0 + rho * rho),
        }
    }

    pub fn eval_at(&self, x: &[f64]) -> f64 {
        self.eval(norm(x))
    }

    pub fn derivative(&self, rho: f64) -> f64 {
        match self.piece(rho) {
            0 => 0.0,
            1 => {
                let w = 0.5 * self.r0;
                let t = (rho - w) / w;
                let [_, c1, c2, c3] = self.blend;
                (c1 + t * (2.0 * c2 + 3.0 * t * c3)) / w
            }
            _ => 2.0 * self.lambda * rho,
        }
    }

    fn dd_same_piece(&self, piece: u8, a: f64, b: f64) -> f64 {
        match piece {
            0 => 0.0,
            1 => {
                let w = 0.5 * self.r0;
                let ta = (a - w) / w;
                let tb = (b - w) / w;
                let [_, c1, c2, c3] = self.blend;
                (c1 + c2 * (ta + tb) + c3 * (ta * ta + ta * tb + tb * tb)) / w
            }
            _ => self.lambda * (a + b),
        }
    }

    /// `(V(a) − V(b))/(a − b)` without cancellation; `V'(a)` when `a = b`.
    pub fn divided_difference(&self, a: f64, b: f64) -> f64 {
        if a == b {
            return self.derivative(a);
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let mut pts = vec![lo];
        for k in [0.5 * self.r0, self.r0] {
            if k > lo && k < hi {
                pts.push(k);
            }
        }
        pts.push(hi);
        let mut acc = 0.0;
        for w in pts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            acc += self.dd_same_piece(self.piece(mid), w[0], w[1]) * (w[1] - w[0]);
        }
        acc / (hi - lo)
    }
}

/// Probe radii: 16 per octave from 2^-4 up to `budget`, plus 0 and profile knots.
fn probe_radii(spec: &WeightSpec, budget: f64) -> Vec<f64> {
    let mut v = vec![0.0];
    let mut r = 1.0 / 16.0;
    let step = 2f64.powf(1.0 / 16.0);
    while r <= budget * (1.0 + 1e-12) {
        v.push(r);
        r *= step;
    }
    v.push(budget);
    v.extend(spec.u1.knots().into_iter().filter(|&k| k <= budget));
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Safety margin in the dominance test `U1 ≥ 2λ(1+ρ²)(1+margin)`.
pub const GROWTH_MARGIN: f64 = 0.1;

/// Construct `V_λ` with the smallest dyadic `R0 ≤ radius_budget` passing the dominance test.
pub fn build_v_lambda(lambda: f64, spec: &WeightSpec, radius_budget: f64, seed: u64) -> Result<VLambdaSpec> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidSpec(format!("lambda must be positive, got {lambda}")));
    }
    let probes = probe_radii(spec, radius_budget);
    let u1 = |r: f64| spec.scale * spec.u1.eval(r);
    let inf_u1 = probes.iter().map(|&r| u1(r)).fold(f64::INFINITY, f64::min);
    if !(inf_u1 > 0.0) {
        return Err(Error::InvalidSpec("U1 must be strictly positive on the probed range".into()));
    }
    let ok_from = |start: f64| probes.iter().filter(|&&r| r >= start).all(|&r| u1(r) >= 2.0 * lambda * (1.0 + r * r) * (1.0 + GROWTH_MARGIN));
    let mut r0 = 1.0;
    let found = loop {
        if r0 > radius_budget {
            break None;
        }
        if ok_from(0.5 * r0) {
            break Some(r0);
        }
        r0 *= 2.0;
    };
    let r0 = found.ok_or(Error::GrowthInsufficient { lambda, radius_budget })?;
    let floor = (0.25 * inf_u1).min(lambda);
    let v = VLambdaSpec::new(lambda, r0, floor);
    verify_domination(spec, &v, 4.0 * r0, 10_000, seed)?;
    Ok(v)
}

/// Check `W(x,y) ≥ V(x)+V(y)` on random pairs with `|x| ≤ radius`, `|x−y| < 1` (d = 1 radial cut).
pub fn verify_domination(spec: &WeightSpec, v: &VLambdaSpec, radius: f64, samples: usize, seed: u64) -> Result<()> {
    let mut rng = stream(seed, "domination");
    for i in 0..samples {
        // Half the samples concentrate near the blend region.
        let x: f64 = if i % 2 == 0 {
            rng.random_range(-radius..radius)
        } else {
            rng.random_range(0.25 * v.r0..1.5 * v.r0) * if rng.random::<bool>() { 1.0 } else { -1.0 }
        };
        let y = x + rng.random_range(-1.0..1.0) * (1.0 - 1e-12);
        let w = spec.eval_radial(x.abs(), y.abs(), (x - y).abs());
        if w < v.eval(x.abs()) + v.eval(y.abs()) {
            return Err(Error::DominationFailed { x_norm: x.abs(), y_norm: y.abs() });
        }
    }
    Ok(())
}

/// Which side of the compactness dichotomy the growth data points to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum DichotomySide {
    CompactIndicated,
    NoncompactIndicated,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GrowthReport {
    /// `(ρ, U1(ρ)/ρ²)` at dyadic radii.
    pub ratios: Vec<(f64, f64)>,
    pub liminf_estimate: f64,
    pub limsup_estimate: f64,
    /// Fitted log-log slope of `U1(ρ)/ρ²` over the last octaves.
    pub tail_slope: f64,
    pub q_below_alpha: bool,
    pub side: DichotomySide,
}

/// Growth of `U1(ρ)/ρ²` over dyadic radii up to `budget`, and the `q < α` check.
pub fn growth_check(spec: &WeightSpec, kernel_alpha: f64, budget: f64) -> GrowthReport {
    let mut ratios = Vec::new();
    let mut r = 1.0;
    while r <= budget {
        ratios.push((r, spec.scale * spec.u1.eval(r) / (r * r)));
        r *= 2.0;
    }
    let tail = &ratios[ratios.len().saturating_sub(ratios.len() / 2 + 1)..];
    let liminf = tail.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let limsup = tail.iter().map(|p| p.1).fold(0.0, f64::max);
    let slope = crate::diagnostics::loglog_slope(tail);
    let q_ok = spec.u2.growth_exponent() < kernel_alpha;
    let side = if !q_ok {
        DichotomySide::Inconclusive
    } else if slope > 0.1 {
        DichotomySide::CompactIndicated
    } else if slope < 0.05 {
        DichotomySide::NoncompactIndicated
    } else {
        DichotomySide::Inconclusive
    };
    GrowthReport { ratios, liminf_estimate: liminf, limsup_estimate: limsup, tail_slope: slope, q_below_alpha: q_ok, side }
}
