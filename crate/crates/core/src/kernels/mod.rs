//! Symmetric Lévy measures on the unit ball, jump kernels, their moments,
//! characteristic exponents and the heat-kernel bound `β0`.

mod angular;
mod measure;
mod radial;
mod symbol;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

pub(crate) use angular::gaussian as gaussian_sample;
pub(crate) use measure::Stencil;
pub use measure::{Measure, MomentSet, MonteCarlo};
pub use radial::RadialLaw;
pub use symbol::BetaZero;

use crate::error::{Error, Result};

/// A direction with a positive mass, for purely atomic angular measures.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Atom {
    pub direction: Vec<f64>,
    pub mass: f64,
}

/// Shape of a symmetric Lévy measure written as `σ(dθ) ⊗ r^{-1-α} dr`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type", rename_all = "snake_case"))]
pub enum LevyVariant {
    /// Surface measure on the whole sphere.
    IsotropicStable { alpha: f64 },
    /// Surface measure on the double cone `|⟨θ, axis⟩| ≥ cos(half_angle)`.
    Cone { alpha: f64, axis: Vec<f64>, half_angle: f64 },
    /// Isotropic, with radii restricted to `∪_n [2^{-(2n+1)}, 2^{-2n})`.
    DyadicShell { alpha: f64 },
    /// Point masses at `±e_i` with one index per coordinate axis.
    Axis { alphas: Vec<f64> },
    /// Surface measures on the coordinate blocks `R^{d1}` and `R^{d2}`.
    ProductStable { d1: usize, d2: usize, alpha1: f64, alpha2: f64 },
    /// Finite symmetric atomic angular measure.
    Spherical { alpha: f64, atoms: Vec<Atom> },
}

/// Lévy measure `ν` supported in `B(0,1)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LevyMeasureSpec {
    pub dim: usize,
    pub variant: LevyVariant,
}

/// Whether a jump kernel keeps the unit truncation or extends to all radii.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum KernelRange {
    Finite,
    #[default]
    Full,
}

/// Translation-invariant jump kernel `J(x, dy) = J(dy - x)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JumpKernelSpec {
    pub dim: usize,
    pub variant: LevyVariant,
    #[cfg_attr(feature = "serde", serde(default))]
    pub range: KernelRange,
}

/// A validation problem, located by a JSON pointer relative to the variant description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecIssue {
    pub pointer: String,
    pub message: String,
}

impl SpecIssue {
    fn new(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        SpecIssue { pointer: pointer.into(), message: message.into() }
    }
}

fn check_alpha(alpha: f64, pointer: &str, out: &mut Vec<SpecIssue>) {
    if !(alpha > 0.0 && alpha < 2.0) {
        out.push(SpecIssue::new(pointer, format!("stability index must lie in (0, 2), got {alpha}")));
    }
}

impl LevyVariant {
    /// Short human-readable label, used in matrix headers.
    pub fn label(&self) -> String {
        match self {
            LevyVariant::IsotropicStable { alpha } => format!("isotropic_stable(alpha={alpha})"),
            LevyVariant::Cone { alpha, half_angle, .. } => {
                format!("cone(alpha={alpha},half_angle={half_angle})")
            }
            LevyVariant::DyadicShell { alpha } => format!("dyadic_shell(alpha={alpha})"),
            LevyVariant::Axis { alphas } => format!("axis(alphas={alphas:?})"),
            LevyVariant::ProductStable { d1, d2, alpha1, alpha2 } => {
                format!("product_stable(d1={d1},d2={d2},alpha1={alpha1},alpha2={alpha2})")
            }
            LevyVariant::Spherical { alpha, atoms } => {
                format!("spherical(alpha={alpha},atoms={})", atoms.len())
            }
        }
    }

    /// Every problem with the variant in dimension `dim`; empty when valid.
    pub fn issues(&self, dim: usize) -> Vec<SpecIssue> {
        let mut out = Vec::new();
        if dim == 0 {
            out.push(SpecIssue::new("/dim", "dimension must be at least 1"));
            return out;
        }
        match self {
            LevyVariant::IsotropicStable { alpha } | LevyVariant::DyadicShell { alpha } => check_alpha(*alpha, "/alpha", &mut out),
            LevyVariant::Cone { alpha, axis, half_angle } => {
                check_alpha(*alpha, "/alpha", &mut out);
                if dim < 2 {
                    out.push(SpecIssue::new("/type", "cone measures need dimension at least 2"));
                }
                if axis.len() != dim {
                    out.push(SpecIssue::new("/axis", format!("axis has {} components, dimension is {dim}", axis.len())));
                } else if !(norm(axis) > 0.0) || axis.iter().any(|a| !a.is_finite()) {
                    out.push(SpecIssue::new("/axis", "axis must be a finite nonzero vector"));
                }
                if !(*half_angle > 0.0 && *half_angle <= core::f64::consts::FRAC_PI_2) {
                    out.push(SpecIssue::new("/half_angle", "half angle must lie in (0, pi/2]"));
                }
            }
            LevyVariant::Axis { alphas } => {
                if alphas.len() != dim {
                    out.push(SpecIssue::new("/alphas", format!("need one index per axis ({dim}), got {}", alphas.len())));
                }
                for (i, a) in alphas.iter().enumerate() {
                    check_alpha(*a, &format!("/alphas/{i}"), &mut out);
                }
            }
            LevyVariant::ProductStable { d1, d2, alpha1, alpha2 } => {
                check_alpha(*alpha1, "/alpha1", &mut out);
                check_alpha(*alpha2, "/alpha2", &mut out);
                if *d1 == 0 {
                    out.push(SpecIssue::new("/d1", "block dimension must be positive"));
                }
                if *d2 == 0 {
                    out.push(SpecIssue::new("/d2", "block dimension must be positive"));
                }
                if d1 + d2 != dim {
                    out.push(SpecIssue::new("/d2", format!("d1 + d2 = {} differs from dimension {dim}", d1 + d2)));
                }
            }
            LevyVariant::Spherical { alpha, atoms } => {
                check_alpha(*alpha, "/alpha", &mut out);
                if atoms.is_empty() {
                    out.push(SpecIssue::new("/atoms", "at least one atom is required"));
                }
                let mut shaped = true;
                for (i, a) in atoms.iter().enumerate() {
                    if a.direction.len() != dim {
                        shaped = false;
                        out.push(SpecIssue::new(
                            format!("/atoms/{i}/direction"),
                            format!("direction has {} components, dimension is {dim}", a.direction.len()),
                        ));
                    } else if !(norm(&a.direction) > 0.0) || a.direction.iter().any(|c| !c.is_finite()) {
                        shaped = false;
                        out.push(SpecIssue::new(format!("/atoms/{i}/direction"), "direction must be finite and nonzero"));
                    }
                    if !(a.mass > 0.0 && a.mass.is_finite()) {
                        out.push(SpecIssue::new(format!("/atoms/{i}/mass"), "mass must be positive and finite"));
                    }
                }
                if shaped {
                    for (i, a) in atoms.iter().enumerate() {
                        let u = unit(&a.direction);
                        let mirrored = atoms.iter().any(|b| {
                            let v = unit(&b.direction);
                            u.iter().zip(&v).all(|(x, y)| (x + y).abs() < 1e-12) && (a.mass - b.mass).abs() <= 1e-12 * a.mass
                        });
                        if !mirrored {
                            out.push(SpecIssue::new(format!("/atoms/{i}"), "atomic measure must be symmetric: antipodal atom with equal mass missing"));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let issues = self.issues(dim);
        if issues.is_empty() {
            Ok(())
        } else {
            let msg: Vec<String> = issues.iter().map(|i| format!("{}: {}", i.pointer, i.message)).collect();
            Err(Error::InvalidSpec(msg.join("; ")))
        }
    }

    /// Smallest stability index appearing in the variant.
    pub fn min_alpha(&self) -> f64 {
        match self {
            LevyVariant::IsotropicStable { alpha }
            | LevyVariant::DyadicShell { alpha }
            | LevyVariant::Cone { alpha, .. }
            | LevyVariant::Spherical { alpha, .. } => *alpha,
            LevyVariant::Axis { alphas } => alphas.iter().copied().fold(f64::INFINITY, f64::min),
            LevyVariant::ProductStable { alpha1, alpha2, .. } => alpha1.min(*alpha2),
        }
    }
}

impl LevyMeasureSpec {
    pub fn new(dim: usize, variant: LevyVariant) -> Self {
        LevyMeasureSpec { dim, variant }
    }

    pub fn isotropic(dim: usize, alpha: f64) -> Self {
        LevyMeasureSpec::new(dim, LevyVariant::IsotropicStable { alpha })
    }

    pub fn issues(&self) -> Vec<SpecIssue> {
        self.variant.issues(self.dim)
    }
}

impl JumpKernelSpec {
    pub fn new(dim: usize, variant: LevyVariant, range: KernelRange) -> Self {
        JumpKernelSpec { dim, variant, range }
    }

    /// Full-range isotropic stable kernel `|z|^{-d-α} dz`.
    pub fn isotropic(dim: usize, alpha: f64) -> Self {
        JumpKernelSpec::new(dim, LevyVariant::IsotropicStable { alpha }, KernelRange::Full)
    }

    pub fn issues(&self) -> Vec<SpecIssue> {
        self.variant.issues(self.dim)
    }

    /// The measure obtained by truncating this kernel to the unit ball.
    pub fn truncated(&self) -> LevyMeasureSpec {
        LevyMeasureSpec::new(self.dim, self.variant.clone())
    }

    pub fn label(&self) -> String {
        match self.range {
            KernelRange::Finite => format!("{} on |z|<1", self.variant.label()),
            KernelRange::Full => self.variant.label(),
        }
    }
}

/// `E[|z|^2]`, `E[|z|^4]` and the covariance of `ν`.
pub fn moments(spec: &LevyMeasureSpec) -> Result<MomentSet> {
    Measure::levy(spec)?.moments()
}

/// `∫ g dν` to relative tolerance `tol`; `g` must vanish quadratically at the origin
/// up to an odd part.
pub fn nu_integral<G: Fn(&[f64]) -> f64>(g: G, spec: &LevyMeasureSpec, tol: f64) -> Result<f64> {
    Measure::levy(spec)?.integrate(g, tol)
}

/// `φ(ξ) = ∫ (1 - cos⟨ξ, z⟩) ν(dz)`.
pub fn char_exponent(xi: &[f64], spec: &LevyMeasureSpec) -> Result<f64> {
    Measure::levy(spec)?.char_exponent(xi)
}

/// `β0(r) = ∫ exp(-r φ(ξ)) dξ`, integrating `|ξ| ≤ xi_cutoff` and bounding the rest.
pub fn beta_zero(r: f64, spec: &LevyMeasureSpec, xi_cutoff: f64) -> Result<BetaZero> {
    Measure::levy(spec)?.beta_zero(r, xi_cutoff, 1e-6)
}

/// Margins `J(A) - ν(A)` over boxes `A = [lo, hi]` that avoid the origin.
pub fn check_domination(j: &JumpKernelSpec, nu: &LevyMeasureSpec, boxes: &[(Vec<f64>, Vec<f64>)]) -> Result<Vec<f64>> {
    let jm = Measure::jump(j)?;
    let nm = Measure::levy(nu)?;
    if jm.dim() != nm.dim() {
        return Err(Error::DimensionMismatch { expected: jm.dim(), found: nm.dim() });
    }
    boxes.iter().map(|(lo, hi)| Ok(jm.box_measure(lo, hi)? - nm.box_measure(lo, hi)?)).collect()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn unit(v: &[f64]) -> Vec<f64> {
    let n = norm(v);
    v.iter().map(|x| x / n).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `∫_{S^{d-1}} f dσ` with the surface rule used for isotropic measures.
pub(crate) fn sphere_integral<F>(dim: usize, f: F, tol: f64) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    angular::Angular::Surface { offset: 0, k: dim, cone: None }.integrate(dim, f, tol, &[], (20_000, 0))
}
