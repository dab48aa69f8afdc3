//! Certificates and finite-size probes for compactness of the semigroup: the scaling
//! functional `S(l)`, the generator-ratio certificate, Hardy and super Poincaré checks,
//! and the box-size sweep with its verdict.
//!
//! A finite grid always has discrete spectrum, so every verdict here is an indication
//! drawn from finite tables, never a proof.

mod generator;
mod poincare;
mod profile;
mod sss;
mod sweep;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

pub use generator::{certificate_constants, generator_ratio, hardy_check, ratio_certificate, HardyReport, RatioCertificate, RatioOptions, HARDY_RELATIVE_TOL};
pub use poincare::{super_poincare_profile, PoincareEntry, PoincareOptions};
pub use profile::{cutoff_family, cutoff_value, PsiSpec, TestProfile};
pub use sss::{sss_functional, sss_table};
pub use sweep::{dichotomy_sweep, dichotomy_sweep_with_progress, SweepSpec, SweepStage};

pub use crate::weights::DichotomySide;

/// Version of the report layout and of the verdict thresholds below.
pub const SCHEMA_VERSION: u32 = 1;
/// Counts are stable when they vary by at most this much over the two largest boxes.
pub const COUNT_STABLE_SPREAD: usize = 1;
/// Counts grow when every doubling of the box adds at least this many eigenvalues.
pub const COUNT_GROWTH_PER_DOUBLING: f64 = 2.0;
/// A scaling-functional slope at or below this points to a bounded `S(l)`.
pub const SSS_SLOPE_CUTOFF: f64 = 0.2;

/// Rayleigh quotient of a Gaussian bump centred at `center·e1` in the box of half-width `half_width`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BumpQuotient {
    pub half_width: f64,
    pub center: f64,
    pub quotient: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Verdict {
    pub side: DichotomySide,
    pub reasons: Vec<String>,
}

impl Default for Verdict {
    fn default() -> Self {
        Verdict { side: DichotomySide::Inconclusive, reasons: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiagnosticsReport {
    pub schema_version: u32,
    /// `(l, S(l))`.
    pub sss_table: Vec<(f64, f64)>,
    pub sss_slope: f64,
    pub ratio_certificate: Option<RatioCertificate>,
    /// Why no certificate could be built, when it could not.
    pub certificate_error: Option<String>,
    pub hardy_margins: Vec<f64>,
    /// `(r, β(r))`.
    pub beta_profile: Vec<(f64, f64)>,
    /// `(L, #{λ ≤ Λ*})`, ascending in `L`.
    pub weyl_counts: Vec<(f64, usize)>,
    /// `Λ*`.
    pub level: f64,
    pub bump_quotients: Vec<BumpQuotient>,
    pub verdict: Verdict,
}

/// Least-squares slope of `ln y` against `ln x`; non-positive points are skipped.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// The verdict implied by the evidence recorded in `report`; ignores `report.verdict`.
///
/// Compact is indicated when the two largest boxes give counts within
/// [`COUNT_STABLE_SPREAD`] and the ratio certificate is valid. Non-compact is indicated when
/// counts grow by [`COUNT_GROWTH_PER_DOUBLING`] per doubling or the scaling slope is at most
/// [`SSS_SLOPE_CUTOFF`]. Both or neither give inconclusive.
pub fn verdict(report: &DiagnosticsReport) -> Verdict {
    let mut reasons = Vec::new();
    let counts = &report.weyl_counts;
    let stable = counts.len() >= 2 && {
        let (a, b) = (counts[counts.len() - 2].1, counts[counts.len() - 1].1);
        a.abs_diff(b) <= COUNT_STABLE_SPREAD
    };
    let growing = counts.len() >= 2
        && counts.windows(2).all(|w| {
            let doublings = (w[1].0 / w[0].0).log2();
            doublings > 0.0 && (w[1].1 as f64 - w[0].1 as f64) >= COUNT_GROWTH_PER_DOUBLING * doublings
        });
    let cert_valid = report.ratio_certificate.as_ref().is_some_and(|c| c.valid);
    let flat = report.sss_slope.is_finite() && report.sss_slope <= SSS_SLOPE_CUTOFF;

    if counts.len() < 2 {
        reasons.push("fewer than two box sizes".into());
    } else if stable {
        reasons.push(format!("counts below level stable over the two largest boxes: {:?}", counts.iter().map(|c| c.1).collect::<Vec<_>>()));
    } else if growing {
        reasons.push(format!(
            "counts below level grow by at least {COUNT_GROWTH_PER_DOUBLING} per doubling: {:?}",
            counts.iter().map(|c| c.1).collect::<Vec<_>>()
        ));
    } else {
        reasons.push(format!("counts neither stable nor growing: {:?}", counts.iter().map(|c| c.1).collect::<Vec<_>>()));
    }
    match &report.ratio_certificate {
        Some(c) if c.valid => reasons.push(format!("ratio certificate valid: min ratio {:.4} >= C = {}", c.min_ratio_observed, c.c)),
        Some(c) => reasons.push(format!("ratio certificate failed: min ratio {:.4} < C = {}", c.min_ratio_observed, c.c)),
        None => reasons.push(format!("no ratio certificate{}", report.certificate_error.as_ref().map(|e| format!(": {e}")).unwrap_or_default())),
    }
    if report.sss_slope.is_finite() {
        let cmp = if flat { "<=" } else { ">" };
        reasons.push(format!("scaling functional slope {:.4} {cmp} {SSS_SLOPE_CUTOFF}", report.sss_slope));
    } else {
        reasons.push("scaling functional slope unavailable".into());
    }

    let compact = stable && cert_valid;
    let noncompact = growing || flat;
    let side = match (compact, noncompact) {
        (true, false) => DichotomySide::CompactIndicated,
        (false, true) => DichotomySide::NoncompactIndicated,
        (true, true) => {
            reasons.push("compact and non-compact evidence conflict".into());
            DichotomySide::Inconclusive
        }
        (false, false) => DichotomySide::Inconclusive,
    };
    Verdict { side, reasons }
}
