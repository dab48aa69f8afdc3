use alloc::string::ToString;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::generator::{certify, gaussian_bump, RatioOptions};
use super::sss::sss_table;
use super::{loglog_slope, verdict, BumpQuotient, DiagnosticsReport, SCHEMA_VERSION};
use crate::assembly::{assemble_form_with, AssemblyOptions};
use crate::error::{Error, Result};
use crate::grid::{BoundaryMode, GridSpec};
use crate::kernels::JumpKernelSpec;
use crate::spectral::{count_below_with, rayleigh, EigOptions};
use crate::weights::WeightSpec;

/// Inputs of [`dichotomy_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub d: usize,
    /// Box half-widths, ascending.
    pub ls: Vec<f64>,
    pub h: f64,
    pub boundary_mode: BoundaryMode,
    pub kernel: JumpKernelSpec,
    pub weight: WeightSpec,
    /// Weyl-count level `Λ*`.
    pub level: f64,
    /// Distances along `e1` of the translated bump centres.
    pub centers: Vec<f64>,
    pub bump_width: f64,
    /// Scales `l` of the scaling functional.
    pub sss_ls: Vec<f64>,
    pub sss_tol: f64,
    pub ratio: RatioOptions,
    pub assembly: AssemblyOptions,
    pub eig: EigOptions,
}

impl SweepSpec {
    pub fn new(kernel: JumpKernelSpec, weight: WeightSpec, ls: Vec<f64>, h: f64, level: f64) -> Self {
        SweepSpec {
            d: kernel.dim,
            ls,
            h,
            boundary_mode: BoundaryMode::Restricted,
            kernel,
            weight,
            level,
            centers: Vec::new(),
            bump_width: 1.0,
            sss_ls: alloc::vec![8.0, 16.0, 32.0, 64.0],
            sss_tol: 1e-6,
            ratio: RatioOptions::default(),
            assembly: AssemblyOptions::default(),
            eig: EigOptions::new(1),
        }
    }
}

/// Sweep stages, reported to the progress callback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepStage {
    Box { half_width: f64 },
    ScalingFunctional,
    Certificate,
}

struct BoxResult {
    count: usize,
    bumps: Vec<BumpQuotient>,
}

fn one_box(spec: &SweepSpec, half_width: f64) -> Result<BoxResult> {
    let grid = GridSpec::new(spec.d, half_width, spec.h, spec.boundary_mode)?;
    let a = assemble_form_with(&grid, &spec.kernel, &spec.weight, &spec.assembly)?;
    let count = count_below_with(&a, spec.level, &spec.eig)?;
    let mut bumps = Vec::new();
    for &c in &spec.centers {
        if c.abs() + 4.0 * spec.bump_width > half_width {
            continue;
        }
        let mut centre = alloc::vec![0.0; spec.d];
        centre[0] = c;
        let f = gaussian_bump(&grid, &centre, spec.bump_width);
        bumps.push(BumpQuotient { half_width, center: c, quotient: rayleigh(&a, &f)? });
    }
    Ok(BoxResult { count, bumps })
}

/// Weyl counts over box sizes, bump quotients, the scaling-functional table and the ratio
/// certificate, folded into a report with a verdict.
pub fn dichotomy_sweep(spec: &SweepSpec) -> Result<DiagnosticsReport> {
    dichotomy_sweep_with_progress(spec, &mut |_| Ok(()))
}

/// As [`dichotomy_sweep`]; `progress` runs before each stage and aborts the sweep with its error.
pub fn dichotomy_sweep_with_progress(spec: &SweepSpec, progress: &mut dyn FnMut(SweepStage) -> Result<()>) -> Result<DiagnosticsReport> {
    if spec.ls.is_empty() {
        return Err(Error::InvalidSpec("sweep needs at least one box size".into()));
    }
    if spec.kernel.dim != spec.d {
        return Err(Error::DimensionMismatch { expected: spec.d, found: spec.kernel.dim });
    }
    let mut ls = spec.ls.clone();
    ls.sort_by(f64::total_cmp);
    let mut weyl = Vec::new();
    let mut bumps = Vec::new();
    for &l in &ls {
        progress(SweepStage::Box { half_width: l })?;
        let r = one_box(spec, l)?;
        weyl.push((l, r.count));
        bumps.extend(r.bumps);
    }
    progress(SweepStage::ScalingFunctional)?;
    let sss = if spec.sss_ls.is_empty() { Vec::new() } else { sss_table(&spec.sss_ls, &spec.kernel, &spec.weight, spec.sss_tol)? };
    let slope = loglog_slope(&sss);
    progress(SweepStage::Certificate)?;
    let nu = spec.kernel.truncated();
    let (certificate, certificate_error) = match certify(&nu, &spec.weight, &spec.ratio) {
        Ok((c, _)) => (Some(c), None),
        Err(e @ (Error::GrowthInsufficient { .. } | Error::DominationFailed { .. })) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let mut report = DiagnosticsReport {
        schema_version: SCHEMA_VERSION,
        sss_table: sss,
        sss_slope: slope,
        ratio_certificate: certificate,
        certificate_error,
        hardy_margins: Vec::new(),
        beta_profile: Vec::new(),
        weyl_counts: weyl,
        level: spec.level,
        bump_quotients: bumps,
        verdict: super::Verdict::default(),
    };
    report.verdict = verdict(&report);
    Ok(report)
}
