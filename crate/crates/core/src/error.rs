use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::diagnostics::RatioCertificate;
use crate::spectral::SpectrumResult;

/// Errors produced by every fallible operation in this crate.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidSpec(String),
    #[error("integrand is not integrable against the measure near the origin")]
    NonIntegrable,
    #[error("quadrature tolerance not met (estimate {value:e}, error {error:e})")]
    ToleranceNotMet { value: f64, error: f64 },
    #[error("integrand produced a non-finite value")]
    NonFinite,
    #[error("frequency cutoff {cutoff} too small: tail estimate {tail:e} exceeds tolerance")]
    CutoffTooSmall { cutoff: f64, tail: f64 },
    #[error("weight growth insufficient for lambda = {lambda} within radius {radius_budget}")]
    GrowthInsufficient { lambda: f64, radius_budget: f64 },
    #[error("domination W(x,y) >= V(x)+V(y) failed at |x| = {x_norm}, |y| = {y_norm}")]
    DominationFailed { x_norm: f64, y_norm: f64 },
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vector has zero norm")]
    ZeroVector,
    #[error("eigensolver did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize, partial: Box<SpectrumResult> },
    #[error("eigenvalue count near level {level} is unreliable")]
    CountUnreliable { level: f64, nearby: Vec<f64> },
    #[error("cutoff radius 2l = {two_l} exceeds box half-width {half_width}")]
    OutOfBox { two_l: f64, half_width: f64 },
    #[error("ratio certificate failed: ratio {ratio} < C at |x| = {x_norm}")]
    CertificateFailed { x_norm: f64, ratio: f64, certificate: Box<RatioCertificate> },
    #[error("ratio certificate unavailable: {0}")]
    CertificateUnavailable(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = core::result::Result<T, Error>;
