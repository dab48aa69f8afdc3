//! Low eigenpairs, Rayleigh quotients and eigenvalue counts of assembled forms.
//!
//! All operations act on `Â = A / h^d`, the matrix of the form with respect to the
//! discrete `L²` inner product `h^d Σ f_i g_i`.

mod dense;
mod lanczos;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::assembly::{apply_form, SparseForm};
use crate::error::{Error, Result};
use crate::grid::BoundaryMode;

/// Problems with at most this many unknowns use the dense solver under [`SolverPath::Auto`].
pub const DENSE_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SolverPath {
    #[default]
    Auto,
    Dense,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigOptions {
    pub k: usize,
    /// Residual tolerance relative to `‖Â‖`.
    pub tol: f64,
    pub path: SolverPath,
    pub seed: u64,
    pub max_restarts: usize,
    /// Krylov basis size; chosen from `k` when `None`.
    pub basis: Option<usize>,
}

impl EigOptions {
    pub fn new(k: usize) -> Self {
        EigOptions { k, tol: 1e-8, path: SolverPath::Auto, seed: 0, max_restarts: 2000, basis: None }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_path(mut self, path: SolverPath) -> Self {
        self.path = path;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverStats {
    /// Operator applications (iterative) or 0 (dense).
    pub iterations: usize,
    pub restarts: usize,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectrumResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `‖Âv − λv‖ / ‖Â‖` per pair.
    pub residual_norms: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub eigenvectors: Vec<Vec<f64>>,
    pub stats: SolverStats,
}

fn use_dense(n: usize, path: SolverPath) -> bool {
    match path {
        SolverPath::Dense => true,
        SolverPath::Iterative => false,
        SolverPath::Auto => n <= DENSE_LIMIT,
    }
}

/// `k` smallest eigenpairs of `Â` with residuals below `tol`.
pub fn smallest_eigs(a: &SparseForm, k: usize, tol: f64) -> Result<SpectrumResult> {
    smallest_eigs_with(a, &EigOptions::new(k).with_tol(tol))
}

pub fn smallest_eigs_with(a: &SparseForm, opts: &EigOptions) -> Result<SpectrumResult> {
    let n = a.n();
    if opts.k == 0 || opts.k > n {
        return Err(Error::InvalidSpec(alloc::format!("need 1 <= k <= n = {n}, got k = {}", opts.k)));
    }
    let scale = 1.0 / a.cell_volume();
    if use_dense(n, opts.path) {
        return Ok(dense::smallest(&a.matrix, scale, opts.k));
    }
    let deflate = a.mode() == BoundaryMode::Restricted;
    lanczos::smallest(&a.matrix, scale, opts, deflate)
}

/// `fᵀ A f / (h^d ‖f‖²)`.
pub fn rayleigh(a: &SparseForm, f: &[f64]) -> Result<f64> {
    let nf: f64 = f.iter().map(|x| x * x).sum();
    if f.len() != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), found: f.len() });
    }
    if nf == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(apply_form(a, f)? / (a.cell_volume() * nf))
}

/// Number of eigenvalues of `Â` at or below `level`.
pub fn count_below(a: &SparseForm, level: f64) -> Result<usize> {
    count_below_with(a, level, &EigOptions::new(1))
}

pub fn count_below_with(a: &SparseForm, level: f64, opts: &EigOptions) -> Result<usize> {
    if !level.is_finite() {
        return Err(Error::InvalidSpec("level must be finite".into()));
    }
    let n = a.n();
    let scale = 1.0 / a.cell_volume();
    if use_dense(n, opts.path) {
        let ev = dense::eigenvalues(&a.matrix, scale);
        return Ok(ev.iter().filter(|&&e| e <= level).count());
    }
    if level < 0.0 {
        // Â is positive semidefinite.
        return Ok(0);
    }
    let mut k = 16.min(n);
    loop {
        let res = smallest_eigs_with(a, &EigOptions { k, ..*opts })?;
        let anorm = a.matrix.gershgorin() * scale;
        let margin = (1e-6 * level.abs()).max(10.0 * opts.tol * anorm);
        let top = *res.eigenvalues.last().unwrap_or(&f64::INFINITY);
        if top > level + margin || k == n {
            let near: Vec<f64> = res.eigenvalues.iter().copied().filter(|e| (e - level).abs() <= margin).collect();
            if !near.is_empty() {
                return Err(Error::CountUnreliable { level, nearby: near });
            }
            return Ok(res.eigenvalues.iter().filter(|&&e| e <= level).count());
        }
        if k >= 1024 {
            return Err(Error::BudgetExceeded(alloc::format!("more than {k} eigenvalues below level {level}")));
        }
        k = (2 * k).min(n);
    }
}

/// Residual norms `‖Âv − λv‖ / anorm`.
pub(crate) fn residuals(m: &crate::sparse::CsrMatrix, scale: f64, vals: &[f64], vecs: &[Vec<f64>], anorm: f64) -> Vec<f64> {
    let mut w = vec![0.0; m.n()];
    vals.iter()
        .zip(vecs)
        .map(|(&l, v)| {
            m.matvec_scaled(v, &mut w, scale);
            let r: f64 = w.iter().zip(v).map(|(a, b)| (a - l * b) * (a - l * b)).sum::<f64>().sqrt();
            r / anorm.max(f64::MIN_POSITIVE)
        })
        .collect()
}
