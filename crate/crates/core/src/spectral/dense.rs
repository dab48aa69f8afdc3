use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::{residuals, SolverStats, SpectrumResult};
use crate::sparse::CsrMatrix;

fn dense_matrix(m: &CsrMatrix, scale: f64) -> nalgebra::DMatrix<f64> {
    let n = m.n();
    nalgebra::DMatrix::from_row_slice(n, n, &m.to_dense_scaled(scale))
}

pub(super) fn eigenvalues(m: &CsrMatrix, scale: f64) -> Vec<f64> {
    let mut ev: Vec<f64> = dense_matrix(m, scale).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub(super) fn smallest(m: &CsrMatrix, scale: f64, k: usize) -> SpectrumResult {
    let n = m.n();
    let eig = dense_matrix(m, scale).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let anorm = eig.eigenvalues.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let vals: Vec<f64> = order[..k].iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs: Vec<Vec<f64>> = order[..k]
        .iter()
        .map(|&i| {
            let c = eig.eigenvectors.column(i);
            // Fix the sign: largest-magnitude component positive.
            let mut best = 0;
            for j in 0..n {
                if c[j].abs() > c[best].abs() + 1e-12 {
                    best = j;
                }
            }
            let s = if c[best] < 0.0 { -1.0 } else { 1.0 };
            c.iter().map(|x| s * x).collect()
        })
        .collect();
    let res = residuals(m, scale, &vals, &vecs, anorm);
    SpectrumResult {
        eigenvalues: vals,
        residual_norms: res,
        eigenvectors: vecs,
        stats: SolverStats { iterations: 0, restarts: 0, path: String::from("dense") },
    }
}
