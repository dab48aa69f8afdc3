//! Thick-restart Lanczos with full reorthogonalization and locking.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use super::{residuals, EigOptions, SolverStats, SpectrumResult};
use crate::error::{Error, Result};
use crate::rng::stream;
use crate::sparse::CsrMatrix;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

fn project_out(basis: &[Vec<f64>], w: &mut [f64]) {
    for _ in 0..2 {
        for u in basis {
            let c = dot(u, w);
            axpy(-c, u, w);
        }
    }
}

struct Run<'a> {
    m: &'a CsrMatrix,
    scale: f64,
    tol: f64,
    max_restarts: usize,
    basis: Option<usize>,
    anorm: f64,
    stats: SolverStats,
}

struct Found {
    vals: Vec<f64>,
    vecs: Vec<Vec<f64>>,
}

impl Run<'_> {
    fn apply(&mut self, x: &[f64], y: &mut [f64]) {
        self.m.matvec_scaled(x, y, self.scale);
        self.stats.iterations += 1;
    }

    fn random_unit(&self, rng: &mut rand_chacha::ChaCha8Rng, locked: &[Vec<f64>], extra: &[Vec<f64>]) -> Result<Vec<f64>> {
        let n = self.m.n();
        for _ in 0..8 {
            let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            project_out(locked, &mut v);
            project_out(extra, &mut v);
            if normalize(&mut v) > 1e-8 {
                return Ok(v);
            }
        }
        Err(Error::ZeroVector)
    }

    /// `want` smallest eigenpairs of the operator restricted to the complement of `locked`.
    fn solve(&mut self, want: usize, locked: &[Vec<f64>], stream_name: &str, seed: u64) -> Result<Found> {
        let n = self.m.n();
        let avail = n - locked.len();
        let want = want.min(avail);
        if want == 0 {
            return Ok(Found { vals: vec![], vecs: vec![] });
        }
        let m = self.basis.unwrap_or((2 * want + 30).max(160)).max(want + 2).min(avail);
        let mut rng = stream(seed, stream_name);
        let mut v: Vec<Vec<f64>> = Vec::with_capacity(m);
        v.push(self.random_unit(&mut rng, locked, &[])?);
        let mut h = vec![0.0; m * m];
        let mut j0 = 0;
        let mut w = vec![0.0; n];
        let mut beta_last;
        let mut restarts = 0;
        loop {
            beta_last = 0.0;
            let mut residual = vec![0.0; n];
            for j in j0..m {
                let vj = v[j].clone();
                self.apply(&vj, &mut w);
                for i in 0..=j {
                    h[i * m + j] = 0.0;
                }
                // Locked directions are removed in both passes; small coefficients
                // reintroduce them and a short `beta` amplifies the leak.
                for _ in 0..2 {
                    for u in locked {
                        let c = dot(u, &w);
                        axpy(-c, u, &mut w);
                    }
                    for i in 0..=j {
                        let c = dot(&v[i], &w);
                        axpy(-c, &v[i], &mut w);
                        h[i * m + j] += c;
                    }
                }
                for i in 0..j {
                    h[j * m + i] = h[i * m + j];
                }
                let beta = dot(&w, &w).sqrt();
                if j + 1 < m {
                    if beta <= 1e-12 * self.anorm.max(f64::MIN_POSITIVE) {
                        let fresh = self.random_unit(&mut rng, locked, &v)?;
                        v.push(fresh);
                        h[(j + 1) * m + j] = 0.0;
                        h[j * m + j + 1] = 0.0;
                    } else {
                        let next: Vec<f64> = w.iter().map(|x| x / beta).collect();
                        v.push(next);
                        h[(j + 1) * m + j] = beta;
                        h[j * m + j + 1] = beta;
                    }
                } else {
                    residual.copy_from_slice(&w);
                    beta_last = beta;
                }
            }
            let hm = nalgebra::DMatrix::from_row_slice(m, m, &h);
            let eig = hm.symmetric_eigen();
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let theta: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
            let y = |row: usize, col: usize| eig.eigenvectors[(row, order[col])];
            for t in &theta {
                self.anorm = self.anorm.max(t.abs());
            }
            let est: Vec<f64> = (0..m).map(|i| (beta_last * y(m - 1, i)).abs()).collect();
            let converged = (0..want).all(|i| est[i] <= 0.5 * self.tol * self.anorm);
            let ritz = |count: usize| -> Vec<Vec<f64>> {
                (0..count)
                    .map(|i| {
                        let mut x = vec![0.0; n];
                        for (jj, vj) in v.iter().enumerate() {
                            axpy(y(jj, i), vj, &mut x);
                        }
                        x
                    })
                    .collect()
            };
            if converged || beta_last <= 1e-14 * self.anorm {
                let vecs = ritz(want);
                return Ok(Found { vals: theta[..want].to_vec(), vecs });
            }
            if restarts >= self.max_restarts {
                let vecs = ritz(want);
                let res = residuals(self.m, self.scale, &theta[..want], &vecs, self.anorm);
                return Err(Error::NoConvergence {
                    iterations: self.stats.iterations,
                    partial: alloc::boxed::Box::new(SpectrumResult {
                        eigenvalues: theta[..want].to_vec(),
                        residual_norms: res,
                        eigenvectors: vecs,
                        stats: self.stats.clone(),
                    }),
                });
            }
            let keep = (m / 2).max(want).min(m - 2);
            let mut nv = ritz(keep);
            for x in nv.iter_mut() {
                normalize(x);
            }
            let mut r = residual;
            normalize(&mut r);
            nv.push(r);
            v = nv;
            h.iter_mut().for_each(|x| *x = 0.0);
            for i in 0..keep {
                h[i * m + i] = theta[i];
                let s = beta_last * y(m - 1, i);
                h[keep * m + i] = s;
                h[i * m + keep] = s;
            }
            j0 = keep;
            restarts += 1;
            self.stats.restarts += 1;
        }
    }
}

pub(super) fn smallest(m: &CsrMatrix, scale: f64, opts: &EigOptions, deflate_constant: bool) -> Result<SpectrumResult> {
    let n = m.n();
    let mut run = Run {
        m,
        scale,
        tol: opts.tol,
        max_restarts: opts.max_restarts,
        basis: opts.basis,
        anorm: 0.0,
        stats: SolverStats { iterations: 0, restarts: 0, path: String::from("lanczos") },
    };
    let mut fixed_vals = Vec::new();
    let mut fixed_vecs: Vec<Vec<f64>> = Vec::new();
    if deflate_constant {
        let c = vec![1.0 / (n as f64).sqrt(); n];
        let mut w = vec![0.0; n];
        m.matvec_scaled(&c, &mut w, scale);
        fixed_vals.push(dot(&c, &w));
        fixed_vecs.push(c);
    }
    let want = opts.k.saturating_sub(fixed_vals.len());
    let mut found = run.solve(want, &fixed_vecs, "lanczos", opts.seed)?;
    // Verification passes catch eigenvalues missed by the Krylov space (multiplicities).
    for pass in 1..=4 {
        if found.vals.is_empty() {
            break;
        }
        let mut locked = fixed_vecs.clone();
        locked.extend(found.vecs.iter().cloned());
        if locked.len() >= n {
            break;
        }
        let extra = run.solve(want, &locked, &format!("lanczos-verify-{pass}"), opts.seed)?;
        let top = *found.vals.last().unwrap();
        let eps = 1e-3 * opts.tol * run.anorm;
        let mut added = false;
        for (val, vec) in extra.vals.into_iter().zip(extra.vecs) {
            if val < top - eps {
                found.vals.push(val);
                found.vecs.push(vec);
                added = true;
            }
        }
        if !added {
            break;
        }
        let mut idx: Vec<usize> = (0..found.vals.len()).collect();
        idx.sort_by(|&a, &b| found.vals[a].total_cmp(&found.vals[b]));
        idx.truncate(want);
        found = Found { vals: idx.iter().map(|&i| found.vals[i]).collect(), vecs: idx.iter().map(|&i| found.vecs[i].clone()).collect() };
    }
    let mut vals = fixed_vals;
    let mut vecs = fixed_vecs;
    vals.extend(found.vals);
    vecs.extend(found.vecs);
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let vals: Vec<f64> = idx.iter().map(|&i| vals[i]).collect();
    let mut vecs: Vec<Vec<f64>> = idx.iter().map(|&i| vecs[i].clone()).collect();
    for v in vecs.iter_mut() {
        normalize(v);
        let mut best = 0;
        for j in 0..n {
            if v[j].abs() > v[best].abs() + 1e-12 {
                best = j;
            }
        }
        if v[best] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    let anorm = if run.anorm > 0.0 { run.anorm } else { m.gershgorin() * scale };
    let res = residuals(m, scale, &vals, &vecs, anorm);
    Ok(SpectrumResult { eigenvalues: vals, residual_norms: res, eigenvectors: vecs, stats: run.stats })
}
