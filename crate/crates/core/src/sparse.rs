//! Compressed sparse row storage for symmetric matrices (both triangles stored).

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Build from per-row `(column, value)` lists; columns must be strictly increasing per row.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let nnz = rows.iter().map(|r| r.len()).sum();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for r in rows {
            for (c, v) in r {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix { n, row_ptr, cols, vals }
    }

    /// Dense row-major `n × n` data.
    pub fn from_dense(n: usize, data: &[f64]) -> Self {
        let rows = (0..n).map(|i| (0..n).filter(|&j| data[i * n + j] != 0.0 || i == j).map(|j| (j, data[i * n + j])).collect()).collect();
        Self::from_rows(rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.cols[a..b], &self.vals[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        match c.binary_search(&j) {
            Ok(k) => v[k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = s·A x`.
    pub fn matvec_scaled(&self, x: &[f64], y: &mut [f64], s: f64) {
        let row = |i: usize| -> f64 {
            let (c, v) = self.row(i);
            let mut acc = 0.0;
            for k in 0..c.len() {
                acc += v[k] * x[c[k]];
            }
            s * acc
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            if self.nnz() > 200_000 {
                y.par_iter_mut().enumerate().for_each(|(i, yi)| *yi = row(i));
                return;
            }
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = row(i);
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_scaled(x, y, 1.0)
    }

    /// Row-major dense copy scaled by `s`.
    pub fn to_dense_scaled(&self, s: f64) -> Vec<f64> {
        let mut d = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for k in 0..c.len() {
                d[i * self.n + c[k]] = s * v[k];
            }
        }
        d
    }

    /// Upper bound on the spectral norm: max absolute row sum.
    pub fn gershgorin(&self) -> f64 {
        (0..self.n).map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Lower-triangle entries `(i, j, v)` with `i ≥ j`, row-major.
    pub fn lower_entries(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for k in 0..c.len() {
                if c[k] <= i {
                    out.push((i, c[k], v[k]));
                }
            }
        }
        out
    }

    /// Whether `A[i][j]` and `A[j][i]` agree bit for bit for every stored entry.
    pub fn is_bitwise_symmetric(&self) -> bool {
        (0..self.n).all(|i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).all(|(&j, &x)| self.get(j, i).to_bits() == x.to_bits())
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        CsrMatrix { vals: self.vals.iter().map(|v| v * s).collect(), ..self.clone() }
    }
}
