//! Grid discretization of `E(f,f) = ∬ (f(x)−f(y))² W(x,y) J(x,dy) dx` and of the auxiliary form `E^λ`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::{BoundaryMode, GridSpec};
use crate::kernels::{JumpKernelSpec, LevyMeasureSpec, Measure, Stencil};
use crate::sparse::CsrMatrix;
use crate::weights::{VLambdaSpec, WeightSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyOptions {
    pub max_n: usize,
    pub max_nnz: usize,
    /// Off-diagonal entries below `drop_tol · max |A_ij|` are removed from the form.
    pub drop_tol: f64,
    /// Move the second moment of the excluded origin cell onto nearest neighbours.
    pub near_field_correction: bool,
    /// Relative tolerance of the killing-term quadrature.
    pub quad_tol: f64,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions { max_n: 1 << 18, max_nnz: 60_000_000, drop_tol: 1e-14, near_field_correction: false, quad_tol: 1e-8 }
    }
}

/// Assembled symmetric form with `fᵀ A f ≈ E(f, f)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseForm {
    pub matrix: CsrMatrix,
    pub grid: GridSpec,
    pub kernel: String,
    pub weight: String,
}

impl SparseForm {
    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn cell_volume(&self) -> f64 {
        self.grid.cell_volume()
    }

    pub fn mode(&self) -> BoundaryMode {
        self.grid.boundary_mode
    }

    /// The same form with every entry multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        SparseForm { matrix: self.matrix.scaled(s), ..self.clone() }
    }
}

struct Offset {
    lin: isize,
    m: Vec<i64>,
    dist: f64,
    base: f64,
}

fn offsets(grid: &GridSpec, stencil: &Stencil) -> Vec<Offset> {
    let s = grid.per_side() as isize;
    let cell = grid.cell_volume();
    let mut v: Vec<Offset> = stencil
        .entries
        .iter()
        .map(|(m, w)| {
            let mut lin = 0isize;
            let mut stride = 1isize;
            for &c in m {
                lin += c as isize * stride;
                stride *= s;
            }
            let dist = grid.h * m.iter().map(|&c| (c * c) as f64).sum::<f64>().sqrt();
            Offset { lin, m: m.clone(), dist, base: cell * w }
        })
        .collect();
    v.sort_by_key(|o| o.lin);
    v
}

type PairFn<'a> = dyn Fn(f64, f64, f64) -> f64 + Sync + 'a;

fn row_values(grid: &GridSpec, offs: &[Offset], radii: &[f64], pair: &PairFn, i: usize, out: &mut Vec<(usize, f64)>) {
    let s = grid.per_side() as i64;
    let mut k = vec![0usize; grid.d];
    grid.multi_index(i, &mut k);
    out.clear();
    'off: for o in offs {
        for (a, &c) in o.m.iter().enumerate() {
            let t = k[a] as i64 + c;
            if t < 0 || t >= s {
                continue 'off;
            }
        }
        let j = (i as isize + o.lin) as usize;
        let v = -2.0 * (o.base * pair(radii[i], radii[j], o.dist));
        out.push((j, v));
    }
}

fn map_rows<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

fn assemble_generic(grid: &GridSpec, measure: &Measure, pair: &PairFn, tail_growth: f64, opts: &AssemblyOptions) -> Result<CsrMatrix> {
    let issues = grid.issues();
    if !issues.is_empty() {
        return Err(Error::InvalidSpec(format!("{}: {}", issues[0].0, issues[0].1)));
    }
    if measure.dim() != grid.d {
        return Err(Error::DimensionMismatch { expected: grid.d, found: measure.dim() });
    }
    let n = grid.len();
    if n > opts.max_n {
        return Err(Error::BudgetExceeded(format!("node count {n} exceeds max_n {}", opts.max_n)));
    }
    let stencil = measure.stencil(grid.h, grid.per_side().saturating_sub(1), opts.near_field_correction)?;
    let offs = offsets(grid, &stencil);
    if (offs.len() as f64) * (n as f64) > 4.0 * opts.max_nnz as f64 {
        return Err(Error::BudgetExceeded(format!("stencil of {} offsets on {n} nodes exceeds max_nnz {}", offs.len(), opts.max_nnz)));
    }
    let radii = grid.radii();

    let max_entry = map_rows(n, |i| {
        let mut buf = Vec::new();
        row_values(grid, &offs, &radii, pair, i, &mut buf);
        buf.iter().fold(0.0f64, |a, e| a.max(e.1.abs()))
    })
    .into_iter()
    .fold(0.0f64, f64::max);
    let cut = opts.drop_tol * max_entry;

    let killing: Vec<f64> = match grid.boundary_mode {
        BoundaryMode::Restricted => vec![0.0; n],
        BoundaryMode::ZeroExtension => {
            let nodes = grid.nodes();
            let res: Vec<Result<f64>> = map_rows(n, |i| killing_rate(grid, measure, pair, &nodes[i], radii[i], tail_growth, opts.quad_tol));
            res.into_iter().collect::<Result<Vec<f64>>>()?
        }
    };
    let cell = grid.cell_volume();

    let rows = map_rows(n, |i| {
        let mut buf = Vec::new();
        row_values(grid, &offs, &radii, pair, i, &mut buf);
        buf.retain(|e| e.1.abs() >= cut && e.1 != 0.0);
        let mut diag = 0.0;
        for e in &buf {
            diag -= e.1;
        }
        diag += 2.0 * cell * killing[i];
        let pos = buf.partition_point(|e| e.0 < i);
        buf.insert(pos, (i, diag));
        buf
    });
    let nnz: usize = rows.iter().map(|r| r.len()).sum();
    if nnz > opts.max_nnz {
        return Err(Error::BudgetExceeded(format!("nnz {nnz} exceeds max_nnz {}", opts.max_nnz)));
    }
    Ok(CsrMatrix::from_rows(rows))
}

/// `∫_{y ∉ box} W(x,y) J(x,dy)`.
fn killing_rate(grid: &GridSpec, measure: &Measure, pair: &PairFn, x: &[f64], rx: f64, tail_growth: f64, tol: f64) -> Result<f64> {
    let d = grid.d;
    let l = grid.half_width;
    let mut breaks = Vec::new();
    if d >= 2 {
        for cx in [-l, l] {
            for cy in [-l, l] {
                breaks.push((cy - x[1]).atan2(cx - x[0]));
            }
        }
    }
    let mut y = vec![0.0; d];
    measure.integrate_rays(
        |theta, law| {
            let mut exit = f64::INFINITY;
            for a in 0..d {
                if theta[a] > 0.0 {
                    exit = exit.min((l - x[a]) / theta[a]);
                } else if theta[a] < 0.0 {
                    exit = exit.min((-l - x[a]) / theta[a]);
                }
            }
            if !(exit < law.r_max) {
                return Ok(0.0);
            }
            law.integrate_scaled(
                |r| {
                    for a in 0..d {
                        y[a] = x[a] + r * theta[a];
                    }
                    let ry = y.iter().map(|c| c * c).sum::<f64>().sqrt();
                    Ok(pair(rx, ry, r) / (r * r))
                },
                exit,
                law.r_max,
                &[1.0],
                tail_growth,
                tol,
            )
        },
        tol,
        &breaks,
    )
}

/// Assemble `E` for the jump kernel `J` and weight `W` with default options.
pub fn assemble_form(grid: &GridSpec, j: &JumpKernelSpec, w: &WeightSpec) -> Result<SparseForm> {
    assemble_form_with(grid, j, w, &AssemblyOptions::default())
}

pub fn assemble_form_with(grid: &GridSpec, j: &JumpKernelSpec, w: &WeightSpec, opts: &AssemblyOptions) -> Result<SparseForm> {
    if j.dim != grid.d {
        return Err(Error::DimensionMismatch { expected: grid.d, found: j.dim });
    }
    let measure = Measure::jump(j)?;
    let pair = |rx: f64, ry: f64, dist: f64| w.eval_radial(rx, ry, dist);
    let growth = w.u2.growth_exponent();
    let matrix = assemble_generic(grid, &measure, &pair, growth, opts)?;
    Ok(SparseForm { matrix, grid: *grid, kernel: j.label(), weight: w.label() })
}

/// Assemble the auxiliary form `E^λ` with `W_λ(x,y) = V_λ(x) + V_λ(y)` and `ν` on `B(0,1)`.
pub fn assemble_levy_form(grid: &GridSpec, nu: &LevyMeasureSpec, vlam: &VLambdaSpec) -> Result<SparseForm> {
    assemble_levy_form_with(grid, nu, vlam, &AssemblyOptions::default())
}

pub fn assemble_levy_form_with(grid: &GridSpec, nu: &LevyMeasureSpec, vlam: &VLambdaSpec, opts: &AssemblyOptions) -> Result<SparseForm> {
    if nu.dim != grid.d {
        return Err(Error::DimensionMismatch { expected: grid.d, found: nu.dim });
    }
    let measure = Measure::levy(nu)?;
    let pair = |rx: f64, ry: f64, _dist: f64| vlam.eval(rx) + vlam.eval(ry);
    let matrix = assemble_generic(grid, &measure, &pair, 0.0, opts)?;
    Ok(SparseForm {
        matrix,
        grid: *grid,
        kernel: format!("{} on |z|<1", nu.variant.label()),
        weight: format!("V_lambda(lambda={},R0={})", vlam.lambda, vlam.r0),
    })
}

/// `fᵀ A f`, evaluated as `Σ_i s_i f_i² + Σ_{i<j} (−A_ij)(f_i − f_j)²` with row sums `s_i`.
pub fn apply_form(a: &SparseForm, f: &[f64]) -> Result<f64> {
    let m = &a.matrix;
    if f.len() != m.n() {
        return Err(Error::DimensionMismatch { expected: m.n(), found: f.len() });
    }
    let mut total = 0.0;
    for i in 0..m.n() {
        let (c, v) = m.row(i);
        let mut rowsum = 0.0;
        let mut pairs = 0.0;
        for k in 0..c.len() {
            rowsum += v[k];
            let j = c[k];
            if j > i {
                let df = f[i] - f[j];
                pairs -= v[k] * df * df;
            }
        }
        total += rowsum * f[i] * f[i] + pairs;
    }
    Ok(total)
}
