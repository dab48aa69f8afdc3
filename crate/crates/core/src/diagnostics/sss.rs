use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::kernels::{sphere_integral, JumpKernelSpec, Measure};
use crate::quad::{try_integrate, QuadOptions};
use crate::weights::WeightSpec;

/// Inner integral `∫ (1 ∧ |z|²/l²) W(x, x+z) J(dz)`.
fn inner(m: &Measure, x: &[f64], l: f64, w: &WeightSpec, tail: f64, tol: f64) -> Result<f64> {
    let d = x.len();
    let rx = x.iter().map(|c| c * c).sum::<f64>().sqrt();
    let mut breaks = vec![1.0, l];
    if rx > 0.0 {
        breaks.push(rx);
    }
    m.integrate_with(
        |z| {
            let mut r2 = 0.0;
            let mut ry2 = 0.0;
            for i in 0..d {
                let y = x[i] + z[i];
                r2 += z[i] * z[i];
                ry2 += y * y;
            }
            let r = r2.sqrt();
            (r2 / (l * l)).min(1.0) * w.eval_radial(rx, ry2.sqrt(), r)
        },
        tol,
        &breaks,
        tail,
    )
}

/// `S(l) = l^{-d} ∫_{|x|≤l} ∫ (1 ∧ |x−y|²/l²) W(x,y) J(x,dy) dx`.
pub fn sss_functional(l: f64, j: &JumpKernelSpec, w: &WeightSpec, tol: f64) -> Result<f64> {
    if !(l >= 1.0) {
        return Err(Error::InvalidSpec(format!("l must be at least 1, got {l}")));
    }
    let m = Measure::jump(j)?;
    let d = j.dim;
    let tail = w.u2.growth_exponent();
    if tail >= m.min_alpha() && m.reach().is_infinite() {
        return Err(Error::NonIntegrable);
    }
    let inner_tol = 0.1 * tol;
    let opts = QuadOptions::rel(tol).with_abs(1e-300).with_max_evals(20_000);
    let mut brk = vec![1.0f64];
    brk.retain(|&b| b < l);
    let radial = |rho: f64| -> Result<f64> {
        let shell = if d == 1 {
            inner(&m, &[rho], l, w, tail, inner_tol)? + inner(&m, &[-rho], l, w, tail, inner_tol)?
        } else {
            let mut x = vec![0.0; d];
            sphere_integral(
                d,
                |theta| {
                    for i in 0..d {
                        x[i] = rho * theta[i];
                    }
                    inner(&m, &x, l, w, tail, inner_tol)
                },
                tol,
            )?
        };
        Ok(rho.powi(d as i32 - 1) * shell)
    };
    let v = try_integrate::<_, Error>(radial, 0.0, l, &brk, opts)?;
    Ok(v.value / l.powi(d as i32))
}

/// `(l, S(l))` for each `l`, in input order.
pub fn sss_table(ls: &[f64], j: &JumpKernelSpec, w: &WeightSpec, tol: f64) -> Result<Vec<(f64, f64)>> {
    crate::par::map(ls, |&l| sss_functional(l, j, w, tol).map(|s| (l, s))).into_iter().collect()
}
