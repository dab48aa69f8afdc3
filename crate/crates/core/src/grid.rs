//! Uniform cell-centred grids on `[−L, L]^d`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BoundaryMode {
    /// Integrate over box × box only; constants lie in the kernel.
    #[default]
    Restricted,
    /// Extend by zero outside the box, adding a killing term.
    ZeroExtension,
}

impl BoundaryMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundaryMode::Restricted => "restricted",
            BoundaryMode::ZeroExtension => "zero_extension",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSpec {
    pub d: usize,
    /// Box half-width `L`.
    pub half_width: f64,
    pub h: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub boundary_mode: BoundaryMode,
}

impl GridSpec {
    pub fn new(d: usize, half_width: f64, h: f64, boundary_mode: BoundaryMode) -> Result<Self> {
        let g = GridSpec { d, half_width, h, boundary_mode };
        let issues = g.issues();
        if issues.is_empty() {
            Ok(g)
        } else {
            let v: Vec<_> = issues.into_iter().map(|(p, m)| format!("{p}: {m}")).collect();
            Err(Error::InvalidSpec(v.join("; ")))
        }
    }

    pub fn restricted(d: usize, half_width: f64, h: f64) -> Result<Self> {
        Self::new(d, half_width, h, BoundaryMode::Restricted)
    }

    /// Problems as (JSON pointer, message) pairs.
    pub fn issues(&self) -> Vec<(&'static str, alloc::string::String)> {
        let mut out = Vec::new();
        if self.d == 0 {
            out.push(("/d", "dimension must be at least 1".into()));
        }
        if !(self.h > 0.0 && self.h < 1.0) {
            out.push(("/h", format!("mesh width must satisfy 0 < h < 1, got {}", self.h)));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            out.push(("/half_width", format!("half-width must be positive, got {}", self.half_width)));
        } else if self.h > 0.0 {
            let ratio = 2.0 * self.half_width / self.h;
            if !(ratio >= 1.0 && (ratio - ratio.round()).abs() <= 1e-9 * ratio) {
                out.push(("/half_width", format!("2L/h must be a positive integer, got {ratio}")));
            }
        }
        out
    }

    /// Nodes per coordinate, `2L/h`.
    pub fn per_side(&self) -> usize {
        (2.0 * self.half_width / self.h).round() as usize
    }

    /// Total node count, saturating on overflow.
    pub fn len(&self) -> usize {
        let s = self.per_side();
        (0..self.d).fold(1usize, |a, _| a.saturating_mul(s))
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.d as i32)
    }

    /// Centre of the `k`-th cell along one axis.
    #[inline]
    pub fn coord(&self, k: usize) -> f64 {
        -self.half_width + (k as f64 + 0.5) * self.h
    }

    /// Multi-index of node `i`; the first coordinate varies fastest.
    pub fn multi_index(&self, mut i: usize, out: &mut [usize]) {
        let s = self.per_side();
        for o in out.iter_mut().take(self.d) {
            *o = i % s;
            i /= s;
        }
    }

    pub fn node(&self, i: usize, out: &mut [f64]) {
        let s = self.per_side();
        let mut i = i;
        for o in out.iter_mut().take(self.d) {
            *o = self.coord(i % s);
            i /= s;
        }
    }

    pub fn nodes(&self) -> Vec<Vec<f64>> {
        let mut x = vec![0.0; self.d];
        (0..self.len())
            .map(|i| {
                self.node(i, &mut x);
                x.clone()
            })
            .collect()
    }

    /// Euclidean norms of all nodes.
    pub fn radii(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.d];
        (0..self.len())
            .map(|i| {
                self.node(i, &mut x);
                x.iter().map(|c| c * c).sum::<f64>().sqrt()
            })
            .collect()
    }
}
