//! Uniform node layout on [0, 1] and the two one-sided difference operators.
//!
//! Both operators are the bidiagonal matrices
//!
//! ```text
//! D₊ = 1/Δx · [ -1          ]      D₋ = 1/Δx · [ -1  1       ]
//!             [  1 -1       ]                  [    -1  1    ]
//!             [     1 -1    ]                  [       -1  1 ]
//!             [        1 -1 ]                  [          -1 ]
//! ```
//!
//! applied as stencil sweeps. Note that `D₋` is a forward difference of its
//! argument (≈ +∂ₓ) while `D₊` is minus a backward difference (≈ −∂ₓ).

use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    j_max: usize,
    dx: f64,
}

impl Grid1D {
    /// Grid with nodes `x_j = j / j_max`, `j = 0..=j_max`.
    pub fn new(j_max: usize) -> Result<Self> {
        if j_max < 2 {
            return Err(Error::InvalidGrid(j_max));
        }
        Ok(Self {
            j_max,
            dx: 1.0 / j_max as f64,
        })
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn node_count(&self) -> usize {
        self.j_max + 1
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.j_max).map(move |j| self.x(j))
    }

    pub(crate) fn check(&self, field: &[f64]) -> Result<()> {
        if field.len() != self.node_count() {
            return Err(Error::LengthMismatch {
                expected: self.node_count(),
                found: field.len(),
            });
        }
        Ok(())
    }
}

pub fn build_grid(j_max: usize) -> Result<Grid1D> {
    Grid1D::new(j_max)
}

/// One real value per grid node.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NodalField(Vec<f64>);

impl NodalField {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn constant(len: usize, value: f64) -> Self {
        Self(vec![value; len])
    }

    pub fn from_fn(grid: &Grid1D, f: impl Fn(f64) -> f64) -> Self {
        Self(grid.nodes().map(f).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &NodalField) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Deref for NodalField {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for NodalField {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for NodalField {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// `D₊ f`: `−f₀/Δx` at node 0, `(f_{j−1} − f_j)/Δx` elsewhere.
pub fn diff_forward(field: &[f64], grid: &Grid1D) -> Result<NodalField> {
    grid.check(field)?;
    let mut out = vec![0.0; field.len()];
    diff_forward_into(field, grid.dx, &mut out);
    Ok(NodalField(out))
}

/// `D₋ f`: `(f_{j+1} − f_j)/Δx` for `j < J`, `−f_J/Δx` at node J.
pub fn diff_backward(field: &[f64], grid: &Grid1D) -> Result<NodalField> {
    grid.check(field)?;
    let mut out = vec![0.0; field.len()];
    diff_backward_into(field, grid.dx, &mut out);
    Ok(NodalField(out))
}

#[inline]
pub(crate) fn diff_forward_into(field: &[f64], dx: f64, out: &mut [f64]) {
    out[0] = -field[0] / dx;
    for j in 1..field.len() {
        out[j] = (field[j - 1] - field[j]) / dx;
    }
}

#[inline]
pub(crate) fn diff_backward_into(field: &[f64], dx: f64, out: &mut [f64]) {
    let last = field.len() - 1;
    for j in 0..last {
        out[j] = (field[j + 1] - field[j]) / dx;
    }
    out[last] = -field[last] / dx;
}
