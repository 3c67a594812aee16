//! Evenly spaced periodic grid on `[0, 2π)` and the matrix-free discrete Laplacian.

use std::f64::consts::TAU;

use crate::error::{check_len, Error, Result};

/// Periodic grid with `n` points `x_i = i·dx`, `dx = 2π/n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    dx: f64,
}

impl Grid {
    /// Domain length of every grid built by this crate.
    pub const LENGTH: f64 = TAU;

    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 2 points, got {n}"
            )));
        }
        Ok(Self {
            n,
            dx: Self::LENGTH / n as f64,
        })
    }

    /// Degenerate one-point grid (`dx = 2π`). The periodic stencil vanishes
    /// identically there, which makes it the scalar surrogate of the
    /// Langevin model used to check samplers against 1D quadrature.
    pub fn single_cell() -> Self {
        Self {
            n: 1,
            dx: Self::LENGTH,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn length(&self) -> f64 {
        Self::LENGTH
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// `(Lv)_i = (v_{i+1} − 2v_i + v_{i−1}) / dx²` with periodic wrap.
    pub fn laplacian_matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n];
        self.laplacian_into(v, &mut out)?;
        Ok(out)
    }

    pub fn laplacian_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.n, v.len())?;
        check_len(self.n, out.len())?;
        let n = self.n;
        let inv = 1.0 / (self.dx * self.dx);
        for i in 0..n {
            let next = v[(i + 1) % n];
            let prev = v[(i + n - 1) % n];
            out[i] = (next - 2.0 * v[i] + prev) * inv;
        }
        Ok(())
    }
}

/// Cyclic neighbour indices `(i+1) mod n`, `(i−1) mod n`.
#[inline]
pub(crate) fn neighbours(i: usize, n: usize) -> (usize, usize) {
    ((i + 1) % n, (i + n - 1) % n)
}
