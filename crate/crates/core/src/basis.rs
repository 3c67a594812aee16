//! Analytic eigenbasis of the periodic discrete Laplacian and the
//! physical ↔ spectral transforms.
//!
//! The eigenvectors are the real trigonometric modes
//!
//! ```text
//! constant:  1/√n
//! cos k:     √(2/n) cos(2πkj/n)      1 ≤ k < n/2
//! sin k:     √(2/n) sin(2πkj/n)      1 ≤ k < n/2
//! Nyquist:   (−1)^j/√n                k = n/2, n even
//! ```
//!
//! with Laplacian eigenvalue `−4 sin²(πk/n)/dx²`. Modes are stored in
//! descending eigenvalue order: increasing wavenumber, cosine before sine.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_len, Result};
use crate::grid::Grid;
use crate::model::ModelSpec;

/// Above this size the transforms go through an FFT.
pub const DENSE_TRANSFORM_MAX_N: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeShape {
    Constant,
    Cos,
    Sin,
    Nyquist,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mode {
    pub wavenumber: usize,
    pub shape: ModeShape,
}

/// Spectral coefficients `û_i = ⟨v, e_i⟩` of a grid function.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub coeffs: Vec<f64>,
}

#[derive(Clone)]
pub struct SpectralBasis {
    grid: Grid,
    eigenvalues: Vec<f64>,
    modes: Vec<Mode>,
    /// Mode-major: `vectors[i*n + j] = e_i(x_j)`.
    vectors: Vec<f64>,
    fft: Option<FftPair>,
}

#[derive(Clone)]
struct FftPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpectralBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralBasis")
            .field("grid", &self.grid)
            .field("eigenvalues", &self.eigenvalues)
            .field("fft", &self.fft.is_some())
            .finish()
    }
}

/// Laplacian eigenvalue of wavenumber `k` on `grid`.
pub fn laplacian_eigenvalue(grid: &Grid, k: usize) -> f64 {
    let s = (PI * k as f64 / grid.n() as f64).sin();
    -4.0 * s * s / (grid.dx() * grid.dx())
}

impl SpectralBasis {
    /// Eigenbasis of the pure periodic discrete Laplacian.
    pub fn laplacian(grid: &Grid) -> Self {
        Self::with_eigenvalue_map(grid, |mu| mu)
    }

    /// Eigenbasis of the model's linear drift operator: Heat shifts the
    /// Laplacian eigenvalues by `−λ`, Burgers scales them by `ν`.
    pub fn for_model(grid: &Grid, model: &ModelSpec) -> Self {
        Self::with_eigenvalue_map(grid, |mu| model.linear_eigenvalue(mu))
    }

    fn with_eigenvalue_map(grid: &Grid, map: impl Fn(f64) -> f64) -> Self {
        let n = grid.n();
        let mut modes = Vec::with_capacity(n);
        modes.push(Mode {
            wavenumber: 0,
            shape: ModeShape::Constant,
        });
        let half = n / 2;
        for k in 1..=half {
            if 2 * k == n {
                modes.push(Mode {
                    wavenumber: k,
                    shape: ModeShape::Nyquist,
                });
            } else {
                modes.push(Mode {
                    wavenumber: k,
                    shape: ModeShape::Cos,
                });
                modes.push(Mode {
                    wavenumber: k,
                    shape: ModeShape::Sin,
                });
            }
        }
        debug_assert_eq!(modes.len(), n);

        let mut vectors = vec![0.0; n * n];
        let nf = n as f64;
        for (i, m) in modes.iter().enumerate() {
            let row = &mut vectors[i * n..(i + 1) * n];
            match m.shape {
                ModeShape::Constant => row.fill(1.0 / nf.sqrt()),
                ModeShape::Nyquist => {
                    for (j, r) in row.iter_mut().enumerate() {
                        *r = if j % 2 == 0 { 1.0 } else { -1.0 } / nf.sqrt();
                    }
                }
                ModeShape::Cos | ModeShape::Sin => {
                    let a = (2.0 / nf).sqrt();
                    for (j, r) in row.iter_mut().enumerate() {
                        // Reduce the phase index modulo n before scaling to
                        // keep the argument small.
                        let theta = TAU * ((m.wavenumber * j) % n) as f64 / nf;
                        *r = a * if m.shape == ModeShape::Cos {
                            theta.cos()
                        } else {
                            theta.sin()
                        };
                    }
                }
            }
        }

        let eigenvalues = modes
            .iter()
            .map(|m| map(laplacian_eigenvalue(grid, m.wavenumber)))
            .collect();

        let fft = (n > DENSE_TRANSFORM_MAX_N).then(|| {
            let mut planner = FftPlanner::new();
            FftPair {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            }
        });

        Self {
            grid: *grid,
            eigenvalues,
            modes,
            vectors,
            fft,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    #[inline]
    pub fn eigenvalue(&self, i: usize) -> f64 {
        self.eigenvalues[i]
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    #[inline]
    pub fn vector(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.vectors[i * n..(i + 1) * n]
    }

    /// Index of the mode with the given wavenumber and shape, if present.
    pub fn index_of(&self, wavenumber: usize, shape: ModeShape) -> Option<usize> {
        self.modes
            .iter()
            .position(|m| m.wavenumber == wavenumber && m.shape == shape)
    }

    pub fn uses_fft(&self) -> bool {
        self.fft.is_some()
    }

    pub fn to_spectral(&self, v: &[f64]) -> Result<SpectralState> {
        let mut coeffs = vec![0.0; self.n()];
        self.project_into(v, &mut coeffs)?;
        Ok(SpectralState { coeffs })
    }

    pub fn from_spectral(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.n()];
        self.reconstruct_into(coeffs, &mut v)?;
        Ok(v)
    }

    /// `out_i = ⟨v, e_i⟩`.
    pub fn project_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.n(), v.len())?;
        check_len(self.n(), out.len())?;
        match &self.fft {
            None => self.project_dense(v, out),
            Some(fft) => self.project_fft(fft, v, out),
        }
        Ok(())
    }

    /// `out = Σ_i coeffs_i e_i`.
    pub fn reconstruct_into(&self, coeffs: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.n(), coeffs.len())?;
        check_len(self.n(), out.len())?;
        match &self.fft {
            None => self.reconstruct_dense(coeffs, out),
            Some(fft) => self.reconstruct_fft(fft, coeffs, out),
        }
        Ok(())
    }

    /// Dense inner products, available at every size (reference path).
    pub fn project_dense(&self, v: &[f64], out: &mut [f64]) {
        let n = self.n();
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.vectors[i * n..(i + 1) * n];
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    pub fn reconstruct_dense(&self, coeffs: &[f64], out: &mut [f64]) {
        let n = self.n();
        out.fill(0.0);
        for (i, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let row = &self.vectors[i * n..(i + 1) * n];
            for (o, e) in out.iter_mut().zip(row) {
                *o += c * e;
            }
        }
    }

    fn project_fft(&self, fft: &FftPair, v: &[f64], out: &mut [f64]) {
        let n = self.n();
        let nf = n as f64;
        let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fft.forward.process(&mut buf);
        let a = (2.0 / nf).sqrt();
        for (o, m) in out.iter_mut().zip(&self.modes) {
            let x = buf[m.wavenumber];
            *o = match m.shape {
                ModeShape::Constant | ModeShape::Nyquist => x.re / nf.sqrt(),
                ModeShape::Cos => a * x.re,
                ModeShape::Sin => -a * x.im,
            };
        }
    }

    fn reconstruct_fft(&self, fft: &FftPair, coeffs: &[f64], out: &mut [f64]) {
        let n = self.n();
        let nf = n as f64;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let half_a = 0.5 * (2.0 / nf).sqrt();
        for (&c, m) in coeffs.iter().zip(&self.modes) {
            let k = m.wavenumber;
            match m.shape {
                ModeShape::Constant | ModeShape::Nyquist => buf[k].re += c / nf.sqrt(),
                ModeShape::Cos => {
                    buf[k].re += half_a * c;
                    buf[n - k].re += half_a * c;
                }
                ModeShape::Sin => {
                    buf[k].im -= half_a * c;
                    buf[n - k].im += half_a * c;
                }
            }
        }
        fft.inverse.process(&mut buf);
        for (o, x) in out.iter_mut().zip(&buf) {
            *o = x.re;
        }
    }

    /// `L v = Σ μ_i ⟨v, e_i⟩ e_i` for the operator this basis diagonalizes.
    pub fn apply_operator(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut c = self.to_spectral(v)?.coeffs;
        for (x, mu) in c.iter_mut().zip(&self.eigenvalues) {
            *x *= mu;
        }
        self.from_spectral(&c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pseudo_random(n: usize, seed: u64) -> Vec<f64> {
        let mut x = seed | 1;
        (0..n)
            .map(|_| {
                x ^= x << 13;
                x ^= x >> 7;
                x ^= x << 17;
                (x >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
            })
            .collect()
    }

    #[test]
    fn two_point_grid_eigenvalues() {
        // Explicit 2×2: L = (1/π²)[[-2, 2], [2, -2]], eigenvalues 0 and -4/π².
        let g = Grid::new(2).unwrap();
        let b = SpectralBasis::laplacian(&g);
        assert_relative_eq!(b.eigenvalue(0), 0.0);
        assert_relative_eq!(b.eigenvalue(1), -4.0 / (PI * PI), epsilon = 1e-15);
        let heat = SpectralBasis::for_model(&g, &ModelSpec::heat(1.0, 1.0));
        assert_relative_eq!(heat.eigenvalue(0), -1.0);
        assert_relative_eq!(heat.eigenvalue(1), -4.0 / (PI * PI) - 1.0, epsilon = 1e-15);
    }

    #[test]
    fn burgers_scales_by_viscosity() {
        let g = Grid::new(6).unwrap();
        let lap = SpectralBasis::laplacian(&g);
        let m = ModelSpec::burgers(0.3, 1.0, Default::default());
        let b = SpectralBasis::for_model(&g, &m);
        for i in 0..6 {
            assert_relative_eq!(b.eigenvalue(i), 0.3 * lap.eigenvalue(i));
        }
    }

    #[test]
    fn constant_mode_leads() {
        for n in [2, 3, 7, 16, 101] {
            let b = SpectralBasis::laplacian(&Grid::new(n).unwrap());
            assert_eq!(b.eigenvalue(0), 0.0);
            for &x in b.vector(0) {
                assert_relative_eq!(x, 1.0 / (n as f64).sqrt(), epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn orthonormal_and_eigen_residual() {
        for n in 2..=128 {
            let g = Grid::new(n).unwrap();
            let b = SpectralBasis::laplacian(&g);
            for i in 0..n {
                let ei = b.vector(i);
                for j in i..n {
                    let dot: f64 = ei.iter().zip(b.vector(j)).map(|(a, c)| a * c).sum();
                    if i == j {
                        assert!((dot - 1.0).abs() <= 1e-12, "n={n} i={i} norm={dot}");
                    } else {
                        assert!(dot.abs() <= 1e-12, "n={n} i={i} j={j} dot={dot}");
                    }
                }
                let mu = b.eigenvalue(i);
                assert!(mu <= 0.0);
                let le = g.laplacian_matvec(ei).unwrap();
                let res = le
                    .iter()
                    .zip(ei)
                    .map(|(a, e)| (a - mu * e).powi(2))
                    .sum::<f64>()
                    .sqrt();
                assert!(res <= 1e-10 * mu.abs() + 1e-12, "n={n} i={i} res={res}");
            }
            for w in b.eigenvalues().windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn eigenvalue_formula_and_pairing() {
        for n in 2..=64 {
            let g = Grid::new(n).unwrap();
            let b = SpectralBasis::laplacian(&g);
            let mut count = vec![0usize; n / 2 + 1];
            for (i, m) in b.modes().iter().enumerate() {
                let k = m.wavenumber as f64;
                let want = -(2.0 - 2.0 * (TAU * k / n as f64).cos()) / g.dx().powi(2);
                assert!((b.eigenvalue(i) - want).abs() <= 1e-10 * (1.0 + want.abs()));
                count[m.wavenumber] += 1;
            }
            for (k, &c) in count.iter().enumerate() {
                let expect = if k == 0 || 2 * k == n { 1 } else { 2 };
                assert_eq!(c, expect, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn cosine_before_sine() {
        let b = SpectralBasis::laplacian(&Grid::new(7).unwrap());
        let shapes: Vec<_> = b.modes().iter().map(|m| (m.wavenumber, m.shape)).collect();
        assert_eq!(shapes[1], (1, ModeShape::Cos));
        assert_eq!(shapes[2], (1, ModeShape::Sin));
        assert_eq!(shapes[6], (3, ModeShape::Sin));
    }

    #[test]
    fn unit_vector_projection() {
        let b = SpectralBasis::laplacian(&Grid::new(12).unwrap());
        let c = b.to_spectral(b.vector(3)).unwrap().coeffs;
        for (i, x) in c.iter().enumerate() {
            let want = if i == 3 { 1.0 } else { 0.0 };
            assert!((x - want).abs() < 1e-14);
        }
        assert_eq!(b.from_spectral(&[0.0; 12]).unwrap(), vec![0.0; 12]);
    }

    #[test]
    fn fft_path_matches_dense() {
        for n in [65, 100, 101, 128] {
            let b = SpectralBasis::laplacian(&Grid::new(n).unwrap());
            assert!(b.uses_fft());
            let v = pseudo_random(n, n as u64 * 31);
            let mut dense = vec![0.0; n];
            b.project_dense(&v, &mut dense);
            let fast = b.to_spectral(&v).unwrap().coeffs;
            for (a, c) in dense.iter().zip(&fast) {
                assert!((a - c).abs() < 1e-12);
            }
            let mut back_dense = vec![0.0; n];
            b.reconstruct_dense(&fast, &mut back_dense);
            let back = b.from_spectral(&fast).unwrap();
            for (a, c) in back_dense.iter().zip(&back) {
                assert!((a - c).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn operator_matches_stencil() {
        let g = Grid::new(10).unwrap();
        let b = SpectralBasis::laplacian(&g);
        let v = pseudo_random(10, 5);
        let a = b.apply_operator(&v).unwrap();
        let c = g.laplacian_matvec(&v).unwrap();
        for (x, y) in a.iter().zip(&c) {
            assert!((x - y).abs() < 1e-11);
        }
    }

    #[test]
    fn transform_length_mismatch() {
        let b = SpectralBasis::laplacian(&Grid::new(4).unwrap());
        assert!(b.to_spectral(&[1.0; 5]).is_err());
        assert!(b.from_spectral(&[1.0; 3]).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(n in 2usize..=128, seed in any::<u64>()) {
            let b = SpectralBasis::laplacian(&Grid::new(n).unwrap());
            let v = pseudo_random(n, seed);
            let c = b.to_spectral(&v).unwrap();
            let back = b.from_spectral(&c.coeffs).unwrap();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let err = v.iter().zip(&back).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt();
            prop_assert!(err <= 1e-10 * norm.max(1e-300));
            // dense-product oracle for the coefficients
            for i in 0..n {
                let dot: f64 = b.vector(i).iter().zip(&v).map(|(a, c)| a * c).sum();
                prop_assert!((dot - c.coeffs[i]).abs() <= 1e-10 * norm.max(1.0));
            }
        }
    }
}
