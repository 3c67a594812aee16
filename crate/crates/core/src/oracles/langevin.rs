//! Stationary density of the gradient-type semi-discrete systems.
//!
//! For `dv = (L v − q v³) dt + (σ/√dx) dW` with `L` symmetric negative
//! semi-definite, the invariant density is
//!
//! ```text
//! log π(v) = −(2dx/σ²) (q/4 Σ v_i⁴ − ½ vᵀ L v) + const
//! ```
//!
//! `q = 1` is the overdamped Langevin model, `q = 0` the (Gaussian) heat model.

use crate::basis::SpectralBasis;
use crate::error::{check_len, Error, Result};
use crate::grid::Grid;
use crate::model::{ModelKind, ModelSpec};
use crate::problem::Semidiscretization;

/// Sign/scale convention of the log-density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnergyConvention {
    /// `−(2dx/σ²)(¼Σv⁴ − ½vᵀLv)`: invariant for the semi-discrete SDE.
    #[default]
    Stationary,
    /// `−dx(¼Σv⁴ + ½vᵀLv)`, the literal shorthand. Not normalizable when
    /// `L` is negative semi-definite; kept for comparison only.
    Literal,
}

#[derive(Debug, Clone)]
pub struct LangevinTarget {
    grid: Grid,
    basis: SpectralBasis,
    sigma: f64,
    /// `2dx/σ²`
    beta: f64,
    quartic: f64,
    convention: EnergyConvention,
}

impl LangevinTarget {
    /// Target for a Langevin (quartic) or Heat (Gaussian) semi-discretization.
    pub fn for_problem(problem: &Semidiscretization) -> Result<Self> {
        let quartic = match problem.model.kind {
            ModelKind::Langevin => 1.0,
            ModelKind::Heat => 0.0,
            other => {
                return Err(Error::UnsupportedModel(format!(
                    "{other} has no closed-form stationary density"
                )))
            }
        };
        Ok(Self::new(
            problem.grid,
            problem.basis.clone(),
            problem.model.sigma,
            quartic,
        ))
    }

    pub fn new(grid: Grid, basis: SpectralBasis, sigma: f64, quartic: f64) -> Self {
        Self {
            beta: 2.0 * grid.dx() / (sigma * sigma),
            grid,
            basis,
            sigma,
            quartic,
            convention: EnergyConvention::Stationary,
        }
    }

    /// Scalar surrogate of the Langevin model: one cell of width 2π, where
    /// the periodic Laplacian vanishes and `log π(u) = −(π/σ²) u⁴`.
    pub fn scalar_surrogate(sigma: f64) -> Self {
        let grid = Grid::single_cell();
        let model = ModelSpec::langevin(sigma);
        let basis = SpectralBasis::for_model(&grid, &model);
        Self::new(grid, basis, sigma, 1.0)
    }

    pub fn with_convention(mut self, convention: EnergyConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn basis(&self) -> &SpectralBasis {
        &self.basis
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn quartic(&self) -> f64 {
        self.quartic
    }

    pub fn convention(&self) -> EnergyConvention {
        self.convention
    }

    /// `(quartic/4)·Σv⁴` and `vᵀLv`.
    fn energies(&self, v: &[f64], vhat: &[f64]) -> (f64, f64) {
        let quartic = 0.25 * self.quartic * v.iter().map(|x| (x * x) * (x * x)).sum::<f64>();
        let quad = vhat
            .iter()
            .zip(self.basis.eigenvalues())
            .map(|(c, mu)| mu * c * c)
            .sum::<f64>();
        (quartic, quad)
    }

    fn combine(&self, quartic: f64, quad: f64) -> f64 {
        match self.convention {
            EnergyConvention::Stationary => -self.beta * (quartic - 0.5 * quad),
            EnergyConvention::Literal => -self.grid.dx() * (quartic + 0.5 * quad),
        }
    }

    /// Unnormalized log-density.
    pub fn log_density(&self, v: &[f64]) -> Result<f64> {
        check_len(self.n(), v.len())?;
        let vhat = self.basis.to_spectral(v)?.coeffs;
        let (q, l) = self.energies(v, &vhat);
        Ok(self.combine(q, l))
    }

    /// `log π(v + step·e_mode) − log π(v)` from cached spectral coefficients,
    /// in `O(n)`.
    pub fn log_ratio(&self, v: &[f64], vhat: &[f64], mode: usize, step: f64) -> f64 {
        let e = self.basis.vector(mode);
        let mut dq = 0.0;
        if self.quartic != 0.0 {
            for (&x, &ej) in v.iter().zip(e) {
                let d = step * ej;
                // (x + d)⁴ − x⁴ without cancellation
                dq += d * (4.0 * x * x * x + d * (6.0 * x * x + d * (4.0 * x + d)));
            }
            dq *= 0.25 * self.quartic;
        }
        let mu = self.basis.eigenvalue(mode);
        let dl = mu * step * (2.0 * vhat[mode] + step);
        self.combine(dq, dl)
    }

    /// `∇ log π(v)`.
    pub fn grad_log_density(&self, v: &[f64]) -> Result<Vec<f64>> {
        let lv = self.basis.apply_operator(v)?;
        Ok(v.iter()
            .zip(lv)
            .map(|(&x, l)| match self.convention {
                EnergyConvention::Stationary => -self.beta * (self.quartic * x * x * x - l),
                EnergyConvention::Literal => -self.grid.dx() * (self.quartic * x * x * x + l),
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn target(n: usize, sigma: f64) -> LangevinTarget {
        let p = Semidiscretization::new(n, ModelSpec::langevin(sigma)).unwrap();
        LangevinTarget::for_problem(&p).unwrap()
    }

    #[test]
    fn zero_is_the_mode() {
        let t = target(8, 1.0);
        assert_eq!(t.log_density(&[0.0; 8]).unwrap(), 0.0);
        assert!(t.grad_log_density(&[0.0; 8]).unwrap().iter().all(|g| *g == 0.0));
        assert!(t.log_density(&[0.1; 8]).unwrap() < 0.0);
    }

    #[test]
    fn scalar_surrogate_is_quartic() {
        let t = LangevinTarget::scalar_surrogate(1.0);
        for u in [-1.3, 0.2, 0.9] {
            assert_relative_eq!(
                t.log_density(&[u]).unwrap(),
                -std::f64::consts::PI * u.powi(4),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn unsupported_for_burgers() {
        let p = Semidiscretization::new(8, ModelSpec::burgers(1.0, 1.0, Default::default())).unwrap();
        assert!(matches!(
            LangevinTarget::for_problem(&p),
            Err(Error::UnsupportedModel(_))
        ));
    }

    proptest! {
        #[test]
        fn even_potential(v in proptest::collection::vec(-2.0f64..2.0, 10)) {
            let t = target(10, 0.7);
            let neg: Vec<f64> = v.iter().map(|x| -x).collect();
            let a = t.log_density(&v).unwrap();
            let b = t.log_density(&neg).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }

        #[test]
        fn drift_ascends_log_density(v in proptest::collection::vec(-3.0f64..3.0, 12), sigma in 0.3f64..3.0) {
            let p = Semidiscretization::new(12, ModelSpec::langevin(sigma)).unwrap();
            let t = LangevinTarget::for_problem(&p).unwrap();
            let drift = p.drift(&v).unwrap();
            let g = t.grad_log_density(&v).unwrap();
            // drift = (σ²/2dx) ∇ log π
            let k = sigma * sigma / (2.0 * p.dx());
            for (d, gi) in drift.iter().zip(&g) {
                prop_assert!((d - k * gi).abs() <= 1e-9 * (1.0 + d.abs()));
            }
            let ascent: f64 = drift.iter().zip(&g).map(|(a, b)| a * b).sum();
            prop_assert!(ascent >= 0.0);
        }

        #[test]
        fn log_ratio_matches_direct(v in proptest::collection::vec(-2.0f64..2.0, 9), mode in 0usize..9, step in -1.0f64..1.0) {
            let t = target(9, 1.0);
            let vhat = t.basis().to_spectral(&v).unwrap().coeffs;
            let moved: Vec<f64> = v.iter().zip(t.basis().vector(mode)).map(|(x, e)| x + step * e).collect();
            let direct = t.log_density(&moved).unwrap() - t.log_density(&v).unwrap();
            let fast = t.log_ratio(&v, &vhat, mode, step);
            prop_assert!((direct - fast).abs() <= 1e-10 * (1.0 + direct.abs()));
        }
    }
}
