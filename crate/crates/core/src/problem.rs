use crate::basis::SpectralBasis;
use crate::error::Result;
use crate::grid::Grid;
use crate::model::ModelSpec;

/// A model together with its grid and the eigenbasis of its linear drift.
#[derive(Debug, Clone)]
pub struct Semidiscretization {
    pub grid: Grid,
    pub basis: SpectralBasis,
    pub model: ModelSpec,
}

impl Semidiscretization {
    pub fn new(n: usize, model: ModelSpec) -> Result<Self> {
        Self::on_grid(Grid::new(n)?, model)
    }

    pub fn on_grid(grid: Grid, model: ModelSpec) -> Result<Self> {
        model.validate()?;
        let basis = SpectralBasis::for_model(&grid, &model);
        Ok(Self { grid, basis, model })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.grid.n()
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.grid.dx()
    }

    #[inline]
    pub fn sigma(&self) -> f64 {
        self.model.sigma
    }

    pub fn initial_state(&self) -> Vec<f64> {
        self.model.initial_state(&self.grid)
    }

    /// Full drift `L_n v + F_n(v)` of the semi-discrete SDE.
    pub fn drift(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut d = self.basis.apply_operator(v)?;
        let f = self.model.drift_nonlinear(&self.grid, v)?;
        for (a, b) in d.iter_mut().zip(f) {
            *a += b;
        }
        Ok(d)
    }
}
