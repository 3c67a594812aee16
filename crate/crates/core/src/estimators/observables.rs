//! Vector-valued functions of the grid state.

/// `v ↦ out ∈ ℝ^dim`.
pub trait Observable: Sync {
    fn dim(&self) -> usize;
    fn evaluate(&self, v: &[f64], out: &mut [f64]);
}

/// The constant `c` (dimension 1).
#[derive(Debug, Clone, Copy)]
pub struct Constant(pub f64);

impl Observable for Constant {
    fn dim(&self) -> usize {
        1
    }

    fn evaluate(&self, _v: &[f64], out: &mut [f64]) {
        out[0] = self.0;
    }
}

/// `v_j` for every grid point.
#[derive(Debug, Clone, Copy)]
pub struct Components(pub usize);

impl Observable for Components {
    fn dim(&self) -> usize {
        self.0
    }

    fn evaluate(&self, v: &[f64], out: &mut [f64]) {
        out.copy_from_slice(v);
    }
}

/// `v_j²` for every grid point.
#[derive(Debug, Clone, Copy)]
pub struct SquaredComponents(pub usize);

impl Observable for SquaredComponents {
    fn dim(&self) -> usize {
        self.0
    }

    fn evaluate(&self, v: &[f64], out: &mut [f64]) {
        for (o, x) in out.iter_mut().zip(v) {
            *o = x * x;
        }
    }
}

/// `(1/n) Σ_j v_j²` (dimension 1).
#[derive(Debug, Clone, Copy)]
pub struct MeanSquare;

impl Observable for MeanSquare {
    fn dim(&self) -> usize {
        1
    }

    fn evaluate(&self, v: &[f64], out: &mut [f64]) {
        out[0] = v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64;
    }
}

/// `(v_j, v_j²)` stacked.
#[derive(Debug, Clone, Copy)]
pub struct FirstAndSecond(pub usize);

impl Observable for FirstAndSecond {
    fn dim(&self) -> usize {
        2 * self.0
    }

    fn evaluate(&self, v: &[f64], out: &mut [f64]) {
        let n = self.0;
        for (j, &x) in v.iter().enumerate() {
            out[j] = x;
            out[n + j] = x * x;
        }
    }
}

/// A closure with a declared dimension.
pub struct FnObservable<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64]) + Sync> FnObservable<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64], &mut [f64]) + Sync> Observable for FnObservable<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, v: &[f64], out: &mut [f64]) {
        (self.f)(v, out)
    }
}
