//! Consistency of the jump generator with the SDE generator on quadratic
//! test functions.
//!
//! For `f(v) = vᵀAv + bᵀv` the SDE generator is
//! `(L v + F(v))·∇f + (σ²/2dx) tr D²f` with `∇f = 2Av + b`, `D²f = 2A`.

use crate::error::{check_len, Error, Result};
use crate::kernel::rates::academic_rates;
use crate::kernel::{JumpKernel, Variant, DEFAULT_EXPONENT_CAP};
use crate::problem::Semidiscretization;
use crate::rng::RngStream;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticTestFunction {
    n: usize,
    /// Row-major symmetric matrix.
    a: Vec<f64>,
    b: Vec<f64>,
}

impl QuadraticTestFunction {
    /// `a` is symmetrized as `(A + Aᵀ)/2`.
    pub fn new(n: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        check_len(n * n, a.len())?;
        check_len(n, b.len())?;
        let mut sym = a.clone();
        for i in 0..n {
            for j in 0..n {
                sym[i * n + j] = 0.5 * (a[i * n + j] + a[j * n + i]);
            }
        }
        Ok(Self { n, a: sym, b })
    }

    pub fn linear(b: Vec<f64>) -> Self {
        let n = b.len();
        Self {
            n,
            a: vec![0.0; n * n],
            b,
        }
    }

    /// `‖v‖²`.
    pub fn squared_norm(n: usize) -> Self {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 1.0;
        }
        Self {
            n,
            a,
            b: vec![0.0; n],
        }
    }

    /// Entries of `A` and `b` uniform on `[−1, 1]`.
    pub fn random(n: usize, rng: &mut RngStream) -> Self {
        let a: Vec<f64> = (0..n * n).map(|_| 2.0 * rng.uniform() - 1.0).collect();
        let b: Vec<f64> = (0..n).map(|_| 2.0 * rng.uniform() - 1.0).collect();
        Self::new(n, a, b).expect("sizes match")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn value(&self, v: &[f64]) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            let row = &self.a[i * n..(i + 1) * n];
            let av: f64 = row.iter().zip(v).map(|(x, y)| x * y).sum();
            acc += v[i] * av + self.b[i] * v[i];
        }
        acc
    }

    /// `∇f(v) = 2Av + b`.
    pub fn gradient(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let row = &self.a[i * n..(i + 1) * n];
                2.0 * row.iter().zip(v).map(|(x, y)| x * y).sum::<f64>() + self.b[i]
            })
            .collect()
    }

    /// `tr D²f = 2 tr A`.
    pub fn hessian_trace(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.a(i, i)).sum::<f64>()
    }

    /// `eᵀ D²f e = 2 eᵀAe`.
    pub fn hessian_form(&self, e: &[f64]) -> f64 {
        let g = self.gradient(e);
        // ∇f(e) − b = 2Ae
        e.iter().zip(g.iter().zip(&self.b)).map(|(x, (g, b))| x * (g - b)).sum()
    }
}

/// `(SDE generator) f (v)`.
pub fn sde_generator(f: &QuadraticTestFunction, v: &[f64], problem: &Semidiscretization) -> Result<f64> {
    check_len(problem.n(), f.n())?;
    let drift = problem.drift(v)?;
    let grad = f.gradient(v);
    let transport: f64 = drift.iter().zip(&grad).map(|(d, g)| d * g).sum();
    let diffusion = problem.sigma().powi(2) / (2.0 * problem.dx()) * f.hessian_trace();
    Ok(transport + diffusion)
}

/// `(Q f)(v) = Σ_i J_i⁺ [f(v + h e_i) − f(v)] + J_i⁻ [f(v − h e_i) − f(v)]`
/// with academic rates, each difference evaluated in closed form.
pub fn jump_generator(
    f: &QuadraticTestFunction,
    v: &[f64],
    problem: &Arc<Semidiscretization>,
    h: f64,
) -> Result<f64> {
    check_len(problem.n(), f.n())?;
    let kernel = JumpKernel::new(problem.clone(), Variant::Academic, h)?;
    let state = kernel.init_state(v.to_vec(), 0.0)?;
    let rates = academic_rates(&state, problem, h, DEFAULT_EXPONENT_CAP)?;
    let grad = f.gradient(v);
    let mut acc = 0.0;
    for i in 0..problem.n() {
        let e = problem.basis.vector(i);
        let slope: f64 = grad.iter().zip(e).map(|(g, x)| g * x).sum();
        let curv = 0.5 * f.hessian_form(e);
        // f(v ± h e) − f(v) = ±h ∇f·e + h² eᵀAe
        let up = h * slope + h * h * curv;
        let down = -h * slope + h * h * curv;
        acc += rates.forward[i] * up + rates.backward[i] * down;
    }
    Ok(acc)
}

/// `|Q f(v) − (SDE generator) f(v)|`.
pub fn generator_residual(
    f: &QuadraticTestFunction,
    v: &[f64],
    problem: &Arc<Semidiscretization>,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("h must be positive, got {h}")));
    }
    let q = jump_generator(f, v, problem, h)?;
    let g = sde_generator(f, v, problem)?;
    Ok((q - g).abs())
}
