//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use spectrwm::{JumpKernel, JumpState, KernelOptions, ModelSpec, Nonlinearity, Semidiscretization, Variant};

pub fn kernel(model: ModelSpec, n: usize, variant: Variant, h: f64) -> JumpKernel {
    let problem = Arc::new(Semidiscretization::new(n, model).expect("valid model"));
    JumpKernel::with_options(problem, variant, h, KernelOptions::default()).expect("valid kernel")
}

pub fn heat(n: usize, variant: Variant, h: f64) -> JumpKernel {
    kernel(ModelSpec::heat(1.0, 1.0), n, variant, h)
}

pub fn burgers(n: usize, h: f64) -> JumpKernel {
    kernel(ModelSpec::burgers(1.0, 1.0, Nonlinearity::Central), n, Variant::Fast, h)
}

pub fn langevin(n: usize) -> JumpKernel {
    let dx = std::f64::consts::TAU / n as f64;
    kernel(ModelSpec::langevin(1.0), n, Variant::DetailedBalance, dx.sqrt())
}

/// State at the model's initial condition.
pub fn start(kernel: &JumpKernel) -> JumpState {
    kernel.initial_state().expect("finite initial rates")
}
