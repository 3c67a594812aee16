//! Mean holding time at the zero state.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernel::sampling::sample_holding;
use crate::kernel::{JumpKernel, Variant};
use crate::model::ModelSpec;
use crate::problem::Semidiscretization;
use crate::rng::{derive_seed, RngStream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoldingRow {
    pub variant: Variant,
    pub h: f64,
    pub n: usize,
    pub empirical_mean_dt: f64,
    /// `h²dx/(nσ²)` (academic, detailed balance) or `h²/(nσ²)` (fast).
    pub analytic_mean_dt: f64,
    pub stderr: f64,
}

/// Closed-form `1/J(0)`.
pub fn analytic_mean_holding(variant: Variant, h: f64, n: usize, sigma: f64) -> f64 {
    let base = h * h / (n as f64 * sigma * sigma);
    match variant {
        Variant::Fast => base,
        Variant::Academic | Variant::DetailedBalance => base * std::f64::consts::TAU / n as f64,
    }
}

/// Draw `samples` holding times at `v = 0` for every `(h, n)`.
pub fn holding_time_study(
    model: &ModelSpec,
    variant: Variant,
    h_list: &[f64],
    n_list: &[usize],
    samples: usize,
    seed: u64,
) -> Result<Vec<HoldingRow>> {
    if samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    let mut rows = Vec::new();
    for (a, &n) in n_list.iter().enumerate() {
        let problem = Arc::new(Semidiscretization::new(n, model.clone())?);
        for (b, &h) in h_list.iter().enumerate() {
            let kernel = JumpKernel::new(problem.clone(), variant, h)?;
            let state = kernel.init_state(vec![0.0; n], 0.0)?;
            let total = state.rates().total;
            let mut rng = RngStream::new(derive_seed(seed, (a * h_list.len() + b) as u64), 0);
            let (mut sum, mut sum2) = (0.0, 0.0);
            for _ in 0..samples {
                let dt = sample_holding(total, &mut rng)?;
                sum += dt;
                sum2 += dt * dt;
            }
            let m = samples as f64;
            let mean = sum / m;
            let var = ((sum2 - m * mean * mean) / (m - 1.0)).max(0.0);
            rows.push(HoldingRow {
                variant,
                h,
                n,
                empirical_mean_dt: mean,
                analytic_mean_dt: analytic_mean_holding(variant, h, n, model.sigma),
                stderr: (var / m).sqrt(),
            });
        }
    }
    Ok(rows)
}
