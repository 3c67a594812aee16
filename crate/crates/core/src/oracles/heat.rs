//! Continuum statistics of the stochastic heat equation
//! `du = (∂ₓ²u − λu) dt + σ dW` on the circle of length 2π.
//!
//! With the orthonormal Fourier basis `1/√(2π)`, `cos kx/√π`, `sin kx/√π`
//! and `μ_k = k² + λ`, every mode is an independent OU process.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::FourierCoeffs;

/// Default number of series terms.
pub const DEFAULT_TRUNCATION: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatParams {
    pub lambda: f64,
    pub sigma: f64,
    /// Number of nonconstant modes kept.
    pub truncation: usize,
}

impl HeatParams {
    pub fn new(lambda: f64, sigma: f64) -> Result<Self> {
        let p = Self {
            lambda,
            sigma,
            truncation: DEFAULT_TRUNCATION,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_truncation(mut self, k: usize) -> Self {
        self.truncation = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be non-negative, got {}",
                self.lambda
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if self.truncation == 0 {
            return Err(Error::InvalidArgument("truncation must be at least 1".into()));
        }
        Ok(())
    }

    /// `μ_k = k² + λ`.
    pub fn mu(&self, k: usize) -> f64 {
        let k = k as f64;
        k * k + self.lambda
    }

    /// Bound on the dropped tail of the variance series, `σ²/(πK)`.
    pub fn tail_bound(&self) -> f64 {
        self.sigma * self.sigma / (PI * self.truncation as f64)
    }
}

/// `(1 − e^{−2μt})/(2μ)`, equal to `t` at `μ = 0`.
fn ou_variance_factor(mu: f64, t: f64) -> f64 {
    if mu == 0.0 {
        t
    } else {
        -(-2.0 * mu * t).exp_m1() / (2.0 * mu)
    }
}

/// `∫₀ᵀ (1 − e^{−2μt})/(2μ) dt = T/(2μ) − (1 − e^{−2μT})/(4μ²)`, or `T²/2` at `μ = 0`.
fn ou_variance_integral(mu: f64, t: f64) -> f64 {
    if mu == 0.0 {
        return 0.5 * t * t;
    }
    let x = 2.0 * mu * t;
    if x < 1e-4 {
        // series of (x − 1 + e^{−x})/(4μ²) to avoid cancellation
        let s = x * x / 2.0 - x * x * x / 6.0 + x * x * x * x / 24.0;
        return s / (4.0 * mu * mu);
    }
    t / (2.0 * mu) + (-x).exp_m1() / (4.0 * mu * mu)
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("time must be non-negative, got {t}")))
    }
}

/// `E u(t, x)` for the initial profile with coefficients `ic`.
pub fn heat_mean(t: f64, x: f64, ic: &FourierCoeffs, params: &HeatParams) -> Result<f64> {
    check_time(t)?;
    params.validate()?;
    let mut acc = ic.c0 * (-params.mu(0) * t).exp() / (2.0 * PI).sqrt();
    let kmax = ic.cos.len().max(ic.sin.len()).min(params.truncation);
    let inv = 1.0 / PI.sqrt();
    for k in 1..=kmax {
        let a = ic.cos.get(k - 1).copied().unwrap_or(0.0);
        let b = ic.sin.get(k - 1).copied().unwrap_or(0.0);
        let kx = k as f64 * x;
        acc += inv * (-params.mu(k) * t).exp() * (a * kx.cos() + b * kx.sin());
    }
    Ok(acc)
}

/// `Cov(u(t, x), u(t, y))`. For `λ = 0` the constant mode contributes the
/// Brownian term `σ²t/(2π)`.
pub fn heat_covariance(t: f64, x: f64, y: f64, params: &HeatParams) -> Result<f64> {
    check_time(t)?;
    params.validate()?;
    Ok(covariance_series(x - y, params, |mu| ou_variance_factor(mu, t)))
}

/// `∫₀ᵀ Cov(u(t, x), u(t, y)) dt`, integrated term by term.
pub fn heat_covariance_time_integral(t: f64, x: f64, y: f64, params: &HeatParams) -> Result<f64> {
    check_time(t)?;
    params.validate()?;
    Ok(covariance_series(x - y, params, |mu| ou_variance_integral(mu, t)))
}

fn covariance_series(d: f64, params: &HeatParams, weight: impl Fn(f64) -> f64) -> f64 {
    let s2 = params.sigma * params.sigma;
    let mut tail = 0.0;
    // smallest terms first
    for k in (1..=params.truncation).rev() {
        tail += (k as f64 * d).cos() * weight(params.mu(k));
    }
    s2 * (weight(params.mu(0)) / (2.0 * PI) + tail / PI)
}
