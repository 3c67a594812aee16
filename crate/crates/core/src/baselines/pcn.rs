//! Preconditioned Crank–Nicolson Metropolis sampler for the Langevin target.
//!
//! The reference Gaussian is diagonal in the eigenbasis with
//! `C_ii = σ²/(−2μ_i dx)`, the stationary covariance of the linear part.
//! Modes with `μ_i = 0` get the mass `−ε` in the reference only; the
//! mismatch is carried by `Φ(v) = −log π(v) − ½ Σ v̂_i²/C_ii`, so the chain
//! targets `π` exactly.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_len, Error, Result};
use crate::estimators::moments::{MomentAccumulator, TimeAverage};
use crate::oracles::langevin::LangevinTarget;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcnConfig {
    /// Autoregression parameter `ρ ∈ (0, 1)`.
    pub rho: f64,
    /// Reference mass for zero eigenvalues.
    pub mass_epsilon: f64,
    /// Number of batches for the batch-means standard error.
    pub batches: usize,
}

impl Default for PcnConfig {
    fn default() -> Self {
        Self {
            rho: 0.9,
            mass_epsilon: 1e-2,
            batches: 50,
        }
    }
}

/// Default burn-in as a fraction of the chain length.
pub const DEFAULT_BURN_IN_FRACTION: f64 = 0.2;

#[derive(Debug, Clone)]
pub struct PcnState {
    pub v: Vec<f64>,
    pub vhat: Vec<f64>,
    phi: f64,
}

#[derive(Debug, Clone)]
pub struct PcnSampler {
    target: LangevinTarget,
    config: PcnConfig,
    reference_variance: Vec<f64>,
    reference_sd: Vec<f64>,
}

impl PcnSampler {
    pub fn new(target: LangevinTarget, config: PcnConfig) -> Result<Self> {
        if !(config.rho > 0.0 && config.rho < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "rho must lie in (0, 1), got {}",
                config.rho
            )));
        }
        if !(config.mass_epsilon > 0.0) {
            return Err(Error::InvalidArgument("mass epsilon must be positive".into()));
        }
        let s2 = target.sigma().powi(2);
        let dx = target.grid().dx();
        let reference_variance: Vec<f64> = target
            .basis()
            .eigenvalues()
            .iter()
            .map(|&mu| {
                let m = if mu < 0.0 { mu } else { -config.mass_epsilon };
                s2 / (-2.0 * m * dx)
            })
            .collect();
        let reference_sd = reference_variance.iter().map(|c| c.sqrt()).collect();
        Ok(Self {
            target,
            config,
            reference_variance,
            reference_sd,
        })
    }

    pub fn target(&self) -> &LangevinTarget {
        &self.target
    }

    pub fn config(&self) -> &PcnConfig {
        &self.config
    }

    /// `C_ii`.
    pub fn reference_variance(&self) -> &[f64] {
        &self.reference_variance
    }

    /// `Φ(v)` given `v` and its coefficients.
    pub fn potential(&self, v: &[f64], vhat: &[f64]) -> Result<f64> {
        let lp = self.target.log_density(v)?;
        if !lp.is_finite() {
            return Err(Error::NonFiniteLogDensity(lp));
        }
        let gauss: f64 = vhat
            .iter()
            .zip(&self.reference_variance)
            .map(|(c, var)| c * c / var)
            .sum();
        Ok(-lp - 0.5 * gauss)
    }

    pub fn init(&self, v: Vec<f64>) -> Result<PcnState> {
        check_len(self.target.n(), v.len())?;
        let vhat = self.target.basis().to_spectral(&v)?.coeffs;
        let phi = self.potential(&v, &vhat)?;
        Ok(PcnState { v, vhat, phi })
    }

    /// One proposal/accept step; returns whether the move was accepted.
    pub fn pcn_step(&self, state: &mut PcnState, rng: &mut RngStream) -> Result<bool> {
        let rho = self.config.rho;
        let k = (1.0 - rho * rho).sqrt();
        let prop_hat: Vec<f64> = state
            .vhat
            .iter()
            .zip(&self.reference_sd)
            .map(|(c, sd)| {
                let z: f64 = StandardNormal.sample(rng);
                rho * c + k * sd * z
            })
            .collect();
        let prop = self.target.basis().from_spectral(&prop_hat)?;
        let phi = self.potential(&prop, &prop_hat)?;
        let log_alpha = state.phi - phi;
        let accept = log_alpha >= 0.0 || rng.uniform_open().ln() < log_alpha;
        if accept {
            state.v = prop;
            state.vhat = prop_hat;
            state.phi = phi;
        }
        Ok(accept)
    }
}

/// Post-burn-in statistics of one chain over the components `v_j` and `v_j²`.
#[derive(Debug, Clone)]
pub struct ChainSummary {
    pub steps: u64,
    pub burn_in: u64,
    pub acceptance_rate: f64,
    /// Per-sample moments of `(v, v²)`.
    pub samples: MomentAccumulator,
    /// Batch means of `(v, v²)`.
    pub averages: TimeAverage,
}

impl ChainSummary {
    fn n(&self) -> usize {
        self.samples.dim() / 2
    }

    pub fn mean(&self) -> Vec<f64> {
        self.averages.mean()[..self.n()].to_vec()
    }

    pub fn mean_stderr(&self) -> Vec<f64> {
        self.averages.stderr()[..self.n()].to_vec()
    }

    pub fn second_moment(&self) -> Vec<f64> {
        self.averages.mean()[self.n()..].to_vec()
    }

    pub fn second_moment_stderr(&self) -> Vec<f64> {
        self.averages.stderr()[self.n()..].to_vec()
    }
}

/// Run `steps` pCN steps from `initial`, discarding the first `burn_in`.
pub fn run_chain(
    sampler: &PcnSampler,
    initial: Vec<f64>,
    steps: u64,
    burn_in: u64,
    rng: &mut RngStream,
) -> Result<ChainSummary> {
    if steps <= burn_in {
        return Err(Error::InvalidArgument(format!(
            "chain length {steps} must exceed burn-in {burn_in}"
        )));
    }
    let n = sampler.target.n();
    let mut state = sampler.init(initial)?;
    let mut samples = MomentAccumulator::new(2 * n);
    let mut averages = TimeAverage::new(2 * n, burn_in as f64, steps as f64, sampler.config.batches)?;
    let mut accepted = 0u64;
    let mut obs = vec![0.0; 2 * n];
    for k in 0..steps {
        if sampler.pcn_step(&mut state, rng)? {
            accepted += 1;
        }
        if k >= burn_in {
            for (j, &x) in state.v.iter().enumerate() {
                obs[j] = x;
                obs[n + j] = x * x;
            }
            samples.push(&obs);
            averages.add(&obs, k as f64, (k + 1) as f64);
        }
    }
    Ok(ChainSummary {
        steps,
        burn_in,
        acceptance_rate: accepted as f64 / steps as f64,
        samples,
        averages,
    })
}
