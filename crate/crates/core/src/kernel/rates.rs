//! Forward/backward jump rates `J_i^±`.
//!
//! All variants share the form `J_i^± = c · exp(a_i^±)`:
//!
//! | variant          | `c`            | `a_i^±`                                  |
//! |------------------|----------------|------------------------------------------|
//! | academic         | `σ²/(2h²dx)`   | `±(μ_i v̂_i + F̂_i)·h·dx/σ²` (Euclidean)    |
//! | fast             | `σ²/(2h²)`     | `±(μ_i v̂_i + F̂_i)·h/σ²` (L²-normalized)  |
//! | detailed balance | `σ²/(2h²dx)`   | `½[log π(v ± h e_i) − log π(v)]`          |
//!
//! Exponents beyond the configured cap are reported as a stiffness error
//! instead of overflowing.

use crate::error::{Error, Result};
use crate::kernel::JumpState;
use crate::oracles::langevin::LangevinTarget;
use crate::problem::Semidiscretization;

/// Default bound on `|a_i^±|`.
pub const DEFAULT_EXPONENT_CAP: f64 = 700.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub forward: Vec<f64>,
    pub backward: Vec<f64>,
    pub total: f64,
}

impl RateTable {
    pub fn zeros(n: usize) -> Self {
        Self {
            forward: vec![0.0; n],
            backward: vec![0.0; n],
            total: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.forward.len()
    }

    pub(crate) fn resum(&mut self) -> Result<()> {
        let total: f64 = self.forward.iter().zip(&self.backward).map(|(f, b)| f + b).sum();
        if !total.is_finite() {
            let (mode, exponent) = self
                .forward
                .iter()
                .zip(&self.backward)
                .enumerate()
                .map(|(i, (f, b))| (i, f.max(*b).ln()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap_or((0, f64::INFINITY));
            return Err(Error::Stiffness {
                mode,
                exponent,
                cap: f64::MAX.ln(),
            });
        }
        self.total = total;
        Ok(())
    }

    /// Mean holding time `1/J`.
    pub fn mean_holding(&self) -> f64 {
        1.0 / self.total
    }
}

/// Rates of one mode from its drift coefficient: `c·e^{±drift·scale}`.
#[inline]
pub(crate) fn set_drift_mode(
    table: &mut RateTable,
    mode: usize,
    drift: f64,
    prefactor: f64,
    scale: f64,
    cap: f64,
) -> Result<()> {
    let a = drift * scale;
    if !(a.abs() <= cap) {
        return Err(Error::Stiffness {
            mode,
            exponent: a,
            cap,
        });
    }
    let e = a.exp();
    table.forward[mode] = prefactor * e;
    table.backward[mode] = prefactor / e;
    Ok(())
}

#[inline]
pub(crate) fn set_exponent_pair(
    table: &mut RateTable,
    mode: usize,
    forward: f64,
    backward: f64,
    prefactor: f64,
    cap: f64,
) -> Result<()> {
    for a in [forward, backward] {
        if a.is_nan() {
            return Err(Error::NonFiniteLogDensity(a));
        }
        if !(a.abs() <= cap) {
            return Err(Error::Stiffness {
                mode,
                exponent: a,
                cap,
            });
        }
    }
    table.forward[mode] = prefactor * forward.exp();
    table.backward[mode] = prefactor * backward.exp();
    Ok(())
}

pub(crate) fn fill_drift_rates(
    table: &mut RateTable,
    eigenvalues: &[f64],
    vhat: &[f64],
    fhat: &[f64],
    prefactor: f64,
    scale: f64,
    cap: f64,
) -> Result<()> {
    for (i, ((mu, v), f)) in eigenvalues.iter().zip(vhat).zip(fhat).enumerate() {
        set_drift_mode(table, i, mu * v + f, prefactor, scale, cap)?;
    }
    table.resum()
}

pub(crate) fn fill_detailed_balance_rates(
    table: &mut RateTable,
    target: &LangevinTarget,
    v: &[f64],
    vhat: &[f64],
    h: f64,
    prefactor: f64,
    cap: f64,
) -> Result<()> {
    for i in 0..v.len() {
        let up = 0.5 * target.log_ratio(v, vhat, i, h);
        let down = 0.5 * target.log_ratio(v, vhat, i, -h);
        set_exponent_pair(table, i, up, down, prefactor, cap)?;
    }
    table.resum()
}

/// Academic-variant rates from the state's Euclidean caches `⟨v,e_i⟩`, `⟨F_n(v),e_i⟩`.
pub fn academic_rates(
    state: &JumpState,
    problem: &Semidiscretization,
    h: f64,
    cap: f64,
) -> Result<RateTable> {
    let s2 = problem.sigma().powi(2);
    let dx = problem.dx();
    let mut t = RateTable::zeros(problem.n());
    fill_drift_rates(
        &mut t,
        problem.basis.eigenvalues(),
        &state.vhat,
        &state.fhat,
        s2 / (2.0 * h * h * dx),
        h * dx / s2,
        cap,
    )?;
    Ok(t)
}

/// Fast-variant rates from the state's L²-normalized spectral caches.
pub fn fast_rates(
    state: &JumpState,
    problem: &Semidiscretization,
    h: f64,
    cap: f64,
) -> Result<RateTable> {
    let s2 = problem.sigma().powi(2);
    let mut t = RateTable::zeros(problem.n());
    fill_drift_rates(
        &mut t,
        problem.basis.eigenvalues(),
        &state.vhat,
        &state.fhat,
        s2 / (2.0 * h * h),
        h / s2,
        cap,
    )?;
    Ok(t)
}

/// Reversible rates `J_i^± = (σ²/(2h²dx))·exp(½[log π(v ± h e_i) − log π(v)])`.
pub fn detailed_balance_rates(
    state: &JumpState,
    target: &LangevinTarget,
    h: f64,
    cap: f64,
) -> Result<RateTable> {
    let s2 = target.sigma().powi(2);
    let dx = target.grid().dx();
    let mut t = RateTable::zeros(target.n());
    fill_detailed_balance_rates(
        &mut t,
        target,
        &state.v,
        &state.vhat,
        h,
        s2 / (2.0 * h * h * dx),
        cap,
    )?;
    Ok(t)
}
