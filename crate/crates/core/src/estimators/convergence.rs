//! Error-versus-h studies and log-log slope fits.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::estimators::observables::Observable;
use crate::estimators::replicas::{estimate_fixed_time, estimate_path_integral};
use crate::kernel::{JumpKernel, KernelOptions, Variant};
use crate::problem::Semidiscretization;
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// `E g(v(T))`.
    FixedTime,
    /// `E ∫₀ᵀ g(v(t)) dt`.
    PathIntegral,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub n: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub oracle: f64,
    pub abs_error: f64,
}

impl ConvergenceRow {
    /// Whether the error is resolved above three standard errors.
    pub fn above_noise_floor(&self) -> bool {
        self.abs_error > 0.0 && self.abs_error >= 3.0 * self.stderr
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// Sorted by `h` descending.
    pub rows: Vec<ConvergenceRow>,
    pub slope: Option<f64>,
    /// Available with three or more fitted rows.
    pub slope_stderr: Option<f64>,
    pub fitted_rows: usize,
}

impl ConvergenceReport {
    /// Fewer than two rows above the noise floor.
    pub fn inconclusive(&self) -> bool {
        self.slope.is_none()
    }

    pub fn from_rows(mut rows: Vec<ConvergenceRow>) -> Self {
        rows.sort_by(|a, b| b.h.total_cmp(&a.h));
        let fit: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.above_noise_floor())
            .map(|r| (r.h.ln(), r.abs_error.ln()))
            .collect();
        let (slope, slope_stderr) = match least_squares(&fit) {
            Some((b, se)) => (Some(b), se),
            None => (None, None),
        };
        Self {
            rows,
            slope,
            slope_stderr,
            fitted_rows: fit.len(),
        }
    }
}

/// Slope of the least-squares line through `points` and its standard error.
pub fn least_squares(points: &[(f64, f64)]) -> Option<(f64, Option<f64>)> {
    let m = points.len();
    if m < 2 {
        return None;
    }
    let mf = m as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / mf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / mf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let b = sxy / sxx;
    let se = (m > 2).then(|| {
        let a = my - b * mx;
        let rss: f64 = points.iter().map(|p| (p.1 - a - b * p.0).powi(2)).sum();
        (rss / (mf - 2.0) / sxx).sqrt()
    });
    Some((b, se))
}

/// Settings of one convergence study.
#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub variant: Variant,
    pub h_list: Vec<f64>,
    pub horizon: f64,
    pub quantity: Quantity,
    pub replicas: usize,
    pub seed: u64,
    pub options: KernelOptions,
}

/// Estimate a scalar observable for every `h` and compare with `oracle`.
pub fn convergence_study(
    problem: &Arc<Semidiscretization>,
    v0: &[f64],
    study: &ConvergenceStudy,
    observable: &dyn Observable,
    oracle: f64,
) -> Result<ConvergenceReport> {
    if study.h_list.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "a convergence study needs at least 3 values of h, got {}",
            study.h_list.len()
        )));
    }
    if observable.dim() != 1 {
        return Err(Error::InvalidArgument(format!(
            "convergence studies take a scalar observable, got dimension {}",
            observable.dim()
        )));
    }
    let mut rows = Vec::with_capacity(study.h_list.len());
    for (i, &h) in study.h_list.iter().enumerate() {
        let kernel = JumpKernel::with_options(problem.clone(), study.variant, h, study.options)?;
        let seed = derive_seed(study.seed, i as u64);
        let est = match study.quantity {
            Quantity::FixedTime => {
                estimate_fixed_time(&kernel, v0, study.horizon, observable, study.replicas, seed)?
            }
            Quantity::PathIntegral => {
                estimate_path_integral(&kernel, v0, study.horizon, observable, study.replicas, seed)?
            }
        };
        rows.push(ConvergenceRow {
            h,
            n: problem.n(),
            estimate: est.mean[0],
            stderr: est.stderr[0],
            oracle,
            abs_error: (est.mean[0] - oracle).abs(),
        });
    }
    Ok(ConvergenceReport::from_rows(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::observables::{Constant, MeanSquare};
    use crate::model::ModelSpec;

    fn row(h: f64, err: f64, se: f64) -> ConvergenceRow {
        ConvergenceRow {
            h,
            n: 16,
            estimate: 1.0 + err,
            stderr: se,
            oracle: 1.0,
            abs_error: err,
        }
    }

    #[test]
    fn exact_power_law() {
        let rows: Vec<_> = [0.025, 0.2, 0.1, 0.05].iter().map(|&h| row(h, 3.0 * h * h, 0.0)).collect();
        let r = ConvergenceReport::from_rows(rows);
        assert_eq!(r.rows[0].h, 0.2);
        assert!((r.slope.unwrap() - 2.0).abs() < 1e-12);
        assert!(r.slope_stderr.unwrap() < 1e-10);
        assert_eq!(r.fitted_rows, 4);
    }

    #[test]
    fn noise_floor_rows_are_dropped() {
        let rows = vec![row(0.2, 0.04, 0.001), row(0.1, 0.01, 0.001), row(0.05, 0.002, 0.001)];
        let r = ConvergenceReport::from_rows(rows);
        assert_eq!(r.fitted_rows, 2);
        assert!((r.slope.unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(r.slope_stderr, None);
        let all_noise = ConvergenceReport::from_rows(vec![row(0.2, 0.001, 0.01), row(0.1, 0.0, 0.0), row(0.05, 0.0, 0.0)]);
        assert!(all_noise.inconclusive());
    }

    #[test]
    fn oracle_equal_to_estimate_is_inconclusive() {
        let p = Arc::new(Semidiscretization::new(8, ModelSpec::heat(1.0, 1.0)).unwrap());
        let study = ConvergenceStudy {
            variant: Variant::Fast,
            h_list: vec![0.4, 0.2, 0.1],
            horizon: 0.2,
            quantity: Quantity::PathIntegral,
            replicas: 10,
            seed: 3,
            options: KernelOptions::default(),
        };
        let r = convergence_study(&p, &[0.0; 8], &study, &Constant(1.0), 0.2).unwrap();
        assert!(r.rows.iter().all(|x| x.abs_error < 1e-15));
        assert!(r.inconclusive());
    }

    #[test]
    fn requires_three_steps_and_scalar_observable() {
        let p = Arc::new(Semidiscretization::new(8, ModelSpec::heat(1.0, 1.0)).unwrap());
        let mut study = ConvergenceStudy {
            variant: Variant::Fast,
            h_list: vec![0.4, 0.2],
            horizon: 0.2,
            quantity: Quantity::FixedTime,
            replicas: 10,
            seed: 3,
            options: KernelOptions::default(),
        };
        assert!(convergence_study(&p, &[0.0; 8], &study, &MeanSquare, 0.0).is_err());
        study.h_list.push(0.1);
        assert!(convergence_study(&p, &[0.0; 8], &study, &crate::estimators::observables::Components(8), 0.0).is_err());
    }
}
