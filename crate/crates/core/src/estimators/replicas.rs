//! Independent replicas of one jump process, run in parallel and merged in
//! replica order.

use std::ops::ControlFlow;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::moments::MomentAccumulator;
use crate::estimators::observables::Observable;
use crate::kernel::{JumpKernel, JumpState, Observer};
use crate::rng::RngStream;

/// Largest tolerated fraction of failed replicas.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;

/// Replica mean of a vector observable.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Replicas that completed.
    pub replicas: usize,
    pub failures: usize,
    /// Total number of jumps over all completed replicas.
    pub events: u64,
}

/// Run `replicas` independent copies (stream `r` for replica `r`) and merge
/// the per-replica values in index order.
pub fn run_replicas<F>(replicas: usize, seed: u64, dim: usize, f: F) -> Result<Estimate>
where
    F: Fn(&mut RngStream) -> Result<(Vec<f64>, u64)> + Sync,
{
    if replicas < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 replicas, got {replicas}"
        )));
    }
    let results: Vec<Result<(Vec<f64>, u64)>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(seed, r as u64);
            f(&mut rng)
        })
        .collect();
    let mut acc = MomentAccumulator::new(dim);
    let mut failures = 0;
    let mut first = None;
    let mut events = 0;
    for r in results {
        match r {
            Ok((value, ev)) => {
                acc.push(&value);
                events += ev;
            }
            Err(e) => {
                failures += 1;
                first.get_or_insert(e);
            }
        }
    }
    if failures as f64 > MAX_FAILURE_FRACTION * replicas as f64 || acc.count() < 2 {
        return Err(Error::TooManyFailures {
            failed: failures,
            replicas,
            first: Box::new(first.unwrap_or_else(|| Error::InvalidArgument("no replica completed".into()))),
        });
    }
    Ok(Estimate {
        mean: acc.mean().to_vec(),
        stderr: acc.stderr(),
        replicas: acc.count() as usize,
        failures,
        events,
    })
}

/// `E[g(v(T))]` with `v(T)` the state of the holding interval covering `T`.
pub fn estimate_fixed_time(
    kernel: &JumpKernel,
    v0: &[f64],
    horizon: f64,
    observable: &dyn Observable,
    replicas: usize,
    seed: u64,
) -> Result<Estimate> {
    let dim = observable.dim();
    run_replicas(replicas, seed, dim, |rng| {
        let mut state = kernel.init_state(v0.to_vec(), 0.0)?;
        let out = kernel.simulate(&mut state, horizon, (), rng)?;
        let mut value = vec![0.0; dim];
        observable.evaluate(&state.v, &mut value);
        Ok((value, out.events))
    })
}

/// Accumulates `∫ g(v(t)) dt` exactly over the piecewise-constant path,
/// with compensated summation.
pub struct PathIntegral<'a> {
    observable: &'a dyn Observable,
    scratch: Vec<f64>,
    sum: Vec<f64>,
    comp: Vec<f64>,
}

impl<'a> PathIntegral<'a> {
    pub fn new(observable: &'a dyn Observable) -> Self {
        let d = observable.dim();
        Self {
            observable,
            scratch: vec![0.0; d],
            sum: vec![0.0; d],
            comp: vec![0.0; d],
        }
    }

    pub fn value(&self) -> Vec<f64> {
        self.sum.iter().zip(&self.comp).map(|(s, c)| s + c).collect()
    }
}

impl Observer for PathIntegral<'_> {
    fn on_hold(&mut self, state: &JumpState, start: f64, end: f64) -> ControlFlow<()> {
        let dt = end - start;
        self.observable.evaluate(&state.v, &mut self.scratch);
        for ((s, c), &g) in self.sum.iter_mut().zip(&mut self.comp).zip(&self.scratch) {
            let y = g * dt;
            let t = *s + y;
            if s.abs() >= y.abs() {
                *c += (*s - t) + y;
            } else {
                *c += (y - t) + *s;
            }
            *s = t;
        }
        ControlFlow::Continue(())
    }
}

/// `E[∫₀ᵀ g(v(t)) dt]`, exact along each replica path.
pub fn estimate_path_integral(
    kernel: &JumpKernel,
    v0: &[f64],
    horizon: f64,
    observable: &dyn Observable,
    replicas: usize,
    seed: u64,
) -> Result<Estimate> {
    run_replicas(replicas, seed, observable.dim(), |rng| {
        let mut state = kernel.init_state(v0.to_vec(), 0.0)?;
        let mut integral = PathIntegral::new(observable);
        let out = kernel.simulate(&mut state, horizon, &mut integral, rng)?;
        Ok((integral.value(), out.events))
    })
}

/// Fixed-time and path-integral estimates from the same replicas.
pub fn estimate_fixed_time_and_path_integral(
    kernel: &JumpKernel,
    v0: &[f64],
    horizon: f64,
    observable: &dyn Observable,
    replicas: usize,
    seed: u64,
) -> Result<(Estimate, Estimate)> {
    let d = observable.dim();
    let both = run_replicas(replicas, seed, 2 * d, |rng| {
        let mut state = kernel.init_state(v0.to_vec(), 0.0)?;
        let mut integral = PathIntegral::new(observable);
        let out = kernel.simulate(&mut state, horizon, &mut integral, rng)?;
        let mut value = vec![0.0; 2 * d];
        observable.evaluate(&state.v, &mut value[..d]);
        value[d..].copy_from_slice(&integral.value());
        Ok((value, out.events))
    })?;
    let split = |lo: usize| Estimate {
        mean: both.mean[lo..lo + d].to_vec(),
        stderr: both.stderr[lo..lo + d].to_vec(),
        replicas: both.replicas,
        failures: both.failures,
        events: both.events,
    };
    Ok((split(0), split(d)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::observables::{Components, Constant, SquaredComponents};
    use crate::kernel::Variant;
    use crate::model::ModelSpec;
    use crate::oracles::ou::{ou_second_moment_time_integral, semidiscrete_ou_moments};
    use crate::problem::Semidiscretization;
    use std::sync::Arc;

    fn heat_kernel(n: usize, variant: Variant, h: f64) -> JumpKernel {
        let p = Arc::new(Semidiscretization::new(n, ModelSpec::heat(1.0, 1.0)).unwrap());
        JumpKernel::new(p, variant, h).unwrap()
    }

    #[test]
    fn constant_observable() {
        let k = heat_kernel(8, Variant::Fast, 0.2);
        let e = estimate_fixed_time(&k, &[0.0; 8], 0.5, &Constant(2.5), 20, 1).unwrap();
        assert_eq!(e.mean, vec![2.5]);
        assert_eq!(e.stderr, vec![0.0]);
        let p = estimate_path_integral(&k, &[0.0; 8], 0.5, &Constant(1.0), 20, 1).unwrap();
        assert!((p.mean[0] - 0.5).abs() < 1e-15);
        assert!(p.stderr[0] < 1e-15);
    }

    #[test]
    fn zero_horizon_returns_initial_value() {
        let k = heat_kernel(4, Variant::Academic, 0.2);
        let v0 = [0.1, 0.2, -0.3, 0.4];
        let e = estimate_fixed_time(&k, &v0, 0.0, &SquaredComponents(4), 5, 3).unwrap();
        for (m, x) in e.mean.iter().zip(v0) {
            assert_eq!(*m, x * x);
        }
        assert!(e.stderr.iter().all(|s| *s == 0.0));
        assert_eq!(e.events, 0);
    }

    #[test]
    fn fixed_time_second_moment_against_ou() {
        let k = heat_kernel(16, Variant::Fast, 0.05);
        let n = 16;
        let e = estimate_fixed_time(&k, &[0.0; 16], 1.0, &SquaredComponents(n), 2000, 7).unwrap();
        let exact = semidiscrete_ou_moments(1.0, k.problem(), &[0.0; 16])
            .unwrap()
            .grid_second_moment(k.problem());
        for j in 0..n {
            assert!(
                (e.mean[j] - exact[j]).abs() < 3.5 * e.stderr[j],
                "j={j}: {} ± {} vs {}",
                e.mean[j],
                e.stderr[j],
                exact[j]
            );
        }
    }

    #[test]
    fn path_integral_against_ou() {
        let k = heat_kernel(16, Variant::Academic, 0.1);
        let e = estimate_path_integral(&k, &[0.0; 16], 1.0, &SquaredComponents(16), 2000, 9).unwrap();
        let exact = ou_second_moment_time_integral(1.0, k.problem(), &[0.0; 16]).unwrap();
        for j in 0..16 {
            assert!((e.mean[j] - exact[j]).abs() < 3.5 * e.stderr[j], "j={j}");
        }
    }

    #[test]
    fn combined_run_matches_separate_runs() {
        let k = heat_kernel(6, Variant::Fast, 0.2);
        let obs = SquaredComponents(6);
        let (f, p) = estimate_fixed_time_and_path_integral(&k, &[0.1; 6], 0.4, &obs, 50, 8).unwrap();
        let f2 = estimate_fixed_time(&k, &[0.1; 6], 0.4, &obs, 50, 8).unwrap();
        let p2 = estimate_path_integral(&k, &[0.1; 6], 0.4, &obs, 50, 8).unwrap();
        assert_eq!(f, f2);
        assert_eq!(p, p2);
    }

    #[test]
    fn odd_observable_vanishes() {
        let k = heat_kernel(8, Variant::Fast, 0.1);
        let e = estimate_path_integral(&k, &[0.0; 8], 1.0, &Components(8), 2000, 4).unwrap();
        for (m, s) in e.mean.iter().zip(&e.stderr) {
            assert!(m.abs() < 3.5 * s);
        }
    }

    #[test]
    fn bitwise_reproducible() {
        let k = heat_kernel(8, Variant::Fast, 0.1);
        let a = estimate_fixed_time(&k, &[0.0; 8], 0.3, &SquaredComponents(8), 64, 42).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool
            .install(|| estimate_fixed_time(&k, &[0.0; 8], 0.3, &SquaredComponents(8), 64, 42))
            .unwrap();
        assert_eq!(a, b);
        let c = estimate_fixed_time(&k, &[0.0; 8], 0.3, &SquaredComponents(8), 64, 43).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn failures_are_counted() {
        let ok = run_replicas(1000, 0, 1, |rng| {
            if rng.stream_id() == 7 {
                Err(Error::InvalidArgument("boom".into()))
            } else {
                Ok((vec![1.0], 1))
            }
        })
        .unwrap();
        assert_eq!(ok.failures, 1);
        assert_eq!(ok.replicas, 999);
        let bad = run_replicas(100, 0, 1, |rng| {
            if rng.stream_id() < 2 {
                Err(Error::InvalidArgument("boom".into()))
            } else {
                Ok((vec![1.0], 1))
            }
        });
        assert!(matches!(bad, Err(Error::TooManyFailures { failed: 2, .. })));
        assert!(run_replicas(1, 0, 1, |_| Ok((vec![0.0], 0))).is_err());
    }

    #[test]
    fn halving_replicas_doubles_variance() {
        let k = heat_kernel(8, Variant::Fast, 0.2);
        let big = estimate_fixed_time(&k, &[0.0; 8], 0.5, &SquaredComponents(8), 4000, 1).unwrap();
        let small = estimate_fixed_time(&k, &[0.0; 8], 0.5, &SquaredComponents(8), 2000, 2).unwrap();
        let ratio: f64 = (0..8)
            .map(|j| (small.stderr[j] / big.stderr[j]).powi(2))
            .sum::<f64>()
            / 8.0;
        assert!((ratio - 2.0).abs() < 0.3, "{ratio}");
    }
}
