//! Exact law of the semi-discrete heat system `dv = L v dt + (σ/√dx) dW`.
//!
//! In the eigenbasis of `L` each Euclidean coefficient `⟨v, e_i⟩` is an
//! independent OU process with rate `μ_i` and noise intensity `σ²/dx`.

use crate::error::{check_len, Error, Result};
use crate::model::ModelKind;
use crate::problem::Semidiscretization;

/// Per-mode mean and variance of `⟨v(t), e_i⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct OuMoments {
    pub t: f64,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

fn require_linear(problem: &Semidiscretization) -> Result<()> {
    if problem.model.kind == ModelKind::Heat {
        Ok(())
    } else {
        Err(Error::UnsupportedModel(format!(
            "the OU oracle needs F_n ≡ 0, got {}",
            problem.model.kind
        )))
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("time must be non-negative, got {t}")))
    }
}

/// `(e^{2μt} − 1)/(2μ)`, or `t` at `μ = 0`.
fn variance_factor(mu: f64, t: f64) -> f64 {
    if mu == 0.0 {
        t
    } else {
        (2.0 * mu * t).exp_m1() / (2.0 * mu)
    }
}

/// `∫₀ᵀ e^{st} dt`.
fn exp_integral(s: f64, t: f64) -> f64 {
    if s == 0.0 {
        t
    } else {
        (s * t).exp_m1() / s
    }
}

/// `∫₀ᵀ (e^{2μt} − 1)/(2μ) dt`.
fn variance_integral(mu: f64, t: f64) -> f64 {
    if mu == 0.0 {
        return 0.5 * t * t;
    }
    let x = 2.0 * mu * t;
    if x.abs() < 1e-4 {
        let s = x * x / 2.0 + x * x * x / 6.0 + x * x * x * x / 24.0;
        return s / (4.0 * mu * mu);
    }
    (x.exp_m1() - x) / (4.0 * mu * mu)
}

/// Mode-wise moments at time `t` starting from the grid state `v0`.
pub fn semidiscrete_ou_moments(
    t: f64,
    problem: &Semidiscretization,
    v0: &[f64],
) -> Result<OuMoments> {
    require_linear(problem)?;
    check_time(t)?;
    check_len(problem.n(), v0.len())?;
    let c0 = problem.basis.to_spectral(v0)?.coeffs;
    let noise = problem.sigma().powi(2) / problem.dx();
    let eig = problem.basis.eigenvalues();
    Ok(OuMoments {
        t,
        mean: c0.iter().zip(eig).map(|(c, mu)| c * (mu * t).exp()).collect(),
        variance: eig.iter().map(|&mu| noise * variance_factor(mu, t)).collect(),
    })
}

impl OuMoments {
    /// `E v_j(t)`.
    pub fn grid_mean(&self, problem: &Semidiscretization) -> Vec<f64> {
        problem
            .basis
            .from_spectral(&self.mean)
            .expect("mode count matches the basis")
    }

    /// `E v_j(t)² = (Σ_i m_i e_i(j))² + Σ_i var_i e_i(j)²`.
    pub fn grid_second_moment(&self, problem: &Semidiscretization) -> Vec<f64> {
        let n = problem.n();
        let mean = self.grid_mean(problem);
        (0..n)
            .map(|j| {
                let var: f64 = (0..n)
                    .map(|i| {
                        let e = problem.basis.vector(i)[j];
                        self.variance[i] * e * e
                    })
                    .sum();
                mean[j] * mean[j] + var
            })
            .collect()
    }
}

/// `∫₀ᵀ E v_j(t)² dt` for every grid point, integrated term by term.
pub fn ou_second_moment_time_integral(
    t: f64,
    problem: &Semidiscretization,
    v0: &[f64],
) -> Result<Vec<f64>> {
    require_linear(problem)?;
    check_time(t)?;
    check_len(problem.n(), v0.len())?;
    let n = problem.n();
    let c0 = problem.basis.to_spectral(v0)?.coeffs;
    let noise = problem.sigma().powi(2) / problem.dx();
    let eig = problem.basis.eigenvalues();
    let active: Vec<usize> = (0..n).filter(|&i| c0[i] != 0.0).collect();
    let mut out = vec![0.0; n];
    for (j, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for &i in &active {
            let ai = c0[i] * problem.basis.vector(i)[j];
            for &k in &active {
                let ak = c0[k] * problem.basis.vector(k)[j];
                acc += ai * ak * exp_integral(eig[i] + eig[k], t);
            }
        }
        for i in 0..n {
            let e = problem.basis.vector(i)[j];
            acc += noise * e * e * variance_integral(eig[i], t);
        }
        *o = acc;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{InitialCondition, ModelSpec};
    use crate::rng::RngStream;
    use approx::assert_relative_eq;
    use rand_distr::{Distribution, StandardNormal};

    fn heat(n: usize, lambda: f64, sigma: f64) -> Semidiscretization {
        Semidiscretization::new(n, ModelSpec::heat(lambda, sigma)).unwrap()
    }

    #[test]
    fn zero_time_zero_state() {
        let p = heat(8, 1.0, 1.0);
        let m = semidiscrete_ou_moments(0.0, &p, &[0.0; 8]).unwrap();
        assert!(m.mean.iter().all(|x| *x == 0.0));
        assert!(m.variance.iter().all(|x| *x == 0.0));
        assert!(m.grid_second_moment(&p).iter().all(|x| *x == 0.0));
    }

    #[test]
    fn brownian_constant_mode() {
        let p = heat(8, 0.0, 1.5);
        for t in [0.5, 1.0, 2.0] {
            let m = semidiscrete_ou_moments(t, &p, &[0.0; 8]).unwrap();
            assert_relative_eq!(m.variance[0], 2.25 / p.dx() * t, epsilon = 1e-13);
        }
    }

    #[test]
    fn mean_decays_per_mode() {
        let p = heat(8, 0.5, 1.0);
        let v0 = p.basis.vector(3).to_vec();
        let m = semidiscrete_ou_moments(0.7, &p, &v0).unwrap();
        assert_relative_eq!(m.mean[3], (0.7 * p.basis.eigenvalue(3)).exp(), epsilon = 1e-13);
        let gm = m.grid_mean(&p);
        for (g, e) in gm.iter().zip(&v0) {
            assert_relative_eq!(*g, m.mean[3] * e, epsilon = 1e-13);
        }
    }

    #[test]
    fn rejects_nonlinear_models() {
        let p = Semidiscretization::new(8, ModelSpec::langevin(1.0)).unwrap();
        assert!(matches!(
            semidiscrete_ou_moments(1.0, &p, &[0.0; 8]),
            Err(Error::UnsupportedModel(_))
        ));
    }

    #[test]
    fn two_point_system_against_euler_maruyama() {
        // v ∈ ℝ², dx = π, L = [[-a, a], [a, -a]] with a = 1/dx², λ = 0.5
        let p = heat(2, 0.5, 1.0);
        let v0 = vec![1.0, -0.3];
        let t = 0.5;
        let m = semidiscrete_ou_moments(t, &p, &v0).unwrap();
        let exact = m.grid_second_moment(&p);
        let dx = p.dx();
        let a = 1.0 / (dx * dx);
        let steps = 200;
        let dt = t / steps as f64;
        let noise = (dt / dx).sqrt();
        let paths = 5000;
        let mut rng = RngStream::new(77, 0);
        let mut sum = [0.0; 2];
        let mut sum2 = [0.0; 2];
        for _ in 0..paths {
            let mut v = [v0[0], v0[1]];
            for _ in 0..steps {
                let d0 = a * (v[1] - v[0]) * 2.0 - 0.5 * v[0];
                let d1 = a * (v[0] - v[1]) * 2.0 - 0.5 * v[1];
                let z0: f64 = StandardNormal.sample(&mut rng);
                let z1: f64 = StandardNormal.sample(&mut rng);
                v[0] += d0 * dt + noise * z0;
                v[1] += d1 * dt + noise * z1;
            }
            for j in 0..2 {
                let s = v[j] * v[j];
                sum[j] += s;
                sum2[j] += s * s;
            }
        }
        for j in 0..2 {
            let mean = sum[j] / paths as f64;
            let var = sum2[j] / paths as f64 - mean * mean;
            let se = (var / paths as f64).sqrt();
            // Euler bias O(dt) is far below the MC error here
            assert!((mean - exact[j]).abs() < 3.0 * se, "j={j}: {mean} vs {} (se {se})", exact[j]);
        }
    }

    #[test]
    fn time_integral_matches_midpoint_rule() {
        let model = ModelSpec::heat(1.0, 0.8).with_initial_condition(InitialCondition::Sinusoid);
        let p = Semidiscretization::new(6, model).unwrap();
        let v0 = p.initial_state();
        let t = 1.0;
        let closed = ou_second_moment_time_integral(t, &p, &v0).unwrap();
        let m = 20_000;
        let dt = t / m as f64;
        let mut quad = vec![0.0; 6];
        for k in 0..m {
            let s = (k as f64 + 0.5) * dt;
            let e = semidiscrete_ou_moments(s, &p, &v0).unwrap().grid_second_moment(&p);
            for (q, x) in quad.iter_mut().zip(e) {
                *q += x * dt;
            }
        }
        for (c, q) in closed.iter().zip(&quad) {
            assert!((c - q).abs() < 1e-7, "{c} vs {q}");
        }
    }

    #[test]
    fn small_exponent_branches_are_continuous() {
        assert_relative_eq!(variance_integral(1e-9, 2.0), 2.0, epsilon = 1e-7);
        assert_relative_eq!(variance_integral(-3.0, 1.0), 1.0 / 6.0 - (1.0 - (-6.0f64).exp()) / 36.0, epsilon = 1e-14);
        assert_relative_eq!(exp_integral(0.0, 3.0), 3.0);
    }
}
