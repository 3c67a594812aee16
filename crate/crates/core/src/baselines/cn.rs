//! θ = ½ time stepping of the semi-discrete heat system, mode by mode.
//!
//! `û'_i = R_i û_i + ξ_i` with `R_i = (1 + dtμ_i/2)/(1 − dtμ_i/2)` and
//! `ξ_i ~ N(0, (σ²/dx)·dt/(1 − dtμ_i/2)²)`.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_len, Error, Result};
use crate::model::ModelSpec;
use crate::problem::Semidiscretization;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CnConfig {
    pub n: usize,
    pub dt: f64,
    pub sigma: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone)]
pub struct CrankNicolson {
    problem: Semidiscretization,
    dt: f64,
    amplification: Vec<f64>,
    noise_sd: Vec<f64>,
}

impl CrankNicolson {
    pub fn new(config: CnConfig) -> Result<Self> {
        if !(config.dt > 0.0 && config.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "time step must be positive, got {}",
                config.dt
            )));
        }
        let problem = Semidiscretization::new(config.n, ModelSpec::heat(config.lambda, config.sigma))?;
        let dt = config.dt;
        let noise = config.sigma * config.sigma / problem.dx();
        let (amplification, noise_sd) = problem
            .basis
            .eigenvalues()
            .iter()
            .map(|&mu| {
                let den = 1.0 - 0.5 * dt * mu;
                ((1.0 + 0.5 * dt * mu) / den, (noise * dt).sqrt() / den)
            })
            .unzip();
        Ok(Self {
            problem,
            dt,
            amplification,
            noise_sd,
        })
    }

    pub fn problem(&self) -> &Semidiscretization {
        &self.problem
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `R_i`.
    pub fn amplification(&self, mode: usize) -> f64 {
        self.amplification[mode]
    }

    pub fn amplifications(&self) -> &[f64] {
        &self.amplification
    }

    /// One step in spectral coordinates; `rng = None` gives the noise-free
    /// (mean) evolution.
    pub fn step_spectral(&self, uhat: &mut [f64], rng: Option<&mut RngStream>) {
        for (u, r) in uhat.iter_mut().zip(&self.amplification) {
            *u *= r;
        }
        if let Some(rng) = rng {
            for (u, sd) in uhat.iter_mut().zip(&self.noise_sd) {
                let z: f64 = StandardNormal.sample(rng);
                *u += sd * z;
            }
        }
    }

    /// One step on grid values.
    pub fn cn_step(&self, u: &[f64], rng: Option<&mut RngStream>) -> Result<Vec<f64>> {
        check_len(self.problem.n(), u.len())?;
        let mut c = self.problem.basis.to_spectral(u)?.coeffs;
        self.step_spectral(&mut c, rng);
        self.problem.basis.from_spectral(&c)
    }

    /// `steps` steps from `u0`.
    pub fn run(&self, u0: &[f64], steps: usize, mut rng: Option<&mut RngStream>) -> Result<Vec<f64>> {
        check_len(self.problem.n(), u0.len())?;
        let mut c = self.problem.basis.to_spectral(u0)?.coeffs;
        for _ in 0..steps {
            self.step_spectral(&mut c, rng.as_deref_mut());
        }
        self.problem.basis.from_spectral(&c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn scheme(n: usize, dt: f64) -> CrankNicolson {
        CrankNicolson::new(CnConfig {
            n,
            dt,
            sigma: 1.0,
            lambda: 0.0,
        })
        .unwrap()
    }

    #[test]
    fn amplification_formula() {
        let r = |x: f64| (1.0 + x / 2.0) / (1.0 - x / 2.0);
        assert_eq!(r(-2.0), 0.0);
        assert_relative_eq!(r(-100.0), -49.0 / 51.0, epsilon = 1e-15);
        let cn = scheme(16, 0.3);
        for (i, &mu) in cn.problem().basis.eigenvalues().iter().enumerate() {
            assert_relative_eq!(cn.amplification(i), r(0.3 * mu), epsilon = 1e-15);
            assert!(cn.amplification(i).abs() <= 1.0);
        }
    }

    #[test]
    fn constant_mode_is_kept_without_noise() {
        let cn = scheme(8, 0.5);
        let u = vec![0.7; 8];
        let next = cn.cn_step(&u, None).unwrap();
        for x in next {
            assert_relative_eq!(x, 0.7, epsilon = 1e-14);
        }
    }

    #[test]
    fn noise_free_decay_is_a_power_of_r() {
        let cn = scheme(16, 0.1);
        let i = 5;
        let u0 = cn.problem().basis.vector(i).to_vec();
        let u = cn.run(&u0, 12, None).unwrap();
        let c = cn.problem().basis.to_spectral(&u).unwrap().coeffs;
        assert_relative_eq!(c[i], cn.amplification(i).powi(12), epsilon = 1e-13);
    }

    #[test]
    fn stiff_modes_are_barely_damped() {
        let n = 101;
        let dx = std::f64::consts::TAU / n as f64;
        let cn = scheme(n, dx);
        let last = n - 1;
        let mu = cn.problem().basis.eigenvalue(last);
        // μ dt ≈ −4/dx ≈ −64
        assert!(mu * dx < -60.0);
        assert!(cn.amplification(last) < -0.93);
    }

    #[test]
    fn stationary_noise_level() {
        // stationary variance of the AR(1) recursion: s²/(1 − R²)
        let cn = CrankNicolson::new(CnConfig {
            n: 4,
            dt: 0.05,
            sigma: 1.0,
            lambda: 1.0,
        })
        .unwrap();
        let mut rng = RngStream::new(6, 0);
        let mut c = vec![0.0; 4];
        for _ in 0..200 {
            cn.step_spectral(&mut c, Some(&mut rng));
        }
        let mut sum2 = 0.0;
        let m = 100_000;
        for _ in 0..m {
            cn.step_spectral(&mut c, Some(&mut rng));
            sum2 += c[0] * c[0];
        }
        let r = cn.amplification(0);
        let mu = cn.problem().basis.eigenvalue(0);
        let den = 1.0 - 0.5 * 0.05 * mu;
        let exact = (1.0 / cn.problem().dx()) * 0.05 / (den * den) / (1.0 - r * r);
        let est = sum2 / m as f64;
        // correlation time ≈ 20 steps; generous tolerance
        assert!((est / exact - 1.0).abs() < 0.05, "{est} vs {exact}");
    }

    #[test]
    fn rejects_bad_step() {
        assert!(CrankNicolson::new(CnConfig {
            n: 8,
            dt: 0.0,
            sigma: 1.0,
            lambda: 0.0
        })
        .is_err());
    }
}
