//! Reference solutions used to validate the jump processes.

pub mod generator;
pub mod heat;
pub mod langevin;
pub mod ou;

pub use generator::{generator_residual, jump_generator, sde_generator, QuadraticTestFunction};
pub use heat::{heat_covariance, heat_covariance_time_integral, heat_mean, HeatParams};
pub use langevin::{EnergyConvention, LangevinTarget};
pub use ou::{ou_second_moment_time_integral, semidiscrete_ou_moments, OuMoments};

/// `Γ(3/4)/Γ(1/4)`.
const GAMMA_RATIO: f64 = 0.337_989_120_033_642_4;

/// Stationary second moment of the scalar surrogate `π(u) ∝ exp(−(π/σ²)u⁴)`:
/// `σ/√π · Γ(3/4)/Γ(1/4)`.
pub fn scalar_surrogate_second_moment(sigma: f64) -> f64 {
    sigma / std::f64::consts::PI.sqrt() * GAMMA_RATIO
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surrogate_moment_by_quadrature() {
        for sigma in [1.0, 0.6] {
            let c = std::f64::consts::PI / (sigma * sigma);
            let m = 200_000;
            let (lo, hi) = (-4.0, 4.0);
            let du = (hi - lo) / m as f64;
            let (mut z, mut s) = (0.0, 0.0);
            for k in 0..m {
                let u = lo + (k as f64 + 0.5) * du;
                let w = (-c * u.powi(4)).exp();
                z += w;
                s += u * u * w;
            }
            let q = s / z;
            assert!((scalar_surrogate_second_moment(sigma) - q).abs() < 1e-9, "{q}");
        }
        assert!((scalar_surrogate_second_moment(1.0) - 0.1907).abs() < 1e-4);
    }
}
