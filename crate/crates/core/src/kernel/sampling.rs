//! Holding times and jump selection.

use crate::error::{Error, Result};
use crate::kernel::rates::RateTable;
use crate::rng::RngStream;

/// Inverse-CDF exponential draw `δt = −ln(u)/J`.
#[inline]
pub fn holding_time(total_rate: f64, u: f64) -> f64 {
    -u.ln() / total_rate
}

pub fn sample_holding(total_rate: f64, rng: &mut RngStream) -> Result<f64> {
    if !(total_rate > 0.0 && total_rate.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "total jump rate must be positive and finite, got {total_rate}"
        )));
    }
    Ok(holding_time(total_rate, rng.uniform_open()))
}

/// Outcome whose cumulative rate first exceeds `target ∈ [0, J)`, scanning
/// `(J₀⁺, J₀⁻, J₁⁺, J₁⁻, …)` in order.
pub fn select_jump(rates: &RateTable, target: f64) -> (usize, i8) {
    let mut acc = 0.0;
    let mut last = (0, 1);
    for (i, (&f, &b)) in rates.forward.iter().zip(&rates.backward).enumerate() {
        acc += f;
        if target < acc {
            return (i, 1);
        }
        acc += b;
        if target < acc {
            return (i, -1);
        }
        if b > 0.0 {
            last = (i, -1);
        } else if f > 0.0 {
            last = (i, 1);
        }
    }
    // Rounding left `target` just above the running sum.
    last
}

#[inline]
pub fn sample_jump(rates: &RateTable, rng: &mut RngStream) -> (usize, i8) {
    select_jump(rates, rng.uniform() * rates.total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn table(forward: Vec<f64>, backward: Vec<f64>) -> RateTable {
        let total = forward.iter().chain(&backward).sum();
        RateTable {
            forward,
            backward,
            total,
        }
    }

    #[test]
    fn inverse_cdf() {
        assert_relative_eq!(holding_time(2.0, (-2.0f64).exp()), 1.0, epsilon = 1e-15);
        assert_eq!(holding_time(3.0, 1.0), 0.0);
    }

    #[test]
    fn clamped_uniform_keeps_holding_positive() {
        let mut rng = RngStream::new(3, 0);
        for _ in 0..10_000 {
            let dt = sample_holding(1e3, &mut rng).unwrap();
            assert!(dt > 0.0 && dt.is_finite());
        }
    }

    #[test]
    fn rejects_bad_total() {
        let mut rng = RngStream::new(0, 0);
        assert!(sample_holding(0.0, &mut rng).is_err());
        assert!(sample_holding(-1.0, &mut rng).is_err());
        assert!(sample_holding(f64::INFINITY, &mut rng).is_err());
    }

    #[test]
    fn empirical_mean_holding() {
        let mut rng = RngStream::new(17, 2);
        let m = 100_000;
        let draws: Vec<f64> = (0..m).map(|_| sample_holding(100.0, &mut rng).unwrap()).collect();
        let mean = draws.iter().sum::<f64>() / m as f64;
        // sd of Exp(100) is 0.01
        let se = 0.01 / (m as f64).sqrt();
        assert!((mean - 0.01).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn scan_order() {
        let t = table(vec![1.0, 2.0], vec![3.0, 4.0]);
        assert_eq!(select_jump(&t, 0.5), (0, 1));
        assert_eq!(select_jump(&t, 1.0), (0, -1));
        assert_eq!(select_jump(&t, 3.9), (0, -1));
        assert_eq!(select_jump(&t, 4.0), (1, 1));
        assert_eq!(select_jump(&t, 6.5), (1, -1));
        assert_eq!(select_jump(&t, 10.0), (1, -1));
    }

    #[test]
    fn uniform_rates_give_uniform_outcomes() {
        let n = 8;
        let t = table(vec![1.0; n], vec![1.0; n]);
        let mut rng = RngStream::new(5, 9);
        let draws = 100_000;
        let mut counts = vec![0usize; 2 * n];
        for _ in 0..draws {
            let (i, d) = sample_jump(&t, &mut rng);
            counts[2 * i + usize::from(d < 0)] += 1;
        }
        let expect = draws as f64 / (2 * n) as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expect).powi(2) / expect)
            .sum();
        // 15 degrees of freedom, 99.9% quantile ≈ 37.7
        assert!(chi2 < 37.7, "chi2 {chi2}");
        let probs: f64 = t.forward.iter().chain(&t.backward).map(|r| r / t.total).sum();
        assert_relative_eq!(probs, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn dominant_rate_wins() {
        let mut f = vec![1.0; 6];
        f[4] = 1e6;
        let t = table(f, vec![1.0; 6]);
        let mut rng = RngStream::new(5, 10);
        let hits = (0..10_000)
            .filter(|_| sample_jump(&t, &mut rng) == (4, 1))
            .count();
        assert!(hits as f64 / 1e4 >= 0.999);
    }
}
