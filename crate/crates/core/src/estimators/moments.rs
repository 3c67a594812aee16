//! Streaming moments and batch-means time averages.

use crate::error::{Error, Result};

/// Welford accumulator over vectors of fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentAccumulator {
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl MomentAccumulator {
    pub fn new(dim: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn push(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.dim());
        self.count += 1;
        let k = self.count as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let d = v - *m;
            *m += d / k;
            *s += d * (v - *m);
        }
    }

    /// Chan et al. pairwise merge.
    pub fn merge(&mut self, other: &MomentAccumulator) {
        debug_assert_eq!(self.dim(), other.dim());
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let na = self.count as f64;
        let nb = other.count as f64;
        let n = na + nb;
        for i in 0..self.dim() {
            let d = other.mean[i] - self.mean[i];
            self.mean[i] += d * nb / n;
            self.m2[i] += other.m2[i] + d * d * na * nb / n;
        }
        self.count += other.count;
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Unbiased sample variance `m2/(count − 1)`; zero below two samples.
    pub fn variance(&self) -> Vec<f64> {
        if self.count < 2 {
            return vec![0.0; self.dim()];
        }
        let d = (self.count - 1) as f64;
        self.m2.iter().map(|s| (s / d).max(0.0)).collect()
    }

    /// Standard error of the mean, assuming independent samples.
    pub fn stderr(&self) -> Vec<f64> {
        let n = self.count.max(1) as f64;
        self.variance().iter().map(|v| (v / n).sqrt()).collect()
    }
}

/// Time average of a piecewise-constant vector signal over `[start, end]`,
/// split into equal batches so that the standard error accounts for
/// autocorrelation (batch means).
#[derive(Debug, Clone)]
pub struct TimeAverage {
    dim: usize,
    start: f64,
    end: f64,
    batches: usize,
    width: f64,
    /// `batches × dim` integrals.
    sums: Vec<f64>,
    comp: Vec<f64>,
}

impl TimeAverage {
    pub fn new(dim: usize, start: f64, end: f64, batches: usize) -> Result<Self> {
        if !(end > start) || batches < 2 {
            return Err(Error::InvalidArgument(format!(
                "time average needs end > start and at least 2 batches (got [{start}, {end}], {batches})"
            )));
        }
        Ok(Self {
            dim,
            start,
            end,
            batches,
            width: (end - start) / batches as f64,
            sums: vec![0.0; dim * batches],
            comp: vec![0.0; dim * batches],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn window(&self) -> (f64, f64) {
        (self.start, self.end)
    }

    /// Add `value` held on `[t0, t1)`; the part outside the window is ignored.
    pub fn add(&mut self, value: &[f64], t0: f64, t1: f64) {
        let mut a = t0.max(self.start);
        let b = t1.min(self.end);
        while a < b {
            let k = (((a - self.start) / self.width) as usize).min(self.batches - 1);
            let edge = if k + 1 == self.batches {
                self.end
            } else {
                self.start + (k + 1) as f64 * self.width
            };
            let stop = b.min(edge);
            let len = stop - a;
            if len > 0.0 {
                let row = k * self.dim;
                for (j, &x) in value.iter().enumerate() {
                    // Neumaier summation
                    let s = &mut self.sums[row + j];
                    let y = x * len;
                    let t = *s + y;
                    if s.abs() >= y.abs() {
                        self.comp[row + j] += (*s - t) + y;
                    } else {
                        self.comp[row + j] += (y - t) + *s;
                    }
                    *s = t;
                }
            }
            if stop <= a {
                break;
            }
            a = stop;
        }
    }

    fn batch_mean(&self, k: usize, j: usize) -> f64 {
        let i = k * self.dim + j;
        (self.sums[i] + self.comp[i]) / self.width
    }

    pub fn mean(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|j| (0..self.batches).map(|k| self.batch_mean(k, j)).sum::<f64>() / self.batches as f64)
            .collect()
    }

    /// Batch-means standard error of [`mean`](Self::mean).
    pub fn stderr(&self) -> Vec<f64> {
        let m = self.mean();
        let b = self.batches as f64;
        (0..self.dim)
            .map(|j| {
                let ss: f64 = (0..self.batches)
                    .map(|k| (self.batch_mean(k, j) - m[j]).powi(2))
                    .sum();
                (ss / (b - 1.0) / b).sqrt()
            })
            .collect()
    }
}
