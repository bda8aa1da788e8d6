use super::linalg::solve_cyclic_tridiagonal;
use crate::error::Result;

/// Periodic cubic spline through cell-centred samples.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSpline {
    h: f64,
    period: f64,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl PeriodicSpline {
    /// Nodes are at `(i + 1/2) * period / n`.
    pub fn new(values: &[f64], period: f64) -> Result<Self> {
        let n = values.len();
        let h = period / n as f64;
        let rhs: Vec<f64> = (0..n)
            .map(|i| {
                let prev = values[(i + n - 1) % n];
                let next = values[(i + 1) % n];
                6.0 * (next - 2.0 * values[i] + prev) / (h * h)
            })
            .collect();
        let second = solve_cyclic_tridiagonal(&vec![1.0; n], &vec![4.0; n], &vec![1.0; n], &rhs)?;
        Ok(Self {
            h,
            period,
            values: values.to_vec(),
            second,
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    fn locate(&self, x: f64) -> (usize, usize, f64) {
        let n = self.values.len();
        let s = (x / self.h - 0.5).rem_euclid(n as f64);
        let k = (s.floor() as usize).min(n - 1);
        (k, (k + 1) % n, s - k as f64)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (k, k1, t) = self.locate(x);
        let a = 1.0 - t;
        let h2 = self.h * self.h;
        a * self.values[k]
            + t * self.values[k1]
            + ((a * a * a - a) * self.second[k] + (t * t * t - t) * self.second[k1]) * h2 / 6.0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let (k, k1, t) = self.locate(x);
        let a = 1.0 - t;
        (self.values[k1] - self.values[k]) / self.h
            + self.h / 6.0 * (-(3.0 * a * a - 1.0) * self.second[k] + (3.0 * t * t - 1.0) * self.second[k1])
    }
}
