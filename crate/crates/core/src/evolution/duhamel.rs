//! Mild-solution reference solver: Picard iteration of
//! `u(t) = K^t * u0 - int_0^t dK^{t-s}/dx * f(u(s)) ds` on a periodic box.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::scheme::State;
use crate::error::{LabError, Result};
use crate::numerics::{BoundaryMode, FluxModel};

/// Default number of midpoint subintervals for the time integral.
pub const DEFAULT_SUBINTERVALS: usize = 32;

struct Circular {
    n: usize,
    h: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Circular {
    fn new(n: usize, h: f64) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            h,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    fn transform(&self, v: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    fn back(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        self.inverse.process(&mut spec);
        // h * (1/n) normalisation: circular convolution with quadrature weight h
        let scale = self.h / self.n as f64;
        spec.iter().map(|c| c.re * scale).collect()
    }

    /// Heat kernel `K^tau` and its x-derivative sampled at lattice offsets
    /// `m h` (wrapped), summed over periodic images, scaled so `h sum K = 1`.
    fn kernels(&self, tau: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let length = self.h * n as f64;
        let mut k = vec![0.0; n];
        let mut dk = vec![0.0; n];
        let reach = ((12.0 * (tau.sqrt()) / length).ceil() as i64).max(1);
        for m in 0..n {
            let x0 = if m <= n / 2 {
                m as f64 * self.h
            } else {
                (m as f64 - n as f64) * self.h
            };
            for img in -reach..=reach {
                let x = x0 + img as f64 * length;
                let g = (-(x * x) / (4.0 * tau)).exp() / (4.0 * PI * tau).sqrt();
                k[m] += g;
                dk[m] += -x / (2.0 * tau) * g;
            }
        }
        let mass = self.h * k.iter().sum::<f64>();
        k.iter_mut().for_each(|v| *v /= mass);
        dk.iter_mut().for_each(|v| *v /= mass);
        (k, dk)
    }
}

/// Heat semigroup applied to `u`: `K^t * u` with the sampled, mass-one kernel.
pub fn heat_convolution(u: &[f64], h: f64, t: f64) -> Vec<f64> {
    if t == 0.0 {
        return u.to_vec();
    }
    let c = Circular::new(u.len(), h);
    let (k, _) = c.kernels(t);
    let kh = c.transform(&k);
    let uh = c.transform(u);
    c.back(kh.iter().zip(&uh).map(|(a, b)| a * b).collect())
}

/// Picard iteration with the default number of subintervals.
pub fn duhamel_picard(u0: &State, flux: &FluxModel, t: f64, iterations: usize) -> Result<State> {
    duhamel_picard_with(u0, flux, t, iterations, DEFAULT_SUBINTERVALS)
}

/// `iterations` applications of the Duhamel map starting from `u(s) = u0`.
///
/// Time is split into `subintervals` equal pieces; the iterate is kept at the
/// nodes and the `s`-integral uses the midpoint rule with the midpoint value
/// taken as the average of neighbouring nodes.
pub fn duhamel_picard_with(
    u0: &State,
    flux: &FluxModel,
    t: f64,
    iterations: usize,
    subintervals: usize,
) -> Result<State> {
    if u0.grid().boundary() != BoundaryMode::Periodic {
        return Err(LabError::InvalidInput(
            "the Duhamel solver needs a periodic grid".into(),
        ));
    }
    if !(t > 0.0) || iterations == 0 || subintervals < 1 {
        return Err(LabError::InvalidInput(
            "need t > 0, iterations >= 1, subintervals >= 1".into(),
        ));
    }
    let grid = u0.grid();
    let n = grid.n_cells();
    let h = grid.spacing();
    let xs: Vec<f64> = (0..n).map(|i| grid.local_center(i)).collect();
    let big_n = subintervals;
    let tau = t / big_n as f64;
    let circ = Circular::new(n, h);

    let base = u0.u();
    let base_hat = circ.transform(base);
    // heat part at every node t_k, k = 1..N
    let mut heat_nodes: Vec<Vec<f64>> = Vec::with_capacity(big_n + 1);
    heat_nodes.push(base.to_vec());
    for k in 1..=big_n {
        let (kern, _) = circ.kernels(k as f64 * tau);
        let kh = circ.transform(&kern);
        heat_nodes.push(circ.back(kh.iter().zip(&base_hat).map(|(a, b)| a * b).collect()));
    }
    // derivative kernels at lags (m + 1/2) tau
    let dk_hat: Vec<Vec<Complex64>> = (0..big_n)
        .map(|m| circ.transform(&circ.kernels((m as f64 + 0.5) * tau).1))
        .collect();

    let sup0 = base.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let radius = 2.0 * (2.0 * sup0).max(f64::MIN_POSITIVE);

    let mut nodes: Vec<Vec<f64>> = vec![base.to_vec(); big_n + 1];
    for _ in 0..iterations {
        let f_hat: Vec<Vec<Complex64>> = (0..big_n)
            .map(|j| {
                let fv: Vec<f64> = (0..n)
                    .map(|i| flux.eval(0.5 * (nodes[j][i] + nodes[j + 1][i]), xs[i]))
                    .collect();
                circ.transform(&fv)
            })
            .collect();
        let mut next = Vec::with_capacity(big_n + 1);
        next.push(base.to_vec());
        for k in 1..=big_n {
            let mut acc = vec![Complex64::new(0.0, 0.0); n];
            for (j, fj) in f_hat.iter().enumerate().take(k) {
                let kern = &dk_hat[k - j - 1];
                for ((a, kv), fv) in acc.iter_mut().zip(kern).zip(fj) {
                    *a += kv * fv;
                }
            }
            let integral = circ.back(acc);
            let vals: Vec<f64> = heat_nodes[k]
                .iter()
                .zip(&integral)
                .map(|(hv, iv)| hv - tau * iv)
                .collect();
            let sup = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !(sup <= radius) {
                return Err(LabError::PicardDivergence { norm: sup, radius });
            }
            next.push(vals);
        }
        nodes = next;
    }
    let last = nodes.pop().expect("at least one node");
    Ok(u0.with_values(last, u0.time() + t))
}
