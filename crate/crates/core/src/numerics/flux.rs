//! Flux models `f(u, x)`, periodic in `x` and at most quadratic in `u`.
//!
//! Every model has `d_uu` independent of `u`, so the wave speed `d_u` is affine in
//! `u` and has at most one sonic point on any interval. The Engquist-Osher flux
//! below relies on that.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::spline::PeriodicSpline;
use crate::error::{LabError, Result};

/// Label plus numeric parameters, as written in config and family files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxSpec {
    pub label: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl FluxSpec {
    pub fn new(label: &str, params: &[(&str, f64)]) -> Self {
        Self {
            label: label.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    pub fn build(&self) -> Result<FluxModel> {
        builtin_flux(&self.label, &self.params)
    }
}

/// `c + cos_coef * cos(kx) + sin_coef * sin(kx)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct Trig {
    c: f64,
    cos: f64,
    sin: f64,
}

impl Trig {
    fn eval(&self, cs: (f64, f64)) -> f64 {
        self.c + self.cos * cs.0 + self.sin * cs.1
    }

    fn dx(&self, cs: (f64, f64), k: f64) -> f64 {
        k * (self.sin * cs.0 - self.cos * cs.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    /// `sum_{k<=2} u^k * coef_k(x)`.
    Polynomial { coef: [Trig; 3], wavenumber: f64 },
    /// `base(v + w(x), x) - base(w(x), x)`.
    Shifted {
        base: Box<FluxModel>,
        profile: PeriodicSpline,
    },
    /// `-base(u, x)`.
    Reversed(Box<FluxModel>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluxModel {
    kind: Kind,
    period: f64,
    label: String,
    spec: Option<FluxSpec>,
}

fn param(params: &BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

fn check_keys(label: &str, params: &BTreeMap<String, f64>, allowed: &[&str]) -> Result<()> {
    for k in params.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(LabError::InvalidInput(format!(
                "unknown parameter `{k}` for flux `{label}` (allowed: {allowed:?})"
            )));
        }
    }
    for (k, v) in params {
        if !v.is_finite() {
            return Err(LabError::InvalidInput(format!("parameter `{k}` must be finite")));
        }
    }
    Ok(())
}

/// Built-in flux registry.
///
/// * `constant_flux_burgers`: `u^2/2`, params `T` (period, default 1).
/// * `forced_burgers`: `u^2/2 + A sin(2 pi x/T) u`, params `A` (default 0.5), `T` (default 1).
/// * `periodic_advection`: `a0 (1 + A cos(2 pi x/T)) u`, params `a0` (default 1, >= 0),
///   `A` (default 0.5, |A| < 1), `T` (default 1).
/// * `custom_table`: `sum_{k=0..2} u^k (c{k} + cos{k} cos(2 pi x/T) + sin{k} sin(2 pi x/T))`,
///   params `T` and any of `c0 c1 c2 cos0 cos1 cos2 sin0 sin1 sin2` (missing ones are 0).
pub fn builtin_flux(label: &str, params: &BTreeMap<String, f64>) -> Result<FluxModel> {
    let period = param(params, "T", 1.0);
    if !(period > 0.0) {
        return Err(LabError::InvalidInput(format!(
            "flux period T must be > 0, got {period}"
        )));
    }
    let wavenumber = TAU / period;
    let mut coef = [Trig::default(); 3];
    match label {
        "constant_flux_burgers" => {
            check_keys(label, params, &["T"])?;
            coef[2].c = 0.5;
        }
        "forced_burgers" => {
            check_keys(label, params, &["A", "T"])?;
            coef[2].c = 0.5;
            coef[1].sin = param(params, "A", 0.5);
        }
        "periodic_advection" => {
            check_keys(label, params, &["a0", "A", "T"])?;
            let a0 = param(params, "a0", 1.0);
            let amp = param(params, "A", 0.5);
            if a0 < 0.0 {
                return Err(LabError::InvalidInput(format!(
                    "periodic_advection needs a0 >= 0, got {a0}"
                )));
            }
            if amp.abs() >= 1.0 {
                return Err(LabError::InvalidInput(format!(
                    "periodic_advection needs |A| < 1, got {amp}"
                )));
            }
            coef[1].c = a0;
            coef[1].cos = a0 * amp;
        }
        "custom_table" => {
            const KEYS: [&str; 10] = ["T", "c0", "c1", "c2", "cos0", "cos1", "cos2", "sin0", "sin1", "sin2"];
            check_keys(label, params, &KEYS)?;
            for (k, trig) in coef.iter_mut().enumerate() {
                trig.c = param(params, &format!("c{k}"), 0.0);
                trig.cos = param(params, &format!("cos{k}"), 0.0);
                trig.sin = param(params, &format!("sin{k}"), 0.0);
            }
        }
        other => return Err(LabError::UnknownFlux(other.to_string())),
    }
    Ok(FluxModel {
        kind: Kind::Polynomial { coef, wavenumber },
        period,
        label: label.to_string(),
        spec: Some(FluxSpec {
            label: label.to_string(),
            params: params.clone(),
        }),
    })
}

impl FluxModel {
    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// The config-level description, `None` for derived (shifted, reversed) fluxes.
    pub fn spec(&self) -> Option<&FluxSpec> {
        self.spec.as_ref()
    }

    /// `g(v, x) = f(v + w(x), x) - f(w(x), x)`, with `w` interpolated by a periodic cubic spline.
    pub fn shifted(&self, profile: &[f64]) -> Result<FluxModel> {
        let spline = PeriodicSpline::new(profile, self.period)?;
        Ok(FluxModel {
            kind: Kind::Shifted {
                base: Box::new(self.clone()),
                profile: spline,
            },
            period: self.period,
            label: format!("shifted({})", self.label),
            spec: None,
        })
    }

    /// `-f(u, x)`: the flux of `u_t - (f(u,x))_x = u_xx`.
    pub fn reversed(&self) -> FluxModel {
        FluxModel {
            kind: Kind::Reversed(Box::new(self.clone())),
            period: self.period,
            label: format!("reversed({})", self.label),
            spec: None,
        }
    }

    pub fn eval(&self, u: f64, x: f64) -> f64 {
        match &self.kind {
            Kind::Polynomial { coef, wavenumber } => {
                let cs = trig_pair(*wavenumber, x);
                coef[0].eval(cs) + u * (coef[1].eval(cs) + u * coef[2].eval(cs))
            }
            Kind::Shifted { base, profile } => {
                let w = profile.eval(x);
                base.eval(u + w, x) - base.eval(w, x)
            }
            Kind::Reversed(base) => -base.eval(u, x),
        }
    }

    pub fn d_u(&self, u: f64, x: f64) -> f64 {
        match &self.kind {
            Kind::Polynomial { coef, wavenumber } => {
                let cs = trig_pair(*wavenumber, x);
                coef[1].eval(cs) + 2.0 * u * coef[2].eval(cs)
            }
            Kind::Shifted { base, profile } => base.d_u(u + profile.eval(x), x),
            Kind::Reversed(base) => -base.d_u(u, x),
        }
    }

    #[allow(clippy::only_used_in_recursion)]
    pub fn d_uu(&self, u: f64, x: f64) -> f64 {
        match &self.kind {
            Kind::Polynomial { coef, wavenumber } => 2.0 * coef[2].eval(trig_pair(*wavenumber, x)),
            Kind::Shifted { base, profile } => base.d_uu(u + profile.eval(x), x),
            Kind::Reversed(base) => -base.d_uu(u, x),
        }
    }

    /// Partial derivative in `x` at fixed `u`.
    pub fn d_x(&self, u: f64, x: f64) -> f64 {
        match &self.kind {
            Kind::Polynomial { coef, wavenumber } => {
                let cs = trig_pair(*wavenumber, x);
                let k = *wavenumber;
                coef[0].dx(cs, k) + u * (coef[1].dx(cs, k) + u * coef[2].dx(cs, k))
            }
            Kind::Shifted { base, profile } => {
                let w = profile.eval(x);
                let dw = profile.derivative(x);
                let v = u + w;
                base.d_u(v, x) * dw + base.d_x(v, x) - base.d_u(w, x) * dw - base.d_x(w, x)
            }
            Kind::Reversed(base) => -base.d_x(u, x),
        }
    }

    /// Root of `d_u(., x)` strictly inside `(lo, hi)`, if any.
    pub fn sonic_point(&self, lo: f64, hi: f64, x: f64) -> Option<f64> {
        let (a, b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let sa = self.d_u(a, x);
        let sb = self.d_u(b, x);
        if !(sa * sb < 0.0) {
            return None;
        }
        // d_u is affine in u, so linear interpolation is exact up to rounding.
        let s = a - sa * (b - a) / (sb - sa);
        Some(s.clamp(a, b))
    }

    /// `int_a^b |d_u(s, x)| ds` (signed by the orientation of `[a, b]`).
    fn abs_speed_integral(&self, a: f64, b: f64, x: f64) -> f64 {
        let fa = self.eval(a, x);
        let fb = self.eval(b, x);
        let unsigned = match self.sonic_point(a, b, x) {
            Some(s) => {
                let fs = self.eval(s, x);
                (fs - fa).abs() + (fb - fs).abs()
            }
            None => (fb - fa).abs(),
        };
        if b >= a {
            unsigned
        } else {
            -unsigned
        }
    }

    /// Engquist-Osher numerical flux `F(a, b; x) = (f(a) + f(b) - int_a^b |f_u|) / 2`.
    pub fn engquist_osher(&self, a: f64, b: f64, x: f64) -> f64 {
        if a == b {
            return self.eval(a, x);
        }
        0.5 * (self.eval(a, x) + self.eval(b, x) - self.abs_speed_integral(a, b, x))
    }

    /// `(dF/da, dF/db) = (max(f_u(a), 0), min(f_u(b), 0))`.
    pub fn engquist_osher_partials(&self, a: f64, b: f64, x: f64) -> (f64, f64) {
        (self.d_u(a, x).max(0.0), self.d_u(b, x).min(0.0))
    }
}

fn trig_pair(k: f64, x: f64) -> (f64, f64) {
    let (s, c) = (k * x).sin_cos();
    (c, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn all_models() -> Vec<FluxModel> {
        let mut v = vec![
            FluxSpec::new("constant_flux_burgers", &[]).build().unwrap(),
            FluxSpec::new("forced_burgers", &[("A", 0.5), ("T", 1.0)])
                .build()
                .unwrap(),
            FluxSpec::new("forced_burgers", &[("A", -1.3), ("T", 2.5)])
                .build()
                .unwrap(),
            FluxSpec::new("periodic_advection", &[("a0", 1.0), ("A", 0.5), ("T", 1.0)])
                .build()
                .unwrap(),
            FluxSpec::new(
                "custom_table",
                &[
                    ("c2", -0.3),
                    ("cos1", 0.8),
                    ("sin0", 0.2),
                    ("c1", 0.1),
                    ("sin2", 0.1),
                    ("T", 0.7),
                ],
            )
            .build()
            .unwrap(),
        ];
        let base = v[1].clone();
        let w: Vec<f64> = (0..32).map(|i| 0.3 * ((i as f64 + 0.5) / 32.0 * TAU).cos()).collect();
        v.push(base.shifted(&w).unwrap());
        v.push(base.reversed());
        v
    }

    #[test]
    fn builtin_examples() {
        let f = FluxSpec::new("constant_flux_burgers", &[]).build().unwrap();
        assert_eq!(f.d_x(1.7, 0.3), 0.0);
        let f = FluxSpec::new("forced_burgers", &[("A", 0.5), ("T", 1.0)])
            .build()
            .unwrap();
        assert!((f.eval(2.0, 0.25) - 3.0).abs() < 1e-15);
        let f = FluxSpec::new("periodic_advection", &[("a0", 1.0), ("A", 0.5), ("T", 1.0)])
            .build()
            .unwrap();
        for u in [-3.0, 0.0, 0.4, 10.0] {
            assert!((f.d_u(u, 0.0) - 1.5).abs() < 1e-15);
        }
    }

    #[test]
    fn registry_errors() {
        assert!(matches!(
            FluxSpec::new("nope", &[]).build(),
            Err(LabError::UnknownFlux(_))
        ));
        assert!(FluxSpec::new("periodic_advection", &[("A", 1.0)]).build().is_err());
        assert!(FluxSpec::new("forced_burgers", &[("T", 0.0)]).build().is_err());
        assert!(FluxSpec::new("forced_burgers", &[("B", 1.0)]).build().is_err());
        assert!(FluxSpec::new("custom_table", &[("c3", 1.0)]).build().is_err());
    }

    #[test]
    fn invariants_under_random_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for f in all_models() {
            for _ in 0..1000 {
                let u: f64 = rng.gen_range(-3.0..3.0);
                let x: f64 = rng.gen_range(-5.0..5.0);
                let v = f.eval(u, x);
                let shifted = f.eval(u, x + f.period());
                assert!(
                    (shifted - v).abs() <= 1e-12 * (1.0 + v.abs()),
                    "{} periodicity",
                    f.label()
                );

                let h = 1e-5;
                let fd_u = (f.eval(u + h, x) - f.eval(u - h, x)) / (2.0 * h);
                let fd_uu = (f.d_u(u + h, x) - f.d_u(u - h, x)) / (2.0 * h);
                let fd_x = (f.eval(u, x + h) - f.eval(u, x - h)) / (2.0 * h);
                let close = |exact: f64, fd: f64| (exact - fd).abs() <= 1e-5 * (1.0 + exact.abs());
                assert!(close(f.d_u(u, x), fd_u), "{} d_u", f.label());
                assert!(close(f.d_uu(u, x), fd_uu), "{} d_uu", f.label());
                assert!(close(f.d_x(u, x), fd_x), "{} d_x", f.label());
            }
        }
    }

    #[test]
    fn engquist_osher_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for f in all_models() {
            for _ in 0..200 {
                let a: f64 = rng.gen_range(-2.0..2.0);
                let b: f64 = rng.gen_range(-2.0..2.0);
                let x: f64 = rng.gen_range(0.0..1.0);
                // brute-force: F = f(0) + int_0^a max(f_u,0) + int_0^b min(f_u,0)
                let n = 20000;
                let integral = |end: f64, pos: bool| {
                    let ds = end / n as f64;
                    (0..n)
                        .map(|k| {
                            let s = (k as f64 + 0.5) * ds;
                            let c = f.d_u(s, x);
                            if pos {
                                c.max(0.0)
                            } else {
                                c.min(0.0)
                            }
                        })
                        .sum::<f64>()
                        * ds
                };
                let oracle = f.eval(0.0, x) + integral(a, true) + integral(b, false);
                let got = f.engquist_osher(a, b, x);
                assert!((got - oracle).abs() < 1e-7, "{}: {got} vs {oracle}", f.label());
            }
        }
    }

    #[test]
    fn engquist_osher_is_consistent_and_monotone() {
        let f = FluxSpec::new("forced_burgers", &[]).build().unwrap();
        for &(u, x) in &[(0.3, 0.1), (-0.7, 0.8), (0.0, 0.5)] {
            assert!((f.engquist_osher(u, u, x) - f.eval(u, x)).abs() < 1e-15);
        }
        let x = 0.3;
        let mut prev = f64::NEG_INFINITY;
        for k in 0..100 {
            let a = -2.0 + 0.04 * k as f64;
            let v = f.engquist_osher(a, 0.1, x);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }
}
