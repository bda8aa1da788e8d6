use std::f64::consts::TAU;

use super::*;
use crate::numerics::{adaptive_simpson, CellGrid, FluxSpec, Profile};

fn cfg() -> NewtonConfig {
    NewtonConfig::default()
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn residual_of(flux: &crate::numerics::FluxModel, prof: &Profile) -> f64 {
    sup(&cell_residual(flux, prof.grid(), prof.values(), Stencil::Centered))
}

/// Richardson extrapolation from grids with `n` and `3n` cells, whose centres nest.
fn richardson(coarse: &[f64], fine: &[f64]) -> Vec<f64> {
    coarse
        .iter()
        .enumerate()
        .map(|(i, c)| (9.0 * fine[3 * i + 1] - c) / 8.0)
        .collect()
}

/// Periodic solution of `y' + beta(x) y = c`, mean one, by quadrature on [0, 1]
/// (`big_b` is an antiderivative of `beta` with `big_b(0) = 0`).
fn first_order_oracle(big_b: impl Fn(f64) -> f64 + Copy, xs: &[f64]) -> Vec<f64> {
    let ebar = |x: f64| big_b(x).exp();
    let total = adaptive_simpson(&ebar, 0.0, 1.0, 1e-14);
    // y = e^{-B}(y0 + c int_0^x e^{B}); periodicity: e^{-B(1)}(y0 + c total) = y0
    let y0 = 1.0;
    let c = y0 * ((big_b(1.0)).exp() - 1.0) / total;
    let y = move |x: f64| (-big_b(x)).exp() * (y0 + c * adaptive_simpson(&ebar, 0.0, x, 1e-14));
    let mean = adaptive_simpson(&y, 0.0, 1.0, 1e-13);
    xs.iter().map(|&x| y(x) / mean).collect()
}

#[test]
fn constant_flux_gives_constants() {
    let f = FluxSpec::new("constant_flux_burgers", &[]).build().unwrap();
    let g = CellGrid::new(32, 1.0).unwrap();
    let w = solve_stationary(&f, 0.7, &g, &cfg(), None).unwrap();
    assert!(w.values().iter().all(|v| (v - 0.7).abs() < 1e-15));
    assert!(residual_of(&f, &w) <= 1e-11);
    let phi = solve_dp_w(&f, &w).unwrap();
    assert!(phi.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
}

#[test]
fn periodic_advection_matches_linear_ode_oracle() {
    let f = FluxSpec::new("periodic_advection", &[("a0", 1.0), ("A", 0.5), ("T", 1.0)])
        .build()
        .unwrap();
    let solve = |n: usize| {
        let g = CellGrid::new(n, 1.0).unwrap();
        let w = solve_stationary(&f, 1.0, &g, &cfg(), None).unwrap();
        assert!((w.mean() - 1.0).abs() < 1e-12);
        // 1e-11 is above the rounding floor of the three-point Laplacian only on coarse grids
        let bound = if n <= 64 { 1e-11 } else { 1e-10 };
        assert!(residual_of(&f, &w) <= bound, "residual {}", residual_of(&f, &w));
        w
    };
    let coarse = solve(64);
    let fine = solve(192);
    let extrap = richardson(coarse.values(), fine.values());
    // -w'' + (a w)' = 0 integrates to w' - a w = -c, i.e. y' + beta y = c with beta = -a.
    let big_b = |x: f64| -(x + 0.5 * (TAU * x).sin() / TAU);
    let oracle = first_order_oracle(big_b, &coarse.grid().centers());
    let err = extrap
        .iter()
        .zip(&oracle)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-8, "extrapolated error {err}");
    let spread = coarse.max_value() - coarse.min().1;
    assert!(spread > 0.1, "profile should be nonconstant");
}

#[test]
fn forced_burgers_zero_mean_and_refinement() {
    let f = FluxSpec::new("forced_burgers", &[("A", 0.5), ("T", 1.0)])
        .build()
        .unwrap();
    let g = CellGrid::new(64, 1.0).unwrap();
    let w = solve_stationary(&f, 0.0, &g, &cfg(), None).unwrap();
    assert!(w.mean().abs() < 1e-12);
    assert!(residual_of(&f, &w) <= 1e-11);

    let (d1, d2, order) = grid_convergence(&f, 0.5, 32, &cfg(), Stencil::Centered).unwrap();
    let ratio = d1 / d2;
    assert!(
        (3.5..=4.5).contains(&ratio),
        "ratio {ratio}, d1 {d1}, d2 {d2}, order {order}"
    );
}

#[test]
fn dp_w_properties() {
    let adv = FluxSpec::new("periodic_advection", &[("a0", 1.0), ("A", 0.5)])
        .build()
        .unwrap();
    let g = CellGrid::new(64, 1.0).unwrap();
    let phis: Vec<Profile> = [0.3, 1.7]
        .iter()
        .map(|&p| {
            let w = solve_stationary(&adv, p, &g, &cfg(), None).unwrap();
            solve_dp_w(&adv, &w).unwrap()
        })
        .collect();
    let diff = phis[0]
        .values()
        .iter()
        .zip(phis[1].values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(diff < 1e-10);

    let f = FluxSpec::new("forced_burgers", &[("A", 0.5)]).build().unwrap();
    let w0 = solve_stationary(&f, 0.0, &g, &cfg(), None).unwrap();
    let phi = solve_dp_w(&f, &w0).unwrap();
    assert!((phi.mean() - 1.0).abs() < 1e-12);
    assert!(phi.min().1 > 0.0);
    let delta = 1e-4;
    let wp = solve_stationary(&f, delta, &g, &cfg(), Some(&w0)).unwrap();
    let wm = solve_stationary(&f, -delta, &g, &cfg(), Some(&w0)).unwrap();
    let err = (0..64)
        .map(|i| ((wp.values()[i] - wm.values()[i]) / (2.0 * delta) - phi.values()[i]).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-6, "finite-difference mismatch {err}");
}

#[test]
fn constant_family() {
    let f = FluxSpec::new("constant_flux_burgers", &[]).build().unwrap();
    let g = CellGrid::new(16, 1.0).unwrap();
    let fam = build_family(&f, -1.0, 1.0, 16, &g, &cfg()).unwrap();
    assert_eq!(fam.len(), 17);
    for (p, prof) in fam.p_grid().iter().zip(fam.profiles()) {
        assert!(prof.values().iter().all(|v| (v - p).abs() < 1e-14));
    }
    assert!((fam.alpha() - 1.0).abs() < 1e-12);
    assert!(build_family(&f, -1.0, 1.0, 8, &g, &cfg()).is_err());
    assert!(build_family(&f, 1.0, -1.0, 16, &g, &cfg()).is_err());
}

#[test]
fn forced_burgers_family_and_nesting() {
    let f = FluxSpec::new("forced_burgers", &[("A", 0.5), ("T", 1.0)])
        .build()
        .unwrap();
    let g = CellGrid::new(64, 1.0).unwrap();
    let fam = build_family(&f, -2.0, 2.0, 32, &g, &cfg()).unwrap();
    assert!(fam.alpha() > 0.0);
    for (j, prof) in fam.profiles().iter().enumerate() {
        assert!((prof.mean() - fam.p_grid()[j]).abs() < 1e-10);
        assert!(
            fam.residuals()[j] <= 1e-11,
            "member {j} residual {}",
            fam.residuals()[j]
        );
        assert!((fam.dp_profiles()[j].mean() - 1.0).abs() < 1e-8);
    }
    let fine = build_family(&f, -2.0, 2.0, 64, &g, &cfg()).unwrap();
    for j in 0..fam.len() {
        let a = fam.profiles()[j].values();
        let b = fine.profiles()[2 * j].values();
        let d = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(d < 1e-9, "member {j} differs by {d}");
    }
}

#[test]
fn family_round_trips_through_file() {
    let f = FluxSpec::new("forced_burgers", &[("A", 0.5)]).build().unwrap();
    let g = CellGrid::new(16, 1.0).unwrap();
    let fam = build_family_with(&f, -1.0, 1.0, 16, &g, &cfg(), Stencil::EngquistOsher).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("family.json");
    fam.save(&path).unwrap();
    let back = StationaryFamily::load(&path).unwrap();
    assert_eq!(back.p_grid(), fam.p_grid());
    assert_eq!(back.profiles(), fam.profiles());
    assert_eq!(back.dp_profiles(), fam.dp_profiles());
    assert_eq!(back.alpha(), fam.alpha());
    assert_eq!(back.stencil(), Stencil::EngquistOsher);
}

#[test]
fn theta_x_independent_is_one() {
    let f = FluxSpec::new("constant_flux_burgers", &[]).build().unwrap();
    let g = CellGrid::new(32, 1.0).unwrap();
    let th = solve_theta(&f, &g).unwrap();
    assert!(th.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
}

#[test]
fn theta_cosine_matches_integrating_factor() {
    let beta = 0.8;
    let f = FluxSpec::new("custom_table", &[("c2", 0.5), ("cos1", beta)])
        .build()
        .unwrap();
    let solve = |n: usize| solve_theta(&f, &CellGrid::new(n, 1.0).unwrap()).unwrap();
    let coarse = solve(256);
    let fine = solve(768);
    let extrap = richardson(coarse.values(), fine.values());
    let big_b = move |x: f64| beta * (TAU * x).sin() / TAU;
    let oracle = first_order_oracle(big_b, &coarse.grid().centers());
    let err = extrap
        .iter()
        .zip(&oracle)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-9, "extrapolated theta error {err}");
}

#[test]
fn theta_paths_agree_and_match_reversed_construction() {
    let fluxes = [
        FluxSpec::new("forced_burgers", &[("A", 0.5)]).build().unwrap(),
        FluxSpec::new("periodic_advection", &[("a0", 1.0), ("A", 0.5)])
            .build()
            .unwrap(),
        FluxSpec::new(
            "custom_table",
            &[("c2", 0.5), ("cos1", 0.8), ("sin1", -0.4), ("c1", 0.3)],
        )
        .build()
        .unwrap(),
    ];
    let g = CellGrid::new(128, 1.0).unwrap();
    for f in &fluxes {
        let a = solve_theta(f, &g).unwrap();
        let b = solve_theta_by_quadrature(f, &g).unwrap();
        let d = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(d < 1e-9, "{}: paths differ by {d}", f.label());
        assert!((a.mean() - 1.0).abs() < 1e-12 && a.min().1 > 0.0);

        let rev = f.reversed();
        let w0 = solve_stationary(&rev, 0.0, &g, &cfg(), None).unwrap();
        assert!(sup(w0.values()) < 1e-12);
        let dp = solve_dp_w(&rev, &w0).unwrap();
        let d = a
            .values()
            .iter()
            .zip(dp.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(d < 1e-9, "{}: reversed construction differs by {d}", f.label());
    }
}

#[test]
fn theta_rejects_unnormalized_flux() {
    let f = FluxSpec::new("custom_table", &[("c0", 0.1), ("c2", 0.5)])
        .build()
        .unwrap();
    let g = CellGrid::new(16, 1.0).unwrap();
    assert!(solve_theta(&f, &g).is_err());
    assert!(solve_theta_by_quadrature(&f, &g).is_err());
}

#[test]
fn normalization_examples() {
    let f = FluxSpec::new("constant_flux_burgers", &[]).build().unwrap();
    let g = CellGrid::new(16, 1.0).unwrap();
    let wp = Profile::constant(g, 0.4);
    let gflux = normalize_about_wp(&f, &wp).unwrap();
    for &(v, x) in &[(0.3, 0.1), (-1.2, 0.77), (0.0, 0.5)] {
        let expect = f.eval(v + 0.4, x) - f.eval(0.4, x);
        assert!((gflux.eval(v, x) - expect).abs() < 1e-14);
    }

    let fb = FluxSpec::new("forced_burgers", &[("A", 0.5)]).build().unwrap();
    let g = CellGrid::new(64, 1.0).unwrap();
    let w = solve_stationary(&fb, 0.8, &g, &cfg(), None).unwrap();
    let shifted = normalize_about_wp(&fb, &w).unwrap();
    let zero = solve_stationary(&shifted, 0.0, &g, &cfg(), None).unwrap();
    assert!(sup(zero.values()) < 1e-10);
    for i in 0..64 {
        assert!(shifted.eval(0.0, g.center(i)).abs() < 1e-15);
    }
}

#[test]
fn newton_reports_nonconvergence() {
    let f = FluxSpec::new("forced_burgers", &[("A", 3.0)]).build().unwrap();
    let g = CellGrid::new(16, 1.0).unwrap();
    let tight = NewtonConfig {
        max_iterations: 1,
        ..NewtonConfig::default()
    };
    let err = solve_stationary(&f, 2.0, &g, &tight, None).unwrap_err();
    assert!(matches!(err, crate::LabError::NonConvergence { .. }), "{err}");
}
