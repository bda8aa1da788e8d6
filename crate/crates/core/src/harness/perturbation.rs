use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{PerturbationSpec, Shape};
use crate::error::{LabError, Result};
use crate::numerics::LineGrid;

/// Fraction of the domain at each edge that must start free of perturbation.
pub const EDGE_BUFFER: f64 = 0.1;
/// Largest admissible share of `||b||_1` inside the edge buffers.
pub const EDGE_MASS_LIMIT: f64 = 1e-6;

fn gauss(x: f64, c: f64, w: f64) -> f64 {
    (-(x - c) * (x - c) / (2.0 * w * w)).exp()
}

/// Subtract the multiple of `envelope` that makes `b` sum to zero.
fn project_zero_mean(b: &mut [f64], envelope: &[f64]) {
    let c = b.iter().sum::<f64>() / envelope.iter().sum::<f64>();
    for (v, e) in b.iter_mut().zip(envelope) {
        *v -= c * e;
    }
}

/// The perturbation `b` sampled at the line grid's cell centres.
///
/// `dipole` puts `+amplitude` at `-center` and `-amplitude` at `+center`;
/// `random_zero_mean` lays `lobes` Gaussians of alternating sign and random
/// magnitude side by side around `center`. Both are projected onto exactly zero
/// discrete mean along a positive envelope of the same support.
pub fn build_perturbation(spec: &PerturbationSpec, grid: &LineGrid) -> Result<Vec<f64>> {
    let xs = grid.centers();
    let (a, w, c) = (spec.amplitude, spec.width, spec.center);
    Ok(match spec.shape {
        Shape::None => vec![0.0; xs.len()],
        Shape::GaussianBump => xs.iter().map(|&x| a * gauss(x, c, w)).collect(),
        Shape::Dipole => {
            let mut b: Vec<f64> = xs.iter().map(|&x| a * (gauss(x, -c, w) - gauss(x, c, w))).collect();
            let env: Vec<f64> = xs.iter().map(|&x| gauss(x, -c, w) + gauss(x, c, w)).collect();
            project_zero_mean(&mut b, &env);
            b
        }
        Shape::RandomZeroMean => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let k = spec.lobes;
            let spacing = 2.5 * w;
            let lobes: Vec<(f64, f64)> = (0..k)
                .map(|j| {
                    let offset = (j as f64 - 0.5 * (k - 1) as f64) * spacing;
                    let jitter = rng.gen_range(-0.2..0.2) * spacing;
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    (c + offset + jitter, sign * a * rng.gen_range(0.5..1.0))
                })
                .collect();
            let mut b: Vec<f64> = xs
                .iter()
                .map(|&x| lobes.iter().map(|&(m, s)| s * gauss(x, m, w)).sum())
                .collect();
            let env: Vec<f64> = xs
                .iter()
                .map(|&x| lobes.iter().map(|&(m, _)| gauss(x, m, w)).sum())
                .collect();
            project_zero_mean(&mut b, &env);
            b
        }
    })
}

/// Share of `sum |b|` in the cells within `EDGE_BUFFER * length` of either end.
pub fn edge_mass_fraction(b: &[f64], grid: &LineGrid) -> f64 {
    let total: f64 = b.iter().map(|v| v.abs()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let lo = grid.left_edge() + EDGE_BUFFER * grid.length();
    let hi = grid.left_edge() + (1.0 - EDGE_BUFFER) * grid.length();
    let edge: f64 = grid
        .centers()
        .iter()
        .zip(b)
        .filter(|(&x, _)| x < lo || x > hi)
        .map(|(_, v)| v.abs())
        .sum();
    edge / total
}

pub fn check_edge_buffer(b: &[f64], grid: &LineGrid) -> Result<()> {
    let fraction = edge_mass_fraction(b, grid);
    if fraction > EDGE_MASS_LIMIT {
        return Err(LabError::EdgeBuffer {
            fraction,
            limit: EDGE_MASS_LIMIT,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{lap_number, sign_changes, LapConfig};
    use crate::numerics::{primitive, BoundaryMode, CellGrid};

    fn grid() -> LineGrid {
        LineGrid::new(CellGrid::new(32, 1.0).unwrap(), 32, BoundaryMode::PinnedToWp).unwrap()
    }

    fn spec(shape: Shape) -> PerturbationSpec {
        PerturbationSpec {
            shape,
            amplitude: 0.3,
            width: 0.5,
            center: 2.0,
            ..PerturbationSpec::default()
        }
    }

    #[test]
    fn dipole_is_zero_mean_with_a_single_bump_primitive() {
        let g = grid();
        let b = build_perturbation(&spec(Shape::Dipole), &g).unwrap();
        let scale: f64 = b.iter().map(|v| v.abs()).sum();
        assert!(b.iter().sum::<f64>().abs() <= 1e-15 * scale);
        let v = primitive(&b, g.spacing());
        assert!(v.iter().all(|&x| x >= -1e-15));
        assert_eq!(lap_number(&v, &LapConfig::default()), 1);
        assert_eq!(sign_changes(&b, &LapConfig::default()), 1);
        check_edge_buffer(&b, &g).unwrap();
    }

    #[test]
    fn random_zero_mean_is_seeded_and_alternates() {
        let g = grid();
        let mut s = spec(Shape::RandomZeroMean);
        s.center = 0.0;
        s.lobes = 7;
        for seed in 0..20 {
            s.seed = seed;
            let b = build_perturbation(&s, &g).unwrap();
            assert_eq!(b, build_perturbation(&s, &g).unwrap());
            let scale: f64 = b.iter().map(|v| v.abs()).sum();
            assert!(b.iter().sum::<f64>().abs() <= 1e-14 * scale);
            assert_eq!(sign_changes(&b, &LapConfig::default()), 6, "seed {seed}");
            let v = primitive(&b, g.spacing());
            assert!(lap_number(&v, &LapConfig::default()) <= 6);
        }
        s.seed = 1;
        let other = build_perturbation(&s, &g).unwrap();
        s.seed = 2;
        assert_ne!(other, build_perturbation(&s, &g).unwrap());
    }

    #[test]
    fn edge_buffer_rejects_data_near_the_ends() {
        let g = grid();
        let mut s = spec(Shape::GaussianBump);
        s.center = g.left_edge() + 1.0;
        let b = build_perturbation(&s, &g).unwrap();
        assert!(edge_mass_fraction(&b, &g) > 0.5);
        assert!(matches!(check_edge_buffer(&b, &g), Err(LabError::EdgeBuffer { .. })));
        assert_eq!(edge_mass_fraction(&vec![0.0; g.n_cells()], &g), 0.0);
    }
}
