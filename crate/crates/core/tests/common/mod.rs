//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use gpet_core::gp::{KernelFamily, KernelSpec, BASE_JITTER};
use gpet_core::image::{gradient_magnitude, GradientField, Grid};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Posterior mean and covariance from an explicit inverse of `K + diag(noise) + jitter·I`.
pub fn explicit_posterior(
    x: &[f64],
    y: &[f64],
    noise: &[f64],
    spec: &KernelSpec,
    xstar: &[f64],
) -> (DVector<f64>, DMatrix<f64>) {
    let k = |a: f64, b: f64| spec.eval((a - b).abs());
    let m = x.len();
    let jitter = BASE_JITTER * spec.signal_variance;
    let a = DMatrix::from_fn(m, m, |i, j| k(x[i], x[j]) + if i == j { noise[i] + jitter } else { 0.0 });
    let a_inv = a.try_inverse().expect("invertible");
    let ks = DMatrix::from_fn(m, xstar.len(), |i, j| k(x[i], xstar[j]));
    let kss = DMatrix::from_fn(xstar.len(), xstar.len(), |i, j| k(xstar[i], xstar[j]));
    let mean = ks.transpose() * &a_inv * DVector::from_column_slice(y);
    let cov = kss - ks.transpose() * &a_inv * &ks;
    (mean, cov)
}

/// Log marginal likelihood via explicit inverse and LU determinant.
pub fn explicit_lml(x: &[f64], y: &[f64], noise: &[f64], spec: &KernelSpec) -> f64 {
    let m = x.len();
    let jitter = BASE_JITTER * spec.signal_variance;
    let a = DMatrix::from_fn(m, m, |i, j| {
        spec.eval((x[i] - x[j]).abs()) + if i == j { noise[i] + jitter } else { 0.0 }
    });
    let yv = DVector::from_column_slice(y);
    let quad = (yv.transpose() * a.clone().try_inverse().unwrap() * &yv)[0];
    let det = a.lu().determinant();
    -0.5 * quad - 0.5 * det.ln() - 0.5 * m as f64 * (2.0 * std::f64::consts::PI).ln()
}

pub fn random_family(rng: &mut impl Rng) -> KernelFamily {
    match rng.gen_range(0..3) {
        0 => KernelFamily::SquaredExponential,
        1 => KernelFamily::Matern32,
        _ => KernelFamily::Matern52,
    }
}

pub fn random_instance(rng: &mut impl Rng, m: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>, KernelSpec) {
    let mut x: Vec<f64> = Vec::new();
    while x.len() < m {
        let v = rng.gen_range(0..60) as f64;
        if !x.contains(&v) {
            x.push(v);
        }
    }
    x.sort_by(f64::total_cmp);
    let y: Vec<f64> = (0..m).map(|_| rng.gen_range(-20.0..20.0)).collect();
    let noise: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..2.0)).collect();
    let spec = KernelSpec::new(random_family(rng), rng.gen_range(1.0..50.0), rng.gen_range(2.0..15.0)).unwrap();
    (x, y, noise, spec)
}

pub fn rel_err(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(1e-300)
}

/// Shortest 8-connected path cost by exhaustive edge relaxation, where
/// entering a pixel costs its value.
pub fn bellman_ford(cost: &[Vec<f64>], start: (usize, usize), end: (usize, usize)) -> f64 {
    let h = cost.len();
    let w = cost[0].len();
    let mut dist = vec![vec![f64::INFINITY; w]; h];
    dist[start.0][start.1] = 0.0;
    for _ in 0..h * w {
        let mut changed = false;
        for r in 0..h {
            for c in 0..w {
                if dist[r][c].is_infinite() {
                    continue;
                }
                for nr in r.saturating_sub(1)..=(r + 1).min(h - 1) {
                    for nc in c.saturating_sub(1)..=(c + 1).min(w - 1) {
                        if (nr, nc) == (r, c) {
                            continue;
                        }
                        let d = dist[r][c] + cost[nr][nc];
                        if d < dist[nr][nc] {
                            dist[nr][nc] = d;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist[end.0][end.1]
}

/// Anti-aliased dark-over-bright step along `truth`, plus Gaussian pixel
/// noise, and its default gradient.
pub fn step_edge_gradient(truth: &[f64], height: usize, noise: f64, seed: u64) -> GradientField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise.max(1e-300)).unwrap();
    let image = Grid::from_fn(height, truth.len(), |r, c| {
        let below = (r as f64 + 0.5 - truth[c]).clamp(0.0, 1.0);
        let n = if noise > 0.0 { normal.sample(&mut rng) } else { 0.0 };
        0.25 + 0.5 * below + n
    });
    gradient_magnitude(&image)
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}
