//! Expected information against two independent computations: the exact
//! expectation of outer products of finite-difference scores, and a Monte Carlo
//! average over simulated responses.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use poclm::model::likelihood::{derivatives_flat, fisher_flat, loglik_flat};
use poclm::model::DesignData;

const K: usize = 3;
const COLS: usize = 3;
/// α (2) | ordinal block (2) | numeric (1).
const GAMMA: [f64; 5] = [-0.7, 0.9, -0.4, -1.1, 0.6];

fn rows(n: usize, seed: u64) -> Vec<[f64; COLS]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut r = [0.0; COLS];
            match rng.random_range(0..3) {
                0 => {}
                c => r[c - 1] = 1.0,
            }
            r[2] = rng.random_range(-1.5..1.5);
            r
        })
        .collect()
}

fn probabilities(row: &[f64]) -> Vec<f64> {
    let shift: f64 = row.iter().zip(&GAMMA[K - 1..]).map(|(x, b)| x * b).sum();
    let cdf = |j: usize| match j {
        0 => 0.0,
        j if j == K => 1.0,
        j => 1.0 / (1.0 + (-(GAMMA[j - 1] + shift)).exp()),
    };
    (1..=K).map(|j| cdf(j) - cdf(j - 1)).collect()
}

fn fd_score(row: &[f64], y: usize) -> Vec<f64> {
    let d = DesignData::from_parts(K, COLS, vec![y], row.to_vec()).unwrap();
    let h = 1e-6;
    (0..GAMMA.len())
        .map(|j| {
            let (mut up, mut down) = (GAMMA.to_vec(), GAMMA.to_vec());
            up[j] += h;
            down[j] -= h;
            (loglik_flat(&d, &up).unwrap() - loglik_flat(&d, &down).unwrap()) / (2.0 * h)
        })
        .collect()
}

fn design(rows: &[[f64; COLS]], y: Vec<usize>) -> DesignData {
    DesignData::from_parts(K, COLS, y, rows.iter().flatten().copied().collect()).unwrap()
}

#[test]
fn matches_exact_expectation() {
    let rows = rows(40, 3);
    let p = GAMMA.len();
    let mut expected = vec![0.0; p * p];
    for r in &rows {
        for (y, pi) in probabilities(r).into_iter().enumerate() {
            let s = fd_score(r, y);
            for a in 0..p {
                for b in 0..p {
                    expected[a * p + b] += pi * s[a] * s[b];
                }
            }
        }
    }
    let got = fisher_flat(&design(&rows, vec![0; rows.len()]), &GAMMA).unwrap();
    let scale = expected.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (g, e) in got.iter().zip(&expected) {
        assert!((g - e).abs() <= 1e-6 * scale, "{g} vs {e}");
    }
}

#[test]
fn matches_monte_carlo_score_variance() {
    let rows = rows(25, 5);
    let p = GAMMA.len();
    let probs: Vec<Vec<f64>> = rows.iter().map(|r| probabilities(r)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let draws = 20_000;
    let mut acc = vec![0.0; p * p];
    for _ in 0..draws {
        let y: Vec<usize> = probs
            .iter()
            .map(|pi| {
                let u: f64 = rng.random();
                let mut c = 0.0;
                pi.iter()
                    .position(|q| {
                        c += q;
                        u <= c
                    })
                    .unwrap_or(K - 1)
            })
            .collect();
        let s = derivatives_flat(&design(&rows, y), &GAMMA, false)
            .unwrap()
            .score;
        for a in 0..p {
            for b in 0..p {
                acc[a * p + b] += s[a] * s[b] / draws as f64;
            }
        }
    }
    let exact = fisher_flat(&design(&rows, vec![0; rows.len()]), &GAMMA).unwrap();
    for a in 0..p {
        let sd = exact[a * p + a].sqrt();
        for b in 0..p {
            // Standard error of a mean of outer products is about sd_a sd_b (1 + ρ²)^½ / √draws.
            let tol = 5.0 * 1.5 * sd * exact[b * p + b].sqrt() / (draws as f64).sqrt();
            let (g, e) = (acc[a * p + b], exact[a * p + b]);
            assert!((g - e).abs() <= tol, "({a}, {b}): {g} vs {e} (tol {tol})");
        }
    }
}
