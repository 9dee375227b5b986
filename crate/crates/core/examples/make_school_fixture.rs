//! Regenerates `fixtures/school_synthetic.csv`.
//!
//! Covariates and responses are drawn from the reference school-performance
//! fit. Single responses are then moved to a neighbouring category while that
//! shrinks the score statistic at the fit, and finally the `regisRat` values
//! are nudged (minimum-norm Gauss-Newton steps) until the score vanishes, so
//! the file's UMLE reproduces the fit.
//!
//! Usage: `cargo run --release --example make_school_fixture [OUTPUT]`

use std::error::Error;

use nalgebra::{DMatrix, DVector};
use poclm::model::data::DesignData;
use poclm::model::likelihood::{derivatives_flat, fisher_flat, sigmoid};
use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

const N: usize = 5333;
const SEED: u64 = 20_190_705;
const LEVELS: [&str; 4] = ["Insufficient", "Medium-Low", "Medium", "High"];
const FUNDING: [&str; 3] = ["Public", "Mixed", "Private"];
const PERF_PROBS: [f64; 4] = [0.25, 0.30, 0.30, 0.15];
const FUNDING_PROBS: [f64; 3] = [0.80, 0.05, 0.15];

/// α (3) | perf2016 (3) | funding (2) | regisRat (1).
const GAMMA: [f64; 9] = [
    -0.62759, 1.83259, 5.87701, -1.23255, -3.20697, -5.81422, 0.00609, -0.73117, -0.34234,
];

fn design(perf: &[usize], funding: &[usize], ratio: &[f64], y: &[usize]) -> DesignData {
    let mut x = Vec::with_capacity(y.len() * 6);
    for i in 0..y.len() {
        for h in 1..4 {
            x.push(f64::from(perf[i] == h));
        }
        for h in 1..3 {
            x.push(f64::from(funding[i] == h));
        }
        x.push(ratio[i]);
    }
    DesignData::from_parts(4, 6, y.to_vec(), x).expect("valid design")
}

fn obs_score(perf: usize, funding: usize, ratio: f64, y: usize) -> Vec<f64> {
    let d = design(&[perf], &[funding], &[ratio], &[y]);
    derivatives_flat(&d, &GAMMA, false)
        .expect("finite score")
        .score
}

fn sample_response(rng: &mut ChaCha8Rng, eta: f64) -> usize {
    let u: f64 = rng.random();
    GAMMA[..3]
        .iter()
        .position(|a| u <= sigmoid(a + eta))
        .unwrap_or(3)
}

fn main() -> Result<(), Box<dyn Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/school_synthetic.csv").to_string()
    });
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let perf_law = WeightedIndex::new(PERF_PROBS)?;
    let funding_law = WeightedIndex::new(FUNDING_PROBS)?;
    let log_ratio = Normal::new(0.0f64, 0.2)?;

    let perf: Vec<usize> = (0..N).map(|_| perf_law.sample(&mut rng)).collect();
    let funding: Vec<usize> = (0..N).map(|_| funding_law.sample(&mut rng)).collect();
    let mut ratio: Vec<f64> = (0..N).map(|_| log_ratio.sample(&mut rng).exp()).collect();
    let y: Vec<usize> = (0..N)
        .map(|i| {
            let mut eta = GAMMA[8] * ratio[i];
            if perf[i] > 0 {
                eta += GAMMA[2 + perf[i]];
            }
            if funding[i] > 0 {
                eta += GAMMA[5 + funding[i]];
            }
            sample_response(&mut rng, eta)
        })
        .collect();

    // Greedy response moves, minimising s' F^{-1} s.
    let data = design(&perf, &funding, &ratio, &y);
    let fisher = DMatrix::from_row_slice(9, 9, &fisher_flat(&data, &GAMMA)?);
    let a = fisher.try_inverse().ok_or("singular information")?;
    let mut y = y;
    let mut s = DVector::from_vec(derivatives_flat(&data, &GAMMA, false)?.score);
    let own: Vec<DVector<f64>> = (0..N)
        .map(|i| DVector::from_vec(obs_score(perf[i], funding[i], ratio[i], y[i])))
        .collect();
    let mut own = own;
    for step in 0..5000 {
        let q = s.dot(&(&a * &s));
        let grad = &a * &s;
        let mut best: Option<(f64, usize, usize, DVector<f64>)> = None;
        for i in 0..N {
            for to in [y[i].wrapping_sub(1), y[i] + 1] {
                if to > 3 {
                    continue;
                }
                let new = DVector::from_vec(obs_score(perf[i], funding[i], ratio[i], to));
                let delta = &new - &own[i];
                let change = 2.0 * grad.dot(&delta) + delta.dot(&(&a * &delta));
                if change < best.as_ref().map_or(0.0, |b| b.0) {
                    best = Some((change, i, to, new));
                }
            }
        }
        match best {
            Some((change, i, to, new)) if change < -1e-12 => {
                s += &new - &own[i];
                own[i] = new;
                y[i] = to;
                if step % 100 == 0 {
                    eprintln!("move {step}: statistic {:.3e}", q + change);
                }
            }
            _ => {
                eprintln!("greedy stage stopped after {step} moves at {q:.3e}");
                break;
            }
        }
    }

    let h = 1e-6;
    for iter in 0..50 {
        let data = design(&perf, &funding, &ratio, &y);
        let s = DVector::from_vec(derivatives_flat(&data, &GAMMA, false)?.score);
        let norm = s.amax();
        eprintln!("iteration {iter}: max |score| = {norm:.3e}");
        if norm < 1e-9 {
            break;
        }
        // Column i: derivative of observation i's score with respect to its ratio.
        let mut jac = DMatrix::<f64>::zeros(9, N);
        for i in 0..N {
            let one = |r: f64| {
                let d = design(&perf[i..=i], &funding[i..=i], &[r], &y[i..=i]);
                derivatives_flat(&d, &GAMMA, false).map(|d| d.score)
            };
            let (up, down) = (one(ratio[i] + h)?, one(ratio[i] - h)?);
            for r in 0..9 {
                jac[(r, i)] = (up[r] - down[r]) / (2.0 * h);
            }
        }
        let gram = &jac * jac.transpose();
        let w = gram
            .cholesky()
            .ok_or("singular Gauss-Newton system")?
            .solve(&s);
        let delta = -(jac.transpose() * w);
        for (r, d) in ratio.iter_mut().zip(delta.iter()) {
            *r += d;
        }
    }
    let min = ratio.iter().cloned().fold(f64::INFINITY, f64::min);
    eprintln!("smallest regisRat: {min:.4}");

    let mut w = csv::Writer::from_path(&out)?;
    w.write_record(["perf2019", "perf2016", "funding", "regisRat"])?;
    for i in 0..N {
        w.write_record([
            LEVELS[y[i]].to_string(),
            LEVELS[perf[i]].to_string(),
            FUNDING[funding[i]].to_string(),
            format!("{:.12}", ratio[i]),
        ])?;
    }
    w.flush()?;
    eprintln!("wrote {out}");
    Ok(())
}
