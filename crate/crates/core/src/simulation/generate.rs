use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

use crate::error::{Error, Result};
use crate::model::data::{encode_design, DesignData, RawTable};
use crate::model::likelihood::category_probabilities;
use crate::simulation::truth::{CovariateLaw, TruthSpec};

/// Random stream for replicate `replicate` at the `size_index`-th sample size.
///
/// The ChaCha8 generator is keyed by the master seed; the stream number is
/// `size_index << 32 | replicate`, so every (size, replicate) pair gets its own
/// independent stream regardless of execution order.
pub fn replicate_rng(master: u64, size_index: usize, replicate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((size_index as u64) << 32) | replicate as u64);
    rng
}

enum Sampler {
    Categorical(WeightedIndex<f64>),
    Normal(Normal<f64>),
}

/// Draws `n` observations from `truth` using `rng`.
pub fn generate_with(truth: &TruthSpec, n: usize, rng: &mut ChaCha8Rng) -> Result<RawTable> {
    let spec = &truth.spec;
    let layout = spec.layout();
    let offset = layout.n_alpha();
    let samplers = truth
        .laws
        .iter()
        .map(|law| match law {
            CovariateLaw::Categorical(p) => WeightedIndex::new(p)
                .map(Sampler::Categorical)
                .map_err(|e| Error::InvalidSpec(e.to_string())),
            CovariateLaw::Normal { mean, variance } => Normal::new(*mean, variance.sqrt())
                .map(Sampler::Normal)
                .map_err(|e| Error::InvalidSpec(e.to_string())),
        })
        .collect::<Result<Vec<_>>>()?;

    let mut columns: Vec<String> = vec![spec.response.name.clone()];
    columns.extend(spec.predictors.iter().map(|p| p.name.clone()));
    let mut table = RawTable::new(columns);
    let mut row = vec![0.0; layout.n_beta()];
    for _ in 0..n {
        row.iter_mut().for_each(|v| *v = 0.0);
        let mut cells = Vec::with_capacity(spec.predictors.len() + 1);
        cells.push(String::new());
        for ((pred, sampler), range) in spec
            .predictors
            .iter()
            .zip(&samplers)
            .zip(&layout.by_predictor)
        {
            match sampler {
                Sampler::Categorical(w) => {
                    let level = w.sample(rng);
                    if level > 0 {
                        row[range.start - offset + level - 1] = 1.0;
                    }
                    cells.push(pred.levels().expect("categorical")[level].clone());
                }
                Sampler::Normal(d) => {
                    let v = d.sample(rng);
                    row[range.start - offset] = v;
                    cells.push(format!("{v}"));
                }
            }
        }
        let probs = category_probabilities(&truth.params, &row)?;
        let z = WeightedIndex::new(&probs)
            .map_err(|e| Error::InvalidSpec(e.to_string()))?
            .sample(rng);
        cells[0] = spec.response.levels[z].clone();
        table.rows.push(cells);
    }
    Ok(table)
}

/// `n` i.i.d. observations from `truth`; identical arguments give identical tables.
pub fn generate_dataset(truth: &TruthSpec, n: usize, seed: u64) -> Result<RawTable> {
    generate_with(truth, n, &mut replicate_rng(seed, 0, 0))
}

/// Dummy-coded version of [`generate_with`].
pub fn generate_design(truth: &TruthSpec, n: usize, rng: &mut ChaCha8Rng) -> Result<DesignData> {
    encode_design(&generate_with(truth, n, rng)?, &truth.spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::likelihood::sigmoid;
    use crate::simulation::truth::Ladder;

    #[test]
    fn same_seed_same_table() {
        let t = TruthSpec::mixed(Ladder::Medium);
        let a = generate_dataset(&t, 50, 7).unwrap();
        let b = generate_dataset(&t, 50, 7).unwrap();
        let c = generate_dataset(&t, 50, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(
            a.columns,
            vec!["z", "op1", "op2", "op3", "op4", "nom", "x1"]
        );
    }

    #[test]
    fn marginals_match_laws() {
        let t = TruthSpec::mixed(Ladder::Small);
        let n = 10_000;
        let raw = generate_dataset(&t, n, 11).unwrap();
        let col = raw.column("nom").unwrap();
        for (level, p) in [0.2, 0.2, 0.3, 0.1, 0.2].iter().enumerate() {
            let label = (level + 1).to_string();
            let freq = raw.rows.iter().filter(|r| r[col] == label).count() as f64 / n as f64;
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((freq - p).abs() < 3.0 * se, "level {label}: {freq}");
        }
        let col = raw.column("x1").unwrap();
        let mean: f64 = raw
            .rows
            .iter()
            .map(|r| r[col].parse::<f64>().unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 3.0 * 2.0 / (n as f64).sqrt());
    }

    #[test]
    fn zero_slopes_give_intercept_probabilities() {
        let base = TruthSpec::boundary(Ladder::Small);
        let zeros = vec![vec![0.0; 2], vec![0.0; 3]];
        let t = TruthSpec::from_blocks(
            base.spec.clone(),
            &[-2.0, 2.0, 5.5],
            &zeros,
            base.laws.clone(),
        )
        .unwrap();
        let n = 10_000;
        let raw = generate_dataset(&t, n, 3).unwrap();
        let cum = [sigmoid(-2.0), sigmoid(2.0), sigmoid(5.5), 1.0];
        let mut prev = 0.0;
        for (j, c) in cum.iter().enumerate() {
            let p = c - prev;
            prev = *c;
            let label = (j + 1).to_string();
            let freq = raw.rows.iter().filter(|r| r[0] == label).count() as f64 / n as f64;
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!(
                (freq - p).abs() < 3.0 * se,
                "category {label}: {freq} vs {p}"
            );
        }
    }
}
