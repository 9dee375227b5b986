use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::params::ParameterVector;
use crate::model::spec::{Constraint, Direction, ModelSpec, PredictorRole, PredictorSpec};

/// Distribution of one predictor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CovariateLaw {
    /// Category probabilities, baseline first.
    Categorical(Vec<f64>),
    Normal {
        mean: f64,
        variance: f64,
    },
}

/// A data-generating model: specification, true parameters and covariate laws.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthSpec {
    pub spec: ModelSpec,
    pub params: ParameterVector,
    /// One law per declared predictor, in declaration order.
    pub laws: Vec<CovariateLaw>,
}

/// Size of a monotone coefficient ladder, as the spread of the whole block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ladder {
    Small,
    Medium,
    Large,
}

impl Ladder {
    /// Largest absolute coefficient of the block (the baseline is 0).
    pub fn range(self) -> f64 {
        match self {
            Ladder::Small => 0.5,
            Ladder::Medium => 1.5,
            Ladder::Large => 3.0,
        }
    }

    /// Evenly spaced block ending at `±range` for `categories` levels.
    pub fn block(self, categories: usize, dir: Direction) -> Vec<f64> {
        let step = self.range() / (categories - 1) as f64;
        (1..categories)
            .map(|h| dir.sign() * step * h as f64)
            .collect()
    }
}

impl std::fmt::Display for Ladder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Ladder::Small => "small",
            Ladder::Medium => "medium",
            Ladder::Large => "large",
        })
    }
}

/// Intercepts shared by both bundled truths.
pub const PRESET_ALPHA: [f64; 3] = [-2.0, 2.0, 5.5];

fn uniform(c: usize) -> CovariateLaw {
    CovariateLaw::Categorical(vec![1.0 / c as f64; c])
}

impl TruthSpec {
    pub fn new(spec: ModelSpec, params: ParameterVector, laws: Vec<CovariateLaw>) -> Result<Self> {
        spec.validate()?;
        params.check_shape(&spec)?;
        if !params.intercepts_ordered() {
            return Err(Error::UnorderedIntercepts);
        }
        if laws.len() != spec.predictors.len() {
            return Err(Error::DimensionMismatch {
                expected: spec.predictors.len(),
                got: laws.len(),
            });
        }
        if params.to_flat().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("true parameters must be finite".into()));
        }
        for (pred, law) in spec.predictors.iter().zip(&laws) {
            match (&pred.role, law) {
                (PredictorRole::Numeric, CovariateLaw::Normal { mean, variance }) => {
                    if !mean.is_finite() || !(*variance >= 0.0) || !variance.is_finite() {
                        return Err(Error::InvalidSpec(format!(
                            "`{}` needs a finite mean and a non-negative variance",
                            pred.name
                        )));
                    }
                }
                (
                    PredictorRole::Ordinal { levels, .. } | PredictorRole::Nominal { levels },
                    CovariateLaw::Categorical(p),
                ) => {
                    if p.len() != levels.len() {
                        return Err(Error::InvalidSpec(format!(
                            "`{}` has {} levels but {} probabilities",
                            pred.name,
                            levels.len(),
                            p.len()
                        )));
                    }
                    let sum: f64 = p.iter().sum();
                    if p.iter().any(|v| !(*v >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                        return Err(Error::InvalidSpec(format!(
                            "probabilities of `{}` must be non-negative and sum to 1",
                            pred.name
                        )));
                    }
                }
                _ => {
                    return Err(Error::InvalidSpec(format!(
                        "law of `{}` does not match its role",
                        pred.name
                    )))
                }
            }
        }
        Ok(TruthSpec { spec, params, laws })
    }

    /// Builds the flat parameter vector from per-predictor coefficients given
    /// in declaration order.
    pub fn from_blocks(
        spec: ModelSpec,
        alpha: &[f64],
        betas: &[Vec<f64>],
        laws: Vec<CovariateLaw>,
    ) -> Result<Self> {
        let layout = spec.layout();
        if alpha.len() != layout.n_alpha() {
            return Err(Error::DimensionMismatch {
                expected: layout.n_alpha(),
                got: alpha.len(),
            });
        }
        if betas.len() != spec.predictors.len() {
            return Err(Error::DimensionMismatch {
                expected: spec.predictors.len(),
                got: betas.len(),
            });
        }
        let mut flat = vec![0.0; layout.p];
        flat[..alpha.len()].copy_from_slice(alpha);
        for (range, b) in layout.by_predictor.iter().zip(betas) {
            if b.len() != range.len() {
                return Err(Error::DimensionMismatch {
                    expected: range.len(),
                    got: b.len(),
                });
            }
            flat[range.clone()].copy_from_slice(b);
        }
        let params = ParameterVector::from_flat(&layout, &flat)?;
        Self::new(spec, params, laws)
    }

    /// Four monotone ordinal predictors with 3–6 categories (alternating
    /// directions), a five-level nominal predictor and one normal covariate.
    pub fn mixed(ladder: Ladder) -> Self {
        let dirs = [
            Direction::Iso,
            Direction::Anti,
            Direction::Iso,
            Direction::Anti,
        ];
        let mut predictors = Vec::new();
        let mut betas = Vec::new();
        let mut laws = Vec::new();
        for (i, c) in (3..=6).enumerate() {
            predictors.push(PredictorSpec::ordinal_numbered(
                format!("op{}", i + 1),
                c,
                Constraint::Either,
            ));
            betas.push(ladder.block(c, dirs[i]));
            laws.push(uniform(c));
        }
        predictors.push(PredictorSpec::nominal_numbered("nom", 5));
        betas.push(vec![0.7, 1.4, -0.3, -1.2]);
        laws.push(CovariateLaw::Categorical(vec![0.2, 0.2, 0.3, 0.1, 0.2]));
        predictors.push(PredictorSpec::numeric("x1"));
        betas.push(vec![0.3]);
        laws.push(CovariateLaw::Normal {
            mean: 1.0,
            variance: 4.0,
        });
        let spec = ModelSpec::with_numbered_response("z", 4, predictors).expect("valid preset");
        Self::from_blocks(spec, &PRESET_ALPHA, &betas, laws).expect("valid preset")
    }

    /// Two ordinal predictors: a three-level one without effect and a
    /// four-level antitonic one.
    pub fn boundary(ladder: Ladder) -> Self {
        let predictors = vec![
            PredictorSpec::ordinal_numbered("op1", 3, Constraint::Either),
            PredictorSpec::ordinal_numbered("op2", 4, Constraint::Either),
        ];
        let betas = vec![vec![0.0, 0.0], ladder.block(4, Direction::Anti)];
        let spec = ModelSpec::with_numbered_response("z", 4, predictors).expect("valid preset");
        Self::from_blocks(spec, &PRESET_ALPHA, &betas, vec![uniform(3), uniform(4)])
            .expect("valid preset")
    }

    pub fn flat(&self) -> Vec<f64> {
        self.params.to_flat()
    }

    /// One line per coefficient, for report headers.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        for (name, v) in self.spec.coefficient_names().iter().zip(self.flat()) {
            let _ = writeln!(out, "{name} = {v}");
        }
        for (pred, law) in self.spec.predictors.iter().zip(&self.laws) {
            let _ = match law {
                CovariateLaw::Categorical(p) => writeln!(out, "{} ~ categorical{:?}", pred.name, p),
                CovariateLaw::Normal { mean, variance } => {
                    writeln!(
                        out,
                        "{} ~ normal(mean {mean}, variance {variance})",
                        pred.name
                    )
                }
            };
        }
        out
    }
}
