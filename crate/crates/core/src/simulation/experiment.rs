use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::FitOptions;
use crate::inference::fits::Fits;
use crate::inference::hypothesis::{
    test_direction, test_monotonicity, test_no_effect_in, TestOptions,
};
use crate::inference::quantile::QuantileFamily;
use crate::inference::region::{cr_membership, RegionKind, RegionSpec, RegionTarget};
use crate::model::spec::{Constraint, Direction, ModelSpec, PredictorSpec};
use crate::par::{map_indices, Execution};
use crate::simulation::generate::{generate_design, replicate_rng};
use crate::simulation::report::{ExperimentReport, ReportRow, SizeDiagnostics, Split};
use crate::simulation::truth::{CovariateLaw, Ladder, TruthSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Coverage,
    Rejection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Four ordinal predictors, one nominal, one numeric.
    Mixed,
    /// A null ordinal predictor next to an antitonic one.
    Boundary,
}

/// One predictor of a custom truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "lowercase", deny_unknown_fields)]
pub enum PredictorTruth {
    Ordinal {
        name: String,
        probs: Vec<f64>,
        beta: Vec<f64>,
        #[serde(default = "either")]
        constraint: Constraint,
    },
    Nominal {
        name: String,
        probs: Vec<f64>,
        beta: Vec<f64>,
    },
    Numeric {
        name: String,
        mean: f64,
        variance: f64,
        beta: f64,
    },
}

fn either() -> Constraint {
    Constraint::Either
}

/// Either a preset (with a ladder) or an explicit list of predictors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthConfig {
    pub preset: Option<Preset>,
    pub ladder: Option<Ladder>,
    pub alpha: Option<Vec<f64>>,
    #[serde(default)]
    pub predictors: Vec<PredictorTruth>,
}

impl TruthConfig {
    pub fn build(&self) -> Result<TruthSpec> {
        match self.preset {
            Some(preset) => {
                if !self.predictors.is_empty() || self.alpha.is_some() {
                    return Err(Error::Config(
                        "a preset truth cannot also list predictors or intercepts".into(),
                    ));
                }
                let ladder = self.ladder.unwrap_or(Ladder::Small);
                Ok(match preset {
                    Preset::Mixed => TruthSpec::mixed(ladder),
                    Preset::Boundary => TruthSpec::boundary(ladder),
                })
            }
            None => {
                let alpha = self
                    .alpha
                    .as_ref()
                    .ok_or_else(|| Error::Config("a custom truth needs `alpha`".into()))?;
                if self.predictors.is_empty() {
                    return Err(Error::Config(
                        "a custom truth needs at least one predictor".into(),
                    ));
                }
                let mut preds = Vec::new();
                let mut betas = Vec::new();
                let mut laws = Vec::new();
                for p in &self.predictors {
                    match p {
                        PredictorTruth::Ordinal {
                            name,
                            probs,
                            beta,
                            constraint,
                        } => {
                            preds.push(PredictorSpec::ordinal_numbered(
                                name.clone(),
                                probs.len(),
                                *constraint,
                            ));
                            betas.push(beta.clone());
                            laws.push(CovariateLaw::Categorical(probs.clone()));
                        }
                        PredictorTruth::Nominal { name, probs, beta } => {
                            preds.push(PredictorSpec::nominal_numbered(name.clone(), probs.len()));
                            betas.push(beta.clone());
                            laws.push(CovariateLaw::Categorical(probs.clone()));
                        }
                        PredictorTruth::Numeric {
                            name,
                            mean,
                            variance,
                            beta,
                        } => {
                            preds.push(PredictorSpec::numeric(name.clone()));
                            betas.push(vec![*beta]);
                            laws.push(CovariateLaw::Normal {
                                mean: *mean,
                                variance: *variance,
                            });
                        }
                    }
                }
                let spec = ModelSpec::with_numbered_response("z", alpha.len() + 1, preds)?;
                TruthSpec::from_blocks(spec, alpha, &betas, laws)
            }
        }
    }
}

fn default_level() -> f64 {
    0.95
}

fn default_kinds() -> Vec<RegionKind> {
    vec![RegionKind::Uccr, RegionKind::Ccr, RegionKind::Acr]
}

fn default_experiments() -> Vec<ExperimentKind> {
    vec![ExperimentKind::Coverage]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default = "default_experiments")]
    pub experiments: Vec<ExperimentKind>,
    pub truth: TruthConfig,
    pub sample_sizes: Vec<usize>,
    pub replicates: usize,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default = "default_kinds")]
    pub kinds: Vec<RegionKind>,
    /// Degrees of freedom of coverage regions; defaults to the full dimension.
    /// Rejection tests always use the block length of the tested predictor.
    #[serde(default)]
    pub df: Option<usize>,
    #[serde(default)]
    pub family: QuantileFamily,
    pub seed: u64,
    #[serde(default)]
    pub max_iterations: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Config("`replicates` must be at least 1".into()));
        }
        if self.sample_sizes.is_empty() || self.sample_sizes.contains(&0) {
            return Err(Error::Config(
                "`sample_sizes` must list positive sizes".into(),
            ));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Config(format!(
                "level {} outside (0, 1)",
                self.level
            )));
        }
        if self.kinds.is_empty() || self.experiments.is_empty() {
            return Err(Error::Config(
                "`kinds` and `experiments` must not be empty".into(),
            ));
        }
        if self.df == Some(0) {
            return Err(Error::Config("`df` must be at least 1".into()));
        }
        if self.replicates > u32::MAX as usize || self.sample_sizes.len() > u32::MAX as usize {
            return Err(Error::Config("too many replicates or sample sizes".into()));
        }
        self.truth.build().map_err(|e| match e {
            Error::Config(m) => Error::Config(m),
            other => Error::Config(format!("invalid truth: {other}")),
        })?;
        Ok(())
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| "experiment".into())
    }

    fn fit_options(&self) -> FitOptions {
        let mut o = FitOptions {
            execution: Execution::Sequential,
            ..FitOptions::default()
        };
        if let Some(m) = self.max_iterations {
            o.max_iterations = m;
        }
        o
    }
}

/// What happened to one replicate before any region was evaluated.
enum Fitted<T> {
    Excluded { quasi_separated: bool },
    Done { same_mle: bool, value: T },
}

fn run_replicates<T, F>(
    cfg: &ExperimentConfig,
    truth: &TruthSpec,
    size_index: usize,
    f: F,
) -> Vec<Fitted<T>>
where
    T: Send,
    F: Fn(&Fits) -> Result<T> + Sync + Send,
{
    let n = cfg.sample_sizes[size_index];
    let opts = cfg.fit_options();
    map_indices(cfg.replicates, Execution::Parallel, |r| {
        let mut rng = replicate_rng(cfg.seed, size_index, r);
        let data = match generate_design(truth, n, &mut rng) {
            Ok(d) => d,
            Err(_) => {
                return Fitted::Excluded {
                    quasi_separated: false,
                }
            }
        };
        let fits = match Fits::new(&data, &truth.spec, opts.clone()) {
            Ok(f) if f.converged() => f,
            Ok(f) => {
                return Fitted::Excluded {
                    quasi_separated: f.umle.quasi_separated || f.cmle.quasi_separated,
                }
            }
            Err(_) => {
                return Fitted::Excluded {
                    quasi_separated: false,
                }
            }
        };
        match f(&fits) {
            Ok(value) => Fitted::Done {
                same_mle: fits.same_mle(),
                value,
            },
            Err(_) => Fitted::Excluded {
                quasi_separated: false,
            },
        }
    })
}

fn diagnostics<T>(n: usize, outcomes: &[Fitted<T>]) -> SizeDiagnostics {
    let mut d = SizeDiagnostics {
        n,
        used: 0,
        excluded: 0,
        quasi_separated: 0,
        same_mle: 0,
    };
    for o in outcomes {
        match o {
            Fitted::Excluded { quasi_separated } => {
                d.excluded += 1;
                d.quasi_separated += *quasi_separated as usize;
            }
            Fitted::Done { same_mle, .. } => {
                d.used += 1;
                d.same_mle += *same_mle as usize;
            }
        }
    }
    d
}

/// Tally of hits (covered, rejected) per split for one report cell.
fn tally<T>(
    outcomes: &[Fitted<T>],
    pick: impl Fn(&T) -> (bool, bool),
) -> [(usize, usize, usize); 3] {
    // (cases, hits, indeterminate) for total, same, different.
    let mut out = [(0, 0, 0); 3];
    for o in outcomes {
        if let Fitted::Done { same_mle, value } = o {
            let (hit, indeterminate) = pick(value);
            for idx in [0, if *same_mle { 1 } else { 2 }] {
                out[idx].0 += 1;
                out[idx].1 += hit as usize;
                out[idx].2 += indeterminate as usize;
            }
        }
    }
    out
}

const SPLITS: [Split; 3] = [Split::Total, Split::SameMle, Split::DifferentMle];

/// Coverage of the full true parameter vector by each region kind.
pub fn coverage_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let truth = cfg.truth.build()?;
    let gamma0 = truth.flat();
    let mut rows = Vec::new();
    let mut diags = Vec::new();
    for (si, &n) in cfg.sample_sizes.iter().enumerate() {
        let outcomes = run_replicates(cfg, &truth, si, |fits| {
            let region = RegionSpec::new(RegionTarget::Full)
                .with_level(cfg.level)
                .with_df(cfg.df)
                .with_family(cfg.family);
            let m = cr_membership(&gamma0, &region, fits)?;
            Ok(cfg
                .kinds
                .iter()
                .map(|k| (m.get(*k), m.indeterminate))
                .collect::<Vec<_>>())
        });
        diags.push(diagnostics(n, &outcomes));
        for (ki, kind) in cfg.kinds.iter().enumerate() {
            let counts = tally(&outcomes, |v| v[ki]);
            for (split, (cases, hits, indeterminate)) in SPLITS.iter().zip(counts) {
                rows.push(ReportRow {
                    n,
                    predictor: String::new(),
                    hypothesis: String::new(),
                    kind: *kind,
                    split: *split,
                    cases,
                    hits,
                    indeterminate,
                });
            }
        }
    }
    Ok(ExperimentReport::new(
        ExperimentKind::Coverage,
        cfg,
        &truth,
        rows,
        diags,
    ))
}

/// The hypotheses checked per ordinal predictor, with report labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectionHypothesis {
    /// All coefficients zero.
    First,
    /// Monotone in some direction.
    Second,
    /// Follows the given direction.
    Third(Direction),
}

impl RejectionHypothesis {
    pub const ALL: [RejectionHypothesis; 4] = [
        RejectionHypothesis::First,
        RejectionHypothesis::Second,
        RejectionHypothesis::Third(Direction::Iso),
        RejectionHypothesis::Third(Direction::Anti),
    ];

    pub fn label(self) -> &'static str {
        match self {
            RejectionHypothesis::First => "first",
            RejectionHypothesis::Second => "second",
            RejectionHypothesis::Third(Direction::Iso) => "third-iso",
            RejectionHypothesis::Third(Direction::Anti) => "third-anti",
        }
    }
}

/// Rejection rates of every hypothesis for every ordinal predictor.
pub fn rejection_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let truth = cfg.truth.build()?;
    let n_ord = truth.spec.n_ordinal();
    if n_ord == 0 {
        return Err(Error::Config(
            "rejection experiments need an ordinal predictor".into(),
        ));
    }
    let names: Vec<String> = truth.spec.ordinals().map(|p| p.name.clone()).collect();
    let topts = TestOptions {
        level: cfg.level,
        df: None,
        family: cfg.family,
    };
    let cells: Vec<(usize, RejectionHypothesis, RegionKind)> = (0..n_ord)
        .flat_map(|s| {
            RejectionHypothesis::ALL
                .into_iter()
                .flat_map(move |h| cfg.kinds.iter().map(move |k| (s, h, *k)))
        })
        .collect();
    let mut rows = Vec::new();
    let mut diags = Vec::new();
    for (si, &n) in cfg.sample_sizes.iter().enumerate() {
        let outcomes = run_replicates(cfg, &truth, si, |fits| {
            cells
                .iter()
                .map(|&(s, h, kind)| {
                    let out = match h {
                        RejectionHypothesis::First => test_no_effect_in(fits, s, kind, &topts)?,
                        RejectionHypothesis::Second => test_monotonicity(fits, s, kind, &topts)?,
                        RejectionHypothesis::Third(d) => test_direction(fits, s, d, kind, &topts)?,
                    };
                    Ok((out.reject, out.indeterminate))
                })
                .collect::<Result<Vec<_>>>()
        });
        diags.push(diagnostics(n, &outcomes));
        for (ci, &(s, h, kind)) in cells.iter().enumerate() {
            let counts = tally(&outcomes, |v| v[ci]);
            for (split, (cases, hits, indeterminate)) in SPLITS.iter().zip(counts) {
                rows.push(ReportRow {
                    n,
                    predictor: names[s].clone(),
                    hypothesis: h.label().to_string(),
                    kind,
                    split: *split,
                    cases,
                    hits,
                    indeterminate,
                });
            }
        }
    }
    Ok(ExperimentReport::new(
        ExperimentKind::Rejection,
        cfg,
        &truth,
        rows,
        diags,
    ))
}

/// Runs every experiment listed in the configuration.
pub fn run_experiments(cfg: &ExperimentConfig) -> Result<Vec<ExperimentReport>> {
    cfg.experiments
        .iter()
        .map(|e| match e {
            ExperimentKind::Coverage => coverage_experiment(cfg),
            ExperimentKind::Rejection => rejection_experiment(cfg),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml(text).unwrap()
    }

    #[test]
    fn parses_preset_and_custom_truths() {
        let c = config(
            r#"
            sample_sizes = [50]
            replicates = 2
            seed = 1
            [truth]
            preset = "boundary"
            ladder = "large"
            "#,
        );
        assert_eq!(c.truth.build().unwrap(), TruthSpec::boundary(Ladder::Large));
        let c = config(
            r#"
            sample_sizes = [50]
            replicates = 2
            seed = 1
            kinds = ["ccr"]
            [truth]
            alpha = [-1.0, 1.0]
            [[truth.predictors]]
            role = "ordinal"
            name = "a"
            probs = [0.5, 0.5]
            beta = [0.4]
            [[truth.predictors]]
            role = "numeric"
            name = "x"
            mean = 0.0
            variance = 1.0
            beta = -0.2
            "#,
        );
        let t = c.truth.build().unwrap();
        assert_eq!(t.flat(), vec![-1.0, 1.0, 0.4, -0.2]);
    }

    #[test]
    fn invalid_configs_are_config_errors() {
        for text in [
            "sample_sizes = [50]\nreplicates = 0\nseed = 1\n[truth]\npreset = \"mixed\"\n",
            "sample_sizes = []\nreplicates = 1\nseed = 1\n[truth]\npreset = \"mixed\"\n",
            "sample_sizes = [5]\nreplicates = 1\nseed = 1\nbogus = 3\n[truth]\npreset = \"mixed\"\n",
            "sample_sizes = [5]\nreplicates = 1\nseed = 1\n[truth]\nalpha = [1.0, -1.0]\n[[truth.predictors]]\nrole = \"numeric\"\nname = \"x\"\nmean = 0.0\nvariance = 1.0\nbeta = 0.0\n",
        ] {
            assert!(matches!(ExperimentConfig::from_toml(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn single_replicate_is_degenerate_and_reproducible() {
        let c = config(
            r#"
            experiments = ["coverage", "rejection"]
            sample_sizes = [80]
            replicates = 1
            seed = 42
            kinds = ["uccr", "ccr", "acr"]
            [truth]
            preset = "boundary"
            ladder = "large"
            "#,
        );
        let a = run_experiments(&c).unwrap();
        let b = run_experiments(&c).unwrap();
        assert_eq!(a, b);
        for report in &a {
            for row in report
                .rows
                .iter()
                .filter(|r| r.split == Split::Total && r.cases > 0)
            {
                let p = row.percent().unwrap();
                assert!(p == 0.0 || p == 100.0);
            }
        }
    }
}
