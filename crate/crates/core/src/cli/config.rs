use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::quantile::QuantileFamily;
use crate::inference::region::{GridSpec, RegionKind};
use crate::model::spec::{Constraint, ModelSpec, PredictorSpec, ResponseSpec};

/// How a data column enters the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "lowercase", deny_unknown_fields)]
pub enum ColumnDecl {
    Ordinal {
        name: String,
        levels: Vec<String>,
        #[serde(default = "default_constraint")]
        constraint: Constraint,
    },
    Nominal {
        name: String,
        levels: Vec<String>,
    },
    Numeric {
        name: String,
    },
}

fn default_constraint() -> Constraint {
    Constraint::Either
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseDecl {
    pub name: String,
    /// Ordered lowest first.
    pub levels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InferenceOptions {
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default)]
    pub df: Option<usize>,
    #[serde(default = "default_kind")]
    pub kind: RegionKind,
    #[serde(default)]
    pub family: QuantileFamily,
}

fn default_level() -> f64 {
    0.95
}

fn default_kind() -> RegionKind {
    RegionKind::Ccr
}

impl Default for InferenceOptions {
    fn default() -> Self {
        InferenceOptions {
            level: default_level(),
            df: None,
            kind: default_kind(),
            family: QuantileFamily::PlainChiSq,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDecl {
    #[serde(default = "default_points")]
    pub points_per_axis: usize,
    #[serde(default = "default_half_width")]
    pub half_width_se: f64,
    #[serde(default = "default_max_points")]
    pub max_points: usize,
    /// Explicit `[lower, upper, step]` per axis.
    #[serde(default)]
    pub axes: Option<Vec<[f64; 3]>>,
}

fn default_points() -> usize {
    61
}

fn default_half_width() -> f64 {
    4.0
}

fn default_max_points() -> usize {
    1_000_000
}

impl Default for GridDecl {
    fn default() -> Self {
        GridDecl {
            points_per_axis: default_points(),
            half_width_se: default_half_width(),
            max_points: default_max_points(),
            axes: None,
        }
    }
}

impl GridDecl {
    pub fn to_spec(&self) -> GridSpec {
        GridSpec {
            axes: self.axes.as_ref().map(|a| {
                a.iter()
                    .map(|[lower, upper, step]| crate::inference::region::Axis {
                        lower: *lower,
                        upper: *upper,
                        step: *step,
                    })
                    .collect()
            }),
            points_per_axis: self.points_per_axis,
            half_width_se: self.half_width_se,
            max_points: self.max_points,
        }
    }
}

/// Everything `fit`, `region` and `test` need, read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// CSV path, relative to the config file unless absolute.
    pub data: Option<PathBuf>,
    pub response: ResponseDecl,
    pub predictors: Vec<ColumnDecl>,
    #[serde(default)]
    pub inference: InferenceOptions,
    #[serde(default)]
    pub grid: GridDecl,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub max_iterations: Option<usize>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads the file and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(d) = &cfg.data {
            if d.is_relative() {
                cfg.data = Some(base.join(d));
            }
        }
        if let Some(o) = &cfg.out {
            if o.is_relative() {
                cfg.out = Some(base.join(o));
            }
        }
        Ok(cfg)
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        let predictors = self
            .predictors
            .iter()
            .map(|c| match c {
                ColumnDecl::Ordinal {
                    name,
                    levels,
                    constraint,
                } => PredictorSpec {
                    name: name.clone(),
                    role: crate::model::spec::PredictorRole::Ordinal {
                        levels: levels.clone(),
                        constraint: *constraint,
                    },
                },
                ColumnDecl::Nominal { name, levels } => PredictorSpec {
                    name: name.clone(),
                    role: crate::model::spec::PredictorRole::Nominal {
                        levels: levels.clone(),
                    },
                },
                ColumnDecl::Numeric { name } => PredictorSpec::numeric(name.clone()),
            })
            .collect();
        let spec = ModelSpec::new(
            ResponseSpec {
                name: self.response.name.clone(),
                levels: self.response.levels.clone(),
            },
            predictors,
        )?;
        if spec.predictors.iter().any(|p| p.name == spec.response.name) {
            return Err(Error::InvalidSpec(format!(
                "`{}` is declared as both response and predictor",
                spec.response.name
            )));
        }
        Ok(spec)
    }
}
