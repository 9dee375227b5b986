//! Model declaration: response levels, predictor roles and the fixed column
//! layout of the parameter vector.
//!
//! The flat parameter vector is always ordered as
//! `[intercepts | ordinal blocks (declaration order) | nominal blocks | numeric]`,
//! independent of the order in which predictors were declared.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Monotonicity regime imposed on an ordinal predictor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constraint {
    /// Treated like a nominal predictor.
    Unconstrained,
    /// Monotone, direction chosen by the data.
    #[serde(alias = "either_monotone")]
    Either,
    /// Non-decreasing from zero.
    #[serde(alias = "isotonic")]
    Iso,
    /// Non-increasing from zero.
    #[serde(alias = "antitonic")]
    Anti,
}

/// A monotonicity direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Iso,
    Anti,
}

impl Direction {
    pub fn opposite(self) -> Direction {
        match self {
            Direction::Iso => Direction::Anti,
            Direction::Anti => Direction::Iso,
        }
    }

    /// `+1` for isotonic, `-1` for antitonic.
    pub fn sign(self) -> f64 {
        match self {
            Direction::Iso => 1.0,
            Direction::Anti => -1.0,
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Direction::Iso => write!(f, "isotonic"),
            Direction::Anti => write!(f, "antitonic"),
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "iso" | "isotonic" => Ok(Direction::Iso),
            "anti" | "antitonic" => Ok(Direction::Anti),
            other => Err(Error::InvalidArgument(format!(
                "unknown direction `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PredictorRole {
    /// Ordered categories; the first one is the baseline.
    Ordinal {
        levels: Vec<String>,
        constraint: Constraint,
    },
    /// Unordered categories; the first one is the baseline.
    Nominal {
        levels: Vec<String>,
    },
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorSpec {
    pub name: String,
    pub role: PredictorRole,
}

impl PredictorSpec {
    pub fn ordinal<S: Into<String>>(name: S, levels: &[&str], constraint: Constraint) -> Self {
        PredictorSpec {
            name: name.into(),
            role: PredictorRole::Ordinal {
                levels: levels.iter().map(|l| l.to_string()).collect(),
                constraint,
            },
        }
    }

    /// Ordinal predictor with levels labelled `1..=categories`.
    pub fn ordinal_numbered<S: Into<String>>(
        name: S,
        categories: usize,
        constraint: Constraint,
    ) -> Self {
        PredictorSpec {
            name: name.into(),
            role: PredictorRole::Ordinal {
                levels: numbered_levels(categories),
                constraint,
            },
        }
    }

    pub fn nominal<S: Into<String>>(name: S, levels: &[&str]) -> Self {
        PredictorSpec {
            name: name.into(),
            role: PredictorRole::Nominal {
                levels: levels.iter().map(|l| l.to_string()).collect(),
            },
        }
    }

    pub fn nominal_numbered<S: Into<String>>(name: S, categories: usize) -> Self {
        PredictorSpec {
            name: name.into(),
            role: PredictorRole::Nominal {
                levels: numbered_levels(categories),
            },
        }
    }

    pub fn numeric<S: Into<String>>(name: S) -> Self {
        PredictorSpec {
            name: name.into(),
            role: PredictorRole::Numeric,
        }
    }

    pub fn levels(&self) -> Option<&[String]> {
        match &self.role {
            PredictorRole::Ordinal { levels, .. } | PredictorRole::Nominal { levels } => {
                Some(levels)
            }
            PredictorRole::Numeric => None,
        }
    }

    /// Number of columns this predictor contributes to the design.
    pub fn width(&self) -> usize {
        match self.levels() {
            Some(levels) => levels.len() - 1,
            None => 1,
        }
    }
}

pub(crate) fn numbered_levels(categories: usize) -> Vec<String> {
    (1..=categories).map(|c| c.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseSpec {
    pub name: String,
    /// Ordered response categories, lowest first.
    pub levels: Vec<String>,
}

/// Column ranges of each predictor inside the flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub k: usize,
    pub p: usize,
    /// Parameter range of every ordinal predictor, in declaration order among ordinals.
    pub ordinal: Vec<Range<usize>>,
    pub nominal: Vec<Range<usize>>,
    pub numeric: Vec<usize>,
    /// For each declared predictor, its parameter range.
    pub by_predictor: Vec<Range<usize>>,
    /// For each declared predictor, its index among ordinals (if ordinal).
    pub ordinal_index: Vec<Option<usize>>,
}

impl Layout {
    pub fn n_alpha(&self) -> usize {
        self.k - 1
    }

    /// Number of β coefficients, i.e. design columns.
    pub fn n_beta(&self) -> usize {
        self.p - (self.k - 1)
    }

    pub fn n_ordinal(&self) -> usize {
        self.ordinal.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub response: ResponseSpec,
    pub predictors: Vec<PredictorSpec>,
}

impl ModelSpec {
    pub fn new(response: ResponseSpec, predictors: Vec<PredictorSpec>) -> Result<Self> {
        let spec = ModelSpec {
            response,
            predictors,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Response with levels `1..=k`.
    pub fn with_numbered_response<S: Into<String>>(
        name: S,
        k: usize,
        predictors: Vec<PredictorSpec>,
    ) -> Result<Self> {
        Self::new(
            ResponseSpec {
                name: name.into(),
                levels: numbered_levels(k),
            },
            predictors,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.response.levels.len() < 2 {
            return Err(Error::InvalidSpec(
                "the response needs at least two categories".into(),
            ));
        }
        check_unique(&self.response.name, &self.response.levels)?;
        let mut names = vec![self.response.name.as_str()];
        for pred in &self.predictors {
            if names.contains(&pred.name.as_str()) {
                return Err(Error::InvalidSpec(format!(
                    "column `{}` declared twice",
                    pred.name
                )));
            }
            names.push(&pred.name);
            if let Some(levels) = pred.levels() {
                if levels.len() < 2 {
                    return Err(Error::InvalidSpec(format!(
                        "categorical predictor `{}` needs at least two levels",
                        pred.name
                    )));
                }
                check_unique(&pred.name, levels)?;
            }
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.response.levels.len()
    }

    pub fn layout(&self) -> Layout {
        let k = self.k();
        let mut next = k - 1;
        let mut by_predictor = vec![0..0; self.predictors.len()];
        let mut ordinal_index = vec![None; self.predictors.len()];
        let mut ordinal = Vec::new();
        let mut nominal = Vec::new();
        let mut numeric = Vec::new();
        for (i, pred) in self.predictors.iter().enumerate() {
            if let PredictorRole::Ordinal { .. } = pred.role {
                let r = next..next + pred.width();
                next = r.end;
                ordinal_index[i] = Some(ordinal.len());
                ordinal.push(r.clone());
                by_predictor[i] = r;
            }
        }
        for (i, pred) in self.predictors.iter().enumerate() {
            if let PredictorRole::Nominal { .. } = pred.role {
                let r = next..next + pred.width();
                next = r.end;
                nominal.push(r.clone());
                by_predictor[i] = r;
            }
        }
        for (i, pred) in self.predictors.iter().enumerate() {
            if let PredictorRole::Numeric = pred.role {
                numeric.push(next);
                by_predictor[i] = next..next + 1;
                next += 1;
            }
        }
        Layout {
            k,
            p: next,
            ordinal,
            nominal,
            numeric,
            by_predictor,
            ordinal_index,
        }
    }

    /// Total parameter dimension `(k-1) + Σ(p_s-1) + nominal dummies + numeric`.
    pub fn dim(&self) -> usize {
        self.layout().p
    }

    /// Declared predictors that are ordinal, in order.
    pub fn ordinals(&self) -> impl Iterator<Item = &PredictorSpec> {
        self.predictors
            .iter()
            .filter(|p| matches!(p.role, PredictorRole::Ordinal { .. }))
    }

    pub fn n_ordinal(&self) -> usize {
        self.ordinals().count()
    }

    /// Constraint regime of every ordinal predictor (ordinal index order).
    pub fn constraints(&self) -> Vec<Constraint> {
        self.ordinals()
            .map(|p| match p.role {
                PredictorRole::Ordinal { constraint, .. } => constraint,
                _ => unreachable!(),
            })
            .collect()
    }

    /// Ordinal index of the predictor called `name`.
    pub fn ordinal_position(&self, name: &str) -> Result<usize> {
        self.ordinals()
            .position(|p| p.name == name)
            .ok_or_else(|| Error::InvalidArgument(format!("`{name}` is not an ordinal predictor")))
    }

    /// Returns a copy with every ordinal constraint replaced.
    pub fn with_constraint(&self, constraint: Constraint) -> ModelSpec {
        let mut out = self.clone();
        for pred in &mut out.predictors {
            if let PredictorRole::Ordinal { constraint: c, .. } = &mut pred.role {
                *c = constraint;
            }
        }
        out
    }

    /// Returns a copy with the regime of ordinal predictor `s` replaced.
    pub fn with_ordinal_constraint(&self, s: usize, constraint: Constraint) -> Result<ModelSpec> {
        let mut out = self.clone();
        let pred = out
            .predictors
            .iter_mut()
            .filter(|p| matches!(p.role, PredictorRole::Ordinal { .. }))
            .nth(s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!("no ordinal predictor with index {s}"))
            })?;
        if let PredictorRole::Ordinal { constraint: c, .. } = &mut pred.role {
            *c = constraint;
        }
        Ok(out)
    }

    /// Human-readable label of every flat coordinate.
    pub fn coefficient_names(&self) -> Vec<String> {
        let layout = self.layout();
        let mut names = vec![String::new(); layout.p];
        for (j, name) in names.iter_mut().take(layout.k - 1).enumerate() {
            *name = format!("alpha{}", j + 1);
        }
        for (pred, range) in self.predictors.iter().zip(&layout.by_predictor) {
            match pred.levels() {
                Some(levels) => {
                    for (offset, idx) in range.clone().enumerate() {
                        names[idx] = format!("{}[{}]", pred.name, levels[offset + 1]);
                    }
                }
                None => names[range.start] = pred.name.clone(),
            }
        }
        names
    }
}

fn check_unique(column: &str, levels: &[String]) -> Result<()> {
    for (i, a) in levels.iter().enumerate() {
        if levels[i + 1..].contains(a) {
            return Err(Error::InvalidSpec(format!(
                "level `{a}` of `{column}` declared twice"
            )));
        }
    }
    Ok(())
}
