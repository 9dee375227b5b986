use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::spec::{Constraint, Direction, Layout, ModelSpec};

/// Intercepts and slope blocks of a cumulative logit model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    /// `α_1 < … < α_{k-1}`.
    pub alpha: Vec<f64>,
    /// One block `β_{s,2..p_s}` per ordinal predictor.
    pub beta_ord: Vec<Vec<f64>>,
    /// Nominal dummies (declaration order) followed by numeric slopes.
    pub beta_nonord: Vec<f64>,
}

impl ParameterVector {
    pub fn from_flat(layout: &Layout, flat: &[f64]) -> Result<Self> {
        if flat.len() != layout.p {
            return Err(Error::DimensionMismatch {
                expected: layout.p,
                got: flat.len(),
            });
        }
        let n_alpha = layout.n_alpha();
        let nonord_start = layout.ordinal.last().map_or(n_alpha, |r| r.end);
        Ok(ParameterVector {
            alpha: flat[..n_alpha].to_vec(),
            beta_ord: layout
                .ordinal
                .iter()
                .map(|r| flat[r.clone()].to_vec())
                .collect(),
            beta_nonord: flat[nonord_start..].to_vec(),
        })
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = self.alpha.clone();
        for block in &self.beta_ord {
            out.extend_from_slice(block);
        }
        out.extend_from_slice(&self.beta_nonord);
        out
    }

    /// All-zero slopes with the given intercepts.
    pub fn zeros_with_alpha(spec: &ModelSpec, alpha: &[f64]) -> Result<Self> {
        let layout = spec.layout();
        let mut flat = vec![0.0; layout.p];
        if alpha.len() != layout.n_alpha() {
            return Err(Error::DimensionMismatch {
                expected: layout.n_alpha(),
                got: alpha.len(),
            });
        }
        flat[..alpha.len()].copy_from_slice(alpha);
        Self::from_flat(&layout, &flat)
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
            + self.beta_ord.iter().map(Vec::len).sum::<usize>()
            + self.beta_nonord.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Checks block lengths against `spec`.
    pub fn check_shape(&self, spec: &ModelSpec) -> Result<()> {
        let layout = spec.layout();
        let ok = self.alpha.len() == layout.n_alpha()
            && self.beta_ord.len() == layout.ordinal.len()
            && self
                .beta_ord
                .iter()
                .zip(&layout.ordinal)
                .all(|(b, r)| b.len() == r.len())
            && self.len() == layout.p;
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: layout.p,
                got: self.len(),
            })
        }
    }

    pub fn intercepts_ordered(&self) -> bool {
        self.alpha.windows(2).all(|w| w[0] < w[1]) && self.alpha.iter().all(|a| a.is_finite())
    }
}

/// Monotonicity pattern of a coefficient block `(β_2, …, β_p)` with implicit `β_1 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotonicity {
    Iso,
    Anti,
    /// All zero: on the boundary shared by both directions.
    Both,
    Neither,
}

impl Monotonicity {
    pub fn allows(self, dir: Direction) -> bool {
        match self {
            Monotonicity::Both => true,
            Monotonicity::Iso => dir == Direction::Iso,
            Monotonicity::Anti => dir == Direction::Anti,
            Monotonicity::Neither => false,
        }
    }

    pub fn is_monotone(self) -> bool {
        self != Monotonicity::Neither
    }

    pub fn from_flags(iso: bool, anti: bool) -> Self {
        match (iso, anti) {
            (true, true) => Monotonicity::Both,
            (true, false) => Monotonicity::Iso,
            (false, true) => Monotonicity::Anti,
            (false, false) => Monotonicity::Neither,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Monotonicity::Iso => "iso",
            Monotonicity::Anti => "anti",
            Monotonicity::Both => "both",
            Monotonicity::Neither => "neither",
        }
    }
}

/// True iff `0 ≤ b_2 ≤ … ≤ b_p` (isotonic) or the mirrored chain (antitonic). Ties allowed.
pub fn follows_direction(block: &[f64], dir: Direction) -> bool {
    let s = dir.sign();
    let mut prev = 0.0;
    for &b in block {
        if s * (b - prev) < 0.0 {
            return false;
        }
        prev = b;
    }
    true
}

/// Same as [`follows_direction`] but tolerating violations up to `tol`.
pub fn follows_direction_tol(block: &[f64], dir: Direction, tol: f64) -> bool {
    let s = dir.sign();
    let mut prev = 0.0;
    for &b in block {
        if s * (b - prev) < -tol {
            return false;
        }
        prev = b;
    }
    true
}

pub fn classify_block(block: &[f64]) -> Monotonicity {
    Monotonicity::from_flags(
        follows_direction(block, Direction::Iso),
        follows_direction(block, Direction::Anti),
    )
}

/// Per ordinal predictor direction; `None` leaves the block unconstrained.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonotoneDirection(pub Vec<Option<Direction>>);

impl MonotoneDirection {
    pub fn get(&self, s: usize) -> Option<Direction> {
        self.0.get(s).copied().flatten()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Compact label like `iso,anti,-`.
    pub fn label(&self) -> String {
        self.0
            .iter()
            .map(|d| match d {
                Some(Direction::Iso) => "iso",
                Some(Direction::Anti) => "anti",
                None => "-",
            })
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// The parameter sets a vector can be tested against.
#[derive(Debug, Clone, PartialEq)]
pub enum ParameterSet {
    /// Ordered intercepts only.
    Unconstrained,
    /// Each constrained ordinal block monotone in some direction; blocks declared
    /// `Iso`/`Anti` must follow that direction.
    EitherMonotone,
    /// Directions fixed per ordinal predictor.
    Directions(MonotoneDirection),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipReport {
    pub member: bool,
    pub intercepts_ordered: bool,
    /// Pattern of every ordinal block.
    pub blocks: Vec<Monotonicity>,
}

pub fn check_membership(
    params: &ParameterVector,
    spec: &ModelSpec,
    set: &ParameterSet,
) -> Result<MembershipReport> {
    params.check_shape(spec)?;
    let blocks: Vec<Monotonicity> = params.beta_ord.iter().map(|b| classify_block(b)).collect();
    let intercepts_ordered = params.intercepts_ordered();
    let constraints = spec.constraints();
    let blocks_ok = match set {
        ParameterSet::Unconstrained => true,
        ParameterSet::EitherMonotone => blocks.iter().zip(&constraints).all(|(m, c)| match c {
            Constraint::Unconstrained => true,
            Constraint::Either => m.is_monotone(),
            Constraint::Iso => m.allows(Direction::Iso),
            Constraint::Anti => m.allows(Direction::Anti),
        }),
        ParameterSet::Directions(dirs) => {
            if dirs.len() != blocks.len() {
                return Err(Error::DimensionMismatch {
                    expected: blocks.len(),
                    got: dirs.len(),
                });
            }
            blocks
                .iter()
                .zip(&dirs.0)
                .all(|(m, d)| d.is_none_or(|d| m.allows(d)))
        }
    };
    Ok(MembershipReport {
        member: intercepts_ordered && blocks_ok,
        intercepts_ordered,
        blocks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::spec::PredictorSpec;

    #[test]
    fn block_patterns() {
        assert_eq!(classify_block(&[0.7, 1.4]), Monotonicity::Iso);
        assert_eq!(classify_block(&[-0.2, -0.2]), Monotonicity::Anti);
        assert_eq!(classify_block(&[0.3, -0.1]), Monotonicity::Neither);
        assert_eq!(classify_block(&[0.0, 0.0]), Monotonicity::Both);
        assert_eq!(classify_block(&[0.00609, -0.73117]), Monotonicity::Neither);
        assert_eq!(classify_block(&[0.0, -0.73117]), Monotonicity::Anti);
    }

    fn spec() -> ModelSpec {
        ModelSpec::with_numbered_response(
            "y",
            3,
            vec![
                PredictorSpec::ordinal_numbered("a", 3, Constraint::Either),
                PredictorSpec::ordinal_numbered("b", 3, Constraint::Anti),
                PredictorSpec::numeric("x"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn flat_round_trip_respects_layout() {
        let spec = spec();
        let flat = vec![-1.0, 1.0, 0.1, 0.2, -0.3, -0.4, 2.0];
        let pv = ParameterVector::from_flat(&spec.layout(), &flat).unwrap();
        assert_eq!(pv.beta_ord, vec![vec![0.1, 0.2], vec![-0.3, -0.4]]);
        assert_eq!(pv.beta_nonord, vec![2.0]);
        assert_eq!(pv.to_flat(), flat);
        assert!(ParameterVector::from_flat(&spec.layout(), &flat[1..]).is_err());
    }

    #[test]
    fn membership_sets() {
        let spec = spec();
        let l = spec.layout();
        let pv = |flat: &[f64]| ParameterVector::from_flat(&l, flat).unwrap();
        let good = pv(&[-1.0, 1.0, 0.1, 0.2, -0.3, -0.4, 2.0]);
        assert!(
            check_membership(&good, &spec, &ParameterSet::EitherMonotone)
                .unwrap()
                .member
        );

        // `b` is declared antitonic, so an isotonic block is outside the set.
        let wrong_dir = pv(&[-1.0, 1.0, 0.1, 0.2, 0.3, 0.4, 2.0]);
        assert!(
            !check_membership(&wrong_dir, &spec, &ParameterSet::EitherMonotone)
                .unwrap()
                .member
        );
        assert!(
            check_membership(&wrong_dir, &spec, &ParameterSet::Unconstrained)
                .unwrap()
                .member
        );

        let unordered = pv(&[1.0, -1.0, 0.1, 0.2, -0.3, -0.4, 2.0]);
        let rep = check_membership(&unordered, &spec, &ParameterSet::Unconstrained).unwrap();
        assert!(!rep.member && !rep.intercepts_ordered);

        let dirs = MonotoneDirection(vec![Some(Direction::Anti), None]);
        let rep = check_membership(&good, &spec, &ParameterSet::Directions(dirs)).unwrap();
        assert!(!rep.member);
        assert_eq!(rep.blocks, vec![Monotonicity::Iso, Monotonicity::Anti]);
    }
}
