use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::fit::{
    rules_from_regimes, solve_enumerated, BlockRule, FitOptions, FitResult,
};
use crate::estimation::solver::Constraints;
use crate::model::params::{classify_block, MonotoneDirection, Monotonicity, ParameterVector};
use crate::model::spec::{Direction, ModelSpec};
use crate::model::DesignData;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileMode {
    /// Nuisance parameters range over the ordered-intercept space.
    Unconstrained,
    /// Constrained ordinal blocks stay monotone (either direction unless the regime fixes it).
    Constrained,
}

/// Linear restrictions `rows · γ = values` holding a target fixed while the rest is profiled.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedBlock {
    pub rows: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl FixedBlock {
    pub fn new(rows: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        if rows.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                got: values.len(),
            });
        }
        if let Some(w) = rows.windows(2).find(|w| w[0].len() != w[1].len()) {
            return Err(Error::DimensionMismatch {
                expected: w[0].len(),
                got: w[1].len(),
            });
        }
        Ok(FixedBlock { rows, values })
    }

    /// Fixes the flat coordinates `indices` at `values`.
    pub fn coordinates(p: usize, indices: &[usize], values: &[f64]) -> Result<Self> {
        if let Some(&i) = indices.iter().find(|&&i| i >= p) {
            return Err(Error::InvalidArgument(format!(
                "coordinate {i} outside 0..{p}"
            )));
        }
        let rows = indices
            .iter()
            .map(|&i| {
                let mut r = vec![0.0; p];
                r[i] = 1.0;
                r
            })
            .collect();
        Self::new(rows, values.to_vec())
    }

    /// Fixes the whole block of ordinal predictor `s`.
    pub fn ordinal_block(spec: &ModelSpec, s: usize, values: &[f64]) -> Result<Self> {
        let layout = spec.layout();
        let range = layout
            .ordinal
            .get(s)
            .ok_or_else(|| Error::InvalidArgument(format!("no ordinal predictor {s}")))?
            .clone();
        if range.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: range.len(),
                got: values.len(),
            });
        }
        Self::coordinates(layout.p, &range.collect::<Vec<_>>(), values)
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    fn unit_index(row: &[f64]) -> Option<usize> {
        let mut idx = None;
        for (i, &v) in row.iter().enumerate() {
            if v != 0.0 {
                if idx.is_some() || v != 1.0 {
                    return None;
                }
                idx = Some(i);
            }
        }
        idx
    }

    /// Value fixed for each flat coordinate pinned by a unit row.
    pub(crate) fn pinned(&self, p: usize) -> Vec<Option<f64>> {
        let mut out = vec![None; p];
        for (row, &v) in self.rows.iter().zip(&self.values) {
            if let Some(i) = Self::unit_index(row) {
                out[i] = Some(v);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileResult {
    pub log_likelihood: f64,
    pub estimate: ParameterVector,
    pub converged: bool,
    pub quasi_separated: bool,
    /// Directions of the winning assignment in constrained mode.
    pub directions: Option<MonotoneDirection>,
}

/// Maximises ℓ with `fixed` held exactly, starting from `warm`.
///
/// In constrained mode an infeasible restriction (for example a non-monotone
/// target block) is an [`Error::Infeasible`].
pub fn profile_nuisance(
    data: &DesignData,
    spec: &ModelSpec,
    fixed: &FixedBlock,
    mode: ProfileMode,
    warm: &FitResult,
    opts: &FitOptions,
) -> Result<ProfileResult> {
    let rules = match mode {
        ProfileMode::Unconstrained => vec![BlockRule::Free; spec.n_ordinal()],
        ProfileMode::Constrained => rules_from_regimes(spec),
    };
    let out = profile_with_rules(data, spec, fixed, &rules, &[], &warm.flat(), opts)?;
    Ok(out.result)
}

pub(crate) struct RuledProfile {
    pub result: ProfileResult,
}

/// Profiles with explicit per-block rules and optional extra inequality rows
/// `row · γ ≥ 0`. Blocks fully pinned by `fixed` have their direction resolved
/// up front instead of being enumerated.
pub(crate) fn profile_with_rules(
    data: &DesignData,
    spec: &ModelSpec,
    fixed: &FixedBlock,
    rules: &[BlockRule],
    extra_ineq: &[Vec<f64>],
    warm: &[f64],
    opts: &FitOptions,
) -> Result<RuledProfile> {
    let layout = spec.layout();
    let p = layout.p;
    if let Some(r) = fixed.rows.iter().find(|r| r.len() != p) {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: r.len(),
        });
    }
    if warm.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: warm.len(),
        });
    }
    let pinned = fixed.pinned(p);
    let mut rules = rules.to_vec();
    for (s, rule) in rules.iter_mut().enumerate() {
        let range = layout.ordinal[s].clone();
        if *rule == BlockRule::Free || !range.clone().all(|i| pinned[i].is_some()) {
            continue;
        }
        let block: Vec<f64> = range.map(|i| pinned[i].unwrap()).collect();
        let class = classify_block(&block);
        *rule = match (*rule, class) {
            (BlockRule::Either, Monotonicity::Iso | Monotonicity::Both) => {
                BlockRule::Fixed(Direction::Iso)
            }
            (BlockRule::Either, Monotonicity::Anti) => BlockRule::Fixed(Direction::Anti),
            (BlockRule::Either, Monotonicity::Neither) => {
                return Err(Error::Infeasible("fixed block is not monotone".into()))
            }
            (BlockRule::Fixed(d), c) if !c.allows(d) => {
                return Err(Error::Infeasible(format!("fixed block is not {d}")))
            }
            (r, _) => r,
        };
    }

    let mut base = Constraints::new(&layout, opts.alpha_gap);
    for (row, &v) in fixed.rows.iter().zip(&fixed.values) {
        base.equal(row, v);
    }
    for row in extra_ineq {
        base.at_least(row, 0.0);
    }
    let mut start = warm.to_vec();
    for (i, v) in pinned.iter().enumerate() {
        if let Some(v) = v {
            start[i] = *v;
        }
    }
    let en = solve_enumerated(data, &layout, &base, &rules, &start, opts)?;
    let any_enumerated = rules.iter().any(|r| *r != BlockRule::Free);
    let directions = any_enumerated.then(|| MonotoneDirection(en.directions.clone()));
    let converged = en.all_converged && !en.solution.quasi_separated;
    Ok(RuledProfile {
        result: ProfileResult {
            log_likelihood: en.solution.loglik,
            estimate: ParameterVector::from_flat(&layout, &en.solution.x)?,
            converged,
            quasi_separated: en.solution.quasi_separated,
            directions,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::fit::{fit_constrained, fit_unconstrained};
    use crate::model::spec::{Constraint, PredictorSpec};

    fn data() -> (DesignData, ModelSpec) {
        let spec = ModelSpec::with_numbered_response(
            "y",
            3,
            vec![
                PredictorSpec::ordinal_numbered("a", 3, Constraint::Either),
                PredictorSpec::numeric("x"),
            ],
        )
        .unwrap();
        let mut z = Vec::new();
        let mut x = Vec::new();
        for i in 0..90usize {
            let level = i % 3;
            let xv = ((i * 37) % 11) as f64 / 5.0 - 1.0;
            let score = xv * 0.8 + [0.0, 0.6, 0.3][level] + ((i * 13) % 7) as f64 / 3.0 - 1.0;
            z.push(if score < -0.3 {
                0
            } else if score < 0.9 {
                1
            } else {
                2
            });
            let mut row = vec![0.0, 0.0, xv];
            if level > 0 {
                row[level - 1] = 1.0;
            }
            x.extend(row);
        }
        (DesignData::from_parts(3, 3, z, x).unwrap(), spec)
    }

    #[test]
    fn profiling_at_the_maximiser_recovers_it() {
        let (data, spec) = data();
        let opts = FitOptions::default();
        let u = fit_unconstrained(&data, &spec, &opts).unwrap();
        let fb = FixedBlock::ordinal_block(&spec, 0, &u.estimate.beta_ord[0]).unwrap();
        let pr =
            profile_nuisance(&data, &spec, &fb, ProfileMode::Unconstrained, &u, &opts).unwrap();
        assert!((pr.log_likelihood - u.log_likelihood).abs() < 1e-8);
    }

    #[test]
    fn constrained_profile_is_below_unconstrained() {
        let (data, spec) = data();
        let opts = FitOptions::default();
        let u = fit_unconstrained(&data, &spec, &opts).unwrap();
        let c = fit_constrained(&data, &spec, &opts).unwrap();
        for v in [[0.1, 0.2], [0.0, 0.0], [-0.3, -0.3], [0.5, 1.5]] {
            let fb = FixedBlock::ordinal_block(&spec, 0, &v).unwrap();
            let pu =
                profile_nuisance(&data, &spec, &fb, ProfileMode::Unconstrained, &u, &opts).unwrap();
            let pc =
                profile_nuisance(&data, &spec, &fb, ProfileMode::Constrained, &c, &opts).unwrap();
            assert!(pc.log_likelihood <= pu.log_likelihood + 1e-9);
            assert_eq!(pc.estimate.beta_ord[0], v.to_vec());
        }
        let bad = FixedBlock::ordinal_block(&spec, 0, &[0.3, -0.1]).unwrap();
        assert!(matches!(
            profile_nuisance(&data, &spec, &bad, ProfileMode::Constrained, &c, &opts),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn contrast_rows_are_honoured() {
        let (data, spec) = data();
        let opts = FitOptions::default();
        let u = fit_unconstrained(&data, &spec, &opts).unwrap();
        // β_{a,3} − β_{a,2} = 0.25 with both coordinates otherwise free.
        let fb = FixedBlock::new(vec![vec![0.0, 0.0, -1.0, 1.0, 0.0]], vec![0.25]).unwrap();
        let pr =
            profile_nuisance(&data, &spec, &fb, ProfileMode::Unconstrained, &u, &opts).unwrap();
        let b = &pr.estimate.beta_ord[0];
        assert!((b[1] - b[0] - 0.25).abs() < 1e-9);
        assert!(pr.log_likelihood <= u.log_likelihood);
    }
}
