use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::solver::{
    default_start, maximize, Constraints, Solution, SolverOptions, ACTIVE_TOL,
};
use crate::model::likelihood::{derivatives_flat, fisher_flat, FisherInformation};
use crate::model::params::{MonotoneDirection, ParameterVector};
use crate::model::spec::{Constraint, Direction, Layout, ModelSpec};
use crate::model::DesignData;
use crate::par::{map_indices, Execution};

/// Log-likelihood differences below this are treated as ties between direction assignments.
pub const TIE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Bound on the sup-norm of the (projected) score at convergence.
    pub gradient_tolerance: f64,
    /// Predicted improvement, relative to `1 + |ℓ|`, below which iteration stops.
    pub loglik_tolerance: f64,
    /// Any coordinate beyond this magnitude aborts the fit as quasi-separated.
    pub magnitude_cap: f64,
    /// Minimum gap between consecutive intercepts.
    pub alpha_gap: f64,
    pub initial: Option<ParameterVector>,
    /// Largest number of free-direction predictors that may be enumerated.
    pub max_free_directions: usize,
    pub execution: Execution,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 200,
            gradient_tolerance: 1e-6,
            loglik_tolerance: 1e-12,
            magnitude_cap: 30.0,
            alpha_gap: 1e-8,
            initial: None,
            max_free_directions: 12,
            execution: Execution::default(),
        }
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gradient_tolerance", self.gradient_tolerance),
            ("loglik_tolerance", self.loglik_tolerance),
            ("magnitude_cap", self.magnitude_cap),
            ("alpha_gap", self.alpha_gap),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument(
                "max_iterations must be positive".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn solver(&self) -> SolverOptions {
        SolverOptions {
            max_iterations: self.max_iterations,
            gradient_tolerance: self.gradient_tolerance,
            loglik_tolerance: self.loglik_tolerance,
            magnitude_cap: self.magnitude_cap,
        }
    }

    /// Same options with a different starting point.
    pub fn with_initial(&self, initial: Option<ParameterVector>) -> Self {
        FitOptions {
            initial,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimatorKind {
    Umle,
    Cmle,
    Dmle,
    Pmle,
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EstimatorKind::Umle => "UMLE",
            EstimatorKind::Cmle => "CMLE",
            EstimatorKind::Dmle => "DMLE",
            EstimatorKind::Pmle => "PMLE",
        };
        f.write_str(s)
    }
}

/// One direction assignment tried during enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct Subproblem {
    pub directions: MonotoneDirection,
    pub log_likelihood: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub kind: EstimatorKind,
    pub estimate: ParameterVector,
    pub log_likelihood: f64,
    pub converged: bool,
    pub quasi_separated: bool,
    pub iterations: usize,
    /// Sup-norm of the score at the estimate.
    pub score_norm: f64,
    pub fisher: FisherInformation,
    /// Direction per ordinal predictor; `None` for blocks left free.
    pub directions: Option<MonotoneDirection>,
    /// Per ordinal block, which inequalities are active: entry 0 is `β_{s,2} = 0`,
    /// entry `h` is `β_{s,h+2} = β_{s,h+1}`. Empty for unconstrained blocks.
    pub active: Vec<Vec<bool>>,
    /// Whether another assignment reached the same log-likelihood within [`TIE_TOLERANCE`].
    pub tie: bool,
    pub subproblems: Vec<Subproblem>,
}

impl FitResult {
    pub fn flat(&self) -> Vec<f64> {
        self.estimate.to_flat()
    }

    /// Standard errors from the inverse expected information.
    pub fn standard_errors(&self) -> Result<Vec<f64>> {
        let inv = self.fisher.inverse()?;
        Ok((0..inv.nrows())
            .map(|i| inv[(i, i)].max(0.0).sqrt())
            .collect())
    }

    pub fn covariance(&self) -> Result<DMatrix<f64>> {
        self.fisher.inverse()
    }
}

/// Per ordinal block: what the enumeration does with it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BlockRule {
    Free,
    Fixed(Direction),
    Either,
}

pub(crate) fn rules_from_regimes(spec: &ModelSpec) -> Vec<BlockRule> {
    spec.constraints()
        .into_iter()
        .map(|c| match c {
            Constraint::Unconstrained => BlockRule::Free,
            Constraint::Either => BlockRule::Either,
            Constraint::Iso => BlockRule::Fixed(Direction::Iso),
            Constraint::Anti => BlockRule::Fixed(Direction::Anti),
        })
        .collect()
}

/// All assignments in lexicographic order (first predictor most significant, Iso before Anti).
pub(crate) fn assignments(rules: &[BlockRule]) -> Vec<Vec<Option<Direction>>> {
    let free: Vec<usize> = (0..rules.len())
        .filter(|&s| rules[s] == BlockRule::Either)
        .collect();
    let t = free.len();
    (0..1usize << t)
        .map(|code| {
            let mut dirs: Vec<Option<Direction>> = rules
                .iter()
                .map(|r| match r {
                    BlockRule::Fixed(d) => Some(*d),
                    _ => None,
                })
                .collect();
            for (pos, &s) in free.iter().enumerate() {
                let bit = (code >> (t - 1 - pos)) & 1;
                dirs[s] = Some(if bit == 0 {
                    Direction::Iso
                } else {
                    Direction::Anti
                });
            }
            dirs
        })
        .collect()
}

pub(crate) struct Enumerated {
    pub solution: Solution,
    pub directions: Vec<Option<Direction>>,
    pub tie: bool,
    pub all_converged: bool,
    pub subproblems: Vec<Subproblem>,
    pub cons: Constraints,
}

/// Solves every direction assignment on top of `base` and keeps the best.
///
/// Assignments whose constraint set is empty are skipped; if all are empty the
/// result is [`Error::Infeasible`].
pub(crate) fn solve_enumerated(
    data: &DesignData,
    layout: &Layout,
    base: &Constraints,
    rules: &[BlockRule],
    start: &[f64],
    opts: &FitOptions,
) -> Result<Enumerated> {
    let t = rules.iter().filter(|r| **r == BlockRule::Either).count();
    if t > opts.max_free_directions {
        return Err(Error::TooManyDirections(t, opts.max_free_directions));
    }
    let all = assignments(rules);
    let sopts = opts.solver();
    let results = map_indices(all.len(), opts.execution, |a| {
        let mut cons = base.clone();
        for (s, d) in all[a].iter().enumerate() {
            if let Some(d) = d {
                cons.cone(layout.ordinal[s].clone(), *d);
            }
        }
        match maximize(data, &cons, start, &sopts) {
            Ok(sol) => Ok(Some((sol, cons))),
            Err(Error::Infeasible(_)) => Ok(None),
            Err(e) => Err(e),
        }
    });

    let mut feasible = Vec::new();
    for (a, r) in results.into_iter().enumerate() {
        if let Some((sol, cons)) = r? {
            feasible.push((a, sol, cons));
        }
    }
    if feasible.is_empty() {
        return Err(Error::Infeasible(
            "no direction assignment admits the requested restrictions".into(),
        ));
    }
    let best_ll = feasible
        .iter()
        .map(|(_, s, _)| s.loglik)
        .fold(f64::NEG_INFINITY, f64::max);
    let near: Vec<usize> = feasible
        .iter()
        .enumerate()
        .filter(|(_, (_, s, _))| s.loglik >= best_ll - TIE_TOLERANCE)
        .map(|(i, _)| i)
        .collect();
    let winner = near[0];
    let all_converged = feasible.iter().all(|(_, s, _)| s.converged);
    let subproblems = feasible
        .iter()
        .map(|(a, s, _)| Subproblem {
            directions: MonotoneDirection(all[*a].clone()),
            log_likelihood: s.loglik,
            converged: s.converged,
        })
        .collect();
    let (a, solution, cons) = feasible.swap_remove(winner);
    Ok(Enumerated {
        solution,
        directions: all[a].clone(),
        tie: near.len() > 1,
        all_converged,
        subproblems,
        cons,
    })
}

fn check_inputs(data: &DesignData, spec: &ModelSpec, opts: &FitOptions) -> Result<Layout> {
    spec.validate()?;
    opts.validate()?;
    let layout = spec.layout();
    if data.k() != spec.k() {
        return Err(Error::InvalidArgument(format!(
            "data has {} response categories, model declares {}",
            data.k(),
            spec.k()
        )));
    }
    if data.n_cols() != layout.n_beta() {
        return Err(Error::DimensionMismatch {
            expected: layout.n_beta(),
            got: data.n_cols(),
        });
    }
    if let Some(j) = data.empty_category() {
        return Err(Error::EmptyCategory(spec.response.levels[j].clone()));
    }
    if let Some(init) = &opts.initial {
        init.check_shape(spec)?;
    }
    Ok(layout)
}

/// Starting point for constrained problems: the caller's initial values or the
/// unconstrained maximiser.
fn warm_start(
    data: &DesignData,
    spec: &ModelSpec,
    layout: &Layout,
    opts: &FitOptions,
) -> Result<Vec<f64>> {
    if let Some(init) = &opts.initial {
        return Ok(init.to_flat());
    }
    let start = default_start(data, layout.p, opts.alpha_gap);
    let cons = Constraints::new(layout, opts.alpha_gap);
    let sol = maximize(data, &cons, &start, &opts.solver())?;
    let _ = spec;
    if sol.quasi_separated {
        Ok(start)
    } else {
        Ok(sol.x)
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    data: &DesignData,
    spec: &ModelSpec,
    layout: &Layout,
    kind: EstimatorKind,
    sol: Solution,
    converged: bool,
    cons: &Constraints,
    directions: Option<MonotoneDirection>,
    tie: bool,
    subproblems: Vec<Subproblem>,
) -> Result<FitResult> {
    let estimate = ParameterVector::from_flat(layout, &sol.x)?;
    estimate.check_shape(spec)?;
    let score_norm = derivatives_flat(data, &sol.x, false)?
        .score
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let fisher = FisherInformation::from_matrix(DMatrix::from_row_slice(
        layout.p,
        layout.p,
        &fisher_flat(data, &sol.x)?,
    ));
    let mut active = vec![Vec::new(); layout.n_ordinal()];
    for (range, flags) in cons.cone_activity(&sol.x) {
        if let Some(s) = layout.ordinal.iter().position(|r| *r == range) {
            active[s] = flags;
        }
    }
    Ok(FitResult {
        kind,
        estimate,
        log_likelihood: sol.loglik,
        converged: converged && !sol.quasi_separated,
        quasi_separated: sol.quasi_separated,
        iterations: sol.iterations,
        score_norm,
        fisher,
        directions,
        active,
        tie,
        subproblems,
    })
}

/// Maximum likelihood over the ordered-intercept space.
pub fn fit_unconstrained(
    data: &DesignData,
    spec: &ModelSpec,
    opts: &FitOptions,
) -> Result<FitResult> {
    let layout = check_inputs(data, spec, opts)?;
    let start = match &opts.initial {
        Some(init) => init.to_flat(),
        None => default_start(data, layout.p, opts.alpha_gap),
    };
    let cons = Constraints::new(&layout, opts.alpha_gap);
    let sol = maximize(data, &cons, &start, &opts.solver())?;
    let converged = sol.converged;
    finish(
        data,
        spec,
        &layout,
        EstimatorKind::Umle,
        sol,
        converged,
        &cons,
        None,
        false,
        Vec::new(),
    )
}

/// Maximum likelihood with every listed direction imposed.
///
/// Predictors declared `Iso`/`Anti` must be given that direction; `Either`
/// predictors must be given some direction. `Unconstrained` predictors may be
/// left as `None`.
pub fn fit_direction_constrained(
    data: &DesignData,
    spec: &ModelSpec,
    directions: &MonotoneDirection,
    opts: &FitOptions,
) -> Result<FitResult> {
    let layout = check_inputs(data, spec, opts)?;
    if directions.len() != layout.n_ordinal() {
        return Err(Error::DimensionMismatch {
            expected: layout.n_ordinal(),
            got: directions.len(),
        });
    }
    let mut rules = Vec::with_capacity(directions.len());
    for (s, c) in spec.constraints().into_iter().enumerate() {
        let d = directions.get(s);
        let rule = match (c, d) {
            (Constraint::Unconstrained, None) => BlockRule::Free,
            (_, Some(d)) => {
                let required = match c {
                    Constraint::Iso => Some(Direction::Iso),
                    Constraint::Anti => Some(Direction::Anti),
                    _ => None,
                };
                if required.is_some_and(|r| r != d) {
                    return Err(Error::InvalidArgument(format!(
                        "ordinal predictor {s} is declared {c:?} but {d} was requested"
                    )));
                }
                BlockRule::Fixed(d)
            }
            (_, None) => {
                return Err(Error::InvalidArgument(format!(
                    "constrained ordinal predictor {s} needs a direction"
                )))
            }
        };
        rules.push(rule);
    }
    let start = warm_start(data, spec, &layout, opts)?;
    let base = Constraints::new(&layout, opts.alpha_gap);
    let en = solve_enumerated(data, &layout, &base, &rules, &start, opts)?;
    let converged = en.solution.converged;
    finish(
        data,
        spec,
        &layout,
        EstimatorKind::Dmle,
        en.solution,
        converged,
        &en.cons,
        Some(MonotoneDirection(en.directions)),
        false,
        en.subproblems,
    )
}

/// Maximum likelihood over the union of all direction assignments allowed by the regimes.
pub fn fit_constrained(
    data: &DesignData,
    spec: &ModelSpec,
    opts: &FitOptions,
) -> Result<FitResult> {
    let none = MonotoneDirection(vec![None; spec.n_ordinal()]);
    enumerate_fit(data, spec, &none, opts, EstimatorKind::Cmle)
}

/// Like [`fit_constrained`], with the directions in `fixed` imposed and only the
/// remaining `Either` predictors enumerated.
pub fn fit_partially_constrained(
    data: &DesignData,
    spec: &ModelSpec,
    fixed: &MonotoneDirection,
    opts: &FitOptions,
) -> Result<FitResult> {
    enumerate_fit(data, spec, fixed, opts, EstimatorKind::Pmle)
}

fn enumerate_fit(
    data: &DesignData,
    spec: &ModelSpec,
    fixed: &MonotoneDirection,
    opts: &FitOptions,
    kind: EstimatorKind,
) -> Result<FitResult> {
    let layout = check_inputs(data, spec, opts)?;
    if fixed.len() != layout.n_ordinal() {
        return Err(Error::DimensionMismatch {
            expected: layout.n_ordinal(),
            got: fixed.len(),
        });
    }
    let mut rules = rules_from_regimes(spec);
    for (s, rule) in rules.iter_mut().enumerate() {
        if let Some(d) = fixed.get(s) {
            if let BlockRule::Fixed(r) = *rule {
                if r != d {
                    return Err(Error::InvalidArgument(format!(
                        "ordinal predictor {s} is declared {r} but {d} was requested"
                    )));
                }
            }
            *rule = BlockRule::Fixed(d);
        }
    }
    let t = rules.iter().filter(|r| **r == BlockRule::Either).count();
    if t > opts.max_free_directions {
        return Err(Error::TooManyDirections(t, opts.max_free_directions));
    }
    let start = warm_start(data, spec, &layout, opts)?;
    let base = Constraints::new(&layout, opts.alpha_gap);
    let en = solve_enumerated(data, &layout, &base, &rules, &start, opts)?;
    let converged = en.all_converged;
    finish(
        data,
        spec,
        &layout,
        kind,
        en.solution,
        converged,
        &en.cons,
        Some(MonotoneDirection(en.directions)),
        en.tie,
        en.subproblems,
    )
}

/// Active flags computed directly from a block and a direction.
pub fn active_flags(block: &[f64]) -> Vec<bool> {
    let mut prev = 0.0;
    block
        .iter()
        .map(|&b| {
            let a = (b - prev).abs() <= ACTIVE_TOL;
            prev = b;
            a
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::params::{check_membership, ParameterSet};
    use crate::model::spec::PredictorSpec;

    #[test]
    fn assignment_order_is_lexicographic() {
        let rules = [
            BlockRule::Either,
            BlockRule::Fixed(Direction::Anti),
            BlockRule::Either,
        ];
        let a = assignments(&rules);
        use Direction::*;
        assert_eq!(
            a,
            vec![
                vec![Some(Iso), Some(Anti), Some(Iso)],
                vec![Some(Iso), Some(Anti), Some(Anti)],
                vec![Some(Anti), Some(Anti), Some(Iso)],
                vec![Some(Anti), Some(Anti), Some(Anti)],
            ]
        );
        assert_eq!(assignments(&[BlockRule::Free]), vec![vec![None]]);
    }

    fn one_op_data() -> (DesignData, ModelSpec) {
        // Response rises with the first two levels and falls at the third: non-monotone.
        let spec = ModelSpec::with_numbered_response(
            "y",
            2,
            vec![PredictorSpec::ordinal_numbered("a", 3, Constraint::Either)],
        )
        .unwrap();
        let mut z = Vec::new();
        let mut x = Vec::new();
        let cells = [
            ((0.0, 0.0), 10, 10),
            ((1.0, 0.0), 4, 16),
            ((0.0, 1.0), 12, 8),
        ];
        for ((d2, d3), n0, n1) in cells {
            z.extend(std::iter::repeat_n(0, n0).chain(std::iter::repeat_n(1, n1)));
            for _ in 0..n0 + n1 {
                x.extend([d2, d3]);
            }
        }
        (DesignData::from_parts(2, 2, z, x).unwrap(), spec)
    }

    #[test]
    fn saturated_binary_model_matches_cell_logits() {
        let (data, spec) = one_op_data();
        let fit = fit_unconstrained(&data, &spec, &FitOptions::default()).unwrap();
        assert!(fit.converged);
        let logit = |a: f64, b: f64| (a / b).ln();
        let a0 = logit(10.0, 10.0);
        assert!((fit.estimate.alpha[0] - a0).abs() < 1e-7);
        assert!((fit.estimate.beta_ord[0][0] - (logit(4.0, 16.0) - a0)).abs() < 1e-7);
        assert!((fit.estimate.beta_ord[0][1] - (logit(12.0, 8.0) - a0)).abs() < 1e-7);
        assert!(fit.score_norm < 1e-6);
    }

    #[test]
    fn constrained_fits_are_feasible_and_nested() {
        let (data, spec) = one_op_data();
        let opts = FitOptions::default();
        let u = fit_unconstrained(&data, &spec, &opts).unwrap();
        let c = fit_constrained(&data, &spec, &opts).unwrap();
        assert!(c.converged);
        assert!(c.log_likelihood <= u.log_likelihood);
        let rep = check_membership(&c.estimate, &spec, &ParameterSet::EitherMonotone).unwrap();
        assert!(rep.member);
        assert_eq!(c.subproblems.len(), 2);
        for d in [Direction::Iso, Direction::Anti] {
            let dm =
                fit_direction_constrained(&data, &spec, &MonotoneDirection(vec![Some(d)]), &opts)
                    .unwrap();
            assert!(dm.log_likelihood <= c.log_likelihood + 1e-12);
            let pm =
                fit_partially_constrained(&data, &spec, &MonotoneDirection(vec![Some(d)]), &opts)
                    .unwrap();
            assert_eq!(pm.flat(), dm.flat());
        }
    }

    #[test]
    fn refit_from_estimate_is_immediate() {
        let (data, spec) = one_op_data();
        let opts = FitOptions::default();
        let c = fit_constrained(&data, &spec, &opts).unwrap();
        let again =
            fit_constrained(&data, &spec, &opts.with_initial(Some(c.estimate.clone()))).unwrap();
        assert!(again.iterations <= 2);
        assert_eq!(again.flat(), c.flat());
    }

    #[test]
    fn empty_category_is_reported() {
        let spec = ModelSpec::with_numbered_response("y", 3, vec![]).unwrap();
        let data = DesignData::from_parts(3, 0, vec![0, 2, 2], vec![]).unwrap();
        let err = fit_unconstrained(&data, &spec, &FitOptions::default()).unwrap_err();
        assert!(matches!(err, Error::EmptyCategory(ref l) if l == "2"));
    }

    #[test]
    fn separation_is_flagged() {
        let spec =
            ModelSpec::with_numbered_response("y", 2, vec![PredictorSpec::numeric("x")]).unwrap();
        let data =
            DesignData::from_parts(2, 1, vec![0, 0, 1, 1], vec![-2.0, -1.0, 1.0, 2.0]).unwrap();
        let fit = fit_unconstrained(&data, &spec, &FitOptions::default()).unwrap();
        assert!(fit.quasi_separated);
        assert!(!fit.converged);
    }

    #[test]
    fn enumeration_cap() {
        let preds: Vec<_> = (0..3)
            .map(|i| PredictorSpec::ordinal_numbered(format!("o{i}"), 2, Constraint::Either))
            .collect();
        let spec = ModelSpec::with_numbered_response("y", 2, preds).unwrap();
        let data = DesignData::from_parts(2, 3, vec![0, 1], vec![0.0; 6]).unwrap();
        let opts = FitOptions {
            max_free_directions: 2,
            ..FitOptions::default()
        };
        assert!(matches!(
            fit_constrained(&data, &spec, &opts),
            Err(Error::TooManyDirections(3, 2))
        ));
    }
}
