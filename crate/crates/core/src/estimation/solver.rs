//! Newton-type maximisation of the log-likelihood under linear constraints.
//!
//! Each iteration solves the quadratic model built from the exact Hessian
//! (negative definite for the cumulative logit, up to rounding) under the
//! linearised constraints, then backtracks along the step. All constraints used
//! here are linear, so the feasible set is polyhedral and every iterate stays
//! feasible.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::estimation::qp::{solve_qp, LinearConstraint, QpError};
use crate::model::likelihood::{derivatives_flat, loglik_flat};
use crate::model::spec::{Direction, Layout};
use crate::model::DesignData;

/// Tolerance used to decide that an inequality holds with equality.
pub(crate) const ACTIVE_TOL: f64 = 1e-10;

/// Largest Newton step accepted at convergence.
const STEP_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone)]
pub(crate) struct Constraints {
    p: usize,
    n_alpha: usize,
    alpha_gap: f64,
    eq: Vec<LinearConstraint>,
    ineq: Vec<LinearConstraint>,
    fixed: Vec<Option<f64>>,
    cones: Vec<(Range<usize>, Direction)>,
}

impl Constraints {
    /// Intercept ordering `α_j − α_{j−1} ≥ alpha_gap` only.
    pub(crate) fn new(layout: &Layout, alpha_gap: f64) -> Self {
        let p = layout.p;
        let n_alpha = layout.n_alpha();
        let mut ineq = Vec::new();
        for j in 1..n_alpha {
            let mut n = DVector::zeros(p);
            n[j] = 1.0;
            n[j - 1] = -1.0;
            ineq.push(LinearConstraint::new(n, alpha_gap));
        }
        Constraints {
            p,
            n_alpha,
            alpha_gap,
            eq: Vec::new(),
            ineq,
            fixed: vec![None; p],
            cones: Vec::new(),
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.p
    }

    pub(crate) fn fix(&mut self, index: usize, value: f64) {
        let mut n = DVector::zeros(self.p);
        n[index] = 1.0;
        self.eq.push(LinearConstraint::new(n, value));
        self.fixed[index] = Some(value);
    }

    /// `row · γ = rhs`; unit rows are turned into fixed coordinates.
    pub(crate) fn equal(&mut self, row: &[f64], rhs: f64) {
        let nonzero: Vec<usize> = (0..row.len()).filter(|&i| row[i] != 0.0).collect();
        if nonzero.len() == 1 {
            let i = nonzero[0];
            self.fix(i, rhs / row[i]);
        } else {
            self.eq
                .push(LinearConstraint::new(DVector::from_row_slice(row), rhs));
        }
    }

    /// `row · γ ≥ rhs`.
    pub(crate) fn at_least(&mut self, row: &[f64], rhs: f64) {
        self.ineq
            .push(LinearConstraint::new(DVector::from_row_slice(row), rhs));
    }

    /// Monotone chain `0 ≤ b_1 ≤ … ≤ b_m` (mirrored for antitonic) on `range`.
    pub(crate) fn cone(&mut self, range: Range<usize>, dir: Direction) {
        let s = dir.sign();
        let mut prev: Option<usize> = None;
        for i in range.clone() {
            let mut n = DVector::zeros(self.p);
            n[i] = s;
            if let Some(j) = prev {
                n[j] = -s;
            }
            self.ineq.push(LinearConstraint::new(n, 0.0));
            prev = Some(i);
        }
        self.cones.push((range, dir));
    }

    pub(crate) fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        let v = DVector::from_row_slice(x);
        self.eq.iter().all(|c| c.slack(&v).abs() <= tol)
            && self.ineq.iter().all(|c| c.slack(&v) >= -tol)
    }

    /// Euclidean projection onto the feasible set.
    pub(crate) fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        let g = DMatrix::identity(self.p, self.p);
        let a = -DVector::from_row_slice(x);
        let sol = solve_qp(&g, &a, &self.eq, &self.ineq).map_err(qp_error)?;
        let mut out: Vec<f64> = sol.x.iter().copied().collect();
        self.snap(&mut out);
        Ok(out)
    }

    /// Removes rounding-level violations: fixed coordinates are set exactly,
    /// intercept gaps and cone inequalities are clamped.
    pub(crate) fn snap(&self, x: &mut [f64]) {
        for (i, f) in self.fixed.iter().enumerate() {
            if let Some(v) = f {
                x[i] = *v;
            }
        }
        for j in 1..self.n_alpha {
            if self.fixed[j].is_none() && x[j] < x[j - 1] + self.alpha_gap {
                x[j] = x[j - 1] + self.alpha_gap;
            }
        }
        for (range, dir) in &self.cones {
            let s = dir.sign();
            let mut prev = 0.0;
            for i in range.clone() {
                if self.fixed[i].is_none() && s * (x[i] - prev) < 0.0 {
                    x[i] = prev;
                }
                prev = x[i];
            }
        }
    }

    /// Per cone, which of its inequalities hold with equality at `x`.
    pub(crate) fn cone_activity(&self, x: &[f64]) -> Vec<(Range<usize>, Vec<bool>)> {
        self.cones
            .iter()
            .map(|(range, _)| {
                let mut prev = 0.0;
                let flags = range
                    .clone()
                    .map(|i| {
                        let active = (x[i] - prev).abs() <= ACTIVE_TOL;
                        prev = x[i];
                        active
                    })
                    .collect();
                (range.clone(), flags)
            })
            .collect()
    }
}

pub(crate) fn qp_error(e: QpError) -> Error {
    match e {
        QpError::Infeasible => Error::Infeasible("no parameter satisfies the constraints".into()),
        QpError::NotPositiveDefinite => {
            Error::Optimizer("quadratic model is not positive definite".into())
        }
        QpError::IterationLimit => Error::Optimizer("active-set iteration limit reached".into()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SolverOptions {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub loglik_tolerance: f64,
    pub magnitude_cap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Solution {
    pub x: Vec<f64>,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    pub quasi_separated: bool,
}

/// Intercepts from logits of the cumulative marginal response proportions, slopes zero.
pub(crate) fn default_start(data: &DesignData, p: usize, alpha_gap: f64) -> Vec<f64> {
    let n = data.n() as f64;
    let counts = data.category_counts();
    let k = data.k();
    let mut x = vec![0.0; p];
    let mut cum = 0.0;
    let lo = 0.5 / n;
    for j in 0..k - 1 {
        cum += counts[j] as f64;
        let q = (cum / n).clamp(lo, 1.0 - lo);
        x[j] = (q / (1.0 - q)).ln();
        if j > 0 && x[j] < x[j - 1] + alpha_gap.max(1e-3) {
            x[j] = x[j - 1] + alpha_gap.max(1e-3);
        }
    }
    x
}

/// Maximises the log-likelihood over `cons` starting from `start`.
///
/// An infeasible start is first projected onto the constraint set. If the
/// likelihood cannot be evaluated there, the marginal default start is
/// projected instead.
pub(crate) fn maximize(
    data: &DesignData,
    cons: &Constraints,
    start: &[f64],
    opts: &SolverOptions,
) -> Result<Solution> {
    let p = cons.dim();
    if start.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: start.len(),
        });
    }
    let mut x = if cons.is_feasible(start, 1e-12) {
        let mut x = start.to_vec();
        cons.snap(&mut x);
        x
    } else {
        cons.project(start)?
    };
    let mut ll = match loglik_flat(data, &x) {
        Ok(v) => v,
        Err(_) => {
            x = cons.project(&default_start(data, p, cons.alpha_gap))?;
            loglik_flat(data, &x)?
        }
    };

    let mut iterations = 0;
    let mut converged = false;
    let mut quasi_separated = false;
    while iterations < opts.max_iterations {
        iterations += 1;
        let d = derivatives_flat(data, &x, true)?;
        let hess = d.hessian.expect("hessian requested");
        let grad = DVector::from_vec(d.score);
        let mut g = -DMatrix::from_row_slice(p, p, &hess);
        regularize(&mut g);

        let xv = DVector::from_row_slice(&x);
        let shift = |c: &LinearConstraint| {
            LinearConstraint::new(c.normal.clone(), c.rhs - c.normal.dot(&xv))
        };
        let eqs: Vec<_> = cons.eq.iter().map(shift).collect();
        let ineqs: Vec<_> = cons.ineq.iter().map(shift).collect();
        let step = solve_qp(&g, &(-&grad), &eqs, &ineqs).map_err(qp_error)?.x;

        let gd = grad.dot(&step);
        let pred = gd - 0.5 * step.dot(&(&g * &step));
        let residual = (&g * &step).amax();
        // Under separation the steps keep their length while the gradient fades,
        // so a small step is required as well.
        let small_step = step.amax() <= STEP_TOLERANCE;
        if pred <= opts.loglik_tolerance * (1.0 + ll.abs())
            && residual < opts.gradient_tolerance
            && small_step
        {
            converged = true;
            break;
        }

        let mut t = 1.0;
        let mut accepted = None;
        // Below what ℓ can resolve, a step only has to avoid losing ground.
        let noise = ll.abs().max(1.0) * 1e-12;
        let unresolved = pred <= noise && small_step;
        for _ in 0..60 {
            let mut y: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + t * b).collect();
            cons.snap(&mut y);
            if let Ok(ll_y) = loglik_flat(data, &y) {
                let enough = if unresolved {
                    ll_y >= ll - noise
                } else {
                    ll_y >= ll + 1e-4 * t * gd
                };
                if enough {
                    accepted = Some((y, ll_y));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((y, ll_y)) => {
                x = y;
                ll = ll_y;
            }
            None => {
                // No further progress is numerically possible.
                converged = residual < opts.gradient_tolerance && small_step;
                break;
            }
        }
        if x.iter().any(|v| v.abs() > opts.magnitude_cap) {
            quasi_separated = true;
            break;
        }
    }
    Ok(Solution {
        x,
        loglik: ll,
        iterations,
        converged,
        quasi_separated,
    })
}

/// Adds a multiple of the identity until `g` has a Cholesky factor.
fn regularize(g: &mut DMatrix<f64>) {
    let n = g.nrows();
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (g[(i, j)] + g[(j, i)]);
            g[(i, j)] = m;
            g[(j, i)] = m;
        }
    }
    if g.clone().cholesky().is_some() {
        return;
    }
    let scale = (0..n).map(|i| g[(i, i)].abs()).fold(1.0, f64::max);
    let mut mu = 1e-10 * scale;
    loop {
        let mut h = g.clone();
        for i in 0..n {
            h[(i, i)] += mu;
        }
        if h.clone().cholesky().is_some() {
            *g = h;
            return;
        }
        mu *= 10.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::spec::{Constraint, ModelSpec, PredictorSpec};

    fn opts() -> SolverOptions {
        SolverOptions {
            max_iterations: 100,
            gradient_tolerance: 1e-8,
            loglik_tolerance: 1e-13,
            magnitude_cap: 30.0,
        }
    }

    #[test]
    fn binomial_intercept_is_logit_of_share() {
        let data = DesignData::from_parts(2, 0, vec![0, 0, 0, 1], vec![]).unwrap();
        let spec = ModelSpec::with_numbered_response("y", 2, vec![]).unwrap();
        let cons = Constraints::new(&spec.layout(), 1e-8);
        let sol = maximize(&data, &cons, &[0.0], &opts()).unwrap();
        assert!(sol.converged);
        assert!((sol.x[0] - 3f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn snap_respects_fixed_coordinates() {
        let spec = ModelSpec::with_numbered_response(
            "y",
            3,
            vec![PredictorSpec::ordinal_numbered("a", 4, Constraint::Either)],
        )
        .unwrap();
        let layout = spec.layout();
        let mut cons = Constraints::new(&layout, 1e-8);
        cons.fix(3, 0.5);
        cons.cone(layout.ordinal[0].clone(), Direction::Iso);
        let mut x = vec![0.0, -1.0, -0.1, 0.5 + 1e-15, 0.2];
        cons.snap(&mut x);
        assert_eq!(x[1], 0.0 + 1e-8);
        assert_eq!(x[2], 0.0);
        assert_eq!(x[3], 0.5);
        assert_eq!(x[4], 0.5);
        let proj = cons.project(&[0.0, 1.0, 0.9, 0.1, 0.2]).unwrap();
        assert!(cons.is_feasible(&proj, 1e-10));
        assert_eq!(proj[3], 0.5);
    }
}
