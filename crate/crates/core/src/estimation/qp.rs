//! Dense strictly convex quadratic programming.
//!
//! Dual active-set method of Goldfarb and Idnani: start from the unconstrained
//! minimizer and add violated constraints one at a time, dropping active ones
//! whose multipliers would turn negative. No feasible starting point is needed
//! and infeasibility is detected. The projection operators are rebuilt from
//! scratch whenever the active set changes, which is cheap at the sizes used
//! here (a few dozen variables).

use nalgebra::{DMatrix, DVector};

/// `normal · x = rhs` or `normal · x ≥ rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub normal: DVector<f64>,
    pub rhs: f64,
}

impl LinearConstraint {
    pub fn new(normal: DVector<f64>, rhs: f64) -> Self {
        LinearConstraint { normal, rhs }
    }

    pub fn slack(&self, x: &DVector<f64>) -> f64 {
        self.normal.dot(x) - self.rhs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpError {
    NotPositiveDefinite,
    Infeasible,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub x: DVector<f64>,
    /// Indices of inequality constraints active at the solution.
    pub active_inequalities: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Which {
    Eq(usize),
    Ineq(usize),
}

struct Active {
    which: Which,
    normal: DVector<f64>,
    multiplier: f64,
}

/// Minimizes `½ x'Gx + a'x` subject to the given equality and inequality constraints.
pub fn solve_qp(
    g: &DMatrix<f64>,
    a: &DVector<f64>,
    eqs: &[LinearConstraint],
    ineqs: &[LinearConstraint],
) -> Result<QpSolution, QpError> {
    let n = a.len();
    let g_inv = g
        .clone()
        .cholesky()
        .ok_or(QpError::NotPositiveDefinite)?
        .inverse();
    let mut x = -(&g_inv * a);
    let mut active: Vec<Active> = Vec::new();
    let mut skipped_eq = vec![false; eqs.len()];
    let max_iter = 50 * (eqs.len() + ineqs.len() + n + 1);
    let mut iter = 0;

    loop {
        // Pick the next constraint: pending equalities first, then the most violated inequality.
        let pending_eq = (0..eqs.len())
            .find(|&i| !skipped_eq[i] && !active.iter().any(|c| c.which == Which::Eq(i)));
        let chosen = match pending_eq {
            Some(i) => Which::Eq(i),
            None => {
                let mut worst: Option<(usize, f64)> = None;
                for (i, c) in ineqs.iter().enumerate() {
                    if active.iter().any(|a| a.which == Which::Ineq(i)) {
                        continue;
                    }
                    let s = c.slack(&x);
                    if s < -violation_tol(c) && worst.is_none_or(|(_, w)| s < w) {
                        worst = Some((i, s));
                    }
                }
                match worst {
                    Some((i, _)) => Which::Ineq(i),
                    None => {
                        return Ok(QpSolution {
                            x,
                            active_inequalities: active
                                .iter()
                                .filter_map(|c| match c.which {
                                    Which::Ineq(i) => Some(i),
                                    Which::Eq(_) => None,
                                })
                                .collect(),
                        })
                    }
                }
            }
        };
        let (mut np, mut bp) = match chosen {
            Which::Eq(i) => (eqs[i].normal.clone(), eqs[i].rhs),
            Which::Ineq(i) => (ineqs[i].normal.clone(), ineqs[i].rhs),
        };
        let mut s = np.dot(&x) - bp;
        if matches!(chosen, Which::Eq(_)) && s > 0.0 {
            np = -np;
            bp = -bp;
            s = -s;
        }
        let _ = bp;
        let np_scale = np.dot(&(&g_inv * &np)).max(f64::MIN_POSITIVE);
        let mut u_p = 0.0;

        loop {
            iter += 1;
            if iter > max_iter {
                return Err(QpError::IterationLimit);
            }
            let (h, n_star) = operators(&g_inv, &active);
            let z = &h * &np;
            let r: DVector<f64> = match &n_star {
                Some(ns) => ns * &np,
                None => DVector::zeros(0),
            };
            let mut t1 = f64::INFINITY;
            let mut drop_idx = None;
            for (j, c) in active.iter().enumerate() {
                if matches!(c.which, Which::Ineq(_)) && r[j] > 1e-14 {
                    let ratio = c.multiplier / r[j];
                    if ratio < t1 {
                        t1 = ratio;
                        drop_idx = Some(j);
                    }
                }
            }
            let ztn = z.dot(&np);
            let t2 = if ztn > 1e-11 * np_scale {
                -s / ztn
            } else {
                f64::INFINITY
            };

            if t2.is_infinite() {
                if t1.is_infinite() {
                    // Linearly dependent on the active set with no multiplier to trade.
                    if s.abs() <= violation_tol_raw(np_scale.sqrt(), bp_abs(&chosen, eqs, ineqs)) {
                        if let Which::Eq(i) = chosen {
                            skipped_eq[i] = true;
                        }
                        break;
                    }
                    return Err(QpError::Infeasible);
                }
                for (j, c) in active.iter_mut().enumerate() {
                    c.multiplier -= t1 * r[j];
                }
                u_p += t1;
                active.remove(drop_idx.expect("finite t1 has an index"));
                continue;
            }

            let t = t1.min(t2);
            x += t * &z;
            for (j, c) in active.iter_mut().enumerate() {
                c.multiplier -= t * r[j];
            }
            u_p += t;
            s += t * ztn;
            if t2 <= t1 {
                active.push(Active {
                    which: chosen,
                    normal: np.clone(),
                    multiplier: u_p,
                });
                break;
            }
            active.remove(drop_idx.expect("finite t1 has an index"));
        }
    }
}

fn bp_abs(which: &Which, eqs: &[LinearConstraint], ineqs: &[LinearConstraint]) -> f64 {
    match *which {
        Which::Eq(i) => eqs[i].rhs.abs(),
        Which::Ineq(i) => ineqs[i].rhs.abs(),
    }
}

fn violation_tol(c: &LinearConstraint) -> f64 {
    violation_tol_raw(c.normal.norm(), c.rhs.abs())
}

fn violation_tol_raw(normal_norm: f64, rhs_abs: f64) -> f64 {
    1e-11 * (1.0 + rhs_abs + normal_norm)
}

/// `H = G⁻¹ − G⁻¹N(N'G⁻¹N)⁻¹N'G⁻¹` and `N* = (N'G⁻¹N)⁻¹N'G⁻¹`.
fn operators(g_inv: &DMatrix<f64>, active: &[Active]) -> (DMatrix<f64>, Option<DMatrix<f64>>) {
    if active.is_empty() {
        return (g_inv.clone(), None);
    }
    let n = g_inv.nrows();
    let q = active.len();
    let mut nmat = DMatrix::zeros(n, q);
    for (j, c) in active.iter().enumerate() {
        nmat.set_column(j, &c.normal);
    }
    let gn = g_inv * &nmat;
    let b = nmat.transpose() * &gn;
    let b_inv = match b.clone().cholesky() {
        Some(ch) => ch.inverse(),
        None => b
            .pseudo_inverse(1e-14)
            .expect("pseudo-inverse of a symmetric matrix"),
    };
    let n_star = &b_inv * gn.transpose();
    let h = g_inv - &gn * &n_star;
    (h, Some(n_star))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(normal: &[f64], rhs: f64) -> LinearConstraint {
        LinearConstraint::new(DVector::from_row_slice(normal), rhs)
    }

    #[test]
    fn unconstrained_minimum() {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 4.0]);
        let a = DVector::from_row_slice(&[-2.0, -4.0]);
        let sol = solve_qp(&g, &a, &[], &[]).unwrap();
        assert!((sol.x[0] - 1.0).abs() < 1e-12 && (sol.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projection_onto_ordered_cone() {
        // Project (0.3, -0.1) onto {0 ≤ x1 ≤ x2}: pooled mean (0.1, 0.1).
        let g = DMatrix::identity(2, 2);
        let a = DVector::from_row_slice(&[-0.3, 0.1]);
        let ineq = [c(&[1.0, 0.0], 0.0), c(&[-1.0, 1.0], 0.0)];
        let sol = solve_qp(&g, &a, &[], &ineq).unwrap();
        assert!((sol.x[0] - 0.1).abs() < 1e-12 && (sol.x[1] - 0.1).abs() < 1e-12);
        assert_eq!(sol.active_inequalities, vec![1]);
    }

    #[test]
    fn equality_and_bounds() {
        // min ½|x|² s.t. x1 + x2 = 1, x1 ≥ 0.8
        let g = DMatrix::identity(2, 2);
        let a = DVector::zeros(2);
        let sol = solve_qp(&g, &a, &[c(&[1.0, 1.0], 1.0)], &[c(&[1.0, 0.0], 0.8)]).unwrap();
        assert!((sol.x[0] - 0.8).abs() < 1e-12 && (sol.x[1] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasibility() {
        let g = DMatrix::identity(1, 1);
        let a = DVector::zeros(1);
        let res = solve_qp(&g, &a, &[], &[c(&[1.0], 1.0), c(&[-1.0], 0.0)]);
        assert_eq!(res.unwrap_err(), QpError::Infeasible);
        let res = solve_qp(&g, &a, &[c(&[1.0], 2.0)], &[c(&[-1.0], 0.0)]);
        assert_eq!(res.unwrap_err(), QpError::Infeasible);
    }

    #[test]
    fn redundant_equalities_are_tolerated() {
        let g = DMatrix::identity(2, 2);
        let a = DVector::zeros(2);
        let eqs = [c(&[1.0, 0.0], 0.5), c(&[2.0, 0.0], 1.0)];
        let sol = solve_qp(&g, &a, &eqs, &[]).unwrap();
        assert!((sol.x[0] - 0.5).abs() < 1e-12 && sol.x[1].abs() < 1e-12);
    }

    #[test]
    fn matches_brute_force_on_random_boxes() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            // Diagonal G with box constraints has a closed-form clamp solution.
            let d: Vec<f64> = (0..3).map(|_| rng.random_range(0.5..3.0)).collect();
            let t: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let lo: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..0.5)).collect();
            let g = DMatrix::from_diagonal(&DVector::from_vec(d.clone()));
            let a = DVector::from_iterator(3, (0..3).map(|i| -d[i] * t[i]));
            let ineq: Vec<_> = (0..3)
                .map(|i| {
                    let mut n = vec![0.0; 3];
                    n[i] = 1.0;
                    c(&n, lo[i])
                })
                .collect();
            let sol = solve_qp(&g, &a, &[], &ineq).unwrap();
            for i in 0..3 {
                assert!((sol.x[i] - t[i].max(lo[i])).abs() < 1e-10);
            }
        }
    }
}
