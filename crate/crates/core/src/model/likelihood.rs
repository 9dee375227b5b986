//! Log-likelihood, score, observed Hessian and expected information of the
//! proportional odds model `logit P(z ≤ j | x) = α_j + x'β`.
//!
//! Category probabilities are differences of logistic CDFs. They are evaluated
//! in log space through `σ(a) − σ(b) = σ(a)·σ(−b)·(1 − e^{b−a})`, which does not
//! cancel when both `a` and `b` are far out in the same tail.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::data::DesignData;
use crate::model::params::ParameterVector;
use crate::model::spec::ModelSpec;

/// `ln(1e-300)`: observed-category log probabilities below this are reported as underflow.
pub const LOG_PROB_FLOOR: f64 = -690.775_527_898_213_7;

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Log probability of each of the `k` categories given cutpoint predictors `eta`
/// (`eta[j] = α_{j+1} + x'β`, strictly increasing).
pub fn log_category_probabilities(eta: &[f64]) -> Vec<f64> {
    let k = eta.len() + 1;
    (0..k).map(|c| log_prob_of(eta, c)).collect()
}

#[inline]
fn log_prob_of(eta: &[f64], c: usize) -> f64 {
    let last = eta.len();
    if c == 0 {
        log_sigmoid(eta[0])
    } else if c == last {
        log_sigmoid(-eta[last - 1])
    } else {
        let a = eta[c];
        let b = eta[c - 1];
        log_sigmoid(a) + log_sigmoid(-b) + (-(b - a).exp_m1()).ln()
    }
}

/// First and second derivatives of one observation's log probability with
/// respect to its upper (`a`) and lower (`b`) cutpoint predictors.
#[derive(Debug, Clone, Copy)]
struct ObsTerm {
    log_p: f64,
    g_a: f64,
    g_b: f64,
    h_aa: f64,
    h_bb: f64,
    h_ab: f64,
}

#[inline]
fn obs_term(eta: &[f64], c: usize) -> ObsTerm {
    let last = eta.len();
    if c == 0 {
        let a = eta[0];
        let (sa, sna) = (sigmoid(a), sigmoid(-a));
        ObsTerm {
            log_p: log_sigmoid(a),
            g_a: sna,
            g_b: 0.0,
            h_aa: -sa * sna,
            h_bb: 0.0,
            h_ab: 0.0,
        }
    } else if c == last {
        let b = eta[last - 1];
        let (sb, snb) = (sigmoid(b), sigmoid(-b));
        ObsTerm {
            log_p: log_sigmoid(-b),
            g_a: 0.0,
            g_b: -sb,
            h_aa: 0.0,
            h_bb: -sb * snb,
            h_ab: 0.0,
        }
    } else {
        let a = eta[c];
        let b = eta[c - 1];
        let log_gap = (-(b - a).exp_m1()).ln();
        let lsa = log_sigmoid(a);
        let lsnb = log_sigmoid(-b);
        // f(a)/π = σ(−a) / (σ(−b)(1 − e^{b−a})),  f(b)/π = σ(b) / (σ(a)(1 − e^{b−a}))
        let g_a = (log_sigmoid(-a) - lsnb - log_gap).exp();
        let g_b = -(log_sigmoid(b) - lsa - log_gap).exp();
        let h_aa = g_a * (1.0 - 2.0 * sigmoid(a)) - g_a * g_a;
        let h_bb = g_b * (1.0 - 2.0 * sigmoid(b)) - g_b * g_b;
        ObsTerm {
            log_p: lsa + lsnb + log_gap,
            g_a,
            g_b,
            h_aa,
            h_bb,
            h_ab: -g_a * g_b,
        }
    }
}

fn check_inputs(data: &DesignData, gamma: &[f64]) -> Result<()> {
    let n_alpha = data.k() - 1;
    if gamma.len() != n_alpha + data.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: n_alpha + data.n_cols(),
            got: gamma.len(),
        });
    }
    let alpha = &gamma[..n_alpha];
    if alpha.iter().any(|a| !a.is_finite()) || alpha.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::UnorderedIntercepts);
    }
    Ok(())
}

#[inline]
fn linear_part(row: &[f64], beta: &[f64]) -> f64 {
    row.iter().zip(beta).map(|(x, b)| x * b).sum()
}

#[inline]
fn fill_eta(eta: &mut [f64], alpha: &[f64], shift: f64) {
    for (e, a) in eta.iter_mut().zip(alpha) {
        *e = a + shift;
    }
}

/// Log-likelihood at a flat parameter vector.
pub fn loglik_flat(data: &DesignData, gamma: &[f64]) -> Result<f64> {
    check_inputs(data, gamma)?;
    let n_alpha = data.k() - 1;
    let (alpha, beta) = gamma.split_at(n_alpha);
    let mut eta = vec![0.0; n_alpha];
    let mut total = 0.0;
    for i in 0..data.n() {
        fill_eta(&mut eta, alpha, linear_part(data.row(i), beta));
        let lp = log_prob_of(&eta, data.response(i));
        if !(lp >= LOG_PROB_FLOOR) {
            return Err(Error::ProbabilityUnderflow(i));
        }
        total += lp;
    }
    Ok(total)
}

/// Log-likelihood, score and (optionally) observed Hessian in one pass.
#[derive(Debug, Clone)]
pub struct Derivatives {
    pub loglik: f64,
    pub score: Vec<f64>,
    /// Row-major `p × p` matrix of second derivatives (negative semi-definite).
    pub hessian: Option<Vec<f64>>,
}

pub fn derivatives_flat(
    data: &DesignData,
    gamma: &[f64],
    with_hessian: bool,
) -> Result<Derivatives> {
    check_inputs(data, gamma)?;
    let p = gamma.len();
    let n_alpha = data.k() - 1;
    let (alpha, beta) = gamma.split_at(n_alpha);
    let mut eta = vec![0.0; n_alpha];
    let mut score = vec![0.0; p];
    let mut hess = if with_hessian {
        vec![0.0; p * p]
    } else {
        Vec::new()
    };
    let mut nz: Vec<(usize, f64)> = Vec::with_capacity(data.n_cols());
    let mut total = 0.0;
    for i in 0..data.n() {
        let row = data.row(i);
        fill_eta(&mut eta, alpha, linear_part(row, beta));
        let c = data.response(i);
        let t = obs_term(&eta, c);
        if !(t.log_p >= LOG_PROB_FLOOR) {
            return Err(Error::ProbabilityUnderflow(i));
        }
        total += t.log_p;
        nz.clear();
        nz.extend(row.iter().copied().enumerate().filter(|(_, v)| *v != 0.0));
        let g_lin = t.g_a + t.g_b;
        if c < n_alpha {
            score[c] += t.g_a;
        }
        if c > 0 {
            score[c - 1] += t.g_b;
        }
        for &(j, v) in &nz {
            score[n_alpha + j] += g_lin * v;
        }
        if with_hessian {
            // Small symmetric block over the (at most two) cutpoints touched by c.
            let mut idx = [(0usize, 0.0f64, 0.0f64); 2];
            let mut m = 0;
            if c > 0 {
                idx[m] = (c - 1, t.h_bb, t.h_ab);
                m += 1;
            }
            if c < n_alpha {
                idx[m] = (c, t.h_aa, t.h_ab);
                m += 1;
            }
            let mut cut_rows = [0.0f64; 2];
            for a in 0..m {
                let (ia, diag, _) = idx[a];
                hess[ia * p + ia] += diag;
                cut_rows[a] = diag;
                for (b, &(ib, _, off)) in idx[..m].iter().enumerate() {
                    if a != b {
                        hess[ia * p + ib] += off;
                        cut_rows[a] += off;
                    }
                }
            }
            let total_lin = t.h_aa + t.h_bb + 2.0 * t.h_ab;
            accumulate_linear(
                &mut hess,
                p,
                n_alpha,
                &idx[..m],
                &cut_rows[..m],
                total_lin,
                &nz,
            );
        }
    }
    let hessian = with_hessian.then(|| {
        symmetrize_upper(&mut hess, p, n_alpha);
        hess
    });
    Ok(Derivatives {
        loglik: total,
        score,
        hessian,
    })
}

/// Adds the cutpoint/slope and slope/slope parts of `Σ_{m,m'} M_{mm'} d_m d_{m'}'`
/// where `d_m = (e_m, x)`. Only the upper triangle of the slope block is filled.
#[inline]
fn accumulate_linear(
    hess: &mut [f64],
    p: usize,
    n_alpha: usize,
    cuts: &[(usize, f64, f64)],
    row_sums: &[f64],
    total: f64,
    nz: &[(usize, f64)],
) {
    for (a, &(ia, _, _)) in cuts.iter().enumerate() {
        for &(j, v) in nz {
            let val = row_sums[a] * v;
            hess[ia * p + n_alpha + j] += val;
            hess[(n_alpha + j) * p + ia] += val;
        }
    }
    for (u, &(j1, v1)) in nz.iter().enumerate() {
        let w = total * v1;
        for &(j2, v2) in &nz[u..] {
            hess[(n_alpha + j1) * p + n_alpha + j2] += w * v2;
        }
    }
}

fn symmetrize_upper(m: &mut [f64], p: usize, n_alpha: usize) {
    for r in n_alpha..p {
        for c in (r + 1)..p {
            m[c * p + r] = m[r * p + c];
        }
    }
}

/// Expected information `Σ_i Σ_j (∂π_ij/∂γ)(∂π_ij/∂γ)' / π_ij`, row-major.
pub fn fisher_flat(data: &DesignData, gamma: &[f64]) -> Result<Vec<f64>> {
    check_inputs(data, gamma)?;
    let p = gamma.len();
    let n_alpha = data.k() - 1;
    let k = data.k();
    let (alpha, beta) = gamma.split_at(n_alpha);
    let mut eta = vec![0.0; n_alpha];
    let mut f = vec![0.0; n_alpha];
    let mut inv_pi = vec![0.0; k];
    let mut small = vec![0.0; n_alpha * n_alpha];
    let mut info = vec![0.0; p * p];
    let mut nz: Vec<(usize, f64)> = Vec::with_capacity(data.n_cols());
    let mut cuts: Vec<(usize, f64, f64)> = (0..n_alpha).map(|m| (m, 0.0, 0.0)).collect();
    let mut row_sums = vec![0.0; n_alpha];
    for i in 0..data.n() {
        let row = data.row(i);
        fill_eta(&mut eta, alpha, linear_part(row, beta));
        for (fm, &e) in f.iter_mut().zip(&eta) {
            *fm = sigmoid(e) * sigmoid(-e);
        }
        for (c, ip) in inv_pi.iter_mut().enumerate() {
            let pi = log_prob_of(&eta, c).exp();
            *ip = if pi > 0.0 { 1.0 / pi } else { 0.0 };
        }
        // Tridiagonal M: M_mm = f_m²(1/π_m + 1/π_{m+1}), M_{m,m+1} = −f_m f_{m+1}/π_{m+1}.
        small.iter_mut().for_each(|v| *v = 0.0);
        for m in 0..n_alpha {
            small[m * n_alpha + m] = f[m] * f[m] * (inv_pi[m] + inv_pi[m + 1]);
            if m + 1 < n_alpha {
                let off = -f[m] * f[m + 1] * inv_pi[m + 1];
                small[m * n_alpha + m + 1] = off;
                small[(m + 1) * n_alpha + m] = off;
            }
        }
        let mut total = 0.0;
        for m in 0..n_alpha {
            let rs: f64 = small[m * n_alpha..(m + 1) * n_alpha].iter().sum();
            row_sums[m] = rs;
            total += rs;
            for m2 in 0..n_alpha {
                info[m * p + m2] += small[m * n_alpha + m2];
            }
            cuts[m] = (m, 0.0, 0.0);
        }
        nz.clear();
        nz.extend(row.iter().copied().enumerate().filter(|(_, v)| *v != 0.0));
        accumulate_linear(&mut info, p, n_alpha, &cuts, &row_sums, total, &nz);
    }
    symmetrize_upper(&mut info, p, n_alpha);
    Ok(info)
}

/// Category probabilities `π_1..π_k` for one design row.
pub fn category_probabilities(params: &ParameterVector, row: &[f64]) -> Result<Vec<f64>> {
    if !params.intercepts_ordered() {
        return Err(Error::UnorderedIntercepts);
    }
    let flat = params.to_flat();
    let n_alpha = params.alpha.len();
    let beta = &flat[n_alpha..];
    if row.len() != beta.len() {
        return Err(Error::DimensionMismatch {
            expected: beta.len(),
            got: row.len(),
        });
    }
    let shift = linear_part(row, beta);
    let eta: Vec<f64> = params.alpha.iter().map(|a| a + shift).collect();
    Ok(log_category_probabilities(&eta)
        .into_iter()
        .map(f64::exp)
        .collect())
}

pub fn log_likelihood(params: &ParameterVector, data: &DesignData) -> Result<f64> {
    loglik_flat(data, &params.to_flat())
}

/// Gradient of the log-likelihood with respect to the flat parameter vector.
pub fn score(params: &ParameterVector, data: &DesignData) -> Result<Vec<f64>> {
    Ok(derivatives_flat(data, &params.to_flat(), false)?.score)
}

/// Condition numbers above this flag the information matrix as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct FisherInformation {
    pub matrix: DMatrix<f64>,
    /// Ratio of extreme eigenvalues (infinite if the smallest is not positive).
    pub condition: f64,
    pub singular: bool,
}

impl FisherInformation {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Self {
        let condition = condition_number(&matrix);
        FisherInformation {
            singular: !(condition < SINGULAR_CONDITION),
            matrix,
            condition,
        }
    }

    /// Inverse, failing with the condition number when singular.
    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        if self.singular {
            return Err(Error::SingularInformation(self.condition));
        }
        self.matrix
            .clone()
            .cholesky()
            .map(|c| c.inverse())
            .ok_or(Error::SingularInformation(self.condition))
    }
}

pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let eig = m.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn fisher_information(
    params: &ParameterVector,
    data: &DesignData,
) -> Result<FisherInformation> {
    let flat = params.to_flat();
    let p = flat.len();
    let info = fisher_flat(data, &flat)?;
    Ok(FisherInformation::from_matrix(DMatrix::from_row_slice(
        p, p, &info,
    )))
}

/// Observed information `−∂²ℓ/∂γ∂γ'`.
pub fn observed_information(params: &ParameterVector, data: &DesignData) -> Result<DMatrix<f64>> {
    let flat = params.to_flat();
    let p = flat.len();
    let h = derivatives_flat(data, &flat, true)?
        .hessian
        .expect("requested");
    Ok(-DMatrix::from_row_slice(p, p, &h))
}

/// Spec-aware wrapper checking the parameter shape before evaluating.
pub fn log_likelihood_checked(
    params: &ParameterVector,
    spec: &ModelSpec,
    data: &DesignData,
) -> Result<f64> {
    params.check_shape(spec)?;
    log_likelihood(params, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_binary_split() {
        let p = ParameterVector {
            alpha: vec![0.0],
            beta_ord: vec![],
            beta_nonord: vec![],
        };
        let pi = category_probabilities(&p, &[]).unwrap();
        assert_eq!(pi, vec![0.5, 0.5]);
    }

    #[test]
    fn simulation_intercepts() {
        let p = ParameterVector {
            alpha: vec![-2.0, 2.0, 5.5],
            beta_ord: vec![],
            beta_nonord: vec![],
        };
        let pi = category_probabilities(&p, &[]).unwrap();
        // Hand evaluation of σ(−2), σ(2), σ(5.5).
        let expected = [
            0.119_202_922_022_117_6,
            0.880_797_077_977_882_4 - 0.119_202_922_022_117_6,
            0.995_929_862_284_768_6 - 0.880_797_077_977_882_4,
            1.0 - 0.995_929_862_284_768_6,
        ];
        for (a, b) in pi.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn tails_do_not_cancel() {
        // Both cutpoints deep in the upper tail: naive differences give 0.
        let lp = log_category_probabilities(&[40.0, 41.0]);
        let naive = sigmoid(41.0) - sigmoid(40.0);
        assert_eq!(naive, 0.0);
        // σ(41)−σ(40) ≈ e^{-40}(1 − e^{-1})
        let expected = -40.0 + (1.0 - (-1.0f64).exp()).ln();
        assert!((lp[1] - expected).abs() < 1e-9);
        let total: f64 = lp.iter().map(|l| l.exp()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_observation_loglik() {
        let d = DesignData::from_parts(2, 0, vec![0], vec![]).unwrap();
        let ll = loglik_flat(&d, &[0.0]).unwrap();
        assert!((ll - 0.5f64.ln()).abs() < 1e-15);
        // Bernoulli information π(1−π) = 0.25
        let f = fisher_flat(&d, &[0.0]).unwrap();
        assert!((f[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn unordered_intercepts_rejected() {
        let d = DesignData::from_parts(3, 0, vec![0, 1, 2], vec![]).unwrap();
        assert!(matches!(
            loglik_flat(&d, &[1.0, 1.0]),
            Err(Error::UnorderedIntercepts)
        ));
    }

    #[test]
    fn underflow_is_reported() {
        let d = DesignData::from_parts(2, 1, vec![1], vec![1.0]).unwrap();
        // P(z = 2) = σ(−(0 + 800)) underflows.
        assert!(matches!(
            loglik_flat(&d, &[0.0, 800.0]),
            Err(Error::ProbabilityUnderflow(0))
        ));
    }

    #[test]
    fn constant_zero_covariate_has_zero_score() {
        let d = DesignData::from_parts(3, 1, vec![0, 1, 2, 1], vec![0.0; 4]).unwrap();
        let s = derivatives_flat(&d, &[-0.3, 0.8, 1.7], false)
            .unwrap()
            .score;
        assert_eq!(s[2], 0.0);
    }
}
