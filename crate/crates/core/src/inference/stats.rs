use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::estimation::fit::{rules_from_regimes, BlockRule};
use crate::estimation::profile::{profile_with_rules, FixedBlock, ProfileMode, ProfileResult};
use crate::estimation::FitResult;
use crate::inference::fits::Fits;
use crate::inference::quantile::normal_critical;

/// Negative likelihood-ratio values down to this are treated as optimizer noise.
pub const NEGATIVE_LR_TOLERANCE: f64 = 1e-6;

/// `2(ℓ_full − ℓ_null)`, clipped at zero within [`NEGATIVE_LR_TOLERANCE`].
pub fn lr_statistic(full_loglik: f64, null_loglik: f64) -> Result<f64> {
    let r = 2.0 * (full_loglik - null_loglik);
    if r < -NEGATIVE_LR_TOLERANCE || r.is_nan() {
        return Err(Error::NotNested(r));
    }
    Ok(r.max(0.0))
}

/// [`lr_statistic`] between two fits.
pub fn lr_between(full: &FitResult, null: &FitResult) -> Result<f64> {
    lr_statistic(full.log_likelihood, null.log_likelihood)
}

/// `H0: Cγ = ξ` with `C` of full row rank.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearHypothesis {
    pub c: DMatrix<f64>,
    pub xi: DVector<f64>,
}

impl LinearHypothesis {
    pub fn new(c: DMatrix<f64>, xi: DVector<f64>) -> Result<Self> {
        if c.nrows() != xi.len() {
            return Err(Error::DimensionMismatch {
                expected: c.nrows(),
                got: xi.len(),
            });
        }
        if c.nrows() == 0 || c.nrows() > c.ncols() {
            return Err(Error::InvalidArgument(format!(
                "hypothesis needs 1..={} rows, got {}",
                c.ncols(),
                c.nrows()
            )));
        }
        if c.rank(1e-10 * c.amax().max(1.0)) < c.nrows() {
            return Err(Error::InvalidArgument(
                "hypothesis matrix is rank deficient".into(),
            ));
        }
        Ok(LinearHypothesis { c, xi })
    }

    /// `γ_j = value` for each listed coordinate.
    pub fn coordinates(p: usize, indices: &[usize], values: &[f64]) -> Result<Self> {
        let mut c = DMatrix::zeros(indices.len(), p);
        for (r, &j) in indices.iter().enumerate() {
            if j >= p {
                return Err(Error::InvalidArgument(format!(
                    "coordinate {j} outside 0..{p}"
                )));
            }
            c[(r, j)] = 1.0;
        }
        Self::new(c, DVector::from_row_slice(values))
    }

    pub fn r(&self) -> usize {
        self.c.nrows()
    }

    fn fixed_block(&self) -> FixedBlock {
        FixedBlock {
            rows: (0..self.c.nrows())
                .map(|i| self.c.row(i).iter().copied().collect())
                .collect(),
            values: self.xi.iter().copied().collect(),
        }
    }
}

/// `(Cγ̂ − ξ)'[C F⁻¹ C']⁻¹(Cγ̂ − ξ)`.
pub fn wald_statistic(hyp: &LinearHypothesis, fit: &FitResult) -> Result<f64> {
    let p = fit.estimate.len();
    if hyp.c.ncols() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: hyp.c.ncols(),
        });
    }
    let cov = fit.fisher.inverse()?;
    let gamma = DVector::from_vec(fit.flat());
    let diff = &hyp.c * gamma - &hyp.xi;
    let middle = &hyp.c * cov * hyp.c.transpose();
    let inv = middle
        .clone()
        .cholesky()
        .ok_or(Error::SingularInformation(
            crate::model::likelihood::condition_number(&middle),
        ))?
        .inverse();
    Ok(diff.dot(&(inv * &diff)).max(0.0))
}

/// Symmetric Wald interval `γ̂_j ± z·SE_j`.
pub fn wald_ci(j: usize, level: f64, fit: &FitResult) -> Result<(f64, f64)> {
    let se = fit.standard_errors()?;
    let est = fit.flat();
    if j >= est.len() {
        return Err(Error::InvalidArgument(format!(
            "coordinate {j} outside 0..{}",
            est.len()
        )));
    }
    let z = normal_critical(level)?;
    Ok((est[j] - z * se[j], est[j] + z * se[j]))
}

/// Maximises ℓ under `Cγ = ξ`, unconstrained or within the monotone set.
pub fn fit_under_hypothesis(
    fits: &Fits,
    hyp: &LinearHypothesis,
    mode: ProfileMode,
) -> Result<ProfileResult> {
    let (rules, warm) = match mode {
        ProfileMode::Unconstrained => (
            vec![BlockRule::Free; fits.spec.n_ordinal()],
            fits.umle.flat(),
        ),
        ProfileMode::Constrained => (rules_from_regimes(fits.spec), fits.cmle.flat()),
    };
    let out = profile_with_rules(
        fits.data,
        fits.spec,
        &hyp.fixed_block(),
        &rules,
        &[],
        &warm,
        &fits.options,
    )?;
    Ok(out.result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lr_clipping() {
        assert_eq!(lr_statistic(-10.0, -10.0).unwrap(), 0.0);
        assert_eq!(lr_statistic(-10.0, -10.0 + 1e-9).unwrap(), 0.0);
        assert!((lr_statistic(-10.0, -12.0).unwrap() - 4.0).abs() < 1e-12);
        assert!(matches!(
            lr_statistic(-10.0, -9.0),
            Err(Error::NotNested(_))
        ));
    }

    #[test]
    fn hypothesis_rank_is_checked() {
        let c = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
        assert!(LinearHypothesis::new(c, DVector::zeros(2)).is_err());
        assert!(LinearHypothesis::coordinates(3, &[0, 2], &[0.0, 1.0]).is_ok());
        assert!(LinearHypothesis::coordinates(3, &[3], &[0.0]).is_err());
    }
}
