//! Hypothesis tests about a single ordinal predictor, decided by membership in
//! a profile confidence region.

use std::fmt;

use crate::error::{Error, Result};
use crate::estimation::fit::BlockRule;
use crate::estimation::profile::{profile_with_rules, FixedBlock};
use crate::estimation::{fit_constrained, fit_partially_constrained, EstimatorKind, FitResult};
use crate::inference::fits::Fits;
use crate::inference::quantile::QuantileFamily;
use crate::inference::region::{membership_resolved, RegionKind, RegionTarget, Resolved};
use crate::inference::stats::NEGATIVE_LR_TOLERANCE;
use crate::model::params::MonotoneDirection;
use crate::model::spec::{Constraint, Direction};
use crate::par::map_indices;

/// Text shown instead of a p-value for tests that only yield a decision.
pub const DECISION_ONLY: &str = "decision-only (no valid p-value)";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HypothesisKind {
    /// All coefficients of the block are zero.
    NoEffect,
    /// The block is monotone in some direction.
    Monotone,
    /// The block is not monotone.
    NonMonotone,
    /// The block follows the given direction.
    Direction(Direction),
}

impl fmt::Display for HypothesisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HypothesisKind::NoEffect => f.write_str("no effect"),
            HypothesisKind::Monotone => f.write_str("monotone"),
            HypothesisKind::NonMonotone => f.write_str("non-monotone"),
            HypothesisKind::Direction(d) => write!(f, "{d}tonic"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOptions {
    pub level: f64,
    /// Defaults to the block length.
    pub df: Option<usize>,
    pub family: QuantileFamily,
}

impl Default for TestOptions {
    fn default() -> Self {
        TestOptions {
            level: 0.95,
            df: None,
            family: QuantileFamily::PlainChiSq,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome {
    pub hypothesis: HypothesisKind,
    /// Ordinal predictor index.
    pub predictor: usize,
    pub reject: bool,
    pub statistic: f64,
    pub threshold: f64,
    pub df: usize,
    pub level: f64,
    /// Region the decision is based on.
    pub region: RegionKind,
    /// Estimator whose block is checked against the region.
    pub estimator: EstimatorKind,
    /// The block that was checked.
    pub block: Vec<f64>,
    pub p_value: Option<f64>,
    /// A fit or profile did not converge; the decision is unreliable.
    pub indeterminate: bool,
}

impl TestOutcome {
    pub fn p_value_label(&self) -> String {
        match self.p_value {
            Some(p) => format!("{p:.5}"),
            None => DECISION_ONLY.to_string(),
        }
    }
}

struct Setup {
    resolved: Resolved,
    df: usize,
    threshold: f64,
    range: std::ops::Range<usize>,
}

fn setup(fits: &Fits, s: usize, opts: &TestOptions) -> Result<Setup> {
    if !(opts.level > 0.0 && opts.level < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "level {} outside (0, 1)",
            opts.level
        )));
    }
    let resolved = Resolved::new(&RegionTarget::Block(s), fits.spec)?;
    let range = fits.spec.layout().ordinal[s].clone();
    let df = opts.df.unwrap_or(range.len());
    let threshold = opts.family.quantile(df, opts.level)?;
    Ok(Setup {
        resolved,
        df,
        threshold,
        range,
    })
}

fn block_of(fit: &FitResult, range: &std::ops::Range<usize>) -> Vec<f64> {
    fit.flat()[range.clone()].to_vec()
}

/// Decides `H: block = candidate` by membership of `candidate` in region `kind`.
#[allow(clippy::too_many_arguments)]
fn decide(
    fits: &Fits,
    su: &Setup,
    s: usize,
    hypothesis: HypothesisKind,
    kind: RegionKind,
    estimator: EstimatorKind,
    block: Vec<f64>,
    opts: &TestOptions,
) -> Result<TestOutcome> {
    let m = membership_resolved(&block, &su.resolved, su.threshold, fits, Some(kind))?;
    Ok(TestOutcome {
        hypothesis,
        predictor: s,
        reject: !m.indeterminate && !m.get(kind),
        statistic: m.statistic(kind),
        threshold: su.threshold,
        df: su.df,
        level: opts.level,
        region: kind,
        estimator,
        block,
        p_value: None,
        indeterminate: m.indeterminate,
    })
}

/// `H0: β_s = 0`, profiling the nuisance unconstrained (`Umle`) or within the
/// monotone set (`Cmle`). Comes with a p-value from the reference family.
pub fn test_no_effect(
    fits: &Fits,
    s: usize,
    estimator: EstimatorKind,
    opts: &TestOptions,
) -> Result<TestOutcome> {
    let kind = match estimator {
        EstimatorKind::Umle => RegionKind::Ucr,
        EstimatorKind::Cmle => RegionKind::Ccr,
        other => {
            return Err(Error::InvalidArgument(format!(
                "the no-effect test is centred on the UMLE or CMLE, not the {other}"
            )))
        }
    };
    test_no_effect_in(fits, s, kind, opts)
}

/// `H0: β_s = 0` decided by membership of the zero block in region `kind`.
/// A p-value is attached for the single-centre regions (`Ucr`, `Uccr`, `Ccr`).
pub fn test_no_effect_in(
    fits: &Fits,
    s: usize,
    kind: RegionKind,
    opts: &TestOptions,
) -> Result<TestOutcome> {
    let su = setup(fits, s, opts)?;
    let estimator = match kind {
        RegionKind::Ucr | RegionKind::Uccr => EstimatorKind::Umle,
        RegionKind::Ccr | RegionKind::Acr => EstimatorKind::Cmle,
    };
    let zeros = vec![0.0; su.range.len()];
    let mut out = decide(
        fits,
        &su,
        s,
        HypothesisKind::NoEffect,
        kind,
        estimator,
        zeros,
        opts,
    )?;
    if !out.indeterminate && kind != RegionKind::Acr {
        out.p_value = Some(opts.family.survival(su.df, out.statistic));
    }
    Ok(out)
}

/// Best fit with block `s` monotone in either direction and the other blocks
/// following their regimes.
fn monotone_fit(fits: &Fits, s: usize) -> Result<FitResult> {
    let regimes = fits.spec.constraints();
    if regimes[s] == Constraint::Either {
        return Ok(fits.cmle.clone());
    }
    let spec = fits.spec.with_ordinal_constraint(s, Constraint::Either)?;
    fit_constrained(
        fits.data,
        &spec,
        &fits.options.with_initial(Some(fits.umle.estimate.clone())),
    )
}

/// `H0: β_s is monotone`: rejected when the best monotone block lies outside
/// the region `kind`. Regions built around the CMLE always contain it, so the
/// `Ccr` and `Acr` variants never reject.
pub fn test_monotonicity(
    fits: &Fits,
    s: usize,
    kind: RegionKind,
    opts: &TestOptions,
) -> Result<TestOutcome> {
    let su = setup(fits, s, opts)?;
    let fit = monotone_fit(fits, s)?;
    let block = block_of(&fit, &su.range);
    let mut out = decide(
        fits,
        &su,
        s,
        HypothesisKind::Monotone,
        kind,
        EstimatorKind::Cmle,
        block,
        opts,
    )?;
    out.indeterminate |= !fit.converged;
    out.reject &= fit.converged;
    Ok(out)
}

/// `H0: β_s is not monotone`, rejected when no non-monotone block lies in the
/// unconstrained region. Blocks with a single coefficient are always monotone,
/// so the hypothesis is rejected outright.
pub fn test_non_monotonicity(fits: &Fits, s: usize, opts: &TestOptions) -> Result<TestOutcome> {
    let su = setup(fits, s, opts)?;
    let m = su.range.len();
    let p = fits.spec.dim();
    let mut out = TestOutcome {
        hypothesis: HypothesisKind::NonMonotone,
        predictor: s,
        reject: true,
        statistic: f64::INFINITY,
        threshold: su.threshold,
        df: su.df,
        level: opts.level,
        region: RegionKind::Ucr,
        estimator: EstimatorKind::Umle,
        block: block_of(&fits.umle, &su.range),
        p_value: None,
        indeterminate: false,
    };
    if m < 2 {
        return Ok(out);
    }
    // Increment L_h = β_{h+1} − β_h (β_1 = 0) as a row over the flat vector.
    let increment = |h: usize, sign: f64| {
        let mut row = vec![0.0; p];
        row[su.range.start + h] = sign;
        if h > 0 {
            row[su.range.start + h - 1] = -sign;
        }
        row
    };
    let pieces: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let free = vec![BlockRule::Free; fits.spec.n_ordinal()];
    let empty = FixedBlock::new(Vec::new(), Vec::new())?;
    let warm = fits.umle.flat();
    let results = map_indices(pieces.len(), fits.options.execution, |k| {
        let (i, j) = pieces[k];
        let extra = [increment(i, -1.0), increment(j, 1.0)];
        profile_with_rules(
            fits.data,
            fits.spec,
            &empty,
            &free,
            &extra,
            &warm,
            &fits.options,
        )
    });
    let mut best: Option<(f64, Vec<f64>)> = None;
    for r in results {
        let r = r?;
        if !r.result.converged {
            out.indeterminate = true;
        }
        let ll = r.result.log_likelihood;
        if best.as_ref().is_none_or(|(b, _)| ll > *b) {
            let flat = r.result.estimate.to_flat();
            best = Some((ll, flat[su.range.clone()].to_vec()));
        }
    }
    let (ll, block) = best.expect("at least two pieces");
    let lr = 2.0 * (fits.umle.log_likelihood - ll);
    if lr < -NEGATIVE_LR_TOLERANCE {
        out.indeterminate = true;
    }
    out.statistic = lr.max(0.0);
    out.block = block;
    out.reject = !out.indeterminate && out.statistic > su.threshold;
    Ok(out)
}

/// `H0: β_s follows direction `dir``: the partially constrained fit with that
/// direction imposed on `s` is checked against the region `kind`.
pub fn test_direction(
    fits: &Fits,
    s: usize,
    dir: Direction,
    kind: RegionKind,
    opts: &TestOptions,
) -> Result<TestOutcome> {
    let su = setup(fits, s, opts)?;
    let spec = fits.spec.with_ordinal_constraint(s, Constraint::Either)?;
    let mut fixed = vec![None; fits.spec.n_ordinal()];
    fixed[s] = Some(dir);
    let start = if fits.umle.quasi_separated {
        None
    } else {
        Some(fits.umle.estimate.clone())
    };
    let fit = fit_partially_constrained(
        fits.data,
        &spec,
        &MonotoneDirection(fixed),
        &fits.options.with_initial(start),
    )?;
    let block = block_of(&fit, &su.range);
    let mut out = decide(
        fits,
        &su,
        s,
        HypothesisKind::Direction(dir),
        kind,
        EstimatorKind::Pmle,
        block,
        opts,
    )?;
    out.indeterminate |= !fit.converged;
    out.reject &= fit.converged;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::FitOptions;
    use crate::model::spec::{ModelSpec, PredictorSpec};
    use crate::model::DesignData;

    /// Strong monotone effect of a 3-level predictor on a 3-category response.
    fn data() -> (DesignData, ModelSpec) {
        let spec = ModelSpec::with_numbered_response(
            "y",
            3,
            vec![PredictorSpec::ordinal_numbered("a", 3, Constraint::Either)],
        )
        .unwrap();
        let counts = [[30, 15, 5], [15, 20, 15], [4, 14, 32]];
        let mut z = Vec::new();
        let mut x = Vec::new();
        for (level, row) in counts.iter().enumerate() {
            for (cat, &c) in row.iter().enumerate() {
                for _ in 0..c {
                    z.push(cat);
                    x.extend([(level == 1) as u8 as f64, (level == 2) as u8 as f64]);
                }
            }
        }
        (DesignData::from_parts(3, 2, z, x).unwrap(), spec)
    }

    #[test]
    fn clear_monotone_effect() {
        let (d, spec) = data();
        let fits = Fits::new(&d, &spec, FitOptions::default()).unwrap();
        let o = TestOptions::default();
        let ne = test_no_effect(&fits, 0, EstimatorKind::Umle, &o).unwrap();
        assert!(ne.reject && ne.p_value.unwrap() < 1e-6);
        let nc = test_no_effect(&fits, 0, EstimatorKind::Cmle, &o).unwrap();
        assert!(nc.reject);
        assert!(
            !test_monotonicity(&fits, 0, RegionKind::Uccr, &o)
                .unwrap()
                .reject
        );
        let nm = test_non_monotonicity(&fits, 0, &o).unwrap();
        assert!(nm.reject, "{nm:?}");
        assert!(nm.p_value.is_none() && nm.p_value_label() == DECISION_ONLY);
        // Higher levels push towards higher categories: negative coefficients.
        assert!(
            !test_direction(&fits, 0, Direction::Anti, RegionKind::Uccr, &o)
                .unwrap()
                .reject
        );
        assert!(
            test_direction(&fits, 0, Direction::Iso, RegionKind::Uccr, &o)
                .unwrap()
                .reject
        );
        assert!(
            test_direction(&fits, 0, Direction::Iso, RegionKind::Ccr, &o)
                .unwrap()
                .reject
        );
        assert!(
            !test_monotonicity(&fits, 0, RegionKind::Ccr, &o)
                .unwrap()
                .reject
        );
    }
}
