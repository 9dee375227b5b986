//! Profile-likelihood confidence regions for an ordinal block, a subset of its
//! coordinates, linear contrasts of it, or the full parameter vector.
//!
//! For targets that do not pin the whole block, a candidate value stands for
//! every parameter vector whose target rows take that value, so membership
//! refers to the projection of the region: the remaining block coordinates are
//! profiled together with the nuisance parameters.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::fit::{rules_from_regimes, BlockRule};
use crate::estimation::profile::{profile_with_rules, FixedBlock};
use crate::estimation::solver::Constraints;
use crate::inference::fits::Fits;
use crate::inference::quantile::QuantileFamily;
use crate::inference::stats::NEGATIVE_LR_TOLERANCE;
use crate::model::likelihood::loglik_flat;
use crate::model::params::{
    check_membership, classify_block, Monotonicity, ParameterSet, ParameterVector,
};
use crate::model::spec::{Constraint, Direction, ModelSpec};
use crate::par::map_indices;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    Ucr,
    Uccr,
    Ccr,
    Acr,
}

impl RegionKind {
    pub const ALL: [RegionKind; 4] = [
        RegionKind::Ucr,
        RegionKind::Uccr,
        RegionKind::Ccr,
        RegionKind::Acr,
    ];
}

impl fmt::Display for RegionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegionKind::Ucr => "UCR",
            RegionKind::Uccr => "UCCR",
            RegionKind::Ccr => "CCR",
            RegionKind::Acr => "ACR",
        })
    }
}

impl FromStr for RegionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ucr" => Ok(RegionKind::Ucr),
            "uccr" => Ok(RegionKind::Uccr),
            "ccr" => Ok(RegionKind::Ccr),
            "acr" => Ok(RegionKind::Acr),
            other => Err(Error::InvalidArgument(format!(
                "unknown region kind `{other}`"
            ))),
        }
    }
}

/// What the region is about. Predictors are indexed among the ordinal predictors.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionTarget {
    /// The whole parameter vector; candidates have length `p`.
    Full,
    /// The block `(β_{s,2}, …, β_{s,p_s})`.
    Block(usize),
    /// Selected block coordinates, zero-based within the block.
    Coordinates {
        predictor: usize,
        positions: Vec<usize>,
    },
    /// Linear maps of the block, one row per axis (each row has the block length).
    Contrast {
        predictor: usize,
        rows: Vec<Vec<f64>>,
    },
}

impl RegionTarget {
    /// Contrasts `β_{s,h} − β_{s,h−1}` for the given category numbers `h ≥ 2`
    /// (with `β_{s,1} = 0`).
    pub fn differences(spec: &ModelSpec, predictor: usize, categories: &[usize]) -> Result<Self> {
        let len = block_len(spec, predictor)?;
        let mut rows = Vec::with_capacity(categories.len());
        for &h in categories {
            if h < 2 || h > len + 1 {
                return Err(Error::InvalidArgument(format!(
                    "category {h} outside 2..={} for a difference",
                    len + 1
                )));
            }
            let mut row = vec![0.0; len];
            row[h - 2] = 1.0;
            if h > 2 {
                row[h - 3] = -1.0;
            }
            rows.push(row);
        }
        Ok(RegionTarget::Contrast { predictor, rows })
    }

    pub fn predictor(&self) -> Option<usize> {
        match self {
            RegionTarget::Full => None,
            RegionTarget::Block(s) => Some(*s),
            RegionTarget::Coordinates { predictor, .. }
            | RegionTarget::Contrast { predictor, .. } => Some(*predictor),
        }
    }
}

fn block_len(spec: &ModelSpec, s: usize) -> Result<usize> {
    spec.layout()
        .ordinal
        .get(s)
        .map(|r| r.len())
        .ok_or_else(|| Error::InvalidArgument(format!("no ordinal predictor with index {s}")))
}

/// One grid axis `lower, lower + step, …` up to `upper` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lower: f64,
    pub upper: f64,
    pub step: f64,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.upper - self.lower) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.lower + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Explicit axes; by default each axis spans the estimate ± `half_width_se` SEs.
    pub axes: Option<Vec<Axis>>,
    pub points_per_axis: usize,
    pub half_width_se: f64,
    pub max_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            axes: None,
            points_per_axis: 61,
            half_width_se: 4.0,
            max_points: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionSpec {
    pub target: RegionTarget,
    pub kind: RegionKind,
    pub level: f64,
    /// Degrees of freedom; defaults to the number of free parameters of the target block.
    pub df: Option<usize>,
    pub family: QuantileFamily,
    pub grid: GridSpec,
}

impl RegionSpec {
    pub fn new(target: RegionTarget) -> Self {
        RegionSpec {
            target,
            kind: RegionKind::Ccr,
            level: 0.95,
            df: None,
            family: QuantileFamily::PlainChiSq,
            grid: GridSpec::default(),
        }
    }

    pub fn with_level(mut self, level: f64) -> Self {
        self.level = level;
        self
    }

    pub fn with_df(mut self, df: Option<usize>) -> Self {
        self.df = df;
        self
    }

    pub fn with_kind(mut self, kind: RegionKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_family(mut self, family: QuantileFamily) -> Self {
        self.family = family;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "level {} outside (0, 1)",
                self.level
            )));
        }
        if self.df == Some(0) {
            return Err(Error::InvalidArgument(
                "degrees of freedom must be at least 1".into(),
            ));
        }
        if let Some(axes) = &self.grid.axes {
            if axes
                .iter()
                .any(|a| !(a.step > 0.0) || !(a.upper >= a.lower))
            {
                return Err(Error::InvalidArgument(
                    "grid axes need step > 0 and upper ≥ lower".into(),
                ));
            }
        }
        if self.grid.points_per_axis == 0 || !(self.grid.half_width_se > 0.0) {
            return Err(Error::InvalidArgument(
                "grid needs at least one point and a positive width".into(),
            ));
        }
        Ok(())
    }

    pub fn degrees_of_freedom(&self, spec: &ModelSpec) -> Result<usize> {
        if let Some(df) = self.df {
            return Ok(df);
        }
        match self.target.predictor() {
            None => Ok(spec.dim()),
            Some(s) => block_len(spec, s),
        }
    }

    pub fn threshold(&self, spec: &ModelSpec) -> Result<f64> {
        self.family
            .quantile(self.degrees_of_freedom(spec)?, self.level)
    }
}

/// Target rows over the flat parameter vector.
#[derive(Debug, Clone)]
pub(crate) struct Resolved {
    rows: Vec<Vec<f64>>,
    /// Ordinal predictor and its regime, for block targets.
    block: Option<(usize, Constraint)>,
    /// Whether the rows pin every coordinate of the block.
    whole_block: bool,
}

impl Resolved {
    pub(crate) fn new(target: &RegionTarget, spec: &ModelSpec) -> Result<Self> {
        let layout = spec.layout();
        let p = layout.p;
        let unit = |i: usize| {
            let mut r = vec![0.0; p];
            r[i] = 1.0;
            r
        };
        let regime = |s: usize| -> Result<(std::ops::Range<usize>, Constraint)> {
            let range = layout.ordinal.get(s).cloned().ok_or_else(|| {
                Error::InvalidArgument(format!("no ordinal predictor with index {s}"))
            })?;
            Ok((range, spec.constraints()[s]))
        };
        match target {
            RegionTarget::Full => Ok(Resolved {
                rows: (0..p).map(unit).collect(),
                block: None,
                whole_block: false,
            }),
            RegionTarget::Block(s) => {
                let (range, c) = regime(*s)?;
                Ok(Resolved {
                    rows: range.map(unit).collect(),
                    block: Some((*s, c)),
                    whole_block: true,
                })
            }
            RegionTarget::Coordinates {
                predictor,
                positions,
            } => {
                let (range, c) = regime(*predictor)?;
                if positions.is_empty() || positions.iter().any(|&h| h >= range.len()) {
                    return Err(Error::InvalidArgument(format!(
                        "coordinate positions must lie in 0..{}",
                        range.len()
                    )));
                }
                let mut sorted = positions.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != positions.len() {
                    return Err(Error::InvalidArgument(
                        "duplicate coordinate positions".into(),
                    ));
                }
                Ok(Resolved {
                    rows: positions.iter().map(|&h| unit(range.start + h)).collect(),
                    block: Some((*predictor, c)),
                    whole_block: positions.len() == range.len()
                        && positions.iter().enumerate().all(|(i, &h)| i == h),
                })
            }
            RegionTarget::Contrast { predictor, rows } => {
                let (range, c) = regime(*predictor)?;
                if rows.is_empty() || rows.iter().any(|r| r.len() != range.len()) {
                    return Err(Error::InvalidArgument(format!(
                        "contrast rows must have length {}",
                        range.len()
                    )));
                }
                let full_rows = rows
                    .iter()
                    .map(|r| {
                        let mut row = vec![0.0; p];
                        row[range.clone()].copy_from_slice(r);
                        row
                    })
                    .collect();
                Ok(Resolved {
                    rows: full_rows,
                    block: Some((*predictor, c)),
                    whole_block: false,
                })
            }
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.rows.len()
    }

    fn apply(&self, gamma: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().zip(gamma).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Membership of one candidate value.
#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    /// Profiled statistic centred at the UMLE (NaN when indeterminate).
    pub lr_unconstrained: f64,
    /// Profiled statistic with monotone nuisance, centred at the CMLE; `None`
    /// when no monotone parameter has this value.
    pub lr_constrained: Option<f64>,
    pub ucr: bool,
    pub uccr: bool,
    pub ccr: bool,
    pub acr: bool,
    /// Monotonicity of the candidate block; for projected targets, which
    /// directions are attainable by some completion.
    pub class: Monotonicity,
    pub indeterminate: bool,
}

impl Membership {
    pub fn get(&self, kind: RegionKind) -> bool {
        match kind {
            RegionKind::Ucr => self.ucr,
            RegionKind::Uccr => self.uccr,
            RegionKind::Ccr => self.ccr,
            RegionKind::Acr => self.acr,
        }
    }

    /// The statistic a decision for `kind` is based on.
    pub fn statistic(&self, kind: RegionKind) -> f64 {
        match kind {
            RegionKind::Ucr | RegionKind::Uccr => self.lr_unconstrained,
            RegionKind::Ccr => self.lr_constrained.unwrap_or(f64::INFINITY),
            RegionKind::Acr => self
                .lr_constrained
                .unwrap_or(f64::INFINITY)
                .min(if self.uccr {
                    self.lr_unconstrained
                } else {
                    f64::INFINITY
                }),
        }
    }

    fn indeterminate(class: Monotonicity) -> Self {
        Membership {
            lr_unconstrained: f64::NAN,
            lr_constrained: None,
            ucr: false,
            uccr: false,
            ccr: false,
            acr: false,
            class,
            indeterminate: true,
        }
    }
}

/// Whether the block regime admits the given pattern.
fn regime_allows(c: Constraint, m: Monotonicity) -> bool {
    match c {
        Constraint::Unconstrained => true,
        Constraint::Either => m.is_monotone(),
        Constraint::Iso => m.allows(Direction::Iso),
        Constraint::Anti => m.allows(Direction::Anti),
    }
}

/// Which directions some completion of a projected candidate can follow.
fn completion_class(fits: &Fits, resolved: &Resolved, s: usize, values: &[f64]) -> Monotonicity {
    let layout = fits.spec.layout();
    let attainable = |d: Direction| {
        let mut cons = Constraints::new(&layout, fits.options.alpha_gap);
        for (row, &v) in resolved.rows.iter().zip(values) {
            cons.equal(row, v);
        }
        cons.cone(layout.ordinal[s].clone(), d);
        cons.project(&fits.umle.flat())
            .map(|x| cons.is_feasible(&x, 1e-8))
            .unwrap_or(false)
    };
    Monotonicity::from_flags(attainable(Direction::Iso), attainable(Direction::Anti))
}

/// Membership of `point` (one value per target row) in every region kind.
pub fn cr_membership(point: &[f64], region: &RegionSpec, fits: &Fits) -> Result<Membership> {
    region.validate()?;
    let resolved = Resolved::new(&region.target, fits.spec)?;
    let threshold = region.threshold(fits.spec)?;
    membership_resolved(point, &resolved, threshold, fits, None)
}

pub(crate) fn membership_resolved(
    point: &[f64],
    resolved: &Resolved,
    threshold: f64,
    fits: &Fits,
    focus: Option<RegionKind>,
) -> Result<Membership> {
    if point.len() != resolved.dim() {
        return Err(Error::DimensionMismatch {
            expected: resolved.dim(),
            got: point.len(),
        });
    }
    match resolved.block {
        None => Ok(full_membership(point, threshold, fits)),
        Some((s, regime)) => block_membership(point, resolved, s, regime, threshold, fits, focus),
    }
}

fn full_membership(gamma: &[f64], threshold: f64, fits: &Fits) -> Membership {
    let layout = fits.spec.layout();
    let params = ParameterVector::from_flat(&layout, gamma).expect("length checked");
    let report =
        check_membership(&params, fits.spec, &ParameterSet::EitherMonotone).expect("shape");
    let monotone = report.member;
    let class = if report.blocks.iter().all(|b| b.is_monotone()) {
        Monotonicity::Both
    } else {
        Monotonicity::Neither
    };
    let ll = if report.intercepts_ordered {
        loglik_flat(fits.data, gamma).ok()
    } else {
        None
    };
    let lr_u = ll.map_or(f64::INFINITY, |l| {
        (2.0 * (fits.umle.log_likelihood - l)).max(0.0)
    });
    let lr_c = if monotone {
        Some(ll.map_or(f64::INFINITY, |l| {
            (2.0 * (fits.cmle.log_likelihood - l)).max(0.0)
        }))
    } else {
        None
    };
    let ucr = lr_u <= threshold;
    let uccr = ucr && monotone;
    let ccr = lr_c.is_some_and(|v| v <= threshold);
    Membership {
        lr_unconstrained: lr_u,
        lr_constrained: lr_c,
        ucr,
        uccr,
        ccr,
        acr: uccr || ccr,
        class,
        indeterminate: false,
    }
}

enum Profiled {
    Value(f64),
    Infeasible,
    Failed,
}

fn profiled_lr(
    fits: &Fits,
    fixed: &FixedBlock,
    rules: &[BlockRule],
    centre: f64,
    warm: &[f64],
) -> Profiled {
    match profile_with_rules(fits.data, fits.spec, fixed, rules, &[], warm, &fits.options) {
        Ok(out) if out.result.converged => {
            let lr = 2.0 * (centre - out.result.log_likelihood);
            if lr < -NEGATIVE_LR_TOLERANCE {
                Profiled::Failed
            } else {
                Profiled::Value(lr.max(0.0))
            }
        }
        Ok(_) => Profiled::Failed,
        Err(Error::Infeasible(_)) => Profiled::Infeasible,
        Err(_) => Profiled::Failed,
    }
}

fn block_membership(
    point: &[f64],
    resolved: &Resolved,
    s: usize,
    regime: Constraint,
    threshold: f64,
    fits: &Fits,
    focus: Option<RegionKind>,
) -> Result<Membership> {
    let need_u = focus != Some(RegionKind::Ccr);
    let need_c = matches!(focus, None | Some(RegionKind::Ccr) | Some(RegionKind::Acr));
    let fixed = FixedBlock::new(resolved.rows.clone(), point.to_vec())?;
    let n_ord = fits.spec.n_ordinal();
    let class = if resolved.whole_block {
        classify_block(point)
    } else {
        completion_class(fits, resolved, s, point)
    };
    let admissible = regime_allows(regime, class);

    let free = vec![BlockRule::Free; n_ord];
    let (lr_u, ucr, uccr) = if need_u {
        let lr_u = match profiled_lr(
            fits,
            &fixed,
            &free,
            fits.umle.log_likelihood,
            &fits.umle.flat(),
        ) {
            Profiled::Value(v) => v,
            _ => return Ok(Membership::indeterminate(class)),
        };
        let ucr = lr_u <= threshold;
        let uccr = if !admissible {
            false
        } else if resolved.whole_block {
            ucr
        } else {
            // Projection: best completion whose block follows the regime.
            let mut rules = free.clone();
            rules[s] = rules_from_regimes(fits.spec)[s];
            match profiled_lr(
                fits,
                &fixed,
                &rules,
                fits.umle.log_likelihood,
                &fits.umle.flat(),
            ) {
                Profiled::Value(v) => ucr && v <= threshold,
                Profiled::Infeasible => false,
                Profiled::Failed => return Ok(Membership::indeterminate(class)),
            }
        };
        (lr_u, ucr, uccr)
    } else {
        (f64::NAN, false, false)
    };

    let lr_c = if need_c && admissible {
        match profiled_lr(
            fits,
            &fixed,
            &rules_from_regimes(fits.spec),
            fits.cmle.log_likelihood,
            &fits.cmle.flat(),
        ) {
            Profiled::Value(v) => Some(v),
            Profiled::Infeasible => None,
            Profiled::Failed => return Ok(Membership::indeterminate(class)),
        }
    } else {
        None
    };
    let ccr = lr_c.is_some_and(|v| v <= threshold);
    Ok(Membership {
        lr_unconstrained: lr_u,
        lr_constrained: lr_c,
        ucr,
        uccr,
        ccr,
        acr: uccr || ccr,
        class,
        indeterminate: false,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub coords: Vec<f64>,
    pub membership: Membership,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RegionSummary {
    pub points: usize,
    pub ucr: usize,
    pub uccr: usize,
    pub ccr: usize,
    pub acr: usize,
    pub ccr_not_uccr: usize,
    pub indeterminate: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionGrid {
    pub axes: Vec<Vec<f64>>,
    /// Row-major over the axes (the first axis varies slowest).
    pub points: Vec<GridPoint>,
    pub df: usize,
    pub level: f64,
    pub threshold: f64,
    pub family: QuantileFamily,
}

impl RegionGrid {
    pub fn summary(&self) -> RegionSummary {
        let mut s = RegionSummary {
            points: self.points.len(),
            ..RegionSummary::default()
        };
        for p in &self.points {
            let m = &p.membership;
            s.ucr += m.ucr as usize;
            s.uccr += m.uccr as usize;
            s.ccr += m.ccr as usize;
            s.acr += m.acr as usize;
            s.ccr_not_uccr += (m.ccr && !m.uccr) as usize;
            s.indeterminate += m.indeterminate as usize;
        }
        s
    }

    pub fn members(&self, kind: RegionKind) -> impl Iterator<Item = &GridPoint> {
        self.points.iter().filter(move |p| p.membership.get(kind))
    }

    /// Plot-ready CSV: `axis1,axis2,lr_unconstrained,lr_constrained,ucr,uccr,ccr,acr,direction_class,indeterminate`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "axis1",
            "axis2",
            "lr_unconstrained",
            "lr_constrained",
            "ucr",
            "uccr",
            "ccr",
            "acr",
            "direction_class",
            "indeterminate",
        ])?;
        let num = |v: f64| {
            if v.is_finite() {
                format!("{v:.6}")
            } else {
                "NA".to_string()
            }
        };
        let flag = |b: bool| if b { "1" } else { "0" }.to_string();
        for p in &self.points {
            let m = &p.membership;
            w.write_record([
                num(p.coords[0]),
                p.coords.get(1).map_or(String::new(), |v| num(*v)),
                num(m.lr_unconstrained),
                m.lr_constrained.map_or("NA".to_string(), num),
                flag(m.ucr),
                flag(m.uccr),
                flag(m.ccr),
                flag(m.acr),
                m.class.label().to_string(),
                flag(m.indeterminate),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Default axes: estimate ± `half_width_se` standard errors of each target row at the UMLE.
fn default_axes(resolved: &Resolved, grid: &GridSpec, fits: &Fits) -> Result<Vec<Vec<f64>>> {
    let cov = fits.umle.covariance()?;
    let est = resolved.apply(&fits.umle.flat());
    let n = grid.points_per_axis;
    Ok(resolved
        .rows
        .iter()
        .zip(est)
        .map(|(row, centre)| {
            let l = nalgebra::DVector::from_row_slice(row);
            let se = l.dot(&(&cov * &l)).max(0.0).sqrt();
            let half = grid.half_width_se * se;
            if n == 1 {
                vec![centre]
            } else {
                (0..n)
                    .map(|i| centre - half + 2.0 * half * i as f64 / (n - 1) as f64)
                    .collect()
            }
        })
        .collect())
}

/// Evaluates membership on a one- or two-dimensional grid.
pub fn cr_grid(region: &RegionSpec, fits: &Fits) -> Result<RegionGrid> {
    region.validate()?;
    let resolved = Resolved::new(&region.target, fits.spec)?;
    let dim = resolved.dim();
    if !(1..=2).contains(&dim) || region.target == RegionTarget::Full {
        return Err(Error::InvalidArgument(format!(
            "grids need one or two axes; the target has {dim}"
        )));
    }
    let axes = match &region.grid.axes {
        Some(a) if a.len() != dim => {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: a.len(),
            })
        }
        Some(a) => a.iter().map(Axis::values).collect(),
        None => default_axes(&resolved, &region.grid, fits)?,
    };
    let total = axes
        .iter()
        .map(Vec::len)
        .try_fold(1usize, |acc, n| acc.checked_mul(n));
    let total = total.unwrap_or(usize::MAX);
    if total > region.grid.max_points {
        return Err(Error::GridTooLarge(total, region.grid.max_points));
    }
    let df = region.degrees_of_freedom(fits.spec)?;
    let threshold = region.family.quantile(df, region.level)?;
    let coords_of = |idx: usize| -> Vec<f64> {
        if dim == 1 {
            vec![axes[0][idx]]
        } else {
            let n2 = axes[1].len();
            vec![axes[0][idx / n2], axes[1][idx % n2]]
        }
    };
    let results = map_indices(total, fits.options.execution, |idx| {
        let coords = coords_of(idx);
        membership_resolved(&coords, &resolved, threshold, fits, None)
            .map(|membership| GridPoint { coords, membership })
    });
    let points = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(RegionGrid {
        axes,
        points,
        df,
        level: region.level,
        threshold,
        family: region.family,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_values_include_upper_bound() {
        let a = Axis {
            lower: -1.0,
            upper: 1.0,
            step: 0.5,
        };
        assert_eq!(a.values(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn kinds_parse() {
        assert_eq!("UCCR".parse::<RegionKind>().unwrap(), RegionKind::Uccr);
        assert!("xcr".parse::<RegionKind>().is_err());
    }
}
