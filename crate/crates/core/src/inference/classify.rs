use serde::Serialize;

use crate::error::{Error, Result};
use crate::inference::fits::Fits;
use crate::inference::region::{RegionGrid, RegionKind};
use crate::model::params::{classify_block, Monotonicity};

/// Share of indeterminate grid points above which a classification is flagged.
pub const LOW_CONFIDENCE_SHARE: f64 = 0.01;

/// Which of the six configurations of UMLE, CMLE and the unconstrained region
/// the data fall into for one ordinal predictor.
///
/// * 1: UMLE and CMLE coincide and every region member follows their direction.
/// * 2: they coincide; the region also holds non-monotone blocks but none of
///   the opposite direction.
/// * 3: they coincide and the region reaches the opposite direction.
/// * 4: they differ, the UMLE block is not monotone, the region holds monotone blocks.
/// * 5: they differ and the region holds no monotone block.
/// * 6: they differ although the UMLE block is monotone (another constrained
///   block moved it).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseReport {
    pub case: u8,
    pub same_mle: bool,
    pub umle_class: Monotonicity,
    pub members: usize,
    pub indeterminate: usize,
    /// Member counts by class: iso, anti, both, neither.
    pub member_classes: [usize; 4],
    pub low_confidence: bool,
}

/// Classifies predictor `s` from a whole-block grid of the unconstrained region.
pub fn classify_case(fits: &Fits, s: usize, grid: &RegionGrid) -> Result<CaseReport> {
    let range =
        fits.spec.layout().ordinal.get(s).cloned().ok_or_else(|| {
            Error::InvalidArgument(format!("no ordinal predictor with index {s}"))
        })?;
    if grid
        .points
        .first()
        .is_some_and(|p| p.coords.len() != range.len())
    {
        return Err(Error::InvalidArgument(
            "case classification needs a grid over the whole block".into(),
        ));
    }
    let umle_block = fits.umle.flat()[range].to_vec();
    let umle_class = classify_block(&umle_block);
    let mut member_classes = [0usize; 4];
    let mut members = 0;
    for p in grid.members(RegionKind::Ucr) {
        members += 1;
        let slot = match p.membership.class {
            Monotonicity::Iso => 0,
            Monotonicity::Anti => 1,
            Monotonicity::Both => 2,
            Monotonicity::Neither => 3,
        };
        member_classes[slot] += 1;
    }
    let summary = grid.summary();
    let same_mle = fits.same_mle();
    let [iso, anti, _, neither] = member_classes;
    let case = if same_mle {
        let opposite = match umle_class {
            Monotonicity::Iso => anti > 0,
            Monotonicity::Anti => iso > 0,
            Monotonicity::Both => iso > 0 && anti > 0,
            // Equal estimates with a non-monotone block only happen for unconstrained regimes.
            Monotonicity::Neither => false,
        };
        if opposite {
            3
        } else if neither > 0 {
            2
        } else {
            1
        }
    } else if umle_class.is_monotone() {
        6
    } else if summary.uccr > 0 {
        4
    } else {
        5
    };
    let low_confidence = summary.points > 0
        && summary.indeterminate as f64 > LOW_CONFIDENCE_SHARE * summary.points as f64;
    Ok(CaseReport {
        case,
        same_mle,
        umle_class,
        members,
        indeterminate: summary.indeterminate,
        member_classes,
        low_confidence,
    })
}
