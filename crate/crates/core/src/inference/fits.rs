use crate::error::Result;
use crate::estimation::{fit_constrained, fit_unconstrained, FitOptions, FitResult};
use crate::model::{DesignData, ModelSpec};

/// Coordinatewise tolerance for declaring the UMLE and CMLE identical.
pub const SAME_MLE_TOLERANCE: f64 = 1e-8;

/// Data, model and the two reference fits every region and test is centred on.
#[derive(Debug, Clone)]
pub struct Fits<'a> {
    pub data: &'a DesignData,
    pub spec: &'a ModelSpec,
    pub options: FitOptions,
    pub umle: FitResult,
    pub cmle: FitResult,
}

impl<'a> Fits<'a> {
    /// Fits the UMLE, then the CMLE warm-started from it.
    pub fn new(data: &'a DesignData, spec: &'a ModelSpec, options: FitOptions) -> Result<Self> {
        let umle = fit_unconstrained(data, spec, &options)?;
        let start = if umle.quasi_separated {
            None
        } else {
            Some(umle.estimate.clone())
        };
        let cmle = fit_constrained(data, spec, &options.with_initial(start))?;
        Ok(Fits {
            data,
            spec,
            options: options.with_initial(None),
            umle,
            cmle,
        })
    }

    pub fn from_results(
        data: &'a DesignData,
        spec: &'a ModelSpec,
        options: FitOptions,
        umle: FitResult,
        cmle: FitResult,
    ) -> Self {
        Fits {
            data,
            spec,
            options,
            umle,
            cmle,
        }
    }

    pub fn converged(&self) -> bool {
        self.umle.converged && self.cmle.converged
    }

    /// Whether UMLE and CMLE coincide coordinatewise within [`SAME_MLE_TOLERANCE`].
    pub fn same_mle(&self) -> bool {
        self.umle
            .flat()
            .iter()
            .zip(self.cmle.flat())
            .all(|(a, b)| (a - b).abs() <= SAME_MLE_TOLERANCE)
    }
}
