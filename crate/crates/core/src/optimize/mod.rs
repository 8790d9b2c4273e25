//! MAP fitting of natural parameters and a cross-validation harness.

pub mod crossval;
pub mod fit;
pub mod lbfgs;

pub use crossval::{cross_validate, cross_validate_assigned, fold_assignment, CvReport, CvSummary, FoldResult, DEFAULT_SEED};
pub use fit::{fit_map, fit_map_from, FitConfig, FitResult};
pub use lbfgs::{minimize, LbfgsOptions, LbfgsOutcome};
