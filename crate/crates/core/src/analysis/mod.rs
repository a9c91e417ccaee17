//! Harmonic analysis on `S^2` and the verifiers built on it.

mod decay;
mod harmonics;
mod holder;
mod identities;
mod report;

pub use decay::{
    decay_check, dyadic_windows, end_to_end_theorem31, DecayReport, PipelineOptions, PipelineReport, Stage, WindowSup,
};
pub use harmonics::{harmonic_value, normalized_legendre_all, HarmonicBasis};
pub use holder::{
    holder_exponent_fit, holder_integral, holder_integral_grid, holder_trace, keyabst_ratio_sup, keyabst_sum,
    loglog_fit, FitReport, FIT_FLOOR,
};
pub use identities::{
    hausdorff_young_check, kernel_identity_grid, kernel_identity_zonal, l1_sup_check, parseval_equality_check,
    sqrt_deviation_identity_check, Comparison, HyConstant, SqrtIdentityReport,
};
pub use report::CheckRecord;
