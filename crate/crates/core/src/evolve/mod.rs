//! Frequency-localized and global linear evolution, with the multiplier
//! identities, energy and local smoothing diagnostics built on top.

mod diagnostics;
mod interp;
mod linear;
mod metric;
mod multiplier;

pub use diagnostics::{
    commutator_identity_check, cube_commutator_diagnostic, energy_check, local_smoothing_report,
    positive_commutator_check, CubeCommutatorRow, CubeRow, EnergyReport, IdentityReport, IdentityRow,
    LocalSmoothingReport, PositiveCommutatorReport, SMALLNESS,
};
pub use linear::{solve_linear, step_linear, LinearOperator, LinearProblem, Localization, CFL};
pub use metric::{MetricField, MetricMap};
pub use multiplier::Multiplier;

#[cfg(test)]
mod tests;
