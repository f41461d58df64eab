//! Numerical laboratory for the function spaces, local smoothing estimates
//! and Picard iteration behind small-data well-posedness of quasilinear
//! Schrödinger equations with cubic nonlinearities, on periodic boxes.
//!
//! Modules, bottom-up:
//! - [`grid`]: sampled space-time fields, FFTs, quadrature, binary snapshots.
//! - [`lp`]: Littlewood-Paley bands, wedges, frequency envelopes.
//! - [`cubes`]: cube partitions and the `X`, `Y`, `l^p X^s` norms.
//! - [`estimator`]: randomized checks of the multilinear estimates.
//! - [`evolve`]: frequency-localized linear evolution and its diagnostics.
//! - [`iterate`]: Picard iteration for the quasilinear problem.
//! - [`runner`]: configs, experiments, artifacts and the acceptance suite.

pub mod cubes;
pub mod error;
pub mod estimator;
pub mod evolve;
pub mod grid;
pub mod iterate;
pub mod lp;
pub mod par;
pub mod runner;

pub use error::{QslError, Result};
pub use grid::{Grid, SampledField, C64};
