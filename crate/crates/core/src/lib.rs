//! Structural breakpoint detection for linear time-series models whose
//! coefficients jump in few periods.
//!
//! The model `y_t = X_t beta_t + u_t` is reparameterized through the
//! increments `delta_t = beta_t - beta_{t-1}` (with a pooled least-squares
//! baseline as the starting value), which turns scarce jumps into a
//! group-sparse solution of a single large regression: one coefficient group
//! per period. A group-LASSO solve then marks the periods with nonzero
//! increments as breakpoints, and the cumulative sum of the increments
//! recovers the whole coefficient trajectory. No distributional assumption
//! on `u_t` is made anywhere.
//!
//! Modules:
//!
//! - [`panel`]: panel types, validation, coefficient trajectories.
//! - [`baseline`]: pooled least-squares starting value.
//! - [`diffop`]: the matrix-free difference-form operator with column
//!   normalization and per-group spectral bounds.
//! - [`solver`]: block proximal coordinate descent, penalty paths, KKT
//!   certification, and path-point selection.
//! - [`pipeline`]: the end-to-end detection pipeline.
//! - [`vecm`]: the vector-error-correction application (time-varying loading
//!   matrices and comovement degrees).
//! - [`synth`]: seeded scenario generators used as ground-truth oracles.

pub mod baseline;
pub mod diffop;
pub mod error;
pub mod panel;
pub mod pipeline;
pub mod solver;
pub mod synth;
pub mod vecm;

pub use baseline::{fit_baseline, OlsBaseline, DEFAULT_RIDGE_FALLBACK};
pub use diffop::{build_design, DifferenceDesign, GroupColumns, ResidualTarget};
pub use error::{Error, Result};
pub use panel::{reconstruct_path, CoefficientPath, PeriodLabel, RegressionPanel};
pub use pipeline::{
    detect_breaks, detect_breaks_with_baseline, BreakEvent, BreakReport, DetectConfig,
    Diagnostics, LambdaChoice,
};
pub use solver::{
    group_soft_threshold, lambda_max, select_lambda, solve, solve_path, GroupLassoSolution,
    GroupWeights, SelectionCriterion, SolverConfig,
};
pub use synth::{
    generate_panel, generate_vecm, DesignDistribution, PanelScenario, VecmScenario, VecmTruth,
};
pub use vecm::{
    build_vecm_panel, comovement_pipeline, decompose_pi, effective_periods, fit_vecm_invariant,
    recover_alpha, ComovementSeries, DegreeNorm, TimeVarying, VecmFit, VecmSpec,
};
