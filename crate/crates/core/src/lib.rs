//! Baseline hazard estimation in high-dimensional Cox models.
//!
//! The pipeline has three steps:
//!
//! 1. estimate the regression parameter with an ℓ1-penalized Cox partial
//!    likelihood ([`cox`]), optionally after univariate score screening
//!    ([`screen`]);
//! 2. smooth the Breslow increments with a kernel ([`estimate`]);
//! 3. choose the bandwidth by the Goldenshluger–Lepski rule or by
//!    cross-validation ([`bandwidth`]).
//!
//! [`sim`] reproduces the Weibull simulation study comparing both selectors.

pub mod bandwidth;
pub mod cox;
pub mod data;
pub mod error;
pub mod estimate;
pub mod kernel;
pub mod quadrature;
pub mod screen;
pub mod sim;

pub use bandwidth::{make_grid, select_cv, select_gl, BandwidthGrid, CvSelection, CvWeighting, GLSelection};
pub use cox::{fit_lasso, partial_loglik, select_gamma, CoxFit, LassoOptions};
pub use data::{bar_y, load_csv, s_n, write_csv, CsvSchema, RiskSetIndex, SurvivalSample};
pub use error::{Error, Result};
pub use estimate::{breslow, double_smooth, kernel_baseline, l2_dist_sq, CurveEstimate, JumpRepresentation};
pub use kernel::{epanechnikov, KernelKind, KernelSpec};
pub use screen::{score_screen, ScreenMode, ScreeningResult};
pub use sim::{run_experiment, HarnessOptions, MiseReport, SimDesign};
