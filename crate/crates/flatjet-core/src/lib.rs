//! Boundary control synthesis for 1D anisotropic PDEs `∂_t^N y = P y + f(x, y, …, ∂_x^{M−1} y)`
//! acting in spaces of analytic functions.
//!
//! The library works entirely in jet space: the `[n][k]` array of mixed derivatives
//! `∂_t^n ∂_x^k y` at a point. Three mechanisms cooperate:
//!
//! * the forward jet correspondence, which maps an analytic state (space-Taylor
//!   coefficients of the time components) to the full 2D jet at `x = 0`, without
//!   assuming a solution exists ([`jet_engine::time_jets_from_state`]);
//! * the sideways completion, which rebuilds the full jet from the `M` boundary
//!   rows by solving the equation for `∂_x^M y` ([`jet_engine::complete_jet_from_traces`]);
//! * Gevrey-class trace realization, which turns prescribed derivative sequences
//!   into concrete smooth functions of `t` with controlled derivative growth
//!   ([`gevrey_toolbox::borel_realize`], [`gevrey_toolbox::gevrey_cutoff`]).
//!
//! [`control_synth::synthesize`] glues these into an open-loop steering pipeline
//! between two small analytic states, and [`sim_harness`] cross-checks the result
//! with independent forward-in-time finite-difference solvers where the preset is
//! well posed.
//!
//! Exact rational scalars (plain or Gaussian) are available next to `f64`/complex
//! floats, so the core recursions can be tested bit-exactly.

pub mod control_synth;
pub mod field_builder;
pub mod gevrey_toolbox;
pub mod jet_engine;
pub mod pde_model;
pub mod scalar;
pub mod series_core;
pub mod sim_harness;

pub use pde_model::{make_preset, AnalyticState, NonlinearityTable, PdeSpec, Preset};
pub use scalar::{CRational, Complex64, Rational, Scalar};
pub use series_core::{Jet2D, JetBoundParams};
