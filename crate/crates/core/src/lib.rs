//! Desk-scale testbed for predicting post-detailed-route timing while the
//! design is still at the global-route stage.
//!
//! The crate models a miniature physical-design world end to end: synthetic
//! gate-level designs with macros, Steiner-tree global routing over a GCell
//! grid, a maze-routing oracle that stands in for the detailed router,
//! RC parasitics with pi-model reduction and effective capacitance, a small
//! static timing engine, gradient-boosted models that learn the gap between
//! global-route estimates and the oracle, and a greedy post-route optimizer
//! that consumes either source of timing.
//!
//! # Architecture
//!
//! * [`design`] - netlist/floorplan model, synthetic design generation,
//!   macro blockage grids, design file I/O.
//! * [`route`] - rectilinear Steiner trees, layer assignment, global routing
//!   with congestion maps, and the detailed-route oracle.
//! * [`timing`] - RC trees, admittance moments, pi reduction, effective
//!   capacitance, delay/slew tables, and graph-based timing analysis.
//! * [`ml`] - feature extraction, datasets, label noise, and the
//!   gradient-boosted tree regressor.
//! * [`opt`] - ERC cleanup and setup optimization driven by annotated
//!   timing, plus full flow replay under different annotation modes.
//! * [`eval`] - error statistics, accuracy studies, and report files.
//!
//! Numeric kernels (moments, pi reduction, effective capacitance, table
//! interpolation, boosting, statistics) are generic over [`scalar::Scalar`];
//! the aliases at the crate root fix them to `f64`, which is what the rest
//! of the pipeline uses.
//!
//! Units everywhere: nanoseconds, kilohms, picofarads, micrometers.
//! kohm * pF = ns, so delay arithmetic needs no conversion factors.

pub mod design;
pub mod error;
pub mod eval;
pub mod geom;
pub mod ml;
pub mod opt;
pub mod route;
pub mod scalar;
pub mod seed;
pub mod timing;

pub use error::{Error, Result};

/// Driving-point admittance moments used throughout the pipeline.
pub type Moments = timing::Moments<f64>;
/// Pi-model load as consumed by delay tables and annotations.
pub type PiModel = timing::PiModel<f64>;
/// Delay/slew lookup table over (input slew, load) axes.
pub type Lut = timing::Lut<f64>;
/// Gradient-boosted regressor over `f64` feature rows.
pub type GbdtModel = ml::GbdtModel<f64>;
/// Absolute percentage error summary.
pub type ErrorStats = eval::ErrorStats<f64>;
/// Ordinary least squares line fit.
pub type LinearFit = eval::LinearFit<f64>;
