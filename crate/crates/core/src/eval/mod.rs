//! Accuracy metrics and evaluation studies.
//!
//! [`stats`] holds the generic error summaries ([`ErrorStats`]) and the
//! least-squares line fit ([`LinearFit`]) used to compare predicted against
//! oracle timing; [`study`] runs the leave-one-design-out, label-noise,
//! clock-sweep, and feature-ablation protocols and writes their tables as
//! versioned CSV.

pub mod stats;

pub use stats::{ErrorStats, LinearFit};
