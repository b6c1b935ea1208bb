//! Parasitics and static timing analysis.
//!
//! The numeric kernels ([`Lut`], [`Moments`]/[`PiModel`], [`ceff`],
//! [`RcTree`] with Elmore delays) are generic over [`crate::scalar::Scalar`];
//! the timing graph itself ([`graph`]) runs on `f64` and ties the kernels to
//! the design, routes, and annotation sources.

pub mod ceff;
pub mod elmore;
pub mod graph;
pub mod lut;
pub mod pi;
pub mod rc;
pub mod report;

use serde::{Deserialize, Serialize};

pub use ceff::ceff;
pub use elmore::{wire_slew, LN9};
pub use graph::{
    Annotations, CriticalPath, NetParasitics, PathPoint, SlackReport, TimingGraph, TimingOptions, CRITICAL_FRACTION,
};
pub use lut::{gate_delay, EdgeLuts, Lut};
pub use pi::{reduce_to_pi, Moments, PiModel};
pub use rc::{build_rc_tree, RcTree};
pub use report::{read_annotations, render_timing_report, write_annotations};

/// Signal transition direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Edge {
    Rise,
    Fall,
}

impl Edge {
    pub const BOTH: [Edge; 2] = [Edge::Rise, Edge::Fall];

    /// Feature encoding: 0 for rise, 1 for fall.
    pub fn as_flag(self) -> f64 {
        match self {
            Edge::Rise => 0.0,
            Edge::Fall => 1.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Edge::Rise => 0,
            Edge::Fall => 1,
        }
    }

    pub fn flip(self) -> Edge {
        match self {
            Edge::Rise => Edge::Fall,
            Edge::Fall => Edge::Rise,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Edge::Rise => "rise",
            Edge::Fall => "fall",
        }
    }

    pub fn parse(s: &str) -> Option<Edge> {
        match s {
            "rise" => Some(Edge::Rise),
            "fall" => Some(Edge::Fall),
            _ => None,
        }
    }
}
