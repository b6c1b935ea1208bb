//! Post-route timing optimization and flow replay.
//!
//! [`annotate`] resolves wire timing from one of three predictors,
//! [`transform`] implements the netlist edits (resize, buffer insertion),
//! [`optimize`] runs the repair and setup-recovery passes against those
//! annotations, and [`flow`] replays the whole pipeline end to end and
//! scores every mode with the same detail-route yardstick.

pub mod annotate;
pub mod flow;
pub mod optimize;
pub mod transform;

pub use annotate::{build_annotations, Predictor};
pub use flow::{replay_flow, FlowConfig, FlowReport, Mode, CONGESTION_THRESHOLDS};
pub use optimize::{optimize, AnnSource, FlowState, OptConfig};
pub use transform::{
    apply_transform, far_half, load_transform_log, save_transform_log, snap_buffer_site, Dirty,
    Transform, TransformRecord,
};
