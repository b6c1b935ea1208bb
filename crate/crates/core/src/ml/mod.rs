//! Learning the gap between global-route estimates and the oracle.
//!
//! [`features`] turns a routed, timed design into per-sink and per-net
//! feature rows; [`dataset`] carries rows with provenance and reads/writes
//! them as CSV; [`gbdt`] is a deterministic gradient-boosted tree regressor
//! trained per target; [`bundle`] groups the six per-target models;
//! [`noise`] perturbs labels for robustness studies.

pub mod bundle;
pub mod dataset;
pub mod features;
pub mod gbdt;
pub mod noise;

pub use bundle::ModelBundle;
pub use dataset::{Dataset, RowMeta};
pub use features::{
    load_dataset, load_dataset_for, sink_dataset, sink_dataset_for, LOAD_SCHEMA, LOAD_TARGETS,
    SINK_SCHEMA, SINK_TARGETS,
};
pub use gbdt::{GbdtModel, GbdtParams};
pub use noise::apply_label_noise;
