//! End-to-end flow replay: route, annotate, optimize, detail-route, score.
//!
//! The three modes share every stage except the annotation source driving
//! optimization: `traditional` optimizes against global-route estimates,
//! `ml` against model predictions, and `ground_truth` pays for a detail
//! route up front and keeps the oracle in the loop. All modes end with a
//! fresh detail route of the optimized design and a timing analysis over
//! it, so their reports measure the same physical outcome.

use std::time::Instant;

use crate::design::library::CellLibrary;
use crate::design::Design;
use crate::error::{Error, Result};
use crate::ml::ModelBundle;
use crate::opt::annotate::{build_annotations, Predictor};
use crate::opt::optimize::{optimize, AnnSource, FlowState, OptConfig};
use crate::opt::transform::TransformRecord;
use crate::route::global::{count_congested, global_route, RouteConfig};
use crate::route::maze::{detailed_route_oracle, DrConfig};
use crate::timing::{NetParasitics, TimingGraph, TimingOptions};

/// Annotation source a replay optimizes against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Traditional,
    Ml,
    GroundTruth,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Traditional, Mode::Ml, Mode::GroundTruth];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Traditional => "traditional",
            Mode::Ml => "ml",
            Mode::GroundTruth => "ground_truth",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        Mode::ALL.into_iter().find(|m| m.name() == s)
    }
}

/// Utilization levels the congestion summary counts GCells above.
pub const CONGESTION_THRESHOLDS: [f64; 3] = [0.8, 0.9, 1.0];

/// Everything a replay needs besides the design and models. The replay
/// seed overrides `dr.seed` so one argument controls all randomness.
#[derive(Clone, Debug, Default)]
pub struct FlowConfig {
    pub route: RouteConfig,
    pub dr: DrConfig,
    pub opt: OptConfig,
    /// Clock override for the whole replay, e.g. for a clock sweep.
    pub clock_period_ns: Option<f64>,
}

/// Outcome of one replay: final timing from a detail route of the
/// optimized design, congestion counts, stage wall-clocks, and the
/// transform log.
#[derive(Clone, Debug)]
pub struct FlowReport {
    pub design: String,
    pub mode: Mode,
    pub seed: u64,
    pub clock_period_ns: f64,
    pub ws_ns: f64,
    pub tns_ns: f64,
    pub violating: usize,
    /// GCells strictly above each of [`CONGESTION_THRESHOLDS`].
    pub congested: [usize; 3],
    /// `(stage, seconds)` in execution order.
    pub stages: Vec<(String, f64)>,
    pub transforms: Vec<TransformRecord>,
}

impl FlowReport {
    pub fn total_seconds(&self) -> f64 {
        self.stages.iter().map(|(_, s)| s).sum()
    }
}

/// Replays the post-route flow on one design. Deterministic in
/// `(design, mode, seed)` for fixed configs and models; only the stage
/// timings vary between runs.
pub fn replay_flow(
    design: &Design,
    lib: &CellLibrary,
    cfg: &FlowConfig,
    mode: Mode,
    models: Option<&ModelBundle>,
    seed: u64,
) -> Result<FlowReport> {
    if mode == Mode::Ml && models.is_none() {
        return Err(Error::InvalidConfig("ml replay needs a trained model bundle".into()));
    }
    let opts = TimingOptions { clock_period_ns: cfg.clock_period_ns };
    let dr_cfg = DrConfig { seed, ..cfg.dr };
    let mut stages: Vec<(String, f64)> = Vec::new();

    let t = Instant::now();
    let gr = global_route(design, lib, &cfg.route);
    stages.push(("global_route".into(), t.elapsed().as_secs_f64()));

    // Ground truth pays for an oracle run before optimization even starts.
    let mut prepass = None;
    if mode == Mode::GroundTruth {
        let t = Instant::now();
        prepass = Some(detailed_route_oracle(design, lib, &gr, &dr_cfg)?);
        stages.push(("prepass_detail_route".into(), t.elapsed().as_secs_f64()));
    }

    let t = Instant::now();
    let ann = match (mode, &prepass) {
        (Mode::Traditional, _) | (Mode::Ml, _) => {
            let gr_sta = TimingGraph::analyze(design, lib, NetParasitics::Routes(&gr.trees), opts)?;
            let predictor = match mode {
                Mode::Traditional => Predictor::GrEstimates,
                _ => Predictor::Models(models.expect("checked above")),
            };
            build_annotations(design, lib, &gr, &gr_sta, predictor)?
        }
        (Mode::GroundTruth, Some(dr)) => {
            TimingGraph::analyze(design, lib, NetParasitics::Routes(&dr.trees), opts)?
                .extract_annotations()
        }
        (Mode::GroundTruth, None) => unreachable!("prepass set above"),
    };
    stages.push(("annotate".into(), t.elapsed().as_secs_f64()));

    let source = match mode {
        Mode::Traditional => AnnSource::GrEstimates,
        Mode::Ml => AnnSource::Models(models.expect("checked above")),
        Mode::GroundTruth => AnnSource::DrOracle(dr_cfg),
    };
    let mut state = FlowState { design: design.clone(), gr, ann, dr: prepass };
    let t = Instant::now();
    let transforms = optimize(&mut state, lib, &cfg.route, &cfg.opt, source, opts)?;
    stages.push(("optimize".into(), t.elapsed().as_secs_f64()));

    // Every mode is scored by the same yardstick: a fresh oracle route of
    // its optimized design.
    let t = Instant::now();
    let final_dr = detailed_route_oracle(&state.design, lib, &state.gr, &dr_cfg)?;
    stages.push(("detail_route".into(), t.elapsed().as_secs_f64()));

    let t = Instant::now();
    let report = TimingGraph::analyze(&state.design, lib, NetParasitics::Routes(&final_dr.trees), opts)?
        .slack_report();
    stages.push(("final_sta".into(), t.elapsed().as_secs_f64()));

    Ok(FlowReport {
        design: design.name.clone(),
        mode,
        seed,
        clock_period_ns: report.clock_period_ns,
        ws_ns: report.ws(),
        tns_ns: report.tns(),
        violating: report.violating(),
        congested: CONGESTION_THRESHOLDS.map(|th| count_congested(&final_dr.congestion, th)),
        stages,
        transforms,
    })
}
