//! The optimization engine: an electrical repair pass followed by setup
//! recovery passes, all evaluated against wire annotations.
//!
//! # Architecture
//!
//! [`FlowState`] bundles the mutable artifacts (design, global routes,
//! annotations, and under the oracle source the detail routes). Every
//! netlist edit flows through the same loop: apply the transform, re-route
//! the nets whose geometry changed, then refresh annotations for the nets
//! the edit touched, leaving all others as they were. The annotation source
//! decides what "refresh" means:
//!
//! * global-route estimates recompute RC timing from the new routes,
//! * models re-infer from features of the new routes,
//! * the detail-route oracle re-runs only on the changed nets.
//!
//! Pass 0 repairs electrical violations (fanout, load, slew) by splitting
//! offending nets with buffers at their route midpoints; repairs are
//! unconditional. Setup passes then walk the worst violating endpoints and
//! try upsizing the path's worst-delay driver and buffering its worst wire,
//! keeping a candidate only when the annotated worst slack strictly
//! improves. The run stops after `max_passes` setup passes or the first
//! pass that accepts nothing. Every step is deterministic.

use std::collections::HashSet;

use log::warn;

use crate::design::library::{cell_name, CellLibrary, CellSize, PinSlot};
use crate::design::{BlockageGrid, Design, InstId, NetId};
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::ml::ModelBundle;
use crate::opt::annotate::predict_into;
use crate::opt::transform::{
    apply_transform, far_half, snap_buffer_site, Dirty, Transform, TransformRecord,
};
use crate::route::global::{gr_reroute, GlobalRoutes, RouteConfig};
use crate::route::maze::{dr_reroute, DrConfig, DrResult};
use crate::route::RouteTree;
use crate::timing::{Annotations, CriticalPath, Edge, NetParasitics, TimingGraph, TimingOptions};

/// Optimization knobs. Limits are electrical ceilings the repair pass
/// enforces; the rest bound the search.
#[derive(Clone, Debug)]
pub struct OptConfig {
    /// Setup recovery passes after the repair pass.
    pub max_passes: u32,
    /// Library cell inserted by net splits.
    pub buffer_cell: String,
    /// Sizes resizing may move to.
    pub allowed_sizes: Vec<CellSize>,
    /// Ceiling on any pin's transition time, ns.
    pub slew_limit_ns: f64,
    /// Ceiling on the total capacitance a driver sees, pF.
    pub cap_limit_pf: f64,
    /// Ceiling on a net's sink count.
    pub fanout_limit: usize,
    /// Worst endpoints examined per setup pass.
    pub endpoint_budget: usize,
    /// Repair sweeps before the electrical pass gives up.
    pub erc_rounds: u32,
}

impl Default for OptConfig {
    fn default() -> Self {
        OptConfig {
            max_passes: 3,
            buffer_cell: cell_name(crate::design::library::CellKind::Buf, CellSize::X2),
            allowed_sizes: CellSize::ALL.to_vec(),
            slew_limit_ns: 0.30,
            cap_limit_pf: 0.12,
            fanout_limit: 12,
            endpoint_budget: 10,
            erc_rounds: 8,
        }
    }
}

impl OptConfig {
    pub fn validate(&self, lib: &CellLibrary) -> Result<()> {
        let bad = |m: &str| Error::InvalidConfig(m.to_string());
        if self.max_passes == 0 {
            return Err(bad("max_passes must be at least 1"));
        }
        if !(self.slew_limit_ns > 0.0) {
            return Err(bad("slew limit must be positive"));
        }
        if !(self.cap_limit_pf > 0.0) {
            return Err(bad("cap limit must be positive"));
        }
        if self.fanout_limit == 0 {
            return Err(bad("fanout limit must be positive"));
        }
        if self.allowed_sizes.is_empty() {
            return Err(bad("at least one cell size must be allowed"));
        }
        if self.endpoint_budget == 0 {
            return Err(bad("endpoint budget must be positive"));
        }
        if self.erc_rounds == 0 {
            return Err(bad("repair rounds must be positive"));
        }
        if lib.cell(&self.buffer_cell).is_none() {
            return Err(Error::InvalidConfig(format!("buffer cell {} not in library", self.buffer_cell)));
        }
        Ok(())
    }
}

/// Where annotations come from when optimization re-times an edit.
#[derive(Clone, Copy)]
pub enum AnnSource<'a> {
    /// Re-extract from the global routes.
    GrEstimates,
    /// Re-infer from model predictions over global-route features.
    Models(&'a ModelBundle),
    /// Re-run the detailed-route oracle on the edited nets.
    DrOracle(DrConfig),
}

impl AnnSource<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            AnnSource::GrEstimates => "traditional",
            AnnSource::Models(_) => "ml",
            AnnSource::DrOracle(_) => "ground_truth",
        }
    }
}

/// Everything optimization mutates, cloneable so candidate edits can be
/// evaluated and discarded.
#[derive(Clone)]
pub struct FlowState {
    pub design: Design,
    pub gr: GlobalRoutes,
    pub ann: Annotations,
    /// Oracle routing state; present only under [`AnnSource::DrOracle`].
    pub dr: Option<DrResult>,
}

/// Runs the repair and setup passes in place and returns the transform log.
/// `state.ann` must already annotate every net of `state.design`.
pub fn optimize(
    state: &mut FlowState,
    lib: &CellLibrary,
    route_cfg: &RouteConfig,
    cfg: &OptConfig,
    source: AnnSource<'_>,
    opts: TimingOptions,
) -> Result<Vec<TransformRecord>> {
    cfg.validate(lib)?;
    if matches!(source, AnnSource::DrOracle(_)) != state.dr.is_some() {
        return Err(Error::InvalidConfig(
            "detail routes must be present exactly when the oracle source is used".into(),
        ));
    }
    let engine = Engine { lib, route_cfg, cfg, source, opts };
    // Macros never move, so the site map is valid for the whole run.
    let blockage = BlockageGrid::build(&state.design);
    let mut log = Vec::new();

    for round in 1.. {
        let repaired = engine.repair_round(state, &blockage, &mut log)?;
        if repaired == 0 {
            break;
        }
        if round >= engine.cfg.erc_rounds {
            let sta = engine.annotated_sta(state)?;
            let left = engine.violations(state, &sta).len();
            if left > 0 {
                warn!("electrical repair stopped after {round} rounds with {left} nets still violating");
            }
            break;
        }
    }

    for pass in 1..=engine.cfg.max_passes {
        if !engine.setup_pass(state, pass, &blockage, &mut log)? {
            break;
        }
    }
    Ok(log)
}

struct Engine<'a> {
    lib: &'a CellLibrary,
    route_cfg: &'a RouteConfig,
    cfg: &'a OptConfig,
    source: AnnSource<'a>,
    opts: TimingOptions,
}

impl<'a> Engine<'a> {
    /// Re-routes the nets in `dirty.route` and refreshes annotations for
    /// the nets in `dirty.ann`; everything else keeps its prior values.
    fn reannotate(&self, state: &mut FlowState, dirty: &Dirty) -> Result<()> {
        gr_reroute(&state.design, self.lib, self.route_cfg, &mut state.gr, &dirty.route);
        match self.source {
            AnnSource::GrEstimates => {
                let sta = TimingGraph::analyze(
                    &state.design,
                    self.lib,
                    NetParasitics::Routes(&state.gr.trees),
                    self.opts,
                )?;
                patch(&mut state.ann, &state.design, &sta.extract_annotations(), &dirty.ann);
            }
            AnnSource::Models(bundle) => {
                let sta = TimingGraph::analyze(
                    &state.design,
                    self.lib,
                    NetParasitics::Routes(&state.gr.trees),
                    self.opts,
                )?;
                predict_into(&state.design, self.lib, &state.gr, &sta, bundle, &dirty.ann, &mut state.ann)?;
            }
            AnnSource::DrOracle(dr_cfg) => {
                let dr = state.dr.as_mut().expect("checked by optimize");
                dr_reroute(&state.design, self.lib, &state.gr, &dr_cfg, dr, &dirty.route)?;
                let sta = TimingGraph::analyze(
                    &state.design,
                    self.lib,
                    NetParasitics::Routes(&dr.trees),
                    self.opts,
                )?;
                patch(&mut state.ann, &state.design, &sta.extract_annotations(), &dirty.ann);
            }
        }
        Ok(())
    }

    fn annotated_sta<'d>(&self, state: &'d FlowState) -> Result<TimingGraph<'d>>
    where
        'a: 'd,
    {
        TimingGraph::analyze(&state.design, self.lib, NetParasitics::Annotated(&state.ann), self.opts)
    }

    fn ws(&self, state: &FlowState) -> Result<f64> {
        Ok(self.annotated_sta(state)?.slack_report().ws())
    }

    /// Whether one net breaks a fanout, load, or slew limit.
    fn net_violates(&self, state: &FlowState, sta: &TimingGraph<'_>, id: NetId) -> bool {
        let net = state.design.net(id);
        if net.sinks.len() > self.cfg.fanout_limit {
            return true;
        }
        if sta.net_c_load(id) > self.cfg.cap_limit_pf {
            return true;
        }
        let over = |v: f64| v > self.cfg.slew_limit_ns;
        Edge::BOTH.iter().any(|&e| {
            sta.driver_slew(id, e).is_some_and(over)
                || net.sinks.iter().any(|&s| sta.slew(s, e).is_some_and(over))
        })
    }

    fn violations(&self, state: &FlowState, sta: &TimingGraph<'_>) -> Vec<NetId> {
        state.design.net_ids().filter(|&id| self.net_violates(state, sta, id)).collect()
    }

    /// One repair sweep: buffer every net still violating a limit. Returns
    /// the number of repairs applied.
    fn repair_round(
        &self,
        state: &mut FlowState,
        blockage: &BlockageGrid,
        log: &mut Vec<TransformRecord>,
    ) -> Result<usize> {
        let snapshot = {
            let sta = self.annotated_sta(state)?;
            self.violations(state, &sta)
        };
        let mut repaired = 0;
        for id in snapshot {
            // An earlier repair this round may have already cleared it.
            let ws_before = {
                let sta = self.annotated_sta(state)?;
                if !self.net_violates(state, &sta, id) {
                    continue;
                }
                sta.slack_report().ws()
            };
            let desired = route_midpoint(&state.gr.trees[id.0 as usize]);
            let Some(site) = snap_buffer_site(&state.design, self.lib, blockage, &self.cfg.buffer_cell, desired)
            else {
                warn!(
                    "no legal buffer site near ({:.2},{:.2}) for net {}; leaving it violating",
                    desired.x,
                    desired.y,
                    state.design.net(id).name
                );
                continue;
            };
            let far = far_half(&state.design, self.lib, id, None);
            let t = Transform::InsertBuffer {
                net: id,
                cell: self.cfg.buffer_cell.clone(),
                at: site,
                far,
            };
            let dirty = apply_transform(&mut state.design, self.lib, &t)?;
            state.design.validate(self.lib)?;
            self.reannotate(state, &dirty)?;
            log.push(TransformRecord {
                pass: 0,
                kind: t.kind().into(),
                target: t.target(&state.design),
                ws_before_ns: ws_before,
                ws_after_ns: self.ws(state)?,
            });
            repaired += 1;
        }
        Ok(repaired)
    }

    /// One setup pass over the worst violating endpoints. Returns whether
    /// any transform was accepted.
    fn setup_pass(
        &self,
        state: &mut FlowState,
        pass: u32,
        blockage: &BlockageGrid,
        log: &mut Vec<TransformRecord>,
    ) -> Result<bool> {
        let mut accepted_any = false;
        let mut stuck: HashSet<InstId> = HashSet::new();
        for _ in 0..self.cfg.endpoint_budget {
            let (ws_before, path) = {
                let sta = self.annotated_sta(state)?;
                let ws = sta.slack_report().ws();
                let path = sta
                    .critical_paths()
                    .into_iter()
                    .find(|p| p.slack_ns < 0.0 && !stuck.contains(&p.endpoint));
                (ws, path)
            };
            let Some(path) = path else { break };

            let mut best: Option<(FlowState, f64, Transform)> = None;
            for t in self.candidates(state, &path, blockage) {
                let mut cand = state.clone();
                let Ok(dirty) = apply_transform(&mut cand.design, self.lib, &t) else { continue };
                if cand.design.validate(self.lib).is_err() || self.reannotate(&mut cand, &dirty).is_err() {
                    continue;
                }
                let Ok(ws) = self.ws(&cand) else { continue };
                // Strict improvement, and strict again across candidates so
                // the earlier (resize) candidate wins ties.
                if ws > ws_before && best.as_ref().is_none_or(|&(_, b, _)| ws > b) {
                    best = Some((cand, ws, t));
                }
            }
            match best {
                Some((next, ws_after, t)) => {
                    *state = next;
                    log.push(TransformRecord {
                        pass,
                        kind: t.kind().into(),
                        target: t.target(&state.design),
                        ws_before_ns: ws_before,
                        ws_after_ns: ws_after,
                    });
                    accepted_any = true;
                }
                None => {
                    stuck.insert(path.endpoint);
                }
            }
        }
        Ok(accepted_any)
    }

    /// The two candidate fixes for a path: upsize its worst-delay driver
    /// and buffer its worst wire toward the path's sink.
    fn candidates(&self, state: &FlowState, path: &CriticalPath, blockage: &BlockageGrid) -> Vec<Transform> {
        let design = &state.design;
        let mut driven_by: Vec<Option<NetId>> = vec![None; design.instances.len()];
        for (i, net) in design.nets.iter().enumerate() {
            driven_by[net.driver.inst.0 as usize] = Some(NetId(i as u32));
        }

        let mut worst_cell: Option<(f64, InstId)> = None;
        let mut worst_wire: Option<(f64, NetId, usize)> = None;
        for w in path.points.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let d = b.arrival_ns - a.arrival_ns;
            match (a.pin.pin, b.pin.pin) {
                (PinSlot::In(_), PinSlot::Out) if a.pin.inst == b.pin.inst => {
                    if worst_cell.is_none_or(|(wd, _)| d > wd) {
                        worst_cell = Some((d, a.pin.inst));
                    }
                }
                (PinSlot::Out, PinSlot::In(_)) => {
                    let Some(net) = driven_by[a.pin.inst.0 as usize] else { continue };
                    let Some(sink) = design.net(net).sinks.iter().position(|&s| s == b.pin) else {
                        continue;
                    };
                    if worst_wire.is_none_or(|(wd, _, _)| d > wd) {
                        worst_wire = Some((d, net, sink));
                    }
                }
                _ => {}
            }
        }

        let mut out = Vec::new();
        if let Some((_, inst)) = worst_cell {
            let cell = self.lib.cell(&design.instance(inst).cell).expect("validated design");
            if let Some(next) = cell.size.next_up() {
                if self.cfg.allowed_sizes.contains(&next) {
                    out.push(Transform::Resize { inst, to: next });
                }
            }
        }
        if let Some((_, net, sink)) = worst_wire {
            let driver = design.pin_location(self.lib, design.net(net).driver);
            let target = design.pin_location(self.lib, design.net(net).sinks[sink]);
            let desired = Point::new((driver.x + target.x) / 2.0, (driver.y + target.y) / 2.0);
            if let Some(site) = snap_buffer_site(design, self.lib, blockage, &self.cfg.buffer_cell, desired) {
                out.push(Transform::InsertBuffer {
                    net,
                    cell: self.cfg.buffer_cell.clone(),
                    at: site,
                    far: far_half(design, self.lib, net, Some(sink)),
                });
            }
        }
        out
    }
}

/// Copies `src`'s load and per-sink entries for `nets` into `dst`.
fn patch(dst: &mut Annotations, design: &Design, src: &Annotations, nets: &[NetId]) {
    for &id in nets {
        let pi = src.load(id).expect("analyzed net has a driver load");
        dst.set_load(id, pi);
        for sink in 0..design.net(id).sinks.len() {
            for e in Edge::BOTH {
                let (d, w) = src.sink(id, sink, e).expect("analyzed net covers every sink");
                dst.set_sink(id, sink, e, d, w);
            }
        }
    }
}

/// Point halfway along the route from the root to its farthest sink,
/// walking tree arcs. Degenerate routes return their single point.
fn route_midpoint(tree: &RouteTree) -> Point {
    let mut dist = vec![0.0; tree.nodes.len()];
    for (child, parent, si) in tree.walk() {
        dist[child] = dist[parent] + tree.seg_length(&tree.segs[si]);
    }
    let far = tree
        .sink_nodes
        .iter()
        .enumerate()
        .max_by(|a, b| dist[*a.1].partial_cmp(&dist[*b.1]).expect("finite").then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .expect("nets have at least one sink");
    let target = dist[tree.sink_nodes[far]] / 2.0;

    let mut cur = tree.root;
    let mut acc = 0.0;
    for seg in tree.path_to_sink(far) {
        let next = if seg.a as usize == cur { seg.b as usize } else { seg.a as usize };
        let len = tree.seg_length(seg);
        if acc + len >= target && len > 0.0 {
            let f = (target - acc) / len;
            let (a, b) = (tree.nodes[cur], tree.nodes[next]);
            return Point::new(a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f);
        }
        acc += len;
        cur = next;
    }
    tree.nodes[cur]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::generate::{gen_design, GenConfig};
    use crate::route::global::global_route;
    use crate::route::maze::detailed_route_oracle;
    use crate::route::RouteSeg;

    fn gr_state(design: Design, lib: &CellLibrary) -> FlowState {
        let gr = global_route(&design, lib, &RouteConfig::default());
        let sta = TimingGraph::analyze(&design, lib, NetParasitics::Routes(&gr.trees), TimingOptions::default())
            .unwrap();
        let ann = sta.extract_annotations();
        FlowState { design, gr, ann, dr: None }
    }

    #[test]
    fn route_midpoint_walks_half_the_longest_path() {
        // L-shaped two-segment route: root (0,0) -> (40,0) -> (40,20).
        // Total 60 um, so the midpoint sits at (30, 0).
        let tree = RouteTree {
            net: NetId(0),
            nodes: vec![Point::new(0.0, 0.0), Point::new(40.0, 0.0), Point::new(40.0, 20.0)],
            segs: vec![RouteSeg { a: 0, b: 1, layer: 0 }, RouteSeg { a: 1, b: 2, layer: 1 }],
            root: 0,
            sink_nodes: vec![2],
        };
        assert_eq!(route_midpoint(&tree), Point::new(30.0, 0.0));
    }

    #[test]
    fn repair_pass_clears_fanout_violations() {
        let lib = CellLibrary::standard();
        let design = gen_design(&GenConfig::new("erc", 11, 220, 0.55), &lib).unwrap();
        let mut state = gr_state(design, &lib);
        // Tight fanout limit so the generated netlist starts violating.
        let worst = state.design.nets.iter().map(|n| n.sinks.len()).max().unwrap();
        assert!(worst > 4, "fixture needs a high-fanout net, got {worst}");
        let cfg = OptConfig {
            max_passes: 1,
            fanout_limit: 4,
            // Generous electrical limits isolate the fanout rule.
            slew_limit_ns: 10.0,
            cap_limit_pf: 10.0,
            ..OptConfig::default()
        };
        let log = optimize(&mut state, &lib, &RouteConfig::default(), &cfg, AnnSource::GrEstimates, TimingOptions::default())
            .unwrap();

        assert!(log.iter().any(|r| r.pass == 0), "repairs expected");
        assert!(state.design.nets.iter().all(|n| n.sinks.len() <= 4));
        state.design.validate(&lib).unwrap();
        // Annotations track the grown netlist: the timing graph accepts them.
        let sta = TimingGraph::analyze(
            &state.design,
            &lib,
            NetParasitics::Annotated(&state.ann),
            TimingOptions::default(),
        )
        .unwrap();
        assert!(sta.slack_report().ws().is_finite());
    }

    #[test]
    fn accepted_setup_transforms_strictly_improve_annotated_ws() {
        let lib = CellLibrary::standard();
        let mut design = gen_design(&GenConfig::new("setup", 7, 260, 0.6), &lib).unwrap();
        // Pull the clock 15% below the worst arrival so endpoints violate.
        let report = {
            let gr = global_route(&design, &lib, &RouteConfig::default());
            TimingGraph::analyze(&design, &lib, NetParasitics::Routes(&gr.trees), TimingOptions::default())
                .unwrap()
                .slack_report()
        };
        design.clock_period_ns = 0.85 * (report.clock_period_ns - report.ws());
        let mut state = gr_state(design, &lib);

        let log = optimize(
            &mut state,
            &lib,
            &RouteConfig::default(),
            &OptConfig::default(),
            AnnSource::GrEstimates,
            TimingOptions::default(),
        )
        .unwrap();

        let setup: Vec<_> = log.iter().filter(|r| r.pass >= 1).collect();
        assert!(!setup.is_empty(), "expected at least one accepted setup transform");
        for r in &setup {
            assert!(
                r.ws_after_ns > r.ws_before_ns,
                "pass {} {} did not improve: {} -> {}",
                r.pass,
                r.target,
                r.ws_before_ns,
                r.ws_after_ns
            );
        }
        state.design.validate(&lib).unwrap();
    }

    #[test]
    fn optimize_is_deterministic() {
        let lib = CellLibrary::standard();
        let run = || {
            let mut design = gen_design(&GenConfig::new("det", 3, 200, 0.6), &lib).unwrap();
            design.clock_period_ns *= 0.6;
            let mut state = gr_state(design, &lib);
            let log = optimize(
                &mut state,
                &lib,
                &RouteConfig::default(),
                &OptConfig::default(),
                AnnSource::GrEstimates,
                TimingOptions::default(),
            )
            .unwrap();
            (log, state.design.instances.len(), state.design.nets.len())
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn oracle_source_requires_detail_routes() {
        let lib = CellLibrary::standard();
        let design = gen_design(&GenConfig::new("oracle", 5, 120, 0.5), &lib).unwrap();
        let mut state = gr_state(design, &lib);
        let err = optimize(
            &mut state,
            &lib,
            &RouteConfig::default(),
            &OptConfig::default(),
            AnnSource::DrOracle(DrConfig::default()),
            TimingOptions::default(),
        );
        assert!(err.is_err());

        // With detail routes attached, the oracle source runs.
        let dr = detailed_route_oracle(&state.design, &lib, &state.gr, &DrConfig::default()).unwrap();
        let sta = TimingGraph::analyze(&state.design, &lib, NetParasitics::Routes(&dr.trees), TimingOptions::default())
            .unwrap();
        state.ann = sta.extract_annotations();
        state.dr = Some(dr);
        optimize(
            &mut state,
            &lib,
            &RouteConfig::default(),
            &OptConfig::default(),
            AnnSource::DrOracle(DrConfig::default()),
            TimingOptions::default(),
        )
        .unwrap();
        state.design.validate(&lib).unwrap();
    }
}
