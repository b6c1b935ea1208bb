//! Static timing over a placed, routed design.
//!
//! Arrival times and slews propagate per pin and transition edge from
//! register outputs to register data pins. Gate arcs interpolate the cell
//! tables at the input slew and the effective capacitance of the driven
//! net; wire arcs come from one of two interchangeable parasitics sources:
//!
//! - route geometry: RC trees give Elmore delays, square-root-rule slew
//!   degradation, and a pi driver load, or
//! - explicit annotations: per-sink delay and slew increments plus a per-net
//!   pi load, as produced by predictors or extracted from a finished run.
//!
//! Extracting annotations from a routes-based run and replaying them
//! reproduces that run bit for bit, which is what lets predicted and ground
//! truth parasitics share one engine.

use std::collections::HashMap;

use crate::design::library::{CellLibrary, PinSlot, CLOCK_SLEW_NS};
use crate::design::{Design, InstId, NetId, PinRef};
use crate::error::{Error, Result};
use crate::route::RouteTree;
use crate::timing::{build_rc_tree, ceff, reduce_to_pi, wire_slew, Edge, PiModel};

/// Endpoints with slack below this fraction of the clock period count as
/// timing critical.
pub const CRITICAL_FRACTION: f64 = 0.4;

/// Per-sink wire increments and per-net driver loads, keyed by design ids.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Annotations {
    /// (net, sink index, edge index) -> (wire delay, wire slew increment), ns.
    sinks: HashMap<(NetId, usize, usize), (f64, f64)>,
    /// net -> pi load seen by the driver.
    loads: HashMap<NetId, PiModel<f64>>,
}

impl Annotations {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_sink(&mut self, net: NetId, sink: usize, edge: Edge, delay_ns: f64, slew_ns: f64) {
        self.sinks.insert((net, sink, edge.index()), (delay_ns, slew_ns));
    }

    pub fn set_load(&mut self, net: NetId, pi: PiModel<f64>) {
        self.loads.insert(net, pi);
    }

    pub fn sink(&self, net: NetId, sink: usize, edge: Edge) -> Option<(f64, f64)> {
        self.sinks.get(&(net, sink, edge.index())).copied()
    }

    pub fn load(&self, net: NetId) -> Option<PiModel<f64>> {
        self.loads.get(&net).copied()
    }

    /// Deterministic iteration order for serialization.
    pub fn sorted_sinks(&self) -> Vec<(NetId, usize, usize, f64, f64)> {
        let mut v: Vec<_> = self.sinks.iter().map(|(&(n, s, e), &(d, w))| (n, s, e, d, w)).collect();
        v.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
        v
    }

    pub fn sorted_loads(&self) -> Vec<(NetId, PiModel<f64>)> {
        let mut v: Vec<_> = self.loads.iter().map(|(&n, &p)| (n, p)).collect();
        v.sort_by_key(|e| e.0);
        v
    }
}

/// Where wire timing comes from.
#[derive(Clone, Copy)]
pub enum NetParasitics<'a> {
    /// RC trees built from these routes, one per net in net order.
    Routes(&'a [RouteTree]),
    /// Explicit increments; every net and sink must be covered.
    Annotated(&'a Annotations),
}

#[derive(Clone, Copy, Debug, Default)]
pub struct TimingOptions {
    /// Override the design clock period, e.g. for a clock sweep.
    pub clock_period_ns: Option<f64>,
}

/// One net's wire model, resolved at graph build time.
enum WireModel {
    Rc { elmore: Vec<f64>, pi: PiModel<f64> },
    Ann { per_sink: Vec<[(f64, f64); 2]>, pi: PiModel<f64> },
}

impl WireModel {
    fn pi(&self) -> PiModel<f64> {
        match self {
            WireModel::Rc { pi, .. } | WireModel::Ann { pi, .. } => *pi,
        }
    }

    /// (delay, sink slew) across the wire for a given driver slew.
    fn sink_timing(&self, sink: usize, edge: Edge, driver_slew: f64) -> (f64, f64) {
        match self {
            WireModel::Rc { elmore, .. } => {
                let d = elmore[sink];
                (d, driver_slew + wire_slew(driver_slew, d))
            }
            WireModel::Ann { per_sink, .. } => {
                let (d, w) = per_sink[sink][edge.index()];
                (d, driver_slew + w)
            }
        }
    }
}

const UNSET: f64 = f64::NEG_INFINITY;

/// Fully propagated timing state.
pub struct TimingGraph<'a> {
    design: &'a Design,
    lib: &'a CellLibrary,
    pub clock_period_ns: f64,
    /// Pin layout: instance i owns pins `pin_base[i] .. pin_base[i+1]`,
    /// output first, then inputs in slot order.
    pin_base: Vec<u32>,
    arrival: Vec<[f64; 2]>,
    slew: Vec<[f64; 2]>,
    /// Fanin that set the arrival, for path tracing.
    pred: Vec<[Option<(u32, Edge)>; 2]>,
    /// Driven net of each instance, if any.
    drives: Vec<Option<NetId>>,
    wires: Vec<WireModel>,
}

/// Timing state of one pin on one edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathPoint {
    pub pin: PinRef,
    pub edge: Edge,
    pub arrival_ns: f64,
    pub slew_ns: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalPath {
    /// Register whose data pin ends the path.
    pub endpoint: InstId,
    pub slack_ns: f64,
    /// Launch register output first, endpoint data pin last.
    pub points: Vec<PathPoint>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EndpointSlack {
    pub inst: InstId,
    pub slack_ns: f64,
    pub edge: Edge,
}

/// Slack summary over all register data endpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct SlackReport {
    pub clock_period_ns: f64,
    /// Worst edge per endpoint, sorted ascending by slack then instance.
    pub endpoints: Vec<EndpointSlack>,
}

impl SlackReport {
    /// Worst slack, ns. Positive when every endpoint meets timing.
    pub fn ws(&self) -> f64 {
        self.endpoints.first().map_or(f64::INFINITY, |e| e.slack_ns)
    }

    /// Total negative slack, ns (a sum of negative numbers, 0 when clean).
    pub fn tns(&self) -> f64 {
        self.endpoints.iter().map(|e| e.slack_ns.min(0.0)).filter(|s| *s < 0.0).sum()
    }

    pub fn violating(&self) -> usize {
        self.endpoints.iter().filter(|e| e.slack_ns < 0.0).count()
    }
}

impl<'a> TimingGraph<'a> {
    pub fn analyze(
        design: &'a Design,
        lib: &'a CellLibrary,
        parasitics: NetParasitics<'_>,
        opts: TimingOptions,
    ) -> Result<TimingGraph<'a>> {
        let mut pin_base = Vec::with_capacity(design.instances.len() + 1);
        let mut n_pins = 0u32;
        for inst in &design.instances {
            pin_base.push(n_pins);
            let cell = lib.cell(&inst.cell).expect("validated design");
            n_pins += 1 + u32::from(cell.arity());
        }
        pin_base.push(n_pins);

        let mut drives: Vec<Option<NetId>> = vec![None; design.instances.len()];
        for (i, net) in design.nets.iter().enumerate() {
            drives[net.driver.inst.0 as usize] = Some(NetId(i as u32));
        }

        let wires = build_wire_models(design, lib, parasitics)?;
        let mut g = TimingGraph {
            design,
            lib,
            clock_period_ns: opts.clock_period_ns.unwrap_or(design.clock_period_ns),
            pin_base,
            arrival: vec![[UNSET; 2]; n_pins as usize],
            slew: vec![[UNSET; 2]; n_pins as usize],
            pred: vec![[None; 2]; n_pins as usize],
            drives,
            wires,
        };
        g.propagate();
        Ok(g)
    }

    pub fn pin_index(&self, pin: PinRef) -> u32 {
        let offset = match pin.pin {
            PinSlot::Out => 0,
            PinSlot::In(k) => 1 + u32::from(k),
        };
        self.pin_base[pin.inst.0 as usize] + offset
    }

    fn pin_ref(&self, idx: u32) -> PinRef {
        let inst = self.pin_base.partition_point(|&b| b <= idx) - 1;
        let offset = idx - self.pin_base[inst];
        let pin = if offset == 0 { PinSlot::Out } else { PinSlot::In((offset - 1) as u8) };
        PinRef { inst: InstId(inst as u32), pin }
    }

    pub fn arrival(&self, pin: PinRef, edge: Edge) -> Option<f64> {
        let v = self.arrival[self.pin_index(pin) as usize][edge.index()];
        (v != UNSET).then_some(v)
    }

    pub fn slew(&self, pin: PinRef, edge: Edge) -> Option<f64> {
        let v = self.slew[self.pin_index(pin) as usize][edge.index()];
        (v != UNSET).then_some(v)
    }

    /// Slew at a net's driver output.
    pub fn driver_slew(&self, net: NetId, edge: Edge) -> Option<f64> {
        self.slew(self.design.net(net).driver, edge)
    }

    /// Pi load the analysis used for a net's driver.
    pub fn driver_load(&self, net: NetId) -> PiModel<f64> {
        self.wires[net.0 as usize].pi()
    }

    /// Total capacitance hanging off a net's driver.
    pub fn net_c_load(&self, net: NetId) -> f64 {
        self.wires[net.0 as usize].pi().total_cap()
    }

    /// Delay of the stage ending at a sink pin: the driver's cell arc plus
    /// the wire arc, i.e. sink arrival minus the arrival at the driver input
    /// that set the driver's output. A register launch has no such input and
    /// contributes from the clock reference at zero.
    pub fn stage_delay(&self, net: NetId, sink: usize, edge: Edge) -> Option<f64> {
        let n = self.design.net(net);
        let sink_arr = self.arrival(*n.sinks.get(sink)?, edge)?;
        let out = self.pin_index(n.driver) as usize;
        let launch = match self.pred[out][edge.index()] {
            Some((pin, e_in)) => {
                let v = self.arrival[pin as usize][e_in.index()];
                if v == UNSET {
                    return None;
                }
                v
            }
            None => 0.0,
        };
        Some(sink_arr - launch)
    }

    fn propagate(&mut self) {
        // Kahn order over combinational dependencies; register data pins do
        // not gate their instance.
        let n = self.design.instances.len();
        let mut indeg = vec![0u32; n];
        for net in &self.design.nets {
            for s in &net.sinks {
                let cell = self.lib.cell(&self.design.instance(s.inst).cell).expect("validated");
                if !cell.is_register() {
                    indeg[s.inst.0 as usize] += 1;
                }
            }
        }
        let mut queue: std::collections::VecDeque<usize> =
            (0..n).filter(|&i| indeg[i] == 0).collect();
        while let Some(i) = queue.pop_front() {
            let inst = InstId(i as u32);
            self.eval_instance(inst);
            if let Some(net) = self.drives[i] {
                self.push_wire(net);
                for s in &self.design.net(net).sinks {
                    let cell = self.lib.cell(&self.design.instance(s.inst).cell).expect("validated");
                    if !cell.is_register() {
                        indeg[s.inst.0 as usize] -= 1;
                        if indeg[s.inst.0 as usize] == 0 {
                            queue.push_back(s.inst.0 as usize);
                        }
                    }
                }
            }
        }
    }

    /// Computes this instance's output arrival and slew on both edges.
    fn eval_instance(&mut self, inst: InstId) {
        let cell = self.lib.cell(&self.design.instance(inst).cell).expect("validated");
        let Some(net) = self.drives[inst.0 as usize] else { return };
        let pi = self.wires[net.0 as usize].pi();
        let out = self.pin_index(PinRef { inst, pin: PinSlot::Out }) as usize;

        for e_out in Edge::BOTH {
            let mut best: Option<(f64, f64, Option<(u32, Edge)>)> = None;
            let mut consider = |arr_in: f64, tau: f64, from: Option<(u32, Edge)>| {
                let seed = cell.out_slew.get(e_out).lookup(tau, pi.total_cap());
                let ce = ceff(pi, cell.drive_res_kohm, seed.max(0.0));
                let d = cell.delay.get(e_out).lookup(tau, ce);
                let s = cell.out_slew.get(e_out).lookup(tau, ce);
                let cand = (arr_in + d, s, from);
                // Strict comparison: on a tie the earlier (lower) pin wins.
                if best.as_ref().is_none_or(|b| cand.0 > b.0) {
                    best = Some(cand);
                }
            };
            if cell.is_register() {
                // Launch: ideal clock arrives at time zero with fixed slew.
                consider(0.0, CLOCK_SLEW_NS, None);
            } else {
                for k in 0..cell.arity() {
                    let e_in = if cell.kind.inverting() { e_out.flip() } else { e_out };
                    let pin = self.pin_index(PinRef { inst, pin: PinSlot::In(k) });
                    let arr = self.arrival[pin as usize][e_in.index()];
                    let tau = self.slew[pin as usize][e_in.index()];
                    if arr == UNSET {
                        continue;
                    }
                    consider(arr, tau, Some((pin, e_in)));
                }
            }
            if let Some((arr, slew, from)) = best {
                self.arrival[out][e_out.index()] = arr;
                self.slew[out][e_out.index()] = slew;
                self.pred[out][e_out.index()] = from;
            }
        }
    }

    /// Applies a driven net's wire arcs to its sink pins.
    fn push_wire(&mut self, net: NetId) {
        let driver = self.design.net(net).driver;
        let out = self.pin_index(driver);
        for (si, sink) in self.design.net(net).sinks.iter().enumerate() {
            let pin = self.pin_index(*sink) as usize;
            for e in Edge::BOTH {
                let arr = self.arrival[out as usize][e.index()];
                let drv_slew = self.slew[out as usize][e.index()];
                if arr == UNSET {
                    continue;
                }
                let (d, s) = self.wires[net.0 as usize].sink_timing(si, e, drv_slew);
                self.arrival[pin][e.index()] = arr + d;
                self.slew[pin][e.index()] = s;
                self.pred[pin][e.index()] = Some((out, e));
            }
        }
    }

    /// Slacks at every register data pin, worst edge per endpoint.
    pub fn slack_report(&self) -> SlackReport {
        let mut endpoints = Vec::new();
        for (i, inst) in self.design.instances.iter().enumerate() {
            let cell = self.lib.cell(&inst.cell).expect("validated");
            if !cell.is_register() {
                continue;
            }
            let d = self.pin_index(PinRef { inst: InstId(i as u32), pin: PinSlot::In(0) }) as usize;
            let mut worst: Option<(f64, Edge)> = None;
            for e in Edge::BOTH {
                let arr = self.arrival[d][e.index()];
                if arr == UNSET {
                    continue;
                }
                let slack = self.clock_period_ns - arr;
                if worst.is_none_or(|w| slack < w.0) {
                    worst = Some((slack, e));
                }
            }
            if let Some((slack_ns, edge)) = worst {
                endpoints.push(EndpointSlack { inst: InstId(i as u32), slack_ns, edge });
            }
        }
        endpoints.sort_by(|a, b| a.slack_ns.partial_cmp(&b.slack_ns).unwrap().then(a.inst.cmp(&b.inst)));
        SlackReport { clock_period_ns: self.clock_period_ns, endpoints }
    }

    /// One worst path per endpoint whose slack falls below
    /// [`CRITICAL_FRACTION`] of the clock period, worst first.
    pub fn critical_paths(&self) -> Vec<CriticalPath> {
        let threshold = CRITICAL_FRACTION * self.clock_period_ns;
        self.slack_report()
            .endpoints
            .iter()
            .filter(|e| e.slack_ns < threshold)
            .map(|e| {
                let pin = PinRef { inst: e.inst, pin: PinSlot::In(0) };
                CriticalPath { endpoint: e.inst, slack_ns: e.slack_ns, points: self.trace(pin, e.edge) }
            })
            .collect()
    }

    /// Walks predecessors from a pin back to the launching register output.
    fn trace(&self, pin: PinRef, edge: Edge) -> Vec<PathPoint> {
        let mut points = Vec::new();
        let mut cur = Some((self.pin_index(pin), edge));
        while let Some((idx, e)) = cur {
            points.push(PathPoint {
                pin: self.pin_ref(idx),
                edge: e,
                arrival_ns: self.arrival[idx as usize][e.index()],
                slew_ns: self.slew[idx as usize][e.index()],
            });
            cur = self.pred[idx as usize][e.index()];
        }
        points.reverse();
        points
    }

    /// Per-sink wire increments and per-net loads equivalent to this run.
    /// Replaying them through [`NetParasitics::Annotated`] reproduces the
    /// same arrivals and slews exactly.
    pub fn extract_annotations(&self) -> Annotations {
        let mut ann = Annotations::new();
        for (i, net) in self.design.nets.iter().enumerate() {
            let id = NetId(i as u32);
            ann.set_load(id, self.wires[i].pi());
            let out = self.pin_index(net.driver) as usize;
            for (si, _) in net.sinks.iter().enumerate() {
                for e in Edge::BOTH {
                    let drv = self.slew[out][e.index()];
                    let drv = if drv == UNSET { 0.0 } else { drv };
                    let (d, s) = self.wires[i].sink_timing(si, e, drv);
                    ann.set_sink(id, si, e, d, s - drv);
                }
            }
        }
        ann
    }
}

fn build_wire_models(
    design: &Design,
    lib: &CellLibrary,
    parasitics: NetParasitics<'_>,
) -> Result<Vec<WireModel>> {
    match parasitics {
        NetParasitics::Routes(trees) => {
            if trees.len() != design.nets.len() {
                return Err(Error::Other(format!(
                    "{} routes for {} nets",
                    trees.len(),
                    design.nets.len()
                )));
            }
            Ok(trees
                .iter()
                .map(|t| {
                    let rc = build_rc_tree(design, lib, t);
                    let elmore = rc.elmore_all();
                    WireModel::Rc {
                        elmore: rc.sink_nodes.iter().map(|&n| elmore[n]).collect(),
                        pi: reduce_to_pi(rc.admittance_moments()),
                    }
                })
                .collect())
        }
        NetParasitics::Annotated(ann) => design
            .nets
            .iter()
            .enumerate()
            .map(|(i, net)| {
                let id = NetId(i as u32);
                let missing =
                    || Error::Other(format!("net {} lacks annotations", net.name));
                let pi = ann.load(id).ok_or_else(missing)?;
                let per_sink = (0..net.sinks.len())
                    .map(|si| {
                        let r = ann.sink(id, si, Edge::Rise).ok_or_else(missing)?;
                        let f = ann.sink(id, si, Edge::Fall).ok_or_else(missing)?;
                        Ok([r, f])
                    })
                    .collect::<Result<_>>()?;
                Ok(WireModel::Ann { per_sink, pi })
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::generate::{gen_design, GenConfig};
    use crate::design::library::{cell_name, CellKind, CellSize};
    use crate::design::{Instance, Net};
    use crate::geom::{Point, Rect};
    use crate::route::{global_route, RouteConfig};

    fn micro_design() -> Design {
        // r0 (DFF) -> u1 (BUF) -> r2 (DFF), all in one row.
        let dff = cell_name(CellKind::Dff, CellSize::X1);
        let buf = cell_name(CellKind::Buf, CellSize::X1);
        Design {
            name: "micro".into(),
            clock_period_ns: 0.5,
            gcell_um: 10.0,
            die: Rect::new(0.0, 0.0, 60.0, 20.0),
            layers: crate::design::generate::default_layers(),
            macros: vec![],
            instances: vec![
                Instance { name: "r0".into(), cell: dff.clone(), loc: Point::new(2.0, 2.0) },
                Instance { name: "u1".into(), cell: buf, loc: Point::new(22.0, 2.0) },
                Instance { name: "r2".into(), cell: dff, loc: Point::new(42.0, 2.0) },
            ],
            nets: vec![
                Net {
                    name: "n0".into(),
                    driver: PinRef { inst: InstId(0), pin: PinSlot::Out },
                    sinks: vec![PinRef { inst: InstId(1), pin: PinSlot::In(0) }],
                },
                Net {
                    name: "n1".into(),
                    driver: PinRef { inst: InstId(1), pin: PinSlot::Out },
                    sinks: vec![PinRef { inst: InstId(2), pin: PinSlot::In(0) }],
                },
            ],
        }
    }

    #[test]
    fn micro_chain_matches_hand_computation() {
        let design = micro_design();
        let lib = CellLibrary::standard();
        let gr = global_route(&design, &lib, &RouteConfig::default());
        let g = TimingGraph::analyze(&design, &lib, NetParasitics::Routes(&gr.trees), TimingOptions::default())
            .unwrap();

        // Wire n0 runs on the base horizontal layer between pin rows.
        // Independent arithmetic: closed-form cell model (the tables are
        // exact for it) plus Elmore and the square-root slew rule.
        let m1 = &design.layers[0];
        let buf = lib.cell(&cell_name(CellKind::Buf, CellSize::X1)).unwrap();
        let dff = lib.cell(&cell_name(CellKind::Dff, CellSize::X1)).unwrap();
        let pins0 = design.net_pin_points(&lib, design.net(NetId(0)));
        let len0 = pins0[0].manhattan(pins0[1]);
        let wire_c0 = len0 * m1.c_per_um;
        let wire_r0 = len0 * m1.r_per_um;

        // Launch arc of r0 driving n0.
        let total0 = wire_c0 + buf.input_cap_pf;
        let rc0 = crate::timing::build_rc_tree(&design, &lib, &gr.trees[0]);
        assert!((rc0.total_cap() - total0).abs() < 1e-12);
        let pi0 = reduce_to_pi(rc0.admittance_moments());
        let dff_slew = |tau: f64, c: f64, e: Edge| {
            let v = (0.008 + 3.0 * c) / 1.0 + 0.08 * tau;
            if e == Edge::Fall { v * 1.1 } else { v }
        };
        let dff_delay = |tau: f64, c: f64, e: Edge| {
            let v = (0.030 + 2.0 * c) / 1.0 + 0.05 * tau;
            if e == Edge::Fall { v * 1.1 } else { v }
        };
        let seed = dff_slew(CLOCK_SLEW_NS, pi0.total_cap(), Edge::Rise);
        let ce0 = ceff(pi0, dff.drive_res_kohm, seed);
        let launch = dff_delay(CLOCK_SLEW_NS, ce0, Edge::Rise);
        let q0 = PinRef { inst: InstId(0), pin: PinSlot::Out };
        let got = g.arrival(q0, Edge::Rise).unwrap();
        assert!((got - launch).abs() < 1e-12, "launch {got} vs {launch}");

        // Wire n0: Elmore with half-cap split and the sink load.
        let elm0 = wire_r0 * (wire_c0 / 2.0 + buf.input_cap_pf);
        let a_in = g.arrival(PinRef { inst: InstId(1), pin: PinSlot::In(0) }, Edge::Rise).unwrap();
        assert!((a_in - (launch + elm0)).abs() < 1e-12);
        let s_q0 = dff_slew(CLOCK_SLEW_NS, ce0, Edge::Rise);
        let s_in = g.slew(PinRef { inst: InstId(1), pin: PinSlot::In(0) }, Edge::Rise).unwrap();
        let expect_slew = (s_q0 * s_q0 + (crate::timing::LN9 * elm0).powi(2)).sqrt();
        assert!((s_in - expect_slew).abs() < 1e-12);

        // Endpoint slack: clock minus arrival at r2's data pin, worst edge.
        // r0's data pin is undriven in this fragment, so r2 is the only
        // endpoint with an arrival.
        let report = g.slack_report();
        assert_eq!(report.endpoints.len(), 1);
        let ep = &report.endpoints[0];
        assert_eq!(ep.inst, InstId(2));
        let d2 = g.arrival(PinRef { inst: InstId(2), pin: PinSlot::In(0) }, Edge::Fall).unwrap();
        // Fall is the worst edge: every fall arc is 10% slower.
        assert_eq!(ep.edge, Edge::Fall);
        assert!((ep.slack_ns - (0.5 - d2)).abs() < 1e-12);
    }

    #[test]
    fn fixed_point_sweep_agrees_with_kahn_propagation() {
        // Order-independent oracle: sweep all instances until arrivals stop
        // changing, using the same arc arithmetic through public kernels.
        let lib = CellLibrary::standard();
        let design = gen_design(&GenConfig::new("sta", 17, 120, 0.5), &lib).unwrap();
        let gr = global_route(&design, &lib, &RouteConfig::default());
        let g = TimingGraph::analyze(&design, &lib, NetParasitics::Routes(&gr.trees), TimingOptions::default())
            .unwrap();

        // Reference state per pin per edge.
        let mut arr: HashMap<(PinRef, usize), f64> = HashMap::new();
        let mut slw: HashMap<(PinRef, usize), f64> = HashMap::new();
        let rcs: Vec<_> = gr.trees.iter().map(|t| build_rc_tree(&design, &lib, t)).collect();
        let pis: Vec<PiModel<f64>> = rcs.iter().map(|rc| reduce_to_pi(rc.admittance_moments())).collect();
        let drives: HashMap<InstId, NetId> = design
            .nets
            .iter()
            .enumerate()
            .map(|(i, n)| (n.driver.inst, NetId(i as u32)))
            .collect();
        for _ in 0..design.instances.len() + 2 {
            let mut changed = false;
            for (i, inst) in design.instances.iter().enumerate() {
                let cell = lib.cell(&inst.cell).unwrap();
                let Some(&net) = drives.get(&InstId(i as u32)) else { continue };
                let pi = pis[net.0 as usize];
                let out = PinRef { inst: InstId(i as u32), pin: PinSlot::Out };
                for e_out in Edge::BOTH {
                    let mut best: Option<(f64, f64)> = None;
                    let mut consider = |a: f64, tau: f64| {
                        let seed = cell.out_slew.get(e_out).lookup(tau, pi.total_cap()).max(0.0);
                        let ce = ceff(pi, cell.drive_res_kohm, seed);
                        let d = cell.delay.get(e_out).lookup(tau, ce);
                        let s = cell.out_slew.get(e_out).lookup(tau, ce);
                        if best.is_none_or(|b| a + d > b.0) {
                            best = Some((a + d, s));
                        }
                    };
                    if cell.is_register() {
                        consider(0.0, CLOCK_SLEW_NS);
                    } else {
                        for k in 0..cell.arity() {
                            let e_in = if cell.kind.inverting() { e_out.flip() } else { e_out };
                            let p = PinRef { inst: InstId(i as u32), pin: PinSlot::In(k) };
                            if let Some(&a) = arr.get(&(p, e_in.index())) {
                                consider(a, slw[&(p, e_in.index())]);
                            }
                        }
                    }
                    let Some((a, s)) = best else { continue };
                    if arr.get(&(out, e_out.index())) != Some(&a) {
                        changed = true;
                    }
                    arr.insert((out, e_out.index()), a);
                    slw.insert((out, e_out.index()), s);
                    // Push the wire.
                    let rc = &rcs[net.0 as usize];
                    let elmore = rc.elmore_all();
                    for (si, sink) in design.net(net).sinks.iter().enumerate() {
                        let d = elmore[rc.sink_nodes[si]];
                        arr.insert((*sink, e_out.index()), a + d);
                        slw.insert((*sink, e_out.index()), s + wire_slew(s, d));
                    }
                }
            }
            if !changed {
                break;
            }
        }
        for ((pin, e), &a) in &arr {
            let edge = Edge::BOTH[*e];
            let got = g.arrival(*pin, edge).unwrap();
            assert!((got - a).abs() < 1e-12, "{pin:?} {edge:?}: {got} vs {a}");
        }
        // Every pin the graph timed exists in the oracle too.
        for (i, inst) in design.instances.iter().enumerate() {
            let cell = lib.cell(&inst.cell).unwrap();
            for k in 0..cell.arity() {
                let p = PinRef { inst: InstId(i as u32), pin: PinSlot::In(k) };
                for e in Edge::BOTH {
                    assert_eq!(g.arrival(p, e).is_some(), arr.contains_key(&(p, e.index())));
                }
            }
        }
    }

    #[test]
    fn annotated_replay_is_bit_identical() {
        let lib = CellLibrary::standard();
        let design = gen_design(&GenConfig::new("ann", 23, 150, 0.55), &lib).unwrap();
        let gr = global_route(&design, &lib, &RouteConfig::default());
        let truth =
            TimingGraph::analyze(&design, &lib, NetParasitics::Routes(&gr.trees), TimingOptions::default())
                .unwrap();
        let ann = truth.extract_annotations();
        let replay =
            TimingGraph::analyze(&design, &lib, NetParasitics::Annotated(&ann), TimingOptions::default())
                .unwrap();
        assert_eq!(truth.arrival, replay.arrival);
        assert_eq!(truth.slew, replay.slew);
        assert_eq!(truth.slack_report(), replay.slack_report());
    }

    #[test]
    fn stage_delay_spans_driver_input_to_sink() {
        let design = micro_design();
        let lib = CellLibrary::standard();
        let gr = global_route(&design, &lib, &RouteConfig::default());
        let g = TimingGraph::analyze(&design, &lib, NetParasitics::Routes(&gr.trees), TimingOptions::default())
            .unwrap();
        let u1_in = PinRef { inst: InstId(1), pin: PinSlot::In(0) };
        let r2_in = PinRef { inst: InstId(2), pin: PinSlot::In(0) };
        for e in Edge::BOTH {
            // Register launch: the whole clock-to-sink span counts.
            let s0 = g.stage_delay(NetId(0), 0, e).unwrap();
            assert!((s0 - g.arrival(u1_in, e).unwrap()).abs() < 1e-12);
            // Combinational stage: measured from the buffer's input pin. The
            // buffer is non-inverting, so the launching edge matches.
            let s1 = g.stage_delay(NetId(1), 0, e).unwrap();
            let expect = g.arrival(r2_in, e).unwrap() - g.arrival(u1_in, e).unwrap();
            assert!((s1 - expect).abs() < 1e-12, "{s1} vs {expect}");
            assert!(s1 > 0.0);
        }
        assert!(g.stage_delay(NetId(1), 5, Edge::Rise).is_none());
    }

    #[test]
    fn critical_paths_trace_register_to_register() {
        let lib = CellLibrary::standard();
        let design = gen_design(&GenConfig::new("cp", 29, 200, 0.5), &lib).unwrap();
        let gr = global_route(&design, &lib, &RouteConfig::default());
        // A clock of zero makes every endpoint critical.
        let g = TimingGraph::analyze(
            &design,
            &lib,
            NetParasitics::Routes(&gr.trees),
            TimingOptions { clock_period_ns: Some(0.0) },
        )
        .unwrap();
        let report = g.slack_report();
        let paths = g.critical_paths();
        assert_eq!(paths.len(), report.endpoints.len());
        assert!(paths.windows(2).all(|w| w[0].slack_ns <= w[1].slack_ns));
        for p in &paths {
            let first = p.points.first().unwrap();
            let last = p.points.last().unwrap();
            let launch = lib.cell(&design.instance(first.pin.inst).cell).unwrap();
            assert!(launch.is_register() && first.pin.pin == PinSlot::Out);
            assert_eq!(last.pin, PinRef { inst: p.endpoint, pin: PinSlot::In(0) });
            assert!(p.points.windows(2).all(|w| w[0].arrival_ns <= w[1].arrival_ns));
            assert!((p.slack_ns - (0.0 - last.arrival_ns)).abs() < 1e-12);
        }
    }

    #[test]
    fn tns_sums_only_negative_slack() {
        let report = SlackReport {
            clock_period_ns: 1.0,
            endpoints: vec![
                EndpointSlack { inst: InstId(0), slack_ns: -0.2, edge: Edge::Rise },
                EndpointSlack { inst: InstId(1), slack_ns: -0.05, edge: Edge::Fall },
                EndpointSlack { inst: InstId(2), slack_ns: 0.3, edge: Edge::Rise },
            ],
        };
        assert!((report.ws() + 0.2).abs() < 1e-15);
        assert!((report.tns() + 0.25).abs() < 1e-15);
        assert_eq!(report.violating(), 2);
    }
}
