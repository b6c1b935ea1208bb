//! Feature extraction at the global-route stage.
//!
//! Two row families, both computable before detailed routing:
//!
//! - sink rows, one per (net, sink, edge): net size and shape, driver slew
//!   from the global-route timing run, congestion statistics over the net
//!   bounding box, the source-to-sink length/resistance/capacitance along
//!   the global route, and the macro coverage around the source-sink span.
//!   Targets: oracle wire delay and slew increment.
//! - load rows, one per net: net shape, congestion, macro coverage, and the
//!   global-route pi load. Targets: oracle pi parameters and total load.
//!
//! The macro coverage window is the source-sink (or net) bounding box grown
//! to twice its size about its center, clipped to the die.

use crate::design::library::CellLibrary;
use crate::design::{BlockageGrid, Design, NetId};
use crate::geom::{hpwl, Rect};
use crate::ml::dataset::{Dataset, RowMeta};
use crate::route::{congestion_stats, GlobalRoutes};
use crate::timing::{Annotations, Edge, TimingGraph};

pub const SINK_SCHEMA: [&str; 10] = [
    "hpwl_um",
    "n_sinks",
    "driver_slew_ns",
    "cong_mean",
    "cong_std",
    "is_fall",
    "path_length_um",
    "path_r_kohm",
    "path_c_pf",
    "macro_frac",
];
pub const SINK_TARGETS: [&str; 2] = ["wire_delay_ns", "wire_slew_ns"];

pub const LOAD_SCHEMA: [&str; 9] = [
    "hpwl_um",
    "n_sinks",
    "cong_mean",
    "cong_std",
    "macro_frac",
    "gr_r_kohm",
    "gr_c1_pf",
    "gr_c2_pf",
    "gr_c_load_pf",
];
pub const LOAD_TARGETS: [&str; 4] = ["pi_r_kohm", "pi_c1_pf", "pi_c2_pf", "c_load_pf"];

/// Growth factor of the macro coverage window.
const MACRO_WINDOW_EXPAND: f64 = 2.0;

fn schema_vec(s: &[&str]) -> Vec<String> {
    s.iter().map(|x| x.to_string()).collect()
}

/// Mean blocked fraction over a window grown about the box center and
/// clipped to the die.
pub fn macro_blockage_feature(blockage: &BlockageGrid, design: &Design, span: &Rect) -> f64 {
    let window = span.expand(MACRO_WINDOW_EXPAND).clip(&design.die);
    blockage.mean_over(&window)
}

/// Per-sink-per-edge rows; `labels` fills targets (zeros when absent).
/// `utilization` is provenance only, never a feature.
pub fn sink_dataset(
    design: &Design,
    lib: &CellLibrary,
    gr: &GlobalRoutes,
    sta: &TimingGraph<'_>,
    labels: Option<&Annotations>,
    utilization: f64,
) -> Dataset {
    let all: Vec<NetId> = design.net_ids().collect();
    sink_dataset_for(design, lib, gr, sta, labels, utilization, &all)
}

/// [`sink_dataset`] restricted to `nets`, for incremental re-inference.
pub fn sink_dataset_for(
    design: &Design,
    lib: &CellLibrary,
    gr: &GlobalRoutes,
    sta: &TimingGraph<'_>,
    labels: Option<&Annotations>,
    utilization: f64,
    nets: &[NetId],
) -> Dataset {
    let mut out = Dataset::new(schema_vec(&SINK_SCHEMA), &SINK_TARGETS);
    let blockage = BlockageGrid::build(design);
    for &id in nets {
        let net = design.net(id);
        let pins = design.net_pin_points(lib, net);
        let bbox = Rect::bounding(&pins);
        let (cong_mean, cong_std) = congestion_stats(&gr.congestion, &bbox);
        let net_hpwl = hpwl(&pins);
        let tree = &gr.trees[id.0 as usize];
        for (si, _) in net.sinks.iter().enumerate() {
            let path = tree.path_to_sink(si);
            let mut length = 0.0;
            let mut path_r = 0.0;
            let mut path_c = 0.0;
            for seg in path {
                let len = tree.seg_length(seg);
                let layer = &design.layers[seg.layer as usize];
                length += len;
                path_r += len * layer.r_per_um;
                path_c += len * layer.c_per_um;
            }
            let span = Rect::bounding(&[pins[0], pins[si + 1]]);
            let macro_frac = macro_blockage_feature(&blockage, design, &span);
            for edge in Edge::BOTH {
                let driver_slew = sta.driver_slew(id, edge).unwrap_or(0.0);
                let (delay, slew) = labels.and_then(|a| a.sink(id, si, edge)).unwrap_or((0.0, 0.0));
                out.push(
                    RowMeta {
                        design: design.name.clone(),
                        utilization,
                        clock_ns: design.clock_period_ns,
                        net: net.name.clone(),
                        sink: Some(si as u32),
                        edge: Some(edge),
                    },
                    vec![
                        net_hpwl,
                        net.sinks.len() as f64,
                        driver_slew,
                        cong_mean,
                        cong_std,
                        edge.as_flag(),
                        length,
                        path_r,
                        path_c,
                        macro_frac,
                    ],
                    &[delay, slew],
                );
            }
        }
    }
    out
}

/// Per-net rows describing the driver load.
/// `utilization` is provenance only, never a feature.
pub fn load_dataset(
    design: &Design,
    lib: &CellLibrary,
    gr: &GlobalRoutes,
    sta: &TimingGraph<'_>,
    labels: Option<&Annotations>,
    utilization: f64,
) -> Dataset {
    let all: Vec<NetId> = design.net_ids().collect();
    load_dataset_for(design, lib, gr, sta, labels, utilization, &all)
}

/// [`load_dataset`] restricted to `nets`, for incremental re-inference.
pub fn load_dataset_for(
    design: &Design,
    lib: &CellLibrary,
    gr: &GlobalRoutes,
    sta: &TimingGraph<'_>,
    labels: Option<&Annotations>,
    utilization: f64,
    nets: &[NetId],
) -> Dataset {
    let mut out = Dataset::new(schema_vec(&LOAD_SCHEMA), &LOAD_TARGETS);
    let blockage = BlockageGrid::build(design);
    for &id in nets {
        let net = design.net(id);
        let pins = design.net_pin_points(lib, net);
        let bbox = Rect::bounding(&pins);
        let (cong_mean, cong_std) = congestion_stats(&gr.congestion, &bbox);
        let macro_frac = macro_blockage_feature(&blockage, design, &bbox);
        let gr_pi = sta.driver_load(id);
        let truth = labels.and_then(|a| a.load(id));
        let targets = truth.map_or([0.0; 4], |p| [p.r, p.c1, p.c2, p.total_cap()]);
        out.push(
            RowMeta {
                design: design.name.clone(),
                utilization,
                clock_ns: design.clock_period_ns,
                net: net.name.clone(),
                sink: None,
                edge: None,
            },
            vec![
                hpwl(&pins),
                net.sinks.len() as f64,
                cong_mean,
                cong_std,
                macro_frac,
                gr_pi.r,
                gr_pi.c1,
                gr_pi.c2,
                gr_pi.total_cap(),
            ],
            &targets,
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::generate::{gen_design, GenConfig, MacroSpec};
    use crate::route::{detailed_route_oracle, global_route, DrConfig, RouteConfig};
    use crate::timing::{NetParasitics, TimingOptions};

    struct World {
        design: Design,
        gr: GlobalRoutes,
    }

    fn world() -> (CellLibrary, World) {
        let lib = CellLibrary::standard();
        // Enough cells that the die fits the default three haloed macros.
        let cfg = GenConfig::new("feat", 51, 400, 0.5).with_macros(MacroSpec::default());
        let design = gen_design(&cfg, &lib).unwrap();
        let gr = global_route(&design, &lib, &RouteConfig::default());
        (lib, World { design, gr })
    }

    #[test]
    fn sink_rows_cover_every_sink_and_edge() {
        let (lib, w) = world();
        let sta = TimingGraph::analyze(&w.design, &lib, NetParasitics::Routes(&w.gr.trees), TimingOptions::default())
            .unwrap();
        let ds = sink_dataset(&w.design, &lib, &w.gr, &sta, None, 0.6);
        let expect: usize = w.design.nets.iter().map(|n| 2 * n.sinks.len()).sum();
        assert_eq!(ds.len(), expect);
        let fall_flags: Vec<f64> = ds.rows.iter().map(|r| r[5]).collect();
        assert!(fall_flags.iter().filter(|&&f| f == 1.0).count() == expect / 2);
        // Path resistance over the route is positive whenever length is.
        for row in &ds.rows {
            assert!(row[0] >= 0.0);
            if row[6] > 0.0 {
                assert!(row[7] > 0.0 && row[8] > 0.0);
            }
        }
    }

    #[test]
    fn labels_join_truth_annotations_exactly() {
        let (lib, w) = world();
        let sta = TimingGraph::analyze(&w.design, &lib, NetParasitics::Routes(&w.gr.trees), TimingOptions::default())
            .unwrap();
        let dr = detailed_route_oracle(&w.design, &lib, &w.gr, &DrConfig::default()).unwrap();
        let truth_sta =
            TimingGraph::analyze(&w.design, &lib, NetParasitics::Routes(&dr.trees), TimingOptions::default())
                .unwrap();
        let truth = truth_sta.extract_annotations();
        let ds = sink_dataset(&w.design, &lib, &w.gr, &sta, Some(&truth), 0.6);
        for (i, m) in ds.meta.iter().enumerate() {
            let id = NetId(
                w.design.nets.iter().position(|n| n.name == m.net).unwrap() as u32,
            );
            let (d, s) = truth.sink(id, m.sink.unwrap() as usize, m.edge.unwrap()).unwrap();
            assert_eq!(ds.targets[0].1[i], d);
            assert_eq!(ds.targets[1].1[i], s);
        }
        let loads = load_dataset(&w.design, &lib, &w.gr, &sta, Some(&truth), 0.6);
        assert_eq!(loads.len(), w.design.nets.len());
        for (i, m) in loads.meta.iter().enumerate() {
            let id = NetId(
                w.design.nets.iter().position(|n| n.name == m.net).unwrap() as u32,
            );
            let pi = truth.load(id).unwrap();
            assert_eq!(loads.targets[0].1[i], pi.r);
            assert_eq!(loads.targets[3].1[i], pi.total_cap());
            // Global-route pi is a feature, oracle pi the target.
            assert_eq!(loads.rows[i][5], sta.driver_load(id).r);
        }
    }

    #[test]
    fn macro_window_expands_and_clips() {
        let (_lib, w) = world();
        let blockage = BlockageGrid::build(&w.design);
        // A window over the whole die sees exactly the blocked fraction.
        let all = macro_blockage_feature(&blockage, &w.design, &w.design.die);
        let macro_area: f64 = w.design.macros.iter().map(|m| m.rect.area()).sum();
        assert!((all - macro_area / w.design.die.area()).abs() < 0.02, "{all}");
        // A window centered on a macro sees more blockage than the average.
        let m0 = &w.design.macros[0].rect;
        let centered = macro_blockage_feature(&blockage, &w.design, m0);
        assert!(centered > all);
    }
}
