//! End-to-end drive: generate, route, time, learn, annotate, replay.

use wirecast::design::library::CellLibrary;
use wirecast::design::{gen_design, load_design, save_design, GenConfig, MacroSpec};
use wirecast::ml::{load_dataset, sink_dataset, Dataset, GbdtParams, ModelBundle, LOAD_TARGETS, SINK_TARGETS};
use wirecast::opt::{build_annotations, Predictor};
use wirecast::route::{
    count_congested, detailed_route_oracle, global_route, load_congestion, load_routes,
    save_congestion, save_routes, DrConfig, RouteConfig,
};
use wirecast::timing::{NetParasitics, TimingGraph, TimingOptions};

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join("wirecast-pipeline");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn full_pipeline_learns_and_replays() {
    let lib = CellLibrary::standard();
    let cfg = GenConfig::new("pipe", 11, 500, 0.6).with_macros(MacroSpec::default());
    let design = gen_design(&cfg, &lib).unwrap();

    // Persistence of the design itself.
    save_design(tmp("pipe.json"), &design).unwrap();
    assert_eq!(load_design(tmp("pipe.json"), &lib).unwrap(), design);

    // Global route, then the detailed-route oracle over the same netlist.
    let gr = global_route(&design, &lib, &RouteConfig::default());
    save_routes(tmp("gr.json"), &design, &gr.trees).unwrap();
    assert_eq!(load_routes(tmp("gr.json"), &design, &lib).unwrap(), gr.trees);
    save_congestion(tmp("gr.csv"), &gr.congestion).unwrap();
    assert_eq!(load_congestion(tmp("gr.csv"), &design).unwrap(), gr.congestion);

    let dr = detailed_route_oracle(&design, &lib, &gr, &DrConfig::default()).unwrap();
    assert_eq!(dr.trees.len(), design.nets.len());
    // The oracle obeys capacity pressure at least as much as one-shot GR.
    assert!(count_congested(&dr.congestion, 1.0) <= count_congested(&gr.congestion, 1.0));

    // Timing at the global-route stage and against the oracle's routes.
    let sta = TimingGraph::analyze(&design, &lib, NetParasitics::Routes(&gr.trees), TimingOptions::default())
        .unwrap();
    let truth_sta =
        TimingGraph::analyze(&design, &lib, NetParasitics::Routes(&dr.trees), TimingOptions::default())
            .unwrap();
    let truth = truth_sta.extract_annotations();

    // Labeled datasets round-trip through CSV.
    let sinks = sink_dataset(&design, &lib, &gr, &sta, Some(&truth), 0.6);
    let loads = load_dataset(&design, &lib, &gr, &sta, Some(&truth), 0.6);
    assert!(sinks.len() >= design.nets.len());
    sinks.save_csv(tmp("sinks.csv")).unwrap();
    assert_eq!(Dataset::load_csv(tmp("sinks.csv"), &sinks.schema, &SINK_TARGETS).unwrap(), sinks);
    loads.save_csv(tmp("loads.csv")).unwrap();
    assert_eq!(Dataset::load_csv(tmp("loads.csv"), &loads.schema, &LOAD_TARGETS).unwrap(), loads);

    // A small bundle is enough to exercise train, save, and predict.
    let params = GbdtParams { n_trees: 40, ..GbdtParams::default() };
    let bundle = ModelBundle::train(&sinks, &loads, &params).unwrap();
    let dir = tmp("models");
    std::fs::create_dir_all(&dir).unwrap();
    bundle.save_dir(&dir).unwrap();
    assert_eq!(ModelBundle::load_dir(&dir).unwrap(), bundle);

    // Every predictor yields a complete annotation set the timer accepts.
    for predictor in [Predictor::GrEstimates, Predictor::Models(&bundle), Predictor::Truth(&truth)] {
        let ann = build_annotations(&design, &lib, &gr, &sta, predictor).unwrap();
        let replay =
            TimingGraph::analyze(&design, &lib, NetParasitics::Annotated(&ann), TimingOptions::default())
                .unwrap();
        let report = replay.slack_report();
        assert!(report.ws().is_finite());
        assert!(report.tns() <= 0.0);
        if matches!(predictor, Predictor::Truth(_)) {
            assert_eq!(report, truth_sta.slack_report());
        }
    }
}
