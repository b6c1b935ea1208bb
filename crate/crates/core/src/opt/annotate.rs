//! Wire-timing annotations from one of three sources: global-route
//! estimates as-is, trained models over global-route features, or exact
//! values handed in (e.g. extracted from detail-routed timing).
//!
//! Optimization never re-routes to evaluate a move; it re-times against
//! these annotations, so the predictor choice is the only difference
//! between the flow variants.

use std::collections::HashMap;

use crate::design::library::CellLibrary;
use crate::design::{Design, NetId};
use crate::error::{Error, Result};
use crate::ml::{load_dataset_for, sink_dataset_for, ModelBundle};
use crate::route::global::GlobalRoutes;
use crate::timing::{Annotations, PiModel, TimingGraph};

/// Source of wire delays, slews, and driver loads for optimization.
#[derive(Clone, Copy)]
pub enum Predictor<'a> {
    /// Global-route parasitics, unchanged.
    GrEstimates,
    /// Model predictions over global-route features.
    Models(&'a ModelBundle),
    /// Annotations taken as given.
    Truth(&'a Annotations),
}

impl Predictor<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Predictor::GrEstimates => "traditional",
            Predictor::Models(_) => "ml",
            Predictor::Truth(_) => "ground_truth",
        }
    }
}

/// Annotations for `design` under the chosen predictor. `gr_sta` must be
/// the timing graph analyzed against `gr`'s routes.
pub fn build_annotations(
    design: &Design,
    lib: &CellLibrary,
    gr: &GlobalRoutes,
    gr_sta: &TimingGraph<'_>,
    predictor: Predictor<'_>,
) -> Result<Annotations> {
    match predictor {
        Predictor::GrEstimates => Ok(gr_sta.extract_annotations()),
        Predictor::Truth(ann) => Ok(ann.clone()),
        Predictor::Models(bundle) => predict_annotations(design, lib, gr, gr_sta, bundle),
    }
}

fn predict_annotations(
    design: &Design,
    lib: &CellLibrary,
    gr: &GlobalRoutes,
    gr_sta: &TimingGraph<'_>,
    bundle: &ModelBundle,
) -> Result<Annotations> {
    let mut ann = Annotations::new();
    let all: Vec<NetId> = design.net_ids().collect();
    predict_into(design, lib, gr, gr_sta, bundle, &all, &mut ann)?;
    Ok(ann)
}

/// Predicts wire annotations for just `nets` and overwrites their entries
/// in `ann`, leaving every other net untouched. This is the incremental
/// path optimization uses after a netlist edit.
pub(crate) fn predict_into(
    design: &Design,
    lib: &CellLibrary,
    gr: &GlobalRoutes,
    gr_sta: &TimingGraph<'_>,
    bundle: &ModelBundle,
    nets: &[NetId],
    ann: &mut Annotations,
) -> Result<()> {
    let by_name: HashMap<&str, NetId> = design
        .nets
        .iter()
        .enumerate()
        .map(|(i, n)| (n.name.as_str(), NetId(i as u32)))
        .collect();
    let net_id = |name: &str| -> Result<NetId> {
        by_name
            .get(name)
            .copied()
            .ok_or_else(|| Error::Other(format!("feature row for unknown net {name}")))
    };

    // Provenance is irrelevant for inference; only the feature rows feed
    // the models.
    let sinks = sink_dataset_for(design, lib, gr, gr_sta, None, 0.0, nets);
    let loads = load_dataset_for(design, lib, gr, gr_sta, None, 0.0, nets);
    let delay = bundle.wire_delay.predict(&sinks.schema, &sinks.rows)?;
    let slew = bundle.wire_slew.predict(&sinks.schema, &sinks.rows)?;
    let pi_r = bundle.pi_r.predict(&loads.schema, &loads.rows)?;
    let pi_c1 = bundle.pi_c1.predict(&loads.schema, &loads.rows)?;
    let pi_c2 = bundle.pi_c2.predict(&loads.schema, &loads.rows)?;
    let c_load = bundle.c_load.predict(&loads.schema, &loads.rows)?;

    for (i, m) in loads.meta.iter().enumerate() {
        let id = net_id(&m.net)?;
        // Regression output is unconstrained; a non-physical pi collapses
        // to the predicted total load as a lumped cap.
        let pi = PiModel { r: pi_r[i], c1: pi_c1[i], c2: pi_c2[i] };
        let pi = if pi.r > 0.0 && pi.c1 > 0.0 && pi.c2 >= 0.0 {
            pi
        } else {
            PiModel::lumped(c_load[i].max(0.0))
        };
        ann.set_load(id, pi);
    }
    for (i, m) in sinks.meta.iter().enumerate() {
        let id = net_id(&m.net)?;
        let sink = m.sink.ok_or_else(|| Error::Other("sink row lacks sink index".into()))? as usize;
        let edge = m.edge.ok_or_else(|| Error::Other("sink row lacks edge".into()))?;
        // Wire delay and the slew increment are non-negative by
        // construction of the labels; clamp model output to match.
        ann.set_sink(id, sink, edge, delay[i].max(0.0), slew[i].max(0.0));
    }
    Ok(())
}
