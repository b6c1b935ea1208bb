//! The six per-target models trained together: per-sink wire delay and slew,
//! and the per-net pi load (R, C1, C2) plus total load capacitance.

use std::path::Path;

use crate::error::Result;
use crate::ml::dataset::Dataset;
use crate::ml::features::{LOAD_TARGETS, SINK_TARGETS};
use crate::ml::gbdt::{GbdtModel, GbdtParams};

#[derive(Clone, Debug, PartialEq)]
pub struct ModelBundle {
    pub wire_delay: GbdtModel<f64>,
    pub wire_slew: GbdtModel<f64>,
    pub pi_r: GbdtModel<f64>,
    pub pi_c1: GbdtModel<f64>,
    pub pi_c2: GbdtModel<f64>,
    pub c_load: GbdtModel<f64>,
}

const FILES: [&str; 6] = ["wire_delay", "wire_slew", "pi_r", "pi_c1", "pi_c2", "c_load"];

impl ModelBundle {
    /// Trains all six targets with the same boosting parameters.
    pub fn train(sinks: &Dataset, loads: &Dataset, params: &GbdtParams) -> Result<ModelBundle> {
        let fit_one = |ds: &Dataset, target: &str| -> Result<GbdtModel<f64>> {
            let (model, _) = GbdtModel::fit(&ds.columns(), ds.target(target)?, &ds.schema, params)?;
            Ok(model)
        };
        Ok(ModelBundle {
            wire_delay: fit_one(sinks, SINK_TARGETS[0])?,
            wire_slew: fit_one(sinks, SINK_TARGETS[1])?,
            pi_r: fit_one(loads, LOAD_TARGETS[0])?,
            pi_c1: fit_one(loads, LOAD_TARGETS[1])?,
            pi_c2: fit_one(loads, LOAD_TARGETS[2])?,
            c_load: fit_one(loads, LOAD_TARGETS[3])?,
        })
    }

    /// Name and model pairs in a fixed order, used for persistence.
    pub fn models(&self) -> [(&str, &GbdtModel<f64>); 6] {
        [
            (FILES[0], &self.wire_delay),
            (FILES[1], &self.wire_slew),
            (FILES[2], &self.pi_r),
            (FILES[3], &self.pi_c1),
            (FILES[4], &self.pi_c2),
            (FILES[5], &self.c_load),
        ]
    }

    pub fn save_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        for (name, model) in self.models() {
            model.save(dir.join(format!("{name}.json")))?;
        }
        Ok(())
    }

    pub fn load_dir(dir: impl AsRef<Path>) -> Result<ModelBundle> {
        let dir = dir.as_ref();
        let load = |name: &str| GbdtModel::<f64>::load(dir.join(format!("{name}.json")));
        Ok(ModelBundle {
            wire_delay: load(FILES[0])?,
            wire_slew: load(FILES[1])?,
            pi_r: load(FILES[2])?,
            pi_c1: load(FILES[3])?,
            pi_c2: load(FILES[4])?,
            c_load: load(FILES[5])?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml::dataset::RowMeta;
    use crate::ml::features::{LOAD_SCHEMA, SINK_SCHEMA};

    fn tiny_sets() -> (Dataset, Dataset) {
        let schema = |s: &[&str]| s.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        let meta = |i: usize| RowMeta {
            design: "d".into(),
            utilization: 0.6,
            clock_ns: 1.0,
            net: format!("n{i}"),
            sink: None,
            edge: None,
        };
        let mut sinks = Dataset::new(schema(&SINK_SCHEMA), &SINK_TARGETS);
        let mut loads = Dataset::new(schema(&LOAD_SCHEMA), &LOAD_TARGETS);
        for i in 0..20 {
            let x = i as f64;
            sinks.push(meta(i), vec![x; SINK_SCHEMA.len()], &[x * 0.01, x * 0.002]);
            loads.push(meta(i), vec![x; LOAD_SCHEMA.len()], &[x * 0.1, x * 0.01, x * 0.02, x * 0.03]);
        }
        (sinks, loads)
    }

    #[test]
    fn bundle_trains_saves_and_loads() {
        let (sinks, loads) = tiny_sets();
        let params = GbdtParams { n_trees: 8, min_samples_leaf: 2, ..GbdtParams::default() };
        let b = ModelBundle::train(&sinks, &loads, &params).unwrap();
        let dir = std::env::temp_dir().join("wirecast-bundle");
        std::fs::create_dir_all(&dir).unwrap();
        b.save_dir(&dir).unwrap();
        let l = ModelBundle::load_dir(&dir).unwrap();
        assert_eq!(b, l);
    }
}
