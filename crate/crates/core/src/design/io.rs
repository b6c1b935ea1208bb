//! Design file format: pretty-printed JSON with name-based references.
//!
//! On disk, pins are `"<instance>.<pin>"` strings and geometry is flat
//! `[x0, y0, x1, y1]` arrays. Loading resolves names back to dense indices
//! and validates the result, so a loaded design is structurally sound or
//! the load fails with a location-bearing parse error.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::design::library::{CellLibrary, PinSlot};
use crate::design::{Design, InstId, Instance, Layer, MacroDef, Net, PinRef};
use crate::error::{Error, Result};
use crate::geom::{Point, Rect};

#[derive(Serialize, Deserialize)]
struct DesignFile {
    name: String,
    clock_period_ns: f64,
    gcell_um: f64,
    die: [f64; 4],
    layers: Vec<Layer>,
    macros: Vec<MacroFile>,
    instances: Vec<InstanceFile>,
    nets: Vec<NetFile>,
}

#[derive(Serialize, Deserialize)]
struct MacroFile {
    name: String,
    rect: [f64; 4],
    blocked_layer_count: u8,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    name: String,
    cell: String,
    x: f64,
    y: f64,
}

#[derive(Serialize, Deserialize)]
struct NetFile {
    name: String,
    driver: String,
    sinks: Vec<String>,
}

fn rect_to_array(r: &Rect) -> [f64; 4] {
    [r.x0, r.y0, r.x1, r.y1]
}

fn pin_to_string(design: &Design, p: &PinRef) -> String {
    format!("{}.{}", design.instances[p.inst.0 as usize].name, p.pin)
}

fn parse_pin(path: &Path, by_name: &HashMap<&str, u32>, s: &str) -> Result<PinRef> {
    let bad = |m: String| Error::parse(path, format!("pin '{s}'"), m);
    let (inst, pin) = s.rsplit_once('.').ok_or_else(|| bad("missing '.'".into()))?;
    let inst = *by_name.get(inst).ok_or_else(|| bad(format!("unknown instance '{inst}'")))?;
    let pin = PinSlot::parse(pin).ok_or_else(|| bad(format!("unknown pin slot '{pin}'")))?;
    Ok(PinRef { inst: InstId(inst), pin })
}

pub fn save_design(path: impl AsRef<Path>, design: &Design) -> Result<()> {
    let path = path.as_ref();
    let file = DesignFile {
        name: design.name.clone(),
        clock_period_ns: design.clock_period_ns,
        gcell_um: design.gcell_um,
        die: rect_to_array(&design.die),
        layers: design.layers.clone(),
        macros: design
            .macros
            .iter()
            .map(|m| MacroFile {
                name: m.name.clone(),
                rect: rect_to_array(&m.rect),
                blocked_layer_count: m.blocked_layer_count,
            })
            .collect(),
        instances: design
            .instances
            .iter()
            .map(|i| InstanceFile { name: i.name.clone(), cell: i.cell.clone(), x: i.loc.x, y: i.loc.y })
            .collect(),
        nets: design
            .nets
            .iter()
            .map(|n| NetFile {
                name: n.name.clone(),
                driver: pin_to_string(design, &n.driver),
                sinks: n.sinks.iter().map(|s| pin_to_string(design, s)).collect(),
            })
            .collect(),
    };
    let text = serde_json::to_string_pretty(&file).expect("design serializes");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn load_design(path: impl AsRef<Path>, lib: &CellLibrary) -> Result<Design> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: DesignFile = serde_json::from_str(&text)
        .map_err(|e| Error::parse(path, "design json", e.to_string()))?;

    let arr = |a: [f64; 4]| Rect::new(a[0], a[1], a[2], a[3]);
    let by_name: HashMap<&str, u32> = file
        .instances
        .iter()
        .enumerate()
        .map(|(i, inst)| (inst.name.as_str(), i as u32))
        .collect();
    if by_name.len() != file.instances.len() {
        return Err(Error::parse(path, "instances", "duplicate instance name"));
    }

    // Nets resolve names against `by_name`, which borrows the instance
    // list, so parse them before moving the instances into the design.
    let nets = file
        .nets
        .into_iter()
        .map(|n| {
            Ok(Net {
                name: n.name,
                driver: parse_pin(path, &by_name, &n.driver)?,
                sinks: n
                    .sinks
                    .iter()
                    .map(|s| parse_pin(path, &by_name, s))
                    .collect::<Result<_>>()?,
            })
        })
        .collect::<Result<_>>()?;
    let design = Design {
        name: file.name,
        clock_period_ns: file.clock_period_ns,
        gcell_um: file.gcell_um,
        die: arr(file.die),
        layers: file.layers,
        macros: file
            .macros
            .into_iter()
            .map(|m| MacroDef { name: m.name, rect: arr(m.rect), blocked_layer_count: m.blocked_layer_count })
            .collect(),
        instances: file
            .instances
            .into_iter()
            .map(|i| Instance { name: i.name, cell: i.cell, loc: Point::new(i.x, i.y) })
            .collect(),
        nets,
    };
    design.validate(lib)?;
    Ok(design)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::generate::{gen_design, GenConfig, MacroSpec};

    #[test]
    fn save_load_round_trips_byte_identical() {
        let lib = CellLibrary::standard();
        let cfg = GenConfig::new("rt", 21, 400, 0.5).with_macros(MacroSpec::default());
        let d = gen_design(&cfg, &lib).unwrap();
        let dir = std::env::temp_dir().join("wirecast-io-test");
        fs::create_dir_all(&dir).unwrap();
        let p1 = dir.join("d1.json");
        let p2 = dir.join("d2.json");
        save_design(&p1, &d).unwrap();
        let loaded = load_design(&p1, &lib).unwrap();
        assert_eq!(d, loaded);
        save_design(&p2, &loaded).unwrap();
        assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
    }

    #[test]
    fn unknown_pin_name_is_a_parse_error() {
        let lib = CellLibrary::standard();
        let d = gen_design(&GenConfig::new("bad", 4, 80, 0.5), &lib).unwrap();
        let dir = std::env::temp_dir().join("wirecast-io-test");
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("bad.json");
        save_design(&p, &d).unwrap();
        let text = fs::read_to_string(&p).unwrap().replace("\"n0\",\n      \"driver\": \"", "\"n0\",\n      \"driver\": \"ghost_");
        fs::write(&p, text).unwrap();
        let err = load_design(&p, &lib).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "got {err:?}");
    }
}
