//! Routing artifacts on disk.
//!
//! Route trees go to pretty JSON keyed by net name, with explicit node,
//! segment, and sink-mapping arrays so a load reproduces the in-memory
//! tree exactly. Congestion maps go to CSV, one row per GCell; the grid
//! shape comes from the design at load time and is cross-checked.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::design::library::CellLibrary;
use crate::design::{Design, NetId};
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::route::{CongestionMap, RouteSeg, RouteTree};

#[derive(Serialize, Deserialize)]
struct RoutesFile {
    version: u32,
    nets: Vec<NetRouteFile>,
}

#[derive(Serialize, Deserialize)]
struct NetRouteFile {
    net: String,
    nodes: Vec<[f64; 2]>,
    /// `[a, b, layer]` per segment.
    segs: Vec<[u32; 3]>,
    root: usize,
    sinks: Vec<usize>,
}

const ROUTES_VERSION: u32 = 1;

pub fn save_routes(path: impl AsRef<Path>, design: &Design, trees: &[RouteTree]) -> Result<()> {
    let path = path.as_ref();
    let file = RoutesFile {
        version: ROUTES_VERSION,
        nets: trees
            .iter()
            .map(|t| NetRouteFile {
                net: design.net(t.net).name.clone(),
                nodes: t.nodes.iter().map(|p| [p.x, p.y]).collect(),
                segs: t.segs.iter().map(|s| [s.a, s.b, u32::from(s.layer)]).collect(),
                root: t.root,
                sinks: t.sink_nodes.clone(),
            })
            .collect(),
    };
    let text = serde_json::to_string_pretty(&file).expect("routes serialize");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Loads route trees in design net order, validating each against its pins.
pub fn load_routes(path: impl AsRef<Path>, design: &Design, lib: &CellLibrary) -> Result<Vec<RouteTree>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: RoutesFile =
        serde_json::from_str(&text).map_err(|e| Error::parse(path, "routes json", e.to_string()))?;
    if file.version != ROUTES_VERSION {
        return Err(Error::ModelVersion(format!("routes v{}, supported v{ROUTES_VERSION}", file.version)));
    }
    if file.nets.len() != design.nets.len() {
        return Err(Error::parse(
            path,
            "routes json",
            format!("{} routed nets, design has {}", file.nets.len(), design.nets.len()),
        ));
    }
    let mut out = Vec::with_capacity(file.nets.len());
    for (i, nf) in file.nets.into_iter().enumerate() {
        let id = NetId(i as u32);
        if nf.net != design.net(id).name {
            return Err(Error::parse(
                path,
                format!("net {i}"),
                format!("expected '{}', found '{}'", design.net(id).name, nf.net),
            ));
        }
        let tree = RouteTree {
            net: id,
            nodes: nf.nodes.iter().map(|&[x, y]| Point::new(x, y)).collect(),
            segs: nf
                .segs
                .iter()
                .map(|&[a, b, l]| RouteSeg { a, b, layer: l as u8 })
                .collect(),
            root: nf.root,
            sink_nodes: nf.sinks,
        };
        let pins = design.net_pin_points(lib, design.net(id));
        tree.validate(&pins)?;
        out.push(tree);
    }
    Ok(out)
}

pub fn save_congestion(path: impl AsRef<Path>, map: &CongestionMap) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(path, "csv open", e.to_string()))?;
    w.write_record(["ix", "iy", "demand"]).map_err(|e| Error::parse(path, "csv", e.to_string()))?;
    for iy in 0..map.grid.ny {
        for ix in 0..map.grid.nx {
            let d = map.demand[map.grid.index(ix, iy)];
            w.write_record([ix.to_string(), iy.to_string(), format!("{d}")])
                .map_err(|e| Error::parse(path, "csv", e.to_string()))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_congestion(path: impl AsRef<Path>, design: &Design) -> Result<CongestionMap> {
    let path = path.as_ref();
    let mut map = CongestionMap::empty(design.grid(), f64::from(design.gcell_capacity()));
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::parse(path, "csv open", e.to_string()))?;
    let mut seen = 0usize;
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::parse(path, "csv row", e.to_string()))?;
        let field = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::parse(path, format!("csv row {seen}"), "bad number"))
        };
        let (ix, iy, d) = (field(0)? as usize, field(1)? as usize, field(2)?);
        if ix >= map.grid.nx || iy >= map.grid.ny {
            return Err(Error::parse(
                path,
                format!("csv row {seen}"),
                format!("cell ({ix}, {iy}) outside {}x{} grid", map.grid.nx, map.grid.ny),
            ));
        }
        map.demand[map.grid.index(ix, iy)] = d;
        seen += 1;
    }
    if seen != map.grid.len() {
        return Err(Error::parse(
            path,
            "csv",
            format!("{seen} cells, grid has {}", map.grid.len()),
        ));
    }
    Ok(map)
}
