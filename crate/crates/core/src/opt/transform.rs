//! Netlist transforms: driver resizing and buffer insertion.
//!
//! A transform mutates the design in place and reports which nets it
//! dirtied, split into nets whose *routes* changed (pins moved or appeared)
//! and nets whose *annotations* changed (loads seen by their drivers
//! changed). The optimization engine re-routes and re-annotates exactly
//! those sets.
//!
//! Buffer sites snap to GCell centers: the desired location moves to the
//! nearest center whose cell is not blocked, in Manhattan distance with
//! row-major index tie-breaks, so placement is deterministic. A transform
//! that finds no legal site is rejected rather than placed illegally.

use std::path::Path;

use crate::design::library::{cell_name, CellLibrary, CellSize, PinSlot};
use crate::design::{BlockageGrid, Design, InstId, Instance, Net, NetId, PinRef};
use crate::error::{Error, Result};
use crate::geom::{q2, Point};

/// A GCell at or above this blockage fraction offers no buffer site.
pub const SITE_BLOCKAGE_MAX: f64 = 0.5;

/// One candidate netlist edit.
#[derive(Clone, Debug, PartialEq)]
pub enum Transform {
    /// Swap an instance's cell for the same kind at a larger size.
    Resize { inst: InstId, to: CellSize },
    /// Drive the `far` sinks of `net` through a new buffer placed at `at`
    /// (already snapped to a legal site).
    InsertBuffer { net: NetId, cell: String, at: Point, far: Vec<usize> },
}

/// Nets a transform invalidated. `route` lists nets whose geometry changed
/// and is always a subset of `ann`, which adds nets whose driver-side load
/// changed without any pin moving.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dirty {
    pub route: Vec<NetId>,
    pub ann: Vec<NetId>,
}

/// Applies `t` to the design and returns the dirtied nets.
///
/// Resizing keeps the instance origin fixed; the output pin tracks the new
/// cell width, so the driven net must re-route, and every net sinking into
/// the instance sees a new input capacitance. Buffer insertion appends one
/// instance and one net; the new net takes over the `far` sinks and the
/// original net gains the buffer input in their place.
pub fn apply_transform(design: &mut Design, lib: &CellLibrary, t: &Transform) -> Result<Dirty> {
    match t {
        Transform::Resize { inst, to } => resize(design, lib, *inst, *to),
        Transform::InsertBuffer { net, cell, at, far } => insert_buffer(design, lib, *net, cell, *at, far),
    }
}

fn resize(design: &mut Design, lib: &CellLibrary, inst: InstId, to: CellSize) -> Result<Dirty> {
    let old = design
        .instances
        .get(inst.0 as usize)
        .ok_or_else(|| Error::Other(format!("resize of missing instance index {}", inst.0)))?;
    let kind = lib
        .cell(&old.cell)
        .ok_or_else(|| Error::Other(format!("instance {} references unknown cell {}", old.name, old.cell)))?
        .kind;
    design.instances[inst.0 as usize].cell = cell_name(kind, to);

    let mut dirty = Dirty::default();
    for (i, net) in design.nets.iter().enumerate() {
        let id = NetId(i as u32);
        if net.driver.inst == inst {
            // Output pin moved with the cell width.
            dirty.route.push(id);
            dirty.ann.push(id);
        } else if net.sinks.iter().any(|s| s.inst == inst) {
            // Input pins stay put but their capacitance changed.
            dirty.ann.push(id);
        }
    }
    Ok(dirty)
}

fn insert_buffer(
    design: &mut Design,
    lib: &CellLibrary,
    net_id: NetId,
    cell: &str,
    at: Point,
    far: &[usize],
) -> Result<Dirty> {
    let net = design
        .nets
        .get(net_id.0 as usize)
        .ok_or_else(|| Error::Other(format!("buffer insertion on missing net index {}", net_id.0)))?;
    if lib.cell(cell).is_none() {
        return Err(Error::Other(format!("buffer cell {cell} not in library")));
    }
    if far.is_empty() || far.len() >= net.sinks.len() + 1 {
        return Err(Error::Other(format!(
            "buffer on net {} must take between 1 and all {} sinks, got {}",
            net.name,
            net.sinks.len(),
            far.len()
        )));
    }
    let mut moved = vec![false; net.sinks.len()];
    for &i in far {
        let slot = moved
            .get_mut(i)
            .ok_or_else(|| Error::Other(format!("buffer on net {} names sink {i} out of range", net.name)))?;
        if *slot {
            return Err(Error::Other(format!("buffer on net {} names sink {i} twice", net.name)));
        }
        *slot = true;
    }

    let buf_id = InstId(design.instances.len() as u32);
    design.instances.push(Instance {
        name: format!("{}_b{}", net.name, design.instances.len()),
        cell: cell.to_string(),
        loc: at,
    });

    let new_id = NetId(design.nets.len() as u32);
    let new_name = format!("{}_x{}", net.name, design.nets.len());
    let net = &mut design.nets[net_id.0 as usize];
    let (kept, taken): (Vec<PinRef>, Vec<PinRef>) = {
        let mut kept = Vec::new();
        let mut taken = Vec::new();
        for (i, &s) in net.sinks.iter().enumerate() {
            if moved[i] {
                taken.push(s);
            } else {
                kept.push(s);
            }
        }
        (kept, taken)
    };
    net.sinks = kept;
    net.sinks.push(PinRef { inst: buf_id, pin: PinSlot::In(0) });
    design.nets.push(Net {
        name: new_name,
        driver: PinRef { inst: buf_id, pin: PinSlot::Out },
        sinks: taken,
    });

    Ok(Dirty { route: vec![net_id, new_id], ann: vec![net_id, new_id] })
}

/// Snaps a desired buffer location to the nearest legal site.
///
/// Candidate sites are GCell centers; the cell's origin is chosen so its
/// pin row sits on the center. A site is legal when the whole footprint
/// stays inside the die, the origin is not strictly inside a blocking
/// macro, and the GCell's blockage fraction is below [`SITE_BLOCKAGE_MAX`].
/// Centers are ranked by Manhattan distance from `desired` with row-major
/// index ties, so the result is deterministic. Returns the instance origin,
/// or `None` when no cell on the grid qualifies.
pub fn snap_buffer_site(
    design: &Design,
    lib: &CellLibrary,
    blockage: &BlockageGrid,
    cell: &str,
    desired: Point,
) -> Option<Point> {
    let width = lib.cell(cell)?.width_um;
    let grid = &blockage.grid;
    let legal = |ix: usize, iy: usize| -> Option<Point> {
        if blockage.at(ix, iy) >= SITE_BLOCKAGE_MAX {
            return None;
        }
        let center = grid.center(ix, iy);
        let origin = Point::new(q2(center.x - width / 2.0), q2(center.y - 1.0));
        let corner = Point::new(origin.x + width, origin.y + 2.0);
        if !(design.die.contains(origin) && design.die.contains(corner)) {
            return None;
        }
        if design.macros.iter().any(|m| m.is_blocking() && m.rect.contains_strict(origin)) {
            return None;
        }
        Some(origin)
    };

    // Desk-scale grids are small enough to rank every center outright.
    let mut order: Vec<(f64, usize, usize)> = Vec::with_capacity(grid.len());
    for iy in 0..grid.ny {
        for ix in 0..grid.nx {
            order.push((grid.center(ix, iy).manhattan(desired), iy, ix));
        }
    }
    order.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    order.iter().find_map(|&(_, iy, ix)| legal(ix, iy))
}

/// Sink indices to move behind a buffer: the half of the net's sinks
/// farthest from the driver (rounded up), forced to include `keep` when
/// given. Distance ties resolve by sink index so the split is stable.
pub fn far_half(design: &Design, lib: &CellLibrary, net_id: NetId, keep: Option<usize>) -> Vec<usize> {
    let net = design.net(net_id);
    let driver = design.pin_location(lib, net.driver);
    let mut order: Vec<(f64, usize)> = net
        .sinks
        .iter()
        .enumerate()
        .map(|(i, &s)| (design.pin_location(lib, s).manhattan(driver), i))
        .collect();
    order.sort_by(|a, b| (b.0, a.1).partial_cmp(&(a.0, b.1)).expect("finite distances"));
    let take = net.sinks.len().div_ceil(2);
    let mut far: Vec<usize> = order[..take].iter().map(|&(_, i)| i).collect();
    if let Some(k) = keep {
        if !far.contains(&k) {
            *far.last_mut().expect("take >= 1") = k;
        }
    }
    far.sort_unstable();
    far
}

/// One applied transform in the optimization log. `pass` 0 is the electrical
/// repair pass; setup passes count from 1 and only accept transforms whose
/// `ws_after_ns` strictly improves on `ws_before_ns`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformRecord {
    pub pass: u32,
    pub kind: String,
    pub target: String,
    pub ws_before_ns: f64,
    pub ws_after_ns: f64,
}

impl Transform {
    pub fn kind(&self) -> &'static str {
        match self {
            Transform::Resize { .. } => "resize",
            Transform::InsertBuffer { .. } => "insert_buffer",
        }
    }

    /// Stable human-readable target, e.g. `u12->NAND2_X4` or
    /// `n7@(40.00,25.00)`. Expects the design *after* the transform was
    /// applied, so a resize names the new cell.
    pub fn target(&self, design: &Design) -> String {
        match self {
            Transform::Resize { inst, .. } => {
                let inst = design.instance(*inst);
                format!("{}->{}", inst.name, inst.cell)
            }
            Transform::InsertBuffer { net, at, .. } => {
                format!("{}@({:.2},{:.2})", design.net(*net).name, at.x, at.y)
            }
        }
    }
}

const TRANSFORM_TABLE: &str = "transforms_v1";
const TRANSFORM_HEADER: [&str; 6] = ["table", "pass", "kind", "target", "ws_before_ns", "ws_after_ns"];

/// Writes the transform log. Each row carries the table version so report
/// consumers can reject files written by a different schema.
pub fn save_transform_log(path: impl AsRef<Path>, records: &[TransformRecord]) -> Result<()> {
    let path = path.as_ref();
    let err = |e: csv::Error| Error::parse(path, "csv write", e.to_string());
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(path, "csv open", e.to_string()))?;
    w.write_record(TRANSFORM_HEADER).map_err(err)?;
    for r in records {
        w.write_record([
            TRANSFORM_TABLE,
            &r.pass.to_string(),
            &r.kind,
            &r.target,
            &format!("{}", r.ws_before_ns),
            &format!("{}", r.ws_after_ns),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_transform_log(path: impl AsRef<Path>) -> Result<Vec<TransformRecord>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::parse(path, "csv open", e.to_string()))?;
    let header = r.headers().map_err(|e| Error::parse(path, "csv header", e.to_string()))?;
    if header != TRANSFORM_HEADER.as_slice() {
        return Err(Error::parse(path, "csv header", format!("expected {TRANSFORM_HEADER:?}")));
    }
    let mut out = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, format!("row {row}"), e.to_string()))?;
        let bad = |m: &str| Error::parse(path, format!("row {row}"), m.to_string());
        let get = |i: usize| rec.get(i).ok_or_else(|| bad("missing field"));
        if get(0)? != TRANSFORM_TABLE {
            return Err(bad(&format!("unknown table version '{}'", get(0)?)));
        }
        out.push(TransformRecord {
            pass: get(1)?.parse().map_err(|_| bad("bad pass"))?,
            kind: get(2)?.to_string(),
            target: get(3)?.to_string(),
            ws_before_ns: get(4)?.parse().map_err(|_| bad("bad ws_before_ns"))?,
            ws_after_ns: get(5)?.parse().map_err(|_| bad("bad ws_after_ns"))?,
        });
    }
    Ok(out)
}
