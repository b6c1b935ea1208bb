//! Netlist and floorplan model.
//!
//! A [`Design`] is a placed gate-level netlist: a die partitioned into
//! GCells, a metal stack, hard macros (which may block routing), placed
//! standard cells drawn from the built-in [`library`], and single-driver
//! nets forming a combinational DAG between register boundaries.
//!
//! Instances and nets are referenced by dense indices in memory; the design
//! file format uses names (see [`io`]).

pub mod blockage;
pub mod generate;
pub mod io;
pub mod library;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Dir, Point, Rect};
use library::{CellLibrary, PinSlot};

pub use blockage::BlockageGrid;
pub use generate::{gen_design, GenConfig, MacroSpec};
pub use io::{load_design, save_design};

/// Index into [`Design::instances`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InstId(pub u32);

/// Index into [`Design::nets`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NetId(pub u32);

/// One metal layer of the stack.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub name: String,
    pub dir: Dir,
    /// Wire resistance, kohm per um.
    pub r_per_um: f64,
    /// Wire capacitance, pF per um.
    pub c_per_um: f64,
    /// Routing tracks this layer contributes to each GCell.
    pub tracks_per_gcell: u32,
}

/// Hard macro. Blocks routing when `blocked_layer_count >= BLOCKING_LAYER_MIN`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroDef {
    pub name: String,
    pub rect: Rect,
    /// Number of lower metal layers the macro occupies.
    pub blocked_layer_count: u8,
}

/// Macros occupying at least this many layers count as routing blockages.
pub const BLOCKING_LAYER_MIN: u8 = 2;

impl MacroDef {
    pub fn is_blocking(&self) -> bool {
        self.blocked_layer_count >= BLOCKING_LAYER_MIN
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub name: String,
    /// Library cell name, e.g. `NAND2_X2`.
    pub cell: String,
    /// Origin (lower-left corner) of the placed cell.
    pub loc: Point,
}

/// A pin on a placed instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PinRef {
    pub inst: InstId,
    pub pin: PinSlot,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub name: String,
    pub driver: PinRef,
    pub sinks: Vec<PinRef>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub name: String,
    pub clock_period_ns: f64,
    pub gcell_um: f64,
    pub die: Rect,
    pub layers: Vec<Layer>,
    pub macros: Vec<MacroDef>,
    pub instances: Vec<Instance>,
    pub nets: Vec<Net>,
}

impl Design {
    /// GCell partition of the die.
    pub fn grid(&self) -> GcellGrid {
        GcellGrid::new(self.die, self.gcell_um)
    }

    /// Total routing tracks per GCell across the stack.
    pub fn gcell_capacity(&self) -> u32 {
        self.layers.iter().map(|l| l.tracks_per_gcell).sum()
    }

    pub fn net(&self, id: NetId) -> &Net {
        &self.nets[id.0 as usize]
    }

    pub fn instance(&self, id: InstId) -> &Instance {
        &self.instances[id.0 as usize]
    }

    pub fn net_ids(&self) -> impl Iterator<Item = NetId> {
        (0..self.nets.len() as u32).map(NetId)
    }

    /// Physical location of a pin: instance origin plus the cell's pin
    /// offset, snapped to the two-decimal grid so route nodes can compare
    /// coordinates exactly.
    pub fn pin_location(&self, lib: &CellLibrary, pin: PinRef) -> Point {
        let inst = self.instance(pin.inst);
        let cell = lib.cell(&inst.cell).expect("validated design references known cells");
        let off = cell.pin_offset(pin.pin);
        Point::new(crate::geom::q2(inst.loc.x + off.x), crate::geom::q2(inst.loc.y + off.y))
    }

    /// All pin locations of a net, driver first.
    pub fn net_pin_points(&self, lib: &CellLibrary, net: &Net) -> Vec<Point> {
        std::iter::once(net.driver)
            .chain(net.sinks.iter().copied())
            .map(|p| self.pin_location(lib, p))
            .collect()
    }

    /// Structural and geometric sanity checks. Run after generation and on
    /// every load; optimizer passes re-run it on the mutated netlist.
    pub fn validate(&self, lib: &CellLibrary) -> Result<()> {
        let fail = |m: String| Error::InvalidDesign { design: self.name.clone(), message: m };
        if self.clock_period_ns <= 0.0 {
            return Err(fail("clock period must be positive".into()));
        }
        if self.gcell_um <= 0.0 {
            return Err(fail("gcell size must be positive".into()));
        }
        if self.die.area() <= 0.0 {
            return Err(fail("die has no area".into()));
        }
        if self.layers.len() < 2 {
            return Err(fail("layer stack needs at least one H/V pair".into()));
        }
        for w in self.layers.windows(2) {
            if w[0].dir == w[1].dir {
                return Err(fail(format!("layers {} and {} do not alternate direction", w[0].name, w[1].name)));
            }
            if w[1].r_per_um >= w[0].r_per_um {
                return Err(fail(format!("resistance must strictly decrease going up at {}", w[1].name)));
            }
            if w[1].c_per_um > w[0].c_per_um {
                return Err(fail(format!("capacitance must not increase going up at {}", w[1].name)));
            }
        }
        for m in &self.macros {
            if !(self.die.contains(Point::new(m.rect.x0, m.rect.y0)) && self.die.contains(Point::new(m.rect.x1, m.rect.y1))) {
                return Err(fail(format!("macro {} extends outside the die", m.name)));
            }
        }
        for (i, a) in self.macros.iter().enumerate() {
            for b in &self.macros[i + 1..] {
                if a.rect.overlaps(&b.rect) {
                    return Err(fail(format!("macros {} and {} overlap", a.name, b.name)));
                }
            }
        }
        let blocking: Vec<&MacroDef> = self.macros.iter().filter(|m| m.is_blocking()).collect();
        for inst in &self.instances {
            let cell = lib
                .cell(&inst.cell)
                .ok_or_else(|| fail(format!("instance {} references unknown cell {}", inst.name, inst.cell)))?;
            let _ = cell;
            if !self.die.contains(inst.loc) {
                return Err(fail(format!("instance {} placed outside the die", inst.name)));
            }
            for m in &blocking {
                if m.rect.contains_strict(inst.loc) {
                    return Err(fail(format!("instance {} placed inside blocking macro {}", inst.name, m.name)));
                }
            }
        }
        self.validate_netlist(lib)
    }

    fn validate_netlist(&self, lib: &CellLibrary) -> Result<()> {
        let fail = |m: String| Error::InvalidDesign { design: self.name.clone(), message: m };
        let mut driven: HashMap<PinRef, &str> = HashMap::new();
        let mut driver_of: HashMap<PinRef, &str> = HashMap::new();
        for net in &self.nets {
            if net.sinks.is_empty() {
                return Err(fail(format!("net {} has no sinks", net.name)));
            }
            for &p in std::iter::once(&net.driver).chain(net.sinks.iter()) {
                let inst = self
                    .instances
                    .get(p.inst.0 as usize)
                    .ok_or_else(|| fail(format!("net {} references missing instance index {}", net.name, p.inst.0)))?;
                let cell = lib.cell(&inst.cell).expect("instances validated before nets");
                if !cell.has_pin(p.pin) {
                    return Err(fail(format!("net {} uses pin {} absent on cell {}", net.name, p.pin, inst.cell)));
                }
            }
            if !matches!(net.driver.pin, PinSlot::Out) {
                return Err(fail(format!("net {} is driven by a non-output pin", net.name)));
            }
            if let Some(other) = driver_of.insert(net.driver, &net.name) {
                return Err(fail(format!("pin drives both {} and {}", other, net.name)));
            }
            for s in &net.sinks {
                if matches!(s.pin, PinSlot::Out) {
                    return Err(fail(format!("net {} has an output pin as sink", net.name)));
                }
                if let Some(other) = driven.insert(*s, &net.name) {
                    return Err(fail(format!("sink pin driven by both {} and {}", other, net.name)));
                }
            }
        }
        // Combinational cycles: propagate over nets, registers break paths.
        let n = self.instances.len();
        let mut indeg = vec![0u32; n];
        let mut fanout: Vec<Vec<u32>> = vec![Vec::new(); n];
        for net in &self.nets {
            let src = net.driver.inst.0 as usize;
            if lib.cell(&self.instances[src].cell).unwrap().is_register() {
                continue;
            }
            for s in &net.sinks {
                let dst = s.inst.0 as usize;
                if lib.cell(&self.instances[dst].cell).unwrap().is_register() {
                    continue;
                }
                fanout[src].push(dst as u32);
                indeg[dst] += 1;
            }
        }
        let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut seen = queue.len();
        while let Some(i) = queue.pop() {
            for &j in &fanout[i] {
                indeg[j as usize] -= 1;
                if indeg[j as usize] == 0 {
                    queue.push(j as usize);
                    seen += 1;
                }
            }
        }
        if seen != n {
            return Err(fail("combinational cycle detected".into()));
        }
        Ok(())
    }
}

/// Uniform GCell partition of the die. Cells are indexed `(ix, iy)` from the
/// die's lower-left corner; `nx`/`ny` round up so the grid covers the die.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GcellGrid {
    pub die: Rect,
    pub cell_um: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GcellGrid {
    pub fn new(die: Rect, cell_um: f64) -> Self {
        assert!(cell_um > 0.0 && die.area() > 0.0);
        let nx = (die.width() / cell_um).ceil().max(1.0) as usize;
        let ny = (die.height() / cell_um).ceil().max(1.0) as usize;
        GcellGrid { die, cell_um, nx, ny }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        debug_assert!(ix < self.nx && iy < self.ny);
        iy * self.nx + ix
    }

    /// Cell containing a point; points on the die boundary clamp inward.
    pub fn cell_of(&self, p: Point) -> (usize, usize) {
        let ix = ((p.x - self.die.x0) / self.cell_um).floor() as isize;
        let iy = ((p.y - self.die.y0) / self.cell_um).floor() as isize;
        (
            ix.clamp(0, self.nx as isize - 1) as usize,
            iy.clamp(0, self.ny as isize - 1) as usize,
        )
    }

    pub fn cell_rect(&self, ix: usize, iy: usize) -> Rect {
        let x0 = self.die.x0 + ix as f64 * self.cell_um;
        let y0 = self.die.y0 + iy as f64 * self.cell_um;
        Rect::new(x0, y0, (x0 + self.cell_um).min(self.die.x1), (y0 + self.cell_um).min(self.die.y1))
    }

    pub fn center(&self, ix: usize, iy: usize) -> Point {
        let r = self.cell_rect(ix, iy);
        Point::new((r.x0 + r.x1) / 2.0, (r.y0 + r.y1) / 2.0)
    }

    /// Inclusive index range of cells intersecting `rect` (clipped to die).
    pub fn cells_over(&self, rect: &Rect) -> ((usize, usize), (usize, usize)) {
        let r = rect.clip(&self.die);
        let (x0, y0) = self.cell_of(Point::new(r.x0, r.y0));
        // Upper corner: nudge inward so cells are only counted when the rect
        // actually reaches into them.
        let eps = self.cell_um * 1e-9;
        let (x1, y1) = self.cell_of(Point::new((r.x1 - eps).max(r.x0), (r.y1 - eps).max(r.y0)));
        ((x0, y0), (x1, y1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_covers_die_with_ceil() {
        let g = GcellGrid::new(Rect::new(0.0, 0.0, 95.0, 40.0), 10.0);
        assert_eq!((g.nx, g.ny), (10, 4));
        assert_eq!(g.cell_of(Point::new(0.0, 0.0)), (0, 0));
        assert_eq!(g.cell_of(Point::new(94.9, 39.9)), (9, 3));
        // Boundary points clamp inward rather than indexing out of range.
        assert_eq!(g.cell_of(Point::new(95.0, 40.0)), (9, 3));
    }

    #[test]
    fn cells_over_clips_to_die() {
        let g = GcellGrid::new(Rect::new(0.0, 0.0, 100.0, 100.0), 10.0);
        let ((x0, y0), (x1, y1)) = g.cells_over(&Rect::new(-50.0, 15.0, 25.0, 35.0));
        assert_eq!((x0, y0), (0, 1));
        assert_eq!((x1, y1), (2, 3));
        // A rect ending exactly on a cell boundary does not spill into the
        // next cell.
        let ((_, _), (x1, y1)) = g.cells_over(&Rect::new(0.0, 0.0, 20.0, 10.0));
        assert_eq!((x1, y1), (1, 0));
    }
}
