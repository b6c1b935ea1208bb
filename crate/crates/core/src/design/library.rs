//! Built-in synthetic standard-cell library.
//!
//! Delay and output slew follow `(k0 + k_c * C_L) / s + k_tau * tau` with
//! per-kind coefficients and drive factor `s`; the closed form is sampled
//! onto 7x7 lookup tables so the timing engine exercises real interpolation.
//! Fall arcs are a fixed 10% slower than rise arcs. Units: ns, pF, kohm.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geom::Point;
use crate::timing::{EdgeLuts, Lut};

/// Input-slew axis shared by every table, ns.
pub const TAU_AXIS: [f64; 7] = [0.002, 0.01, 0.03, 0.06, 0.12, 0.25, 0.5];
/// Load axis shared by every table, pF.
pub const CAP_AXIS: [f64; 7] = [0.001, 0.004, 0.01, 0.02, 0.04, 0.08, 0.16];

/// Slew assumed at register clock pins (ideal clock tree).
pub const CLOCK_SLEW_NS: f64 = 0.02;

/// Fall arcs are this factor slower than rise arcs.
const FALL_SKEW: f64 = 1.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellKind {
    Inv,
    Buf,
    Nand2,
    Nor2,
    And2,
    Or2,
    Xor2,
    Nand3,
    And3,
    And4,
    Dff,
}

impl CellKind {
    pub fn arity(self) -> u8 {
        match self {
            CellKind::Inv | CellKind::Buf | CellKind::Dff => 1,
            CellKind::Nand2 | CellKind::Nor2 | CellKind::And2 | CellKind::Or2 | CellKind::Xor2 => 2,
            CellKind::Nand3 | CellKind::And3 => 3,
            CellKind::And4 => 4,
        }
    }

    /// Single-arc unateness model: inverting kinds flip the propagated edge.
    /// Xor is treated as non-inverting rather than carrying both arcs.
    pub fn inverting(self) -> bool {
        matches!(self, CellKind::Inv | CellKind::Nand2 | CellKind::Nor2 | CellKind::Nand3)
    }

    fn base_name(self) -> &'static str {
        match self {
            CellKind::Inv => "INV",
            CellKind::Buf => "BUF",
            CellKind::Nand2 => "NAND2",
            CellKind::Nor2 => "NOR2",
            CellKind::And2 => "AND2",
            CellKind::Or2 => "OR2",
            CellKind::Xor2 => "XOR2",
            CellKind::Nand3 => "NAND3",
            CellKind::And3 => "AND3",
            CellKind::And4 => "AND4",
            CellKind::Dff => "DFF",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CellSize {
    X1,
    X2,
    X4,
}

impl CellSize {
    pub const ALL: [CellSize; 3] = [CellSize::X1, CellSize::X2, CellSize::X4];

    pub fn factor(self) -> f64 {
        match self {
            CellSize::X1 => 1.0,
            CellSize::X2 => 2.0,
            CellSize::X4 => 4.0,
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            CellSize::X1 => "X1",
            CellSize::X2 => "X2",
            CellSize::X4 => "X4",
        }
    }

    pub fn next_up(self) -> Option<CellSize> {
        match self {
            CellSize::X1 => Some(CellSize::X2),
            CellSize::X2 => Some(CellSize::X4),
            CellSize::X4 => None,
        }
    }
}

/// Pin position within a cell: the single output, or input number `k`.
/// Registers use `In(0)` for D and `Out` for Q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PinSlot {
    Out,
    In(u8),
}

impl fmt::Display for PinSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PinSlot::Out => write!(f, "o"),
            PinSlot::In(k) => write!(f, "i{k}"),
        }
    }
}

impl PinSlot {
    pub fn parse(s: &str) -> Option<PinSlot> {
        match s {
            "o" | "q" => Some(PinSlot::Out),
            "d" => Some(PinSlot::In(0)),
            _ => s.strip_prefix('i').and_then(|k| k.parse::<u8>().ok().map(PinSlot::In)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub name: String,
    pub kind: CellKind,
    pub size: CellSize,
    pub width_um: f64,
    /// Capacitance of each input pin, pF.
    pub input_cap_pf: f64,
    /// Thevenin-style output resistance proxy, kohm.
    pub drive_res_kohm: f64,
    pub delay: EdgeLuts,
    pub out_slew: EdgeLuts,
}

/// Per-kind coefficients of the closed-form model at X1 drive.
struct KindParams {
    kind: CellKind,
    d0: f64,
    d_tau: f64,
    d_cap: f64,
    s0: f64,
    s_tau: f64,
    s_cap: f64,
    cap_in: f64,
    width: f64,
}

const KIND_PARAMS: [KindParams; 11] = [
    KindParams { kind: CellKind::Inv,   d0: 0.008, d_tau: 0.08, d_cap: 1.8, s0: 0.005, s_tau: 0.12, s_cap: 2.8, cap_in: 0.0018, width: 1.0 },
    KindParams { kind: CellKind::Buf,   d0: 0.014, d_tau: 0.06, d_cap: 1.6, s0: 0.006, s_tau: 0.10, s_cap: 2.4, cap_in: 0.0020, width: 1.4 },
    KindParams { kind: CellKind::Nand2, d0: 0.012, d_tau: 0.10, d_cap: 2.2, s0: 0.006, s_tau: 0.13, s_cap: 3.2, cap_in: 0.0022, width: 1.4 },
    KindParams { kind: CellKind::Nor2,  d0: 0.014, d_tau: 0.11, d_cap: 2.5, s0: 0.007, s_tau: 0.14, s_cap: 3.6, cap_in: 0.0022, width: 1.4 },
    KindParams { kind: CellKind::And2,  d0: 0.018, d_tau: 0.09, d_cap: 2.0, s0: 0.006, s_tau: 0.12, s_cap: 3.0, cap_in: 0.0021, width: 1.8 },
    KindParams { kind: CellKind::Or2,   d0: 0.020, d_tau: 0.09, d_cap: 2.1, s0: 0.007, s_tau: 0.12, s_cap: 3.1, cap_in: 0.0021, width: 1.8 },
    KindParams { kind: CellKind::Xor2,  d0: 0.024, d_tau: 0.12, d_cap: 2.6, s0: 0.008, s_tau: 0.15, s_cap: 3.8, cap_in: 0.0026, width: 2.2 },
    KindParams { kind: CellKind::Nand3, d0: 0.016, d_tau: 0.12, d_cap: 2.6, s0: 0.007, s_tau: 0.14, s_cap: 3.6, cap_in: 0.0024, width: 1.8 },
    KindParams { kind: CellKind::And3,  d0: 0.022, d_tau: 0.10, d_cap: 2.2, s0: 0.007, s_tau: 0.13, s_cap: 3.2, cap_in: 0.0023, width: 2.2 },
    KindParams { kind: CellKind::And4,  d0: 0.026, d_tau: 0.11, d_cap: 2.4, s0: 0.008, s_tau: 0.13, s_cap: 3.4, cap_in: 0.0025, width: 2.6 },
    KindParams { kind: CellKind::Dff,   d0: 0.030, d_tau: 0.05, d_cap: 2.0, s0: 0.008, s_tau: 0.08, s_cap: 3.0, cap_in: 0.0022, width: 3.0 },
];

impl Cell {
    pub fn is_register(&self) -> bool {
        self.kind == CellKind::Dff
    }

    pub fn arity(&self) -> u8 {
        self.kind.arity()
    }

    pub fn has_pin(&self, pin: PinSlot) -> bool {
        match pin {
            PinSlot::Out => true,
            PinSlot::In(k) => k < self.arity(),
        }
    }

    /// Pin offset from the instance origin. Row height is 2 um; pins sit on
    /// the cell midline.
    pub fn pin_offset(&self, pin: PinSlot) -> Point {
        match pin {
            PinSlot::Out => Point::new(self.width_um - 0.1, 1.0),
            PinSlot::In(k) => Point::new(0.1 + 0.25 * f64::from(k), 1.0),
        }
    }
}

/// The fixed library: every kind at X1/X2/X4.
#[derive(Debug)]
pub struct CellLibrary {
    cells: Vec<Cell>,
    by_name: HashMap<String, usize>,
}

impl CellLibrary {
    pub fn standard() -> CellLibrary {
        let mut cells = Vec::new();
        for p in &KIND_PARAMS {
            for size in CellSize::ALL {
                cells.push(build_cell(p, size));
            }
        }
        let by_name = cells.iter().enumerate().map(|(i, c)| (c.name.clone(), i)).collect();
        CellLibrary { cells, by_name }
    }

    pub fn cell(&self, name: &str) -> Option<&Cell> {
        self.by_name.get(name).map(|&i| &self.cells[i])
    }

    pub fn cell_named(&self, kind: CellKind, size: CellSize) -> &Cell {
        self.cell(&cell_name(kind, size)).expect("all kind/size combinations exist")
    }

    /// Same kind one drive step up, if any.
    pub fn upsized(&self, cell: &Cell) -> Option<&Cell> {
        cell.size.next_up().map(|s| self.cell_named(cell.kind, s))
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }
}

pub fn cell_name(kind: CellKind, size: CellSize) -> String {
    format!("{}_{}", kind.base_name(), size.suffix())
}

fn build_cell(p: &KindParams, size: CellSize) -> Cell {
    let s = size.factor();
    let delay_fn = move |tau: f64, c: f64| (p.d0 + p.d_cap * c) / s + p.d_tau * tau;
    let slew_fn = move |tau: f64, c: f64| (p.s0 + p.s_cap * c) / s + p.s_tau * tau;
    let sample = |f: &dyn Fn(f64, f64) -> f64, skew: f64| {
        Lut::from_fn(TAU_AXIS.to_vec(), CAP_AXIS.to_vec(), |tau, c| f(tau, c) * skew)
    };
    Cell {
        name: cell_name(p.kind, size),
        kind: p.kind,
        size,
        width_um: p.width * (0.6 + 0.4 * s),
        input_cap_pf: p.cap_in * s,
        drive_res_kohm: p.d_cap / s,
        delay: EdgeLuts { rise: sample(&delay_fn, 1.0), fall: sample(&delay_fn, FALL_SKEW) },
        out_slew: EdgeLuts { rise: sample(&slew_fn, 1.0), fall: sample(&slew_fn, FALL_SKEW) },
    }
}
