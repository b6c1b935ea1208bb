//! Synthetic benchmark generator.
//!
//! Produces placed designs with controllable size, area utilization, and
//! macro blockage fraction. The netlist is a layered DAG between register
//! boundaries: registers launch into combinational level bands and every
//! register data pin terminates a path. Net fanout follows a truncated
//! geometric distribution. Placement is row-based with each logic level
//! occupying one vertical band of the die, so net length correlates with
//! logical depth the way a levelized placement does.
//!
//! Generation is deterministic in the seed; all randomness flows through
//! one stage-derived stream.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::design::library::{cell_name, CellKind, CellLibrary, CellSize, PinSlot};
use crate::design::{Design, InstId, Instance, Layer, MacroDef, Net, PinRef};
use crate::error::{Error, Result};
use crate::geom::{q2, Dir, Point, Rect};
use crate::seed::{stage_rng, STAGE_GEN};

/// Placement row pitch; cells are one row tall with midline pins.
pub const ROW_HEIGHT_UM: f64 = 2.0;

/// Six-metal stack: lower layers are thin and resistive, upper layers wide
/// and fast. Directions alternate starting horizontal.
pub fn default_layers() -> Vec<Layer> {
    const R: [f64; 6] = [0.020, 0.016, 0.008, 0.006, 0.003, 0.002];
    const C: [f64; 6] = [0.00030, 0.00028, 0.00024, 0.00022, 0.00018, 0.00016];
    const TRACKS: [u32; 6] = [6, 6, 8, 8, 10, 10];
    (0..6)
        .map(|i| Layer {
            name: format!("M{}", i + 1),
            dir: if i % 2 == 0 { Dir::H } else { Dir::V },
            r_per_um: R[i],
            c_per_um: C[i],
            tracks_per_gcell: TRACKS[i],
        })
        .collect()
}

/// Hard-macro request: `count` macros totalling `area_frac` of the die,
/// each surrounded by a keep-out halo.
#[derive(Clone, Copy, Debug)]
pub struct MacroSpec {
    pub count: usize,
    pub area_frac: f64,
    pub halo_um: f64,
}

impl Default for MacroSpec {
    fn default() -> Self {
        MacroSpec { count: 3, area_frac: 0.15, halo_um: 6.0 }
    }
}

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub name: String,
    pub seed: u64,
    pub n_instances: usize,
    /// Standard-cell area over non-macro die area. Must be in (0.2, 0.95).
    pub utilization: f64,
    /// Die width over height.
    pub aspect: f64,
    pub clock_period_ns: f64,
    pub gcell_um: f64,
    /// Combinational depth bands between register boundaries.
    pub levels: u32,
    pub register_fraction: f64,
    /// Success probability of the truncated geometric fanout draw.
    pub fanout_p: f64,
    pub max_fanout: usize,
    pub macros: Option<MacroSpec>,
}

impl GenConfig {
    pub fn new(name: &str, seed: u64, n_instances: usize, utilization: f64) -> GenConfig {
        GenConfig {
            name: name.to_string(),
            seed,
            n_instances,
            utilization,
            aspect: 1.0,
            clock_period_ns: 1.0,
            gcell_um: 10.0,
            levels: 6,
            register_fraction: 0.15,
            fanout_p: 0.55,
            max_fanout: 12,
            macros: None,
        }
    }

    pub fn with_macros(mut self, spec: MacroSpec) -> GenConfig {
        self.macros = Some(spec);
        self
    }
}

/// Fanout draw: support `1..=max`, P(k) proportional to `(1-p)^(k-1)`.
fn trunc_geom(rng: &mut ChaCha8Rng, p: f64, max: usize) -> usize {
    let mut k = 1;
    while k < max && rng.random::<f64>() >= p {
        k += 1;
    }
    k
}

struct Skeleton {
    /// Cell name per instance.
    cells: Vec<String>,
    /// Logic level per instance: registers 0, gates `1..=levels`.
    level: Vec<u32>,
    n_regs: usize,
}

fn sample_skeleton(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Skeleton {
    const KIND_WEIGHTS: [(CellKind, f64); 10] = [
        (CellKind::Inv, 0.18),
        (CellKind::Buf, 0.10),
        (CellKind::Nand2, 0.14),
        (CellKind::Nor2, 0.10),
        (CellKind::And2, 0.12),
        (CellKind::Or2, 0.10),
        (CellKind::Xor2, 0.08),
        (CellKind::Nand3, 0.08),
        (CellKind::And3, 0.06),
        (CellKind::And4, 0.04),
    ];
    const SIZE_WEIGHTS: [(CellSize, f64); 3] =
        [(CellSize::X1, 0.50), (CellSize::X2, 0.35), (CellSize::X4, 0.15)];
    let pick_size = |rng: &mut ChaCha8Rng| SIZE_WEIGHTS.choose_weighted(rng, |s| s.1).unwrap().0;

    let n = cfg.n_instances;
    let n_regs = ((cfg.register_fraction * n as f64).round() as usize).clamp(2, n / 2);
    let mut cells = Vec::with_capacity(n);
    let mut level = Vec::with_capacity(n);
    for _ in 0..n_regs {
        cells.push(cell_name(CellKind::Dff, pick_size(rng)));
        level.push(0);
    }
    for _ in n_regs..n {
        let kind = KIND_WEIGHTS.choose_weighted(rng, |k| k.1).unwrap().0;
        cells.push(cell_name(kind, pick_size(rng)));
        level.push(rng.random_range(1..=cfg.levels));
    }
    Skeleton { cells, level, n_regs }
}

/// Input-pin slots awaiting a driver, bucketed by consumer level. Register
/// data pins sit in a virtual bucket past the last gate level.
struct SlotPool {
    buckets: Vec<Vec<PinRef>>,
}

impl SlotPool {
    fn take_above(&mut self, level: u32, rng: &mut ChaCha8Rng) -> Option<PinRef> {
        let lo = level as usize + 1;
        let total: usize = self.buckets[lo..].iter().map(Vec::len).sum();
        if total == 0 {
            return None;
        }
        let mut at = rng.random_range(0..total);
        for bucket in &mut self.buckets[lo..] {
            if at < bucket.len() {
                return Some(bucket.swap_remove(at));
            }
            at -= bucket.len();
        }
        unreachable!("index within total")
    }
}

fn build_netlist(cfg: &GenConfig, lib: &CellLibrary, sk: &Skeleton, rng: &mut ChaCha8Rng) -> Vec<Net> {
    let n = sk.cells.len();
    let top = cfg.levels as usize + 1;
    let slot_level = |inst: usize| if inst < sk.n_regs { top as u32 } else { sk.level[inst] };

    let mut pool = SlotPool { buckets: vec![Vec::new(); top + 1] };
    for inst in 0..n {
        let arity = lib.cell(&sk.cells[inst]).expect("generated cells exist").arity();
        for k in 0..arity {
            pool.buckets[slot_level(inst) as usize]
                .push(PinRef { inst: InstId(inst as u32), pin: PinSlot::In(k) });
        }
    }

    // Sinks per driver instance. Highest-level drivers pick first so the
    // register data pins they alone can reach do not get taken from below.
    let mut sinks: Vec<Vec<PinRef>> = vec![Vec::new(); n];
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order.sort_by_key(|&i| std::cmp::Reverse(sk.level[i]));
    for &drv in &order {
        let want = trunc_geom(rng, cfg.fanout_p, cfg.max_fanout);
        for _ in 0..want {
            match pool.take_above(sk.level[drv], rng) {
                Some(slot) => sinks[drv].push(slot),
                None => break,
            }
        }
    }

    // Any slot still open takes a uniform driver from a lower level.
    let mut by_level: Vec<Vec<usize>> = vec![Vec::new(); top];
    for inst in 0..n {
        by_level[sk.level[inst] as usize].push(inst);
    }
    for (lvl, bucket) in pool.buckets.iter().enumerate() {
        for &slot in bucket {
            let eligible: Vec<usize> =
                by_level[..lvl.min(top)].iter().flatten().copied().collect();
            let drv = *eligible.choose(rng).expect("registers always eligible");
            sinks[drv].push(slot);
        }
    }

    // Fanout-zero drivers steal a sink from a multi-sink net above them.
    for drv in 0..n {
        if !sinks[drv].is_empty() {
            continue;
        }
        let donor = (0..n).find(|&d| {
            d != drv
                && sinks[d].len() >= 2
                && sinks[d].iter().any(|s| slot_level(s.inst.0 as usize) > sk.level[drv])
        });
        if let Some(d) = donor {
            let at = sinks[d]
                .iter()
                .position(|s| slot_level(s.inst.0 as usize) > sk.level[drv])
                .unwrap();
            let slot = sinks[d].remove(at);
            sinks[drv].push(slot);
        }
    }

    let mut nets = Vec::new();
    for drv in 0..n {
        if sinks[drv].is_empty() {
            continue;
        }
        sinks[drv].sort();
        nets.push(Net {
            name: format!("n{}", nets.len()),
            driver: PinRef { inst: InstId(drv as u32), pin: PinSlot::Out },
            sinks: std::mem::take(&mut sinks[drv]),
        });
    }
    nets
}

fn place_macros(
    die: &Rect,
    spec: &MacroSpec,
    gcell: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<MacroDef>> {
    let mut out: Vec<MacroDef> = Vec::new();
    let per_area = spec.area_frac * die.area() / spec.count as f64;
    for i in 0..spec.count {
        let aspect = rng.random_range(0.5..2.0);
        let gcells = |v: f64| ((v / gcell).round().max(1.0)) * gcell;
        let w = gcells((per_area * aspect).sqrt());
        let h = gcells(per_area / w);
        let mut placed = false;
        for _ in 0..400 {
            let max_x = die.x1 - w - spec.halo_um;
            let max_y = die.y1 - h - spec.halo_um;
            if max_x < spec.halo_um || max_y < spec.halo_um {
                break;
            }
            let snap = |v: f64| ((v / gcell).floor() * gcell).max(gcell);
            let x0 = snap(rng.random_range(spec.halo_um..=max_x));
            let y0 = snap(rng.random_range(spec.halo_um..=max_y));
            let rect = Rect::new(x0, y0, x0 + w, y0 + h);
            // The halo is clearance from the macro edge, so test the
            // inflated candidate against raw rects, not halo vs halo.
            let haloed = rect.inflate(spec.halo_um);
            let clear = out.iter().all(|m| !haloed.overlaps(&m.rect));
            if clear && haloed.x0 >= die.x0 && haloed.y0 >= die.y0 && haloed.x1 <= die.x1 && haloed.y1 <= die.y1 {
                out.push(MacroDef { name: format!("m{i}"), rect, blocked_layer_count: 4 });
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::InfeasiblePacking(format!(
                "macro {i} ({w} x {h} um) does not fit: die {} x {} um, {} placed",
                die.width(),
                die.height(),
                out.len()
            )));
        }
    }
    Ok(out)
}

fn place_cells(
    cfg: &GenConfig,
    lib: &CellLibrary,
    sk: &Skeleton,
    die: &Rect,
    keepouts: &[Rect],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Instance>> {
    let n_rows = (die.height() / ROW_HEIGHT_UM).floor() as usize;
    let n_bands = cfg.levels as usize + 1;
    let band_w = die.width() / n_bands as f64;
    let mut out = Vec::with_capacity(sk.cells.len());
    for (i, cell) in sk.cells.iter().enumerate() {
        let width = lib.cell(cell).expect("generated cells exist").width_um;
        let band_lo = die.x0 + sk.level[i] as f64 * band_w;
        let span = (band_w - width).max(0.0);
        let mut loc = None;
        for _ in 0..500 {
            let x = q2(band_lo + rng.random::<f64>() * span);
            let y = die.y0 + rng.random_range(0..n_rows) as f64 * ROW_HEIGHT_UM;
            let footprint = Rect::new(x, y, x + width, y + ROW_HEIGHT_UM);
            if keepouts.iter().all(|k| !footprint.overlaps(k)) {
                loc = Some(Point::new(x, y));
                break;
            }
        }
        let loc = loc.ok_or_else(|| {
            Error::InfeasiblePacking(format!("no room for instance {i} in level band {}", sk.level[i]))
        })?;
        let prefix = if i < sk.n_regs { "r" } else { "u" };
        out.push(Instance { name: format!("{prefix}{i}"), cell: cell.clone(), loc });
    }
    Ok(out)
}

/// Generates a placed design from the config. Fails with
/// [`Error::InfeasiblePacking`] when macros or cells cannot be placed and
/// [`Error::InvalidConfig`] when the requested utilization is out of range.
pub fn gen_design(cfg: &GenConfig, lib: &CellLibrary) -> Result<Design> {
    if !(0.2 < cfg.utilization && cfg.utilization < 0.95) {
        return Err(Error::InvalidConfig(format!(
            "utilization {} outside (0.2, 0.95)",
            cfg.utilization
        )));
    }
    if cfg.n_instances < 10 || cfg.levels < 2 || !(0.0..1.0).contains(&cfg.fanout_p) {
        return Err(Error::InvalidConfig("need >= 10 instances, >= 2 levels, fanout_p in (0,1)".into()));
    }
    let mut rng = stage_rng(cfg.seed, STAGE_GEN, cfg.seed);

    let sk = sample_skeleton(cfg, &mut rng);
    let cell_area: f64 = sk
        .cells
        .iter()
        .map(|c| lib.cell(c).expect("generated cells exist").width_um * ROW_HEIGHT_UM)
        .sum();
    let macro_frac = cfg.macros.map_or(0.0, |m| m.area_frac);
    let die_area = cell_area / cfg.utilization / (1.0 - macro_frac);
    let round_up = |v: f64| (v / cfg.gcell_um).ceil() * cfg.gcell_um;
    let w = round_up((die_area * cfg.aspect).sqrt());
    let h = round_up(die_area / w);
    let die = Rect::new(0.0, 0.0, w, h);

    let macros = match &cfg.macros {
        Some(spec) => place_macros(&die, spec, cfg.gcell_um, &mut rng)?,
        None => Vec::new(),
    };
    let halo = cfg.macros.map_or(0.0, |m| m.halo_um);
    let keepouts: Vec<Rect> = macros.iter().map(|m| m.rect.inflate(halo)).collect();

    let macro_area: f64 = macros.iter().map(|m| m.rect.area()).sum();
    let achieved = cell_area / (die.area() - macro_area);
    if !(0.2 < achieved && achieved < 0.95) {
        return Err(Error::InvalidConfig(format!(
            "achieved utilization {achieved:.3} outside (0.2, 0.95)"
        )));
    }

    let instances = place_cells(cfg, lib, &sk, &die, &keepouts, &mut rng)?;
    let nets = build_netlist(cfg, lib, &sk, &mut rng);

    let design = Design {
        name: cfg.name.clone(),
        clock_period_ns: cfg.clock_period_ns,
        gcell_um: cfg.gcell_um,
        die,
        layers: default_layers(),
        macros,
        instances,
        nets,
    };
    design.validate(lib)?;
    Ok(design)
}
