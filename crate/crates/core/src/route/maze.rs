//! Detailed-route oracle: congestion- and blockage-aware maze routing on
//! the GCell graph.
//!
//! Nets route sequentially (largest HPWL first) with incremental demand, so
//! later nets see the crowding earlier nets created. Per-net cost of
//! entering a cell is `1 + lambda_c * max(0, util - theta_c)^2 +
//! lambda_b * blockage`; cells at or above the impassable blockage fraction
//! are off limits outright. A small seeded jitter occasionally forces a unit
//! detour, standing in for pin-access noise a real detailed router exhibits.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use rand::Rng;

use crate::design::library::CellLibrary;
use crate::design::{BlockageGrid, Design, GcellGrid, NetId};
use crate::error::{Error, Result};
use crate::geom::{hpwl, Point};
use crate::route::global::add_demand;
use crate::route::steiner::{key_of, Key};
use crate::route::{assign_layers, CongestionMap, GlobalRoutes, RouteTree};
use crate::seed::{stage_rng, STAGE_DR};

#[derive(Clone, Copy, Debug)]
pub struct DrConfig {
    /// Quadratic congestion penalty weight.
    pub lambda_c: f64,
    /// Utilization above which congestion starts to cost.
    pub theta_c: f64,
    /// Linear blockage penalty weight.
    pub lambda_b: f64,
    /// Cells at or above this blockage fraction cannot be crossed.
    pub impassable_blockage: f64,
    /// Probability a net takes one unforced unit detour.
    pub jitter_prob: f64,
    /// Length-based layer promotion threshold, as in global routing.
    pub promote_threshold_um: f64,
    pub seed: u64,
}

impl Default for DrConfig {
    fn default() -> Self {
        DrConfig {
            lambda_c: 4.0,
            theta_c: 0.8,
            lambda_b: 8.0,
            impassable_blockage: 0.9,
            jitter_prob: 0.05,
            promote_threshold_um: 100.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DrResult {
    /// One route per net, indexed by net id.
    pub trees: Vec<RouteTree>,
    pub congestion: CongestionMap,
    /// Whether the oracle's route is meaningfully longer than the global
    /// route (more than half a GCell).
    pub detoured: Vec<bool>,
}

/// Routes the whole design through the oracle.
pub fn detailed_route_oracle(design: &Design, lib: &CellLibrary, gr: &GlobalRoutes, cfg: &DrConfig) -> Result<DrResult> {
    let mut result = DrResult {
        trees: Vec::new(),
        congestion: CongestionMap::empty(design.grid(), f64::from(design.gcell_capacity())),
        detoured: Vec::new(),
    };
    let dirty: Vec<NetId> = design.net_ids().collect();
    dr_reroute(design, lib, gr, cfg, &mut result, &dirty)?;
    Ok(result)
}

/// Rips up and re-routes `dirty` nets against the current demand. New nets
/// (ids past the end of `result.trees`) are appended; `result.trees` must
/// stay aligned with `design.nets`, so every new id must be in `dirty`.
pub fn dr_reroute(
    design: &Design,
    lib: &CellLibrary,
    gr: &GlobalRoutes,
    cfg: &DrConfig,
    result: &mut DrResult,
    dirty: &[NetId],
) -> Result<()> {
    let blockage = BlockageGrid::build(design);
    let known = result.trees.len();
    for id in dirty {
        if (id.0 as usize) < known {
            add_demand(&mut result.congestion, &result.trees[id.0 as usize], -1.0);
        }
    }
    let placeholder = |id: u32| RouteTree::single_point(NetId(id), Point::new(design.die.x0, design.die.y0), 0);
    for id in known..design.nets.len() {
        assert!(dirty.contains(&NetId(id as u32)), "new net {id} must be rerouted");
        result.trees.push(placeholder(id as u32));
        result.detoured.push(false);
    }

    // Largest nets first, then id, mirroring the full-run order.
    let mut order: Vec<NetId> = dirty.to_vec();
    order.sort_by(|&a, &b| {
        let ha = hpwl(&design.net_pin_points(lib, design.net(a)));
        let hb = hpwl(&design.net_pin_points(lib, design.net(b)));
        hb.partial_cmp(&ha).unwrap().then(a.0.cmp(&b.0))
    });
    for id in order {
        let tree = route_net(design, lib, &blockage, &result.congestion, cfg, id)?;
        add_demand(&mut result.congestion, &tree, 1.0);
        let gr_len = gr.trees[id.0 as usize].total_length();
        result.detoured[id.0 as usize] = tree.total_length() > gr_len + 0.5 * design.gcell_um;
        result.trees[id.0 as usize] = tree;
    }
    Ok(())
}

struct Maze<'a> {
    grid: &'a GcellGrid,
    blockage: &'a BlockageGrid,
    map: &'a CongestionMap,
    cfg: &'a DrConfig,
    /// Cells holding this net's pins are always passable.
    pin_cells: Vec<usize>,
}

impl Maze<'_> {
    fn passable(&self, idx: usize) -> bool {
        self.blockage.frac[idx] < self.cfg.impassable_blockage || self.pin_cells.contains(&idx)
    }

    fn enter_cost(&self, idx: usize) -> f64 {
        let over = (self.map.util_at(idx) - self.cfg.theta_c).max(0.0);
        1.0 + self.cfg.lambda_c * over * over + self.cfg.lambda_b * self.blockage.frac[idx]
    }

    fn neighbors(&self, idx: usize) -> [Option<usize>; 4] {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let (ix, iy) = (idx % nx, idx / nx);
        [
            (ix > 0).then(|| idx - 1),
            (ix + 1 < nx).then(|| idx + 1),
            (iy > 0).then(|| idx - nx),
            (iy + 1 < ny).then(|| idx + nx),
        ]
    }

    /// Cheapest path from any source cell to `target`. Returns the cell
    /// path, source first. Deterministic: the heap orders by (cost, cell).
    fn search(&self, sources: &[usize], target: usize) -> Option<Vec<usize>> {
        #[derive(PartialEq)]
        struct Entry(f64, usize);
        impl Eq for Entry {}
        impl Ord for Entry {
            fn cmp(&self, other: &Self) -> Ordering {
                // Reversed for a min-heap; cost is never NaN.
                other.0.partial_cmp(&self.0).unwrap().then(other.1.cmp(&self.1))
            }
        }
        impl PartialOrd for Entry {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }

        let n = self.grid.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s] = 0.0;
            heap.push(Entry(0.0, s));
        }
        while let Some(Entry(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            if u == target {
                break;
            }
            for v in self.neighbors(u).into_iter().flatten() {
                if !self.passable(v) {
                    continue;
                }
                let nd = d + self.enter_cost(v);
                if nd < dist[v] {
                    dist[v] = nd;
                    prev[v] = u;
                    heap.push(Entry(nd, v));
                }
            }
        }
        if dist[target].is_infinite() {
            return None;
        }
        let mut path = vec![target];
        let mut u = target;
        while prev[u] != usize::MAX {
            u = prev[u];
            path.push(u);
        }
        path.reverse();
        Some(path)
    }
}

fn route_net(
    design: &Design,
    lib: &CellLibrary,
    blockage: &BlockageGrid,
    map: &CongestionMap,
    cfg: &DrConfig,
    id: NetId,
) -> Result<RouteTree> {
    let net = design.net(id);
    let pins = design.net_pin_points(lib, net);
    let grid = design.grid();
    let mut rng = stage_rng(cfg.seed, STAGE_DR, u64::from(id.0));
    let mut jitter_left = if rng.random::<f64>() < cfg.jitter_prob { 1usize } else { 0 };

    let driver = pins[0];
    let pin_cells: Vec<usize> = pins.iter().map(|&p| cell_index(&grid, p)).collect();
    let maze = Maze { grid: &grid, blockage, map, cfg, pin_cells: pin_cells.clone() };

    // Cell -> a geometric point of the already-built tree inside it.
    let mut taps: HashMap<usize, Point> = HashMap::new();
    taps.insert(pin_cells[0], driver);
    let mut raw: Vec<(Key, Key)> = Vec::new();

    // Nearest sinks first so later paths can tap earlier ones.
    let mut sink_order: Vec<usize> = (1..pins.len()).collect();
    sink_order.sort_by(|&a, &b| {
        driver.manhattan(pins[a]).partial_cmp(&driver.manhattan(pins[b])).unwrap().then(a.cmp(&b))
    });

    for si in sink_order {
        let sink = pins[si];
        let target = pin_cells[si];
        if let Some(&tap) = taps.get(&target) {
            if tap == sink {
                continue;
            }
        }
        let mut sources: Vec<usize> = taps.keys().copied().collect();
        sources.sort_unstable();
        let mut path = maze
            .search(&sources, target)
            .ok_or_else(|| Error::UnroutableNet {
                net: net.name.clone(),
                message: format!("sink {} is sealed off by blockage", si - 1),
            })?;
        if jitter_left > 0 && try_unit_detour(&maze, &mut path) {
            jitter_left = 0;
        }
        let start = taps[&path[0]];
        emit_staircase(&grid, start, sink, &path, &mut raw, &mut taps);
    }

    let mut tree = crate::route::steiner::plan_segments(id, &pins, raw);
    assign_layers(&mut tree, &design.layers, cfg.promote_threshold_um, Some((map, cfg.theta_c)));
    Ok(tree)
}

fn cell_index(grid: &GcellGrid, p: Point) -> usize {
    let (ix, iy) = grid.cell_of(p);
    grid.index(ix, iy)
}

/// Bends one straight stretch of the path sideways by one cell, if a legal
/// side corridor exists. Adds exactly two cells.
fn try_unit_detour(maze: &Maze<'_>, path: &mut Vec<usize>) -> bool {
    if path.len() < 2 {
        return false;
    }
    let nx = maze.grid.nx as isize;
    let step = |a: usize, b: usize| b as isize - a as isize;
    // Longest straight run, earliest wins ties.
    let (mut best_at, mut best_len) = (usize::MAX, 0usize);
    let mut run_start = 0usize;
    for i in 1..path.len() {
        let turned = i + 1 < path.len() && step(path[i - 1], path[i]) != step(path[i], path[i + 1]);
        let run_end = if i + 1 == path.len() || turned { i } else { continue };
        let len = run_end - run_start;
        if len > best_len {
            best_len = len;
            best_at = run_start;
        }
        run_start = run_end;
    }
    if best_len < 1 || best_at == usize::MAX {
        return false;
    }
    let k = best_at + best_len / 2;
    if k + 1 > path.len() - 1 {
        return false;
    }
    let (a, b) = (path[k], path[k + 1]);
    let dir = step(a, b);
    let perus = if dir.abs() == 1 { nx } else { 1 };
    for side in [perus, -perus] {
        let (sa, sb) = (a as isize + side, b as isize + side);
        let n = maze.grid.len() as isize;
        if sa < 0 || sb < 0 || sa >= n || sb >= n {
            continue;
        }
        // Row wraparound guard for horizontal side-steps.
        if side.abs() == 1 && (sa / nx != a as isize / nx || sb / nx != b as isize / nx) {
            continue;
        }
        let (sa, sb) = (sa as usize, sb as usize);
        if maze.passable(sa) && maze.passable(sb) && !path.contains(&sa) && !path.contains(&sb) {
            path.splice(k + 1..k + 1, [sa, sb]);
            return true;
        }
    }
    false
}

/// Converts a cell path into axis-aligned segments from `start` to `end`.
/// Interior turns bend at cell centers; the final turn aligns with the end
/// point, so detour-free paths realize exactly the Manhattan length. Every
/// cell the path crosses gets a tap point on the new geometry.
fn emit_staircase(
    grid: &GcellGrid,
    start: Point,
    end: Point,
    path: &[usize],
    raw: &mut Vec<(Key, Key)>,
    taps: &mut HashMap<usize, Point>,
) {
    let center = |idx: usize| grid.center(idx % grid.nx, idx / grid.nx);
    let mut push = |a: Point, b: Point| {
        if a != b {
            raw.push((key_of(a), key_of(b)));
        }
    };

    // Maximal straight runs as (start_pos, end_pos) indices into `path`.
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut s = 0usize;
    for i in 1..path.len() {
        let turned = i + 1 < path.len()
            && (path[i] as isize - path[i - 1] as isize) != (path[i + 1] as isize - path[i] as isize);
        if i + 1 == path.len() || turned {
            runs.push((s, i));
            s = i;
        }
    }

    let mut cur = start;
    let tap_run = |taps: &mut HashMap<usize, Point>, cells: &[usize], from: Point, to: Point| {
        for &c in cells {
            let cc = center(c);
            let p = if from.y == to.y {
                Point::new(cc.x.clamp(from.x.min(to.x), from.x.max(to.x)), from.y)
            } else {
                Point::new(from.x, cc.y.clamp(from.y.min(to.y), from.y.max(to.y)))
            };
            taps.entry(c).or_insert(p);
        }
    };

    for (ri, &(rs, re)) in runs.iter().enumerate() {
        let horizontal = (path[rs + 1] as isize - path[rs] as isize).abs() == 1;
        let last_turn = ri + 2 == runs.len();
        let is_final = ri + 1 == runs.len();
        let next = if is_final {
            // Final leg: run to the end's ordinate, then an L if needed.
            if horizontal {
                Point::new(end.x, cur.y)
            } else {
                Point::new(cur.x, end.y)
            }
        } else {
            let turn_center = center(path[re]);
            let align = if last_turn { Some(end) } else { None };
            if horizontal {
                Point::new(align.map_or(turn_center.x, |p| p.x), cur.y)
            } else {
                Point::new(cur.x, align.map_or(turn_center.y, |p| p.y))
            }
        };
        push(cur, next);
        tap_run(taps, &path[rs..=re], cur, next);
        cur = next;
        if is_final {
            push(cur, end);
            taps.entry(path[re]).or_insert(end);
        }
    }
    if path.len() == 1 {
        // Start and end share a cell: a direct L, lower corner first.
        let c1 = Point::new(start.x, end.y);
        let c2 = Point::new(end.x, start.y);
        let corner = if (c1.y, c1.x) <= (c2.y, c2.x) { c1 } else { c2 };
        push(start, corner);
        push(corner, end);
        taps.entry(path[0]).or_insert(start);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{Instance, MacroDef, Net, PinRef};
    use crate::design::library::{cell_name, CellKind, CellSize, PinSlot};
    use crate::geom::Rect;
    use crate::route::{global_route, RouteConfig};

    /// Two-instance design with one 2-pin net and an optional macro wall.
    fn tiny_design(driver_xy: (f64, f64), sink_xy: (f64, f64), macros: Vec<MacroDef>) -> Design {
        let inv = cell_name(CellKind::Inv, CellSize::X1);
        Design {
            name: "tiny".into(),
            clock_period_ns: 1.0,
            gcell_um: 10.0,
            die: Rect::new(0.0, 0.0, 30.0, 30.0),
            layers: crate::design::generate::default_layers(),
            macros,
            instances: vec![
                Instance { name: "u0".into(), cell: inv.clone(), loc: Point::new(driver_xy.0, driver_xy.1) },
                Instance { name: "u1".into(), cell: inv, loc: Point::new(sink_xy.0, sink_xy.1) },
            ],
            nets: vec![Net {
                name: "n0".into(),
                driver: PinRef { inst: crate::design::InstId(0), pin: PinSlot::Out },
                sinks: vec![PinRef { inst: crate::design::InstId(1), pin: PinSlot::In(0) }],
            }],
        }
    }

    fn no_jitter() -> DrConfig {
        DrConfig { jitter_prob: 0.0, ..DrConfig::default() }
    }

    #[test]
    fn uncongested_net_matches_global_route_length() {
        let design = tiny_design((2.0, 3.0), (24.0, 22.0), Vec::new());
        let lib = CellLibrary::standard();
        let gr = global_route(&design, &lib, &RouteConfig::default());
        let dr = detailed_route_oracle(&design, &lib, &gr, &no_jitter()).unwrap();
        let pins = design.net_pin_points(&lib, design.net(NetId(0)));
        dr.trees[0].validate(&pins).unwrap();
        assert!((dr.trees[0].total_length() - gr.trees[0].total_length()).abs() < 1e-9);
        assert!(!dr.detoured[0]);
    }

    #[test]
    fn blocked_center_forces_detour() {
        // 3x3 grid, center cell fully blocked, pins mid-left and mid-right:
        // the path spends 4 extra-cell steps instead of the straight 2.
        let design = tiny_design(
            (1.0, 13.0),
            (26.0, 13.0),
            vec![MacroDef { name: "m".into(), rect: Rect::new(10.0, 10.0, 20.0, 20.0), blocked_layer_count: 2 }],
        );
        let lib = CellLibrary::standard();
        let gr = global_route(&design, &lib, &RouteConfig::default());
        let blockage = BlockageGrid::build(&design);
        let map = CongestionMap::empty(design.grid(), 10.0);
        let cfg = no_jitter();
        let maze = Maze { grid: &design.grid(), blockage: &blockage, map: &map, cfg: &cfg, pin_cells: vec![] };
        let path = maze.search(&[design.grid().index(0, 1)], design.grid().index(2, 1)).unwrap();
        assert_eq!(path.len(), 5, "4 steps instead of 2: {path:?}");
        assert!(!path.contains(&design.grid().index(1, 1)));

        let dr = detailed_route_oracle(&design, &lib, &gr, &cfg).unwrap();
        assert!(dr.detoured[0]);
        assert!(dr.trees[0].total_length() > gr.trees[0].total_length());
        let pins = design.net_pin_points(&lib, design.net(NetId(0)));
        dr.trees[0].validate(&pins).unwrap();
    }

    #[test]
    fn fully_sealed_sink_is_an_error() {
        // All four neighbors of the sink's cell (1,1) are fully covered by
        // macros; only pin cells are exempt from blockage, so no path from
        // the driver's corner cell can enter the ring.
        let full = |x0, y0| MacroDef {
            name: format!("m{x0}{y0}"),
            rect: Rect::new(x0, y0, x0 + 10.0, y0 + 10.0),
            blocked_layer_count: 2,
        };
        let design = tiny_design(
            (1.0, 3.0),
            (13.0, 13.0),
            vec![full(0.0, 10.0), full(10.0, 0.0), full(20.0, 10.0), full(10.0, 20.0)],
        );
        let lib = CellLibrary::standard();
        let gr = global_route(&design, &lib, &RouteConfig::default());
        let err = detailed_route_oracle(&design, &lib, &gr, &no_jitter()).unwrap_err();
        assert!(matches!(err, Error::UnroutableNet { .. }), "got {err:?}");
    }

    #[test]
    fn oracle_is_deterministic() {
        let design = tiny_design((2.0, 3.0), (24.0, 22.0), Vec::new());
        let lib = CellLibrary::standard();
        let gr = global_route(&design, &lib, &RouteConfig::default());
        let cfg = DrConfig { seed: 7, ..DrConfig::default() };
        let a = detailed_route_oracle(&design, &lib, &gr, &cfg).unwrap();
        let b = detailed_route_oracle(&design, &lib, &gr, &cfg).unwrap();
        assert_eq!(a.trees, b.trees);
        assert_eq!(a.congestion, b.congestion);
    }
}
