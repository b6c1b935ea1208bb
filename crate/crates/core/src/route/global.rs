//! Global routing: Steiner trees per net plus the GCell congestion map.

use crate::design::library::CellLibrary;
use crate::design::{Design, GcellGrid};
use crate::geom::Rect;
use crate::route::{assign_layers, steiner_tree, CongestionMap, RouteTree};

#[derive(Clone, Copy, Debug)]
pub struct RouteConfig {
    /// Segments longer than this promote one layer pair.
    pub promote_threshold_um: f64,
}

impl Default for RouteConfig {
    fn default() -> Self {
        RouteConfig { promote_threshold_um: 100.0 }
    }
}

#[derive(Clone, Debug)]
pub struct GlobalRoutes {
    /// One route per net, indexed by net id.
    pub trees: Vec<RouteTree>,
    pub congestion: CongestionMap,
}

/// Routes every net independently and accumulates demand: each segment adds
/// one track to every GCell it crosses.
pub fn global_route(design: &Design, lib: &CellLibrary, cfg: &RouteConfig) -> GlobalRoutes {
    let grid = design.grid();
    let mut routes = GlobalRoutes {
        trees: Vec::with_capacity(design.nets.len()),
        congestion: CongestionMap::empty(grid, f64::from(design.gcell_capacity())),
    };
    let all: Vec<crate::design::NetId> = design.net_ids().collect();
    gr_reroute(design, lib, cfg, &mut routes, &all);
    routes
}

/// Rips up and re-routes `dirty` nets. Nets route independently of demand,
/// so the result equals a from-scratch [`global_route`] of the mutated
/// design. New nets (ids past the end of `routes.trees`) are appended;
/// `routes.trees` must stay aligned with `design.nets`, so every new id
/// must be in `dirty`.
pub fn gr_reroute(
    design: &Design,
    lib: &CellLibrary,
    cfg: &RouteConfig,
    routes: &mut GlobalRoutes,
    dirty: &[crate::design::NetId],
) {
    use crate::design::NetId;
    let known = routes.trees.len();
    for id in dirty {
        if (id.0 as usize) < known {
            add_demand(&mut routes.congestion, &routes.trees[id.0 as usize], -1.0);
        }
    }
    for id in known..design.nets.len() {
        assert!(dirty.contains(&NetId(id as u32)), "new net {id} must be rerouted");
        routes.trees.push(RouteTree::single_point(
            NetId(id as u32),
            crate::geom::Point::new(design.die.x0, design.die.y0),
            0,
        ));
    }
    for &id in dirty {
        let pins = design.net_pin_points(lib, design.net(id));
        let mut tree = steiner_tree(id, &pins);
        assign_layers(&mut tree, &design.layers, cfg.promote_threshold_um, None);
        add_demand(&mut routes.congestion, &tree, 1.0);
        routes.trees[id.0 as usize] = tree;
    }
}

/// Adds (or with `sign = -1.0`, removes) a route's track demand.
pub(crate) fn add_demand(map: &mut CongestionMap, tree: &RouteTree, sign: f64) {
    for seg in &tree.segs {
        if tree.seg_length(seg) == 0.0 {
            continue;
        }
        for idx in cells_crossed(&map.grid, &tree.seg_rect(seg)) {
            map.demand[idx] += sign;
        }
    }
}

/// Linear indices of the GCells a zero-thickness segment rect crosses.
pub(crate) fn cells_crossed(grid: &GcellGrid, rect: &Rect) -> Vec<usize> {
    let ((x0, y0), (x1, y1)) = grid.cells_over(rect);
    let mut out = Vec::with_capacity((x1 - x0 + 1) * (y1 - y0 + 1));
    for iy in y0..=y1 {
        for ix in x0..=x1 {
            out.push(grid.index(ix, iy));
        }
    }
    out
}

/// Mean and population standard deviation of utilization over the GCells
/// intersecting `bbox`.
pub fn congestion_stats(map: &CongestionMap, bbox: &Rect) -> (f64, f64) {
    let ((x0, y0), (x1, y1)) = map.grid.cells_over(bbox);
    let mut n = 0usize;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for iy in y0..=y1 {
        for ix in x0..=x1 {
            let u = map.util(ix, iy);
            n += 1;
            sum += u;
            sum_sq += u * u;
        }
    }
    let mean = sum / n as f64;
    let var = (sum_sq / n as f64 - mean * mean).max(0.0);
    (mean, var.sqrt())
}

/// Number of GCells with utilization strictly above `threshold`.
pub fn count_congested(map: &CongestionMap, threshold: f64) -> usize {
    (0..map.demand.len()).filter(|&i| map.util_at(i) > threshold).count()
}
