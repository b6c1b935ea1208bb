//! Global routing and the detailed-route oracle.
//!
//! Global routing builds rectilinear Steiner trees per net, assigns layers
//! by direction, and accumulates a GCell congestion map. The detailed-route
//! oracle ([`maze`]) then re-routes every net through the congestion- and
//! blockage-aware GCell graph, standing in for a real detailed router as the
//! source of ground-truth parasitics.

pub mod global;
pub mod io;
pub mod layers;
pub mod maze;
pub mod steiner;

use crate::design::{GcellGrid, NetId};
use crate::geom::{Dir, Point, Rect};

pub use global::{congestion_stats, count_congested, global_route, gr_reroute, GlobalRoutes, RouteConfig};
pub use io::{load_congestion, load_routes, save_congestion, save_routes};
pub use layers::assign_layers;
pub use maze::{detailed_route_oracle, dr_reroute, DrConfig, DrResult};
pub use steiner::steiner_tree;

/// One axis-aligned wire between two route nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RouteSeg {
    pub a: u32,
    pub b: u32,
    pub layer: u8,
}

/// Routed topology of one net: a tree over geometric nodes. Node `root`
/// coincides with the driver pin; `sink_nodes[i]` with the net's i-th sink.
#[derive(Clone, Debug, PartialEq)]
pub struct RouteTree {
    pub net: NetId,
    pub nodes: Vec<Point>,
    pub segs: Vec<RouteSeg>,
    pub root: usize,
    pub sink_nodes: Vec<usize>,
}

impl RouteTree {
    /// Degenerate route for a net whose pins coincide.
    pub fn single_point(net: NetId, p: Point, n_sinks: usize) -> Self {
        RouteTree { net, nodes: vec![p], segs: Vec::new(), root: 0, sink_nodes: vec![0; n_sinks] }
    }

    pub fn seg_length(&self, seg: &RouteSeg) -> f64 {
        self.nodes[seg.a as usize].manhattan(self.nodes[seg.b as usize])
    }

    pub fn seg_dir(&self, seg: &RouteSeg) -> Dir {
        let a = self.nodes[seg.a as usize];
        let b = self.nodes[seg.b as usize];
        if (a.y - b.y).abs() > (a.x - b.x).abs() {
            Dir::V
        } else {
            Dir::H
        }
    }

    pub fn total_length(&self) -> f64 {
        self.segs.iter().map(|s| self.seg_length(s)).sum()
    }

    /// Bounding rect of the segment, zero-thickness across its direction.
    pub fn seg_rect(&self, seg: &RouteSeg) -> Rect {
        let a = self.nodes[seg.a as usize];
        let b = self.nodes[seg.b as usize];
        Rect::new(a.x.min(b.x), a.y.min(b.y), a.x.max(b.x), a.y.max(b.y))
    }

    /// Tree edges in parent-before-child order from the root. Yields
    /// `(child_node, parent_node, seg_index)`; deterministic.
    pub fn walk(&self) -> Vec<(usize, usize, usize)> {
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.nodes.len()];
        for (si, s) in self.segs.iter().enumerate() {
            adj[s.a as usize].push((s.b as usize, si));
            adj[s.b as usize].push((s.a as usize, si));
        }
        let mut out = Vec::with_capacity(self.segs.len());
        let mut visited = vec![false; self.nodes.len()];
        let mut stack = vec![self.root];
        visited[self.root] = true;
        while let Some(n) = stack.pop() {
            for &(m, si) in &adj[n] {
                if !visited[m] {
                    visited[m] = true;
                    out.push((m, n, si));
                    stack.push(m);
                }
            }
        }
        debug_assert_eq!(out.len(), self.segs.len(), "route tree is connected and acyclic");
        out
    }

    /// Tree edges from the root to the given sink, in path order.
    pub fn path_to_sink(&self, sink_idx: usize) -> Vec<&RouteSeg> {
        let target = self.sink_nodes[sink_idx];
        let mut parent_of: Vec<Option<(usize, usize)>> = vec![None; self.nodes.len()];
        for (child, parent, si) in self.walk() {
            parent_of[child] = Some((parent, si));
        }
        let mut path = Vec::new();
        let mut n = target;
        while let Some((p, si)) = parent_of[n] {
            path.push(&self.segs[si]);
            n = p;
        }
        path.reverse();
        path
    }

    /// Structural checks: spanning tree, pins on nodes.
    pub fn validate(&self, pins: &[Point]) -> crate::Result<()> {
        let err = |m: String| crate::Error::Other(format!("net {}: {m}", self.net.0));
        if self.nodes.is_empty() {
            return Err(err("route has no nodes".into()));
        }
        if self.segs.len() + 1 != self.nodes.len() {
            return Err(err(format!(
                "not a tree: {} nodes, {} segments",
                self.nodes.len(),
                self.segs.len()
            )));
        }
        if self.walk().len() != self.segs.len() {
            return Err(err("route graph is not connected".into()));
        }
        let on_node = |p: Point| self.nodes.iter().any(|&n| n == p);
        if !on_node(pins[0]) || self.nodes[self.root] != pins[0] {
            return Err(err("driver pin not at route root".into()));
        }
        for (i, &s) in self.sink_nodes.iter().enumerate() {
            if self.nodes[s] != pins[i + 1] {
                return Err(err(format!("sink {i} not on its route node")));
            }
        }
        Ok(())
    }
}

/// Per-GCell routing supply and demand. Utilization is `demand / capacity`.
#[derive(Clone, Debug, PartialEq)]
pub struct CongestionMap {
    pub grid: GcellGrid,
    pub capacity: f64,
    pub demand: Vec<f64>,
}

impl CongestionMap {
    pub fn empty(grid: GcellGrid, capacity: f64) -> Self {
        assert!(capacity > 0.0);
        CongestionMap { grid, capacity, demand: vec![0.0; grid.len()] }
    }

    pub fn util(&self, ix: usize, iy: usize) -> f64 {
        self.demand[self.grid.index(ix, iy)] / self.capacity
    }

    pub fn util_at(&self, idx: usize) -> f64 {
        self.demand[idx] / self.capacity
    }
}
