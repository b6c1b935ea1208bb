//! RC trees built from route geometry.

use crate::scalar::Scalar;

use crate::design::library::CellLibrary;
use crate::design::Design;
use crate::route::RouteTree;
use crate::timing::pi::Moments;

/// Rooted RC tree: node 0 is the driving point. Each non-root node hangs off
/// its parent through one resistance; capacitance lumps at nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct RcTree<T> {
    parent: Vec<Option<(usize, T)>>,
    cap: Vec<T>,
    children: Vec<Vec<usize>>,
    /// RC node of each net sink, in net sink order.
    pub sink_nodes: Vec<usize>,
}

impl<T: Scalar> RcTree<T> {
    /// Tree with just the driving point.
    pub fn root_only() -> Self {
        RcTree { parent: vec![None], cap: vec![T::zero()], children: vec![Vec::new()], sink_nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.cap.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn add_child(&mut self, parent: usize, resistance: T, cap: T) -> usize {
        assert!(parent < self.len());
        let id = self.len();
        self.parent.push(Some((parent, resistance)));
        self.cap.push(cap);
        self.children.push(Vec::new());
        self.children[parent].push(id);
        id
    }

    pub fn add_cap(&mut self, node: usize, cap: T) {
        self.cap[node] += cap;
    }

    pub fn cap(&self, node: usize) -> T {
        self.cap[node]
    }

    pub fn total_cap(&self) -> T {
        self.cap.iter().copied().sum()
    }

    /// Nodes ordered parents-before-children. Construction pushes children
    /// after parents, so this is just 0..len.
    fn topo(&self) -> std::ops::Range<usize> {
        0..self.len()
    }

    /// First three driving-point admittance moments at the root.
    ///
    /// Leaf-to-root recurrence: a node's capacitance adds to y1; carrying
    /// moments through a series resistance r maps (y1, y2, y3) to
    /// (y1, y2 - r*y1^2, y3 - 2r*y1*y2 + r^2*y1^3); siblings add
    /// componentwise.
    pub fn admittance_moments(&self) -> Moments<T> {
        let mut m: Vec<Moments<T>> = vec![Moments::zero(); self.len()];
        for node in self.topo().rev() {
            let mut acc = Moments::zero();
            for &child in &self.children[node] {
                let (_, r) = self.parent[child].expect("child has parent");
                acc = acc + m[child].through_resistance(r);
            }
            acc.y1 += self.cap[node];
            m[node] = acc;
        }
        m[0]
    }

    /// Elmore delay from the root to every node: sum over the root path of
    /// each edge resistance times the capacitance downstream of it.
    pub fn elmore_all(&self) -> Vec<T> {
        let mut down = self.cap.clone();
        for node in self.topo().rev() {
            if let Some((p, _)) = self.parent[node] {
                let d = down[node];
                down[p] += d;
            }
        }
        let mut delay = vec![T::zero(); self.len()];
        for node in self.topo() {
            if let Some((p, r)) = self.parent[node] {
                delay[node] = delay[p] + r * down[node];
            }
        }
        delay
    }

    /// Elmore delay to one sink (by net sink index).
    pub fn elmore_to_sink(&self, sink_idx: usize) -> T {
        self.elmore_all()[self.sink_nodes[sink_idx]]
    }
}

/// Expands a route tree into an RC tree: each segment contributes its layer's
/// series resistance with half its capacitance lumped at either end, and each
/// sink pin adds the sink cell's input capacitance.
pub fn build_rc_tree(design: &Design, lib: &CellLibrary, route: &RouteTree) -> RcTree<f64> {
    let mut rc = RcTree::<f64>::root_only();
    // Route node -> RC node, filled by walking the route tree from its root.
    let mut rc_node = vec![usize::MAX; route.nodes.len()];
    rc_node[route.root] = 0;
    for (node, parent, si) in route.walk() {
        let seg = &route.segs[si];
        let layer = &design.layers[seg.layer as usize];
        let len = route.seg_length(seg);
        let r = len * layer.r_per_um;
        let c_half = len * layer.c_per_um / 2.0;
        rc.add_cap(rc_node[parent], c_half);
        rc_node[node] = rc.add_child(rc_node[parent], r, c_half);
    }
    let net = design.net(route.net);
    rc.sink_nodes = route
        .sink_nodes
        .iter()
        .enumerate()
        .map(|(si, &rn)| {
            let node = rc_node[rn];
            debug_assert!(node != usize::MAX, "sink lies on the route tree");
            let sink = net.sinks[si];
            let cell = lib.cell(&design.instance(sink.inst).cell).expect("validated");
            rc.add_cap(node, cell.input_cap_pf);
            node
        })
        .collect();
    rc
}
