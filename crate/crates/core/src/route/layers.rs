//! Direction-legal layer assignment with length- and congestion-based
//! promotion.

use crate::design::Layer;
use crate::geom::Dir;
use crate::route::{global::cells_crossed, CongestionMap, RouteTree};

/// Assigns every segment the layer of its direction in the base pair;
/// segments longer than `promote_threshold_um` move up one pair, as do
/// segments crossing a cell above the congestion threshold when a map is
/// given (the detailed-route reassignment rule).
pub fn assign_layers(
    tree: &mut RouteTree,
    layers: &[Layer],
    promote_threshold_um: f64,
    congestion: Option<(&CongestionMap, f64)>,
) {
    let pairs = layers.len() / 2;
    assert!(pairs >= 1, "stack has at least one H/V pair");
    let seg_meta: Vec<(Dir, f64, bool)> = tree
        .segs
        .iter()
        .map(|seg| {
            let crowded = congestion.is_some_and(|(map, theta)| {
                cells_crossed(&map.grid, &tree.seg_rect(seg)).into_iter().any(|idx| map.util_at(idx) > theta)
            });
            (tree.seg_dir(seg), tree.seg_length(seg), crowded)
        })
        .collect();
    for (seg, (dir, len, crowded)) in tree.segs.iter_mut().zip(seg_meta) {
        let mut pair = 0usize;
        if len > promote_threshold_um {
            pair += 1;
        }
        if crowded {
            pair += 1;
        }
        pair = pair.min(pairs - 1);
        let base = 2 * pair;
        let idx = if layers[base].dir == dir { base } else { base + 1 };
        seg.layer = idx as u8;
    }
}
