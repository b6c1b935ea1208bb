//! Macro blockage fractions on the GCell grid.

use crate::design::{Design, GcellGrid};
use crate::geom::Rect;

/// Fraction of each GCell's area covered by routing-blocking macros.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockageGrid {
    pub grid: GcellGrid,
    pub frac: Vec<f64>,
}

impl BlockageGrid {
    /// Exact macro/cell intersection areas. Macros never overlap, so the
    /// per-cell fractions just add.
    pub fn build(design: &Design) -> BlockageGrid {
        let grid = design.grid();
        let mut frac = vec![0.0; grid.len()];
        for m in design.macros.iter().filter(|m| m.is_blocking()) {
            let clipped = m.rect.clip(&design.die);
            if clipped.area() == 0.0 {
                continue;
            }
            let ((x0, y0), (x1, y1)) = grid.cells_over(&clipped);
            for iy in y0..=y1 {
                for ix in x0..=x1 {
                    let cell = grid.cell_rect(ix, iy);
                    frac[grid.index(ix, iy)] += clipped.intersection_area(&cell) / cell.area();
                }
            }
        }
        for f in &mut frac {
            *f = f.min(1.0);
        }
        BlockageGrid { grid, frac }
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.frac[self.grid.index(ix, iy)]
    }

    /// Mean blockage over the GCells intersecting `bbox` (each cell weighted
    /// equally).
    pub fn mean_over(&self, bbox: &Rect) -> f64 {
        let ((x0, y0), (x1, y1)) = self.grid.cells_over(bbox);
        let mut n = 0usize;
        let mut sum = 0.0;
        for iy in y0..=y1 {
            for ix in x0..=x1 {
                sum += self.at(ix, iy);
                n += 1;
            }
        }
        sum / n as f64
    }

    /// Total blocked area implied by the grid, for conservation checks.
    pub fn blocked_area(&self) -> f64 {
        let mut sum = 0.0;
        for iy in 0..self.grid.ny {
            for ix in 0..self.grid.nx {
                sum += self.at(ix, iy) * self.grid.cell_rect(ix, iy).area();
            }
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{Design, MacroDef};

    fn empty_design(die: Rect, macros: Vec<MacroDef>) -> Design {
        Design {
            name: "blk".into(),
            clock_period_ns: 1.0,
            gcell_um: 10.0,
            die,
            layers: crate::design::generate::default_layers(),
            macros,
            instances: Vec::new(),
            nets: Vec::new(),
        }
    }

    fn blocking(name: &str, rect: Rect) -> MacroDef {
        MacroDef { name: name.into(), rect, blocked_layer_count: 3 }
    }

    #[test]
    fn partial_cover_gives_exact_fraction() {
        // Macro covering 8 um of a 10 um cell in x: fraction 0.80.
        let d = empty_design(
            Rect::new(0.0, 0.0, 100.0, 100.0),
            vec![blocking("m0", Rect::new(0.0, 0.0, 8.0, 10.0))],
        );
        let g = BlockageGrid::build(&d);
        assert!((g.at(0, 0) - 0.8).abs() < 1e-12);
        assert_eq!(g.at(1, 0), 0.0);
    }

    #[test]
    fn non_blocking_macro_is_ignored() {
        let d = empty_design(
            Rect::new(0.0, 0.0, 100.0, 100.0),
            vec![MacroDef { name: "m0".into(), rect: Rect::new(0.0, 0.0, 40.0, 40.0), blocked_layer_count: 1 }],
        );
        let g = BlockageGrid::build(&d);
        assert_eq!(g.blocked_area(), 0.0);
    }

    #[test]
    fn area_is_conserved() {
        let d = empty_design(
            Rect::new(0.0, 0.0, 95.0, 85.0),
            vec![
                blocking("m0", Rect::new(3.0, 7.0, 41.5, 33.25)),
                blocking("m1", Rect::new(50.0, 50.0, 95.0, 85.0)),
            ],
        );
        let g = BlockageGrid::build(&d);
        let want: f64 = d.macros.iter().map(|m| m.rect.clip(&d.die).area()).sum();
        assert!((g.blocked_area() - want).abs() <= 1e-6 * want);
    }

    #[test]
    fn mean_over_mixed_cells() {
        // Cells {0.8, 0.8, 0.4, 0.2, 0, 0} average to 0.3667.
        let d = empty_design(
            Rect::new(0.0, 0.0, 60.0, 10.0),
            vec![
                blocking("m0", Rect::new(2.0, 0.0, 10.0, 10.0)),  // cell 0: 0.8
                blocking("m1", Rect::new(10.0, 0.0, 18.0, 10.0)), // cell 1: 0.8
                blocking("m2", Rect::new(21.0, 0.0, 25.0, 10.0)), // cell 2: 0.4
                blocking("m3", Rect::new(30.0, 0.0, 32.0, 10.0)), // cell 3: 0.2
            ],
        );
        let g = BlockageGrid::build(&d);
        let mean = g.mean_over(&Rect::new(0.0, 0.0, 60.0, 10.0));
        assert!((mean - 2.2 / 6.0).abs() < 1e-12, "got {mean}");
        assert_eq!(g.mean_over(&Rect::new(40.0, 0.0, 60.0, 10.0)), 0.0);
    }
}
