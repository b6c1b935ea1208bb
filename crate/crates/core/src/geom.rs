//! Planar geometry primitives. Coordinates are micrometers.

use serde::{Deserialize, Serialize};

/// Routing direction of a layer or wire segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dir {
    H,
    V,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn manhattan(self, other: Point) -> f64 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }
}

/// Axis-aligned rectangle, `x0 <= x1`, `y0 <= y1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        debug_assert!(x0 <= x1 && y0 <= y1);
        Rect { x0, y0, x1, y1 }
    }

    /// Smallest rectangle containing every point. Empty input yields a
    /// degenerate rect at the origin.
    pub fn bounding(points: &[Point]) -> Rect {
        let mut r = match points.first() {
            Some(p) => Rect::new(p.x, p.y, p.x, p.y),
            None => return Rect::new(0.0, 0.0, 0.0, 0.0),
        };
        for p in &points[1..] {
            r.x0 = r.x0.min(p.x);
            r.y0 = r.y0.min(p.y);
            r.x1 = r.x1.max(p.x);
            r.y1 = r.y1.max(p.y);
        }
        r
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    /// Interior containment, boundary excluded.
    pub fn contains_strict(&self, p: Point) -> bool {
        p.x > self.x0 && p.x < self.x1 && p.y > self.y0 && p.y < self.y1
    }

    pub fn intersection_area(&self, other: &Rect) -> f64 {
        let w = (self.x1.min(other.x1) - self.x0.max(other.x0)).max(0.0);
        let h = (self.y1.min(other.y1) - self.y0.max(other.y0)).max(0.0);
        w * h
    }

    pub fn overlaps(&self, other: &Rect) -> bool {
        self.x0 < other.x1 && other.x0 < self.x1 && self.y0 < other.y1 && other.y0 < self.y1
    }

    /// Scales width and height by `factor` about the center.
    pub fn expand(&self, factor: f64) -> Rect {
        let cx = (self.x0 + self.x1) / 2.0;
        let cy = (self.y0 + self.y1) / 2.0;
        let hw = self.width() / 2.0 * factor;
        let hh = self.height() / 2.0 * factor;
        Rect::new(cx - hw, cy - hh, cx + hw, cy + hh)
    }

    /// Clips to `bounds`; degenerates to a boundary sliver if disjoint.
    pub fn clip(&self, bounds: &Rect) -> Rect {
        Rect {
            x0: self.x0.max(bounds.x0).min(bounds.x1),
            y0: self.y0.max(bounds.y0).min(bounds.y1),
            x1: self.x1.min(bounds.x1).max(bounds.x0),
            y1: self.y1.min(bounds.y1).max(bounds.y0),
        }
    }

    /// Grows by `margin` on all sides.
    pub fn inflate(&self, margin: f64) -> Rect {
        Rect::new(self.x0 - margin, self.y0 - margin, self.x1 + margin, self.y1 + margin)
    }
}

/// Half-perimeter wirelength of a point set.
pub fn hpwl(points: &[Point]) -> f64 {
    let r = Rect::bounding(points);
    r.width() + r.height()
}

/// Snaps to the two-decimal grid used by design files.
pub fn q2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hpwl_three_pin_example() {
        let pts = [Point::new(0.0, 0.0), Point::new(5.0, 1.0), Point::new(2.0, 7.0)];
        assert_eq!(hpwl(&pts), 12.0);
    }

    #[test]
    fn hpwl_degenerate_single_pin() {
        assert_eq!(hpwl(&[Point::new(3.0, 4.0)]), 0.0);
    }

    #[test]
    fn expand_doubles_about_center() {
        let r = Rect::new(0.0, 0.0, 10.0, 4.0).expand(2.0);
        assert_eq!(r, Rect::new(-5.0, -2.0, 15.0, 6.0));
    }

    #[test]
    fn clip_handles_disjoint_rects() {
        let die = Rect::new(0.0, 0.0, 100.0, 100.0);
        let r = Rect::new(-20.0, -20.0, -10.0, -10.0).clip(&die);
        assert_eq!(r.area(), 0.0);
    }

    #[test]
    fn intersection_area_partial_overlap() {
        let a = Rect::new(0.0, 0.0, 10.0, 10.0);
        let b = Rect::new(8.0, 9.0, 20.0, 20.0);
        assert_eq!(a.intersection_area(&b), 2.0);
    }

    #[test]
    fn q2_rounds_to_grid() {
        assert_eq!(q2(177.12501), 177.13);
        assert_eq!(q2(10.0), 10.0);
        assert_eq!(q2(q2(3.217)), q2(3.217));
    }
}
