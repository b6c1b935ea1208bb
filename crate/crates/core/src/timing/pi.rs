//! Admittance moments and pi-model reduction.
//!
//! A route's downstream RC network is summarized by the first three moments
//! of its driving-point admittance, then reduced to the unique three-element
//! pi load (C1 behind R, C2 at the driving point) that matches those moments
//! exactly.

use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// First three driving-point admittance moments: Y(s) ~ y1 s + y2 s^2 + y3 s^3.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments<T> {
    pub y1: T,
    pub y2: T,
    pub y3: T,
}

impl<T: Scalar> Moments<T> {
    pub fn zero() -> Self {
        Moments { y1: T::zero(), y2: T::zero(), y3: T::zero() }
    }

    /// Moments seen through a series resistance `r`.
    pub fn through_resistance(self, r: T) -> Self {
        let Moments { y1, y2, y3 } = self;
        Moments {
            y1,
            y2: y2 - r * y1 * y1,
            y3: y3 - (T::c(2.0) * r * y1 * y2) + r * r * y1 * y1 * y1,
        }
    }
}

impl<T: Scalar> Add for Moments<T> {
    type Output = Moments<T>;

    fn add(self, rhs: Moments<T>) -> Moments<T> {
        Moments { y1: self.y1 + rhs.y1, y2: self.y2 + rhs.y2, y3: self.y3 + rhs.y3 }
    }
}

/// Three-element pi load: `c2` at the driving point, `r` into `c1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiModel<T> {
    pub r: T,
    pub c1: T,
    pub c2: T,
}

impl<T: Scalar> PiModel<T> {
    pub fn total_cap(&self) -> T {
        self.c1 + self.c2
    }

    /// Purely capacitive load.
    pub fn lumped(c: T) -> Self {
        PiModel { r: T::zero(), c1: T::zero(), c2: c }
    }

    /// The pi network's own admittance moments. Reduction is exact, so for
    /// any RC tree these reproduce the tree's first three moments.
    pub fn moments(&self) -> Moments<T> {
        Moments {
            y1: self.c1 + self.c2,
            y2: -self.r * self.c1 * self.c1,
            y3: self.r * self.r * self.c1 * self.c1 * self.c1,
        }
    }
}

/// O'Brien/Savarino reduction of the first three moments to a pi model.
///
/// Degenerate moment sets (y2 or y3 exactly zero, e.g. a purely capacitive
/// net) collapse to a lumped load.
pub fn reduce_to_pi<T: Scalar>(m: Moments<T>) -> PiModel<T> {
    if m.y2 == T::zero() || m.y3 == T::zero() {
        return PiModel { r: T::zero(), c1: T::zero(), c2: m.y1 };
    }
    let c1 = m.y2 * m.y2 / m.y3;
    PiModel {
        r: -(m.y3 * m.y3) / (m.y2 * m.y2 * m.y2),
        c1,
        c2: m.y1 - c1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timing::rc::RcTree;

    #[test]
    fn lumped_cap_collapses_to_c2() {
        let pi = reduce_to_pi(Moments { y1: 0.2, y2: 0.0, y3: 0.0 });
        assert_eq!(pi, PiModel { r: 0.0, c1: 0.0, c2: 0.2 });
    }

    #[test]
    fn single_segment_pi_matches_hand_reduction() {
        // Moments (0.1, -0.01, 0.001) reduce to r=1.0, c1=0.1, c2=0.0.
        let pi = reduce_to_pi(Moments::<f64> { y1: 0.1, y2: -0.01, y3: 0.001 });
        assert!((pi.r - 1.0).abs() < 1e-12);
        assert!((pi.c1 - 0.1).abs() < 1e-12);
        assert!(pi.c2.abs() < 1e-12);
    }

    #[test]
    fn reduction_preserves_first_three_moments() {
        let mut rc = RcTree::<f64>::root_only();
        let a = rc.add_child(0, 0.4, 0.012);
        let _ = rc.add_child(a, 0.9, 0.03);
        let b = rc.add_child(a, 0.2, 0.008);
        let _ = rc.add_child(b, 1.4, 0.02);
        rc.add_cap(0, 0.004);
        let m = rc.admittance_moments();
        let back = reduce_to_pi(m).moments();
        assert!((m.y1 - back.y1).abs() < 1e-12);
        assert!((m.y2 - back.y2).abs() < 1e-12);
        assert!((m.y3 - back.y3).abs() < 1e-12);
    }

    #[test]
    fn pi_total_cap_equals_tree_cap() {
        let mut rc = RcTree::<f64>::root_only();
        let a = rc.add_child(0, 0.3, 0.01);
        rc.add_child(a, 0.5, 0.02);
        rc.add_cap(0, 0.005);
        let pi = reduce_to_pi(rc.admittance_moments());
        assert!((pi.total_cap() - rc.total_cap()).abs() < 1e-12);
    }
}
