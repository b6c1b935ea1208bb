//! Two-dimensional delay/slew tables with bilinear interpolation.

use crate::scalar::Scalar;
use crate::timing::Edge;

/// Table over (input slew, load) axes. Axes are strictly increasing; values
/// are stored row-major, one row per slew point.
#[derive(Clone, Debug, PartialEq)]
pub struct Lut<T> {
    tau_axis: Vec<T>,
    cap_axis: Vec<T>,
    values: Vec<T>,
}

impl<T: Scalar> Lut<T> {
    pub fn new(tau_axis: Vec<T>, cap_axis: Vec<T>, values: Vec<T>) -> Self {
        assert!(tau_axis.len() >= 2 && cap_axis.len() >= 2, "need at least a 2x2 table");
        assert_eq!(values.len(), tau_axis.len() * cap_axis.len());
        assert!(tau_axis.windows(2).all(|w| w[0] < w[1]), "slew axis must increase");
        assert!(cap_axis.windows(2).all(|w| w[0] < w[1]), "load axis must increase");
        Lut { tau_axis, cap_axis, values }
    }

    pub fn from_fn(tau_axis: Vec<T>, cap_axis: Vec<T>, f: impl Fn(T, T) -> T) -> Self {
        let mut values = Vec::with_capacity(tau_axis.len() * cap_axis.len());
        for &t in &tau_axis {
            for &c in &cap_axis {
                values.push(f(t, c));
            }
        }
        Lut::new(tau_axis, cap_axis, values)
    }

    pub fn value_at(&self, tau_idx: usize, cap_idx: usize) -> T {
        self.values[tau_idx * self.cap_axis.len() + cap_idx]
    }

    /// Bilinear interpolation inside the grid. Outside it, the boundary
    /// cell's gradient extends linearly (clamped-edge extrapolation).
    pub fn lookup(&self, tau: T, cap: T) -> T {
        let (i, t) = segment(&self.tau_axis, tau);
        let (j, u) = segment(&self.cap_axis, cap);
        let v00 = self.value_at(i, j);
        let v01 = self.value_at(i, j + 1);
        let v10 = self.value_at(i + 1, j);
        let v11 = self.value_at(i + 1, j + 1);
        let one = T::one();
        (one - t) * ((one - u) * v00 + u * v01) + t * ((one - u) * v10 + u * v11)
    }
}

/// Bracketing segment index and the (unclamped) interpolation parameter.
fn segment<T: Scalar>(axis: &[T], x: T) -> (usize, T) {
    let mut i = axis.partition_point(|&a| a <= x);
    i = i.saturating_sub(1).min(axis.len() - 2);
    let t = (x - axis[i]) / (axis[i + 1] - axis[i]);
    (i, t)
}

/// Rise and fall variants of one table.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeLuts {
    pub rise: Lut<f64>,
    pub fall: Lut<f64>,
}

impl EdgeLuts {
    pub fn get(&self, edge: Edge) -> &Lut<f64> {
        match edge {
            Edge::Rise => &self.rise,
            Edge::Fall => &self.fall,
        }
    }
}

/// Table lookup for a gate arc under the given transition direction.
pub fn gate_delay(luts: &EdgeLuts, edge: Edge, slew_in: f64, c_load: f64) -> f64 {
    luts.get(edge).lookup(slew_in, c_load)
}
