//! Wire delay and slew degradation models.

use crate::scalar::Scalar;

/// ln 9, the step-response factor tying an Elmore time constant to a
/// 10-90 transition time.
pub const LN9: f64 = 2.197224577336220;

/// Slew at a sink after traversing a wire with the given Elmore delay,
/// by the PERI square-root rule.
pub fn sink_slew<T: Scalar>(driver_slew: T, elmore: T) -> T {
    let wire = T::c(LN9) * elmore;
    (driver_slew * driver_slew + wire * wire).sqrt()
}

/// Slew added by the wire alone: sink slew minus driver slew. Non-negative.
pub fn wire_slew<T: Scalar>(driver_slew: T, elmore: T) -> T {
    sink_slew(driver_slew, elmore) - driver_slew
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln9_constant_matches_formula() {
        assert!((LN9 - 9.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn zero_wire_adds_no_slew() {
        assert_eq!(wire_slew(0.05, 0.0), 0.0);
        assert_eq!(sink_slew(0.05, 0.0), 0.05);
    }

    #[test]
    fn sink_slew_follows_square_root_rule() {
        let s = sink_slew(0.04, 0.01);
        let expect = (0.04f64 * 0.04 + (LN9 * 0.01) * (LN9 * 0.01)).sqrt();
        assert!((s - expect).abs() < 1e-15);
        assert!(wire_slew(0.04, 0.01) > 0.0);
    }

    #[test]
    fn wire_slew_is_monotone_in_elmore() {
        let mut last = 0.0;
        for k in 0..20 {
            let w = wire_slew(0.03, 0.002 * k as f64);
            assert!(w >= last);
            last = w;
        }
    }
}
