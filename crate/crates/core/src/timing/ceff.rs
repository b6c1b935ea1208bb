//! Effective capacitance of a pi load.

use crate::scalar::Scalar;
use crate::timing::pi::PiModel;

const MAX_ITERS: usize = 10;

/// Effective capacitance seen by a driver through a pi load.
///
/// The far capacitance is shielded by the pi resistance; the shielding
/// factor over a switching window `dt` is
/// `f = 1 - (R*C1/dt) * (1 - exp(-dt/(R*C1)))`, giving `C_eff = C2 + f*C1`,
/// clamped to `[C2, C1+C2]`. The window couples back to the load through the
/// driver (`dt = transition + r_driver*C_eff`), so the value is found by
/// fixed-point iteration: at most 10 rounds or until the relative change
/// drops below 1e-3.
pub fn ceff<T: Scalar>(pi: PiModel<T>, driver_res: T, transition: T) -> T {
    let total = pi.total_cap();
    if pi.r <= T::zero() || pi.c1 <= T::zero() {
        return total;
    }
    let rc = pi.r * pi.c1;
    let mut c = total;
    for _ in 0..MAX_ITERS {
        let dt = transition + driver_res * c;
        let f = if dt <= T::zero() {
            T::zero()
        } else {
            // exp_m1 keeps 1 - exp(-x) accurate for small windows.
            T::one() - (rc / dt) * -((-dt / rc).exp_m1())
        };
        let next = num_traits::clamp(pi.c2 + f * pi.c1, pi.c2, total);
        let done = (next - c).abs() <= T::c(1e-3) * c.abs();
        c = next;
        if done {
            break;
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_window_matches_direct_formula() {
        // r_driver = 0 pins the window at the input transition, so one
        // evaluation of the shielding factor is the answer.
        let pi = PiModel { r: 1.0, c1: 0.1, c2: 0.05 };
        let c = ceff(pi, 0.0, 0.1);
        let f = 1.0 - (0.1f64 / 0.1) * (1.0 - (-0.1f64 / 0.1).exp());
        let expect = 0.05 + f * 0.1;
        assert!((c - expect).abs() < 1e-12, "got {c}, want {expect}");
        assert!(c > pi.c2 && c < pi.total_cap());
    }

    #[test]
    fn vanishing_pi_resistance_recovers_total_cap() {
        let pi: PiModel<f64> = PiModel { r: 1e-9, c1: 0.08, c2: 0.02 };
        let c = ceff(pi, 0.1, 0.05);
        assert!((c - 0.1).abs() < 1e-6);
    }

    #[test]
    fn huge_window_recovers_total_cap() {
        let pi: PiModel<f64> = PiModel { r: 2.0, c1: 0.08, c2: 0.02 };
        let c = ceff(pi, 0.0, 1e3);
        assert!((c - 0.1).abs() < 1e-4);
    }

    #[test]
    fn tiny_window_shields_down_to_near_c2() {
        let pi: PiModel<f64> = PiModel { r: 2.0, c1: 0.08, c2: 0.02 };
        let c = ceff(pi, 0.0, 1e-7);
        assert!(c < 0.0201, "got {c}");
        assert!(c >= pi.c2);
    }

    #[test]
    fn lumped_load_passes_through() {
        let pi = PiModel::lumped(0.03);
        assert_eq!(ceff(pi, 0.5, 0.1), 0.03);
    }
}
