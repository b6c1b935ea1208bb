//! Label perturbation for robustness studies.

use rand_distr::{Distribution, Normal};

use crate::seed::{stage_rng, STAGE_NOISE};

/// Adds `N(0, sigma)` to each label. Sigma is in the label's own units
/// (ns for delays and slews, pF for capacitances), so the same sigma hits
/// short nets proportionally harder than long ones. Zero sigma leaves
/// labels untouched (and draws nothing). Deterministic in (seed, stream).
pub fn apply_label_noise(labels: &mut [f64], sigma: f64, seed: u64, stream: u64) {
    if sigma == 0.0 {
        return;
    }
    let mut rng = stage_rng(seed, STAGE_NOISE, stream);
    let normal = Normal::new(0.0, sigma).expect("sigma is finite and non-negative");
    for v in labels.iter_mut() {
        *v += normal.sample(&mut rng);
    }
}
