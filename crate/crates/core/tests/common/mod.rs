//! Shared oracles for the integration tests.
#![allow(dead_code)]

use cascade_steering::laser::SteadyStateMoments;

/// Relative difference, zero when both values are exactly zero.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect()
}

/// Stationary moments in their uncancelled form, singular at `η = 0`.
pub fn raw_moments(a: f64, k: f64, e: f64) -> SteadyStateMoments {
    let slow = 4.0 * (k + a * e) * e;
    let fast = 2.0 * (2.0 * k + a * e) * e;
    let root = (1.0 - e * e).sqrt();
    SteadyStateMoments {
        n1: -a * (1.0 - e).powi(2) / slow + a * (1.0 - e * e) / fast,
        n2: -a * (1.0 - e * e) / slow + a * (1.0 - e * e) / fast,
        m: -a * (1.0 - e) * root / slow + a * root / fast,
    }
}
