use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Daily sinusoidal scaling `base + amplitude·sin(2πt/period)` applied to
/// PQ-bus demands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadProfile {
    pub base: f64,
    pub amplitude: f64,
    /// [s]
    pub period: f64,
}

impl Default for LoadProfile {
    fn default() -> Self {
        LoadProfile {
            base: 0.9,
            amplitude: 0.4,
            period: 24.0 * 3600.0,
        }
    }
}

impl LoadProfile {
    /// A profile that leaves demands at their base values.
    pub fn flat() -> Self {
        LoadProfile {
            base: 1.0,
            amplitude: 0.0,
            period: 24.0 * 3600.0,
        }
    }

    pub fn factor(&self, t: f64) -> f64 {
        let s = (2.0 * PI * t / self.period).sin();
        // sin(kπ) is only ~1e-16 in floating point; snap so that the quarter
        // points of the period give exact factors.
        let s = if s.abs() < 1e-12 {
            0.0
        } else if (s.abs() - 1.0).abs() < 1e-12 {
            s.signum()
        } else {
            s
        };
        self.base + self.amplitude * s
    }
}

/// Scaled demand `(P, Q)` at time `t` [s] for base demand `(p_base, q_base)`.
pub fn load_at(t: f64, p_base: f64, q_base: f64, profile: &LoadProfile) -> (f64, f64) {
    let f = profile.factor(t);
    (p_base * f, q_base * f)
}
