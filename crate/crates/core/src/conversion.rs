//! Gas-power conversion plants.
//!
//! A conversion edge ties a gas sink to a slack bus. The bus's net active
//! power injection P decides the sink's additional outflow: gas is burned
//! (q > 0) while the plant feeds power into the grid and synthesized
//! (q < 0) while it absorbs power. The two linear branches are joined by a
//! quartic on `[-ε, ε]` so that `q(P)` is C¹.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interpolating quartic `S(x, a, b, ε)` with `S(±ε) = ±ε·{a, b}` and
/// slopes `a` at `+ε`, `b` at `−ε`.
pub fn smoothing_s(x: f64, a: f64, b: f64, eps: f64) -> f64 {
    let u = x / eps;
    x * (0.5 * (a + b) - 0.75 * (b - a) * u + 0.25 * (b - a) * u * u * u)
}

/// ∂S/∂x.
pub fn smoothing_s_dx(x: f64, a: f64, b: f64, eps: f64) -> f64 {
    let u = x / eps;
    0.5 * (a + b) - 1.5 * (b - a) * u + (b - a) * u * u * u
}

/// Efficiencies and heating value from which the conversion factors follow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConversionFactors {
    pub eta_gtp: f64,
    pub eta_ptg: f64,
    /// Lower heating value L [MJ/kg].
    pub lower_heating_value: f64,
    /// U/L ratio of upper to lower heating value.
    pub upper_to_lower: f64,
}

impl Default for ConversionFactors {
    fn default() -> Self {
        ConversionFactors {
            eta_gtp: 0.4,
            eta_ptg: 0.8,
            lower_heating_value: 40.0,
            upper_to_lower: 1.11,
        }
    }
}

impl ConversionFactors {
    pub fn upper_heating_value(&self) -> f64 {
        self.upper_to_lower * self.lower_heating_value
    }

    /// Gas burned per unit of electric energy, `1/(ρ0 L η_GtP)` [m³/MJ].
    pub fn e_gtp(&self, rho0: f64) -> f64 {
        1.0 / (rho0 * self.lower_heating_value * self.eta_gtp)
    }

    /// Gas produced per unit of electric energy, `η_PtG/(ρ0 U)` [m³/MJ].
    pub fn e_ptg(&self, rho0: f64) -> f64 {
        self.eta_ptg / (rho0 * self.upper_heating_value())
    }
}

/// Parameters of one conversion plant's law `q = f(P)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConversionLaw {
    /// [m³/MJ]
    pub e_gtp: f64,
    /// [m³/MJ]
    pub e_ptg: f64,
    /// Smoothing half-width [MW].
    pub epsilon: f64,
}

impl ConversionLaw {
    /// Rejects factors for which the smoothed segment is not strictly
    /// increasing.
    pub fn new(e_gtp: f64, e_ptg: f64, epsilon: f64) -> Result<Self> {
        let law = ConversionLaw { e_gtp, e_ptg, epsilon };
        law.check_monotone()?;
        Ok(law)
    }

    fn check_monotone(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.epsilon > 0.0) {
            return bad(format!("smoothing half-width must be positive, got {}", self.epsilon));
        }
        if !(self.e_gtp > 0.0 && self.e_ptg > 0.0) {
            return bad(format!(
                "conversion factors must be positive (GtP {}, PtG {})",
                self.e_gtp, self.e_ptg
            ));
        }
        // S' is a cubic in u = x/ε; its extrema on [-1, 1] sit at the end
        // points and at u = ±1/√2.
        let u = std::f64::consts::FRAC_1_SQRT_2;
        let min_slope = [-1.0, -u, u, 1.0]
            .iter()
            .map(|&s| smoothing_s_dx(s * self.epsilon, self.e_gtp, self.e_ptg, self.epsilon))
            .fold(f64::INFINITY, f64::min);
        if !(min_slope > 0.0) {
            return bad(format!(
                "smoothed conversion law is not monotone (min slope {min_slope:.3e}); \
                 factors GtP {} / PtG {} differ too much",
                self.e_gtp, self.e_ptg
            ));
        }
        Ok(())
    }

    /// Sink outflow q [m³/s] for net power injection `p_mw` [MW]
    /// (1 MW = 1 MJ/s).
    pub fn flow(&self, p_mw: f64) -> f64 {
        conversion_flow(p_mw, self)
    }

    /// dq/dP [m³/MJ].
    pub fn slope(&self, p_mw: f64) -> f64 {
        if p_mw < -self.epsilon {
            self.e_ptg
        } else if p_mw > self.epsilon {
            self.e_gtp
        } else {
            smoothing_s_dx(p_mw, self.e_gtp, self.e_ptg, self.epsilon)
        }
    }

    /// Residual `q − f(P)` of the conversion equation.
    pub fn residual(&self, q: f64, p_mw: f64) -> f64 {
        q - self.flow(p_mw)
    }
}

pub fn conversion_flow(p_mw: f64, law: &ConversionLaw) -> f64 {
    if p_mw < -law.epsilon {
        law.e_ptg * p_mw
    } else if p_mw > law.epsilon {
        law.e_gtp * p_mw
    } else {
        smoothing_s(p_mw, law.e_gtp, law.e_ptg, law.epsilon)
    }
}

/// A conversion plant linking gas sink `gas_node` to slack bus `bus`
/// (indices into the network's node and bus lists).
#[derive(Debug, Clone, PartialEq)]
pub struct ConversionEdge {
    pub id: String,
    pub gas_node: usize,
    pub bus: usize,
    pub law: ConversionLaw,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law() -> ConversionLaw {
        let f = ConversionFactors::default();
        ConversionLaw::new(f.e_gtp(0.785), f.e_ptg(0.785), 1.0).unwrap()
    }

    #[test]
    fn benchmark_factors() {
        let f = ConversionFactors::default();
        assert!((f.e_gtp(0.785) - 1.0 / (0.785 * 40.0 * 0.4)).abs() < 1e-16);
        assert!((f.e_ptg(0.785) - 0.8 / (0.785 * 44.4)).abs() < 1e-16);
        assert_eq!(format!("{:.4}", f.e_gtp(0.785)), "0.0796");
        assert_eq!(format!("{:.4}", f.e_ptg(0.785)), "0.0230");
        assert!((f.e_ptg(0.785) - 0.0229).abs() < 0.00006);
    }

    #[test]
    fn linear_branches() {
        let l = law();
        assert!((l.flow(100.0) - 100.0 * l.e_gtp).abs() < 1e-12);
        assert!((l.flow(100.0) - 7.96).abs() < 0.01);
        assert!((l.flow(-100.0) + 2.2953).abs() < 1e-3);
        assert_eq!(l.flow(0.0), 0.0);
    }

    #[test]
    fn smoothing_endpoint_properties() {
        let (a, b, e) = (0.08, 0.023, 2.0);
        assert_eq!(smoothing_s(0.0, a, b, e), 0.0);
        assert!((smoothing_s(e, a, b, e) - a * e).abs() < 1e-15);
        assert!((smoothing_s(-e, a, b, e) + b * e).abs() < 1e-15);
        assert!((smoothing_s_dx(e, a, b, e) - a).abs() < 1e-15);
        assert!((smoothing_s_dx(-e, a, b, e) - b).abs() < 1e-15);
    }

    #[test]
    fn residual_is_c1_across_breakpoints() {
        let l = law();
        for p in [-l.epsilon, l.epsilon] {
            let h = 1e-7;
            let left = (l.residual(0.0, p) - l.residual(0.0, p - h)) / h;
            let right = (l.residual(0.0, p + h) - l.residual(0.0, p)) / h;
            assert!((left - right).abs() <= 1e-6 * left.abs());
            assert!((l.residual(0.0, p + 1e-12) - l.residual(0.0, p - 1e-12)).abs() < 1e-12);
        }
    }

    #[test]
    fn residual_pins_flow() {
        let l = law();
        assert_eq!(l.residual(0.0, 0.0), 0.0);
        assert!(l.residual(50.0 * l.e_gtp, 50.0).abs() < 1e-15);
    }

    #[test]
    fn monotone_on_benchmark_and_rejects_extreme_factors() {
        let l = law();
        let mut prev = l.flow(-l.epsilon);
        for i in 1..=1000 {
            let p = -l.epsilon + 2.0 * l.epsilon * i as f64 / 1000.0;
            let q = l.flow(p);
            assert!(q > prev);
            prev = q;
        }
        assert!(ConversionLaw::new(1.0, 0.01, 1.0).is_err());
        assert!(ConversionLaw::new(0.08, 0.02, 0.0).is_err());
    }

    #[test]
    fn slope_matches_finite_difference() {
        let l = law();
        for p in [-5.0, -0.9, -0.3, 0.0, 0.4, 0.99, 3.0] {
            let h = 1e-7;
            let fd = (l.flow(p + h) - l.flow(p - h)) / (2.0 * h);
            assert!((fd - l.slope(p)).abs() < 1e-8);
        }
    }
}
