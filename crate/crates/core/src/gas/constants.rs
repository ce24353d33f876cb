use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::BAR;

/// Standard-condition constants of the gas and the isothermal pressure law
/// `p(ρ) = c²ρ / (1 − α c² ρ)` with compressibility `z(p) = 1 + α p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasConstants {
    /// Density at standard conditions [kg/m³].
    pub rho0: f64,
    /// Standard pressure [bar].
    pub p0_bar: f64,
    pub z0: f64,
    /// Standard temperature [K].
    pub t0: f64,
    /// Gas temperature [K].
    pub temperature: f64,
    /// Compressibility slope [1/bar].
    pub alpha_per_bar: f64,
    /// Dynamic viscosity [kg/(m·s)].
    pub viscosity: f64,
}

impl Default for GasConstants {
    fn default() -> Self {
        GasConstants {
            rho0: 0.785,
            p0_bar: 1.01325,
            z0: 1.005,
            t0: 273.15,
            temperature: 283.15,
            alpha_per_bar: -0.00224,
            viscosity: 1.0e-5,
        }
    }
}

impl GasConstants {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rho0", self.rho0),
            ("p0", self.p0_bar),
            ("z0", self.z0),
            ("T0", self.t0),
            ("T", self.temperature),
            ("viscosity", self.viscosity),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "gas constant {name} must be positive, got {v}"
                )));
            }
        }
        if !self.alpha_per_bar.is_finite() {
            return Err(Error::InvalidConfig("alpha must be finite".into()));
        }
        Ok(())
    }

    /// Standard pressure [Pa].
    pub fn p0(&self) -> f64 {
        self.p0_bar * BAR
    }

    /// Compressibility slope [1/Pa].
    pub fn alpha(&self) -> f64 {
        self.alpha_per_bar / BAR
    }

    /// Speed of sound in the vacuum limit, `c² = (p0/z0)(T/T0)/ρ0` [m/s].
    pub fn c_vac(&self) -> f64 {
        self.c_vac_squared().sqrt()
    }

    pub fn c_vac_squared(&self) -> f64 {
        self.p0() / self.z0 * (self.temperature / self.t0) / self.rho0
    }

    /// Compressibility factor at pressure `p` [Pa].
    pub fn z(&self, p: f64) -> f64 {
        1.0 + self.alpha() * p
    }

    /// Pressure [Pa] for density `rho` [kg/m³].
    pub fn pressure(&self, rho: f64) -> Result<f64> {
        if !(rho > 0.0) {
            return Err(Error::NonPositiveDensity {
                edge: String::new(),
                point: 0,
                value: rho,
            });
        }
        let c2 = self.c_vac_squared();
        let denom = 1.0 - self.alpha() * c2 * rho;
        if !(denom > 0.0) {
            return Err(Error::PressureOutOfRange {
                pressure_bar: f64::INFINITY,
            });
        }
        Ok(c2 * rho / denom)
    }

    /// Density [kg/m³] for pressure `p` [Pa]; exact inverse of [`Self::pressure`].
    pub fn density(&self, p: f64) -> Result<f64> {
        let z = self.z(p);
        if !(p > 0.0) || !(z > 0.0) {
            return Err(Error::PressureOutOfRange { pressure_bar: p / BAR });
        }
        Ok(p / (self.c_vac_squared() * z))
    }

    /// Unchecked pressure law for the residual hot path; callers guarantee
    /// `rho > 0`.
    #[inline]
    pub(crate) fn p_of_rho(&self, rho: f64) -> f64 {
        let c2 = self.c_vac_squared();
        c2 * rho / (1.0 - self.alpha() * c2 * rho)
    }

    /// dp/dρ [Pa·m³/kg].
    #[inline]
    pub fn dpressure_drho(&self, rho: f64) -> f64 {
        let c2 = self.c_vac_squared();
        let denom = 1.0 - self.alpha() * c2 * rho;
        c2 / (denom * denom)
    }
}
