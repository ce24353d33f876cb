use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::CouplingKind;
use crate::units::HOUR;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianMode {
    AnalyticSparse,
    /// Central differences, column by column. Slow; meant for verification.
    FiniteDifference,
}

/// Time stepping and Newton parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// [s]
    pub horizon: f64,
    /// [s]
    pub dt: f64,
    /// Target cell length [m].
    pub dx: f64,
    /// Residual ∞-norm tolerance.
    pub tol: f64,
    pub max_newton_iters: usize,
    pub max_halvings: usize,
    pub coupling: CouplingKind,
    pub jacobian_mode: JacobianMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            horizon: 24.0 * HOUR,
            dt: 900.0,
            dx: 1000.0,
            tol: 1e-8,
            max_newton_iters: 50,
            max_halvings: 30,
            coupling: CouplingKind::Pressure,
            jacobian_mode: JacobianMode::AnalyticSparse,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("time step must be positive, got {} s", self.dt));
        }
        if !(self.dx > 0.0 && self.dx.is_finite()) {
            return bad(format!("cell length must be positive, got {} m", self.dx));
        }
        if !(self.tol > 0.0) {
            return bad(format!("Newton tolerance must be positive, got {}", self.tol));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be non-negative, got {} s", self.horizon));
        }
        if self.max_newton_iters == 0 {
            return bad("at least one Newton iteration is required".into());
        }
        let n = (self.horizon / self.dt).round();
        if (n * self.dt - self.horizon).abs() > 1e-9 * self.horizon.max(1.0) {
            return bad(format!(
                "time step {} s does not divide the horizon {} s",
                self.dt, self.horizon
            ));
        }
        Ok(())
    }

    /// Number of time steps over the horizon.
    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}
