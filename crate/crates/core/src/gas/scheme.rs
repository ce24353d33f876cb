//! Implicit box scheme for the isentropic Euler equations on a pipe.
//!
//! The unknowns are the density ρ [kg/m³] and the volumetric standard flow
//! q [m³/s]. With `c = ρ0/A` the pipe equations read
//!
//! ```text
//! ρ_t + (c q)_x                  = 0
//! q_t + (p(ρ)/c + c q²/ρ)_x      = S(ρ, q)
//! ```
//!
//! which is the line-density/mass-flow system `(ρ_l, q_m)` scaled by
//! `diag(1/A, 1/ρ0)`. A cell between grid points j−1 and j is discretized as
//!
//! ```text
//! (U*_{j−1} + U*_j)/2 − (U_{j−1} + U_j)/2
//!     + Δt/Δx (F(U*_j) − F(U*_{j−1})) − Δt (G(U*_j) + G(U*_{j−1}))/2 = 0
//! ```
//!
//! with every starred quantity at the new time level.

use super::constants::GasConstants;
use super::friction::PipeFriction;
use crate::error::{Error, Result};
use crate::units::BAR;

/// Densities and flows at the grid points of one pipe.
#[derive(Debug, Clone, PartialEq)]
pub struct PipeState {
    pub rho: Vec<f64>,
    pub q: Vec<f64>,
}

impl PipeState {
    pub fn uniform(points: usize, rho: f64, q: f64) -> Self {
        PipeState {
            rho: vec![rho; points],
            q: vec![q; points],
        }
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }
}

/// Flux `F(U) = (c q, p(ρ)/c + c q²/ρ)`.
pub fn flux(gas: &GasConstants, pipe: &PipeFriction, rho: f64, q: f64) -> [f64; 2] {
    let c = pipe.flux_factor();
    [c * q, gas.p_of_rho(rho) / c + c * q * q / rho]
}

/// Source `G(U) = (0, S(ρ, q))`.
pub fn source(pipe: &PipeFriction, rho: f64, q: f64) -> [f64; 2] {
    [0.0, pipe.source(rho, q)]
}

/// Box-scheme residual of cell `j` (between grid points `j − 1` and `j`),
/// in the units of the unknowns.
pub fn box_scheme_residual(
    gas: &GasConstants,
    pipe: &PipeFriction,
    dx: f64,
    dt: f64,
    old: &PipeState,
    new: &PipeState,
    j: usize,
) -> Result<[f64; 2]> {
    if !(dt > 0.0 && dx > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "box scheme needs Δt, Δx > 0 (got {dt}, {dx})"
        )));
    }
    if j == 0 || j >= new.len() || old.len() != new.len() {
        return Err(Error::InvalidConfig(format!("cell {j} out of range")));
    }
    for k in [j - 1, j] {
        if !(new.rho[k] > 0.0) {
            return Err(Error::NonPositiveDensity {
                edge: String::new(),
                point: k,
                value: new.rho[k],
            });
        }
    }
    let u = |s: &PipeState, k: usize| [s.rho[k], s.q[k]];
    let (l, r) = (u(new, j - 1), u(new, j));
    let (lo, ro) = (u(old, j - 1), u(old, j));
    let fl = flux(gas, pipe, l[0], l[1]);
    let fr = flux(gas, pipe, r[0], r[1]);
    let gl = source(pipe, l[0], l[1]);
    let gr = source(pipe, r[0], r[1]);
    let mut out = [0.0; 2];
    for c in 0..2 {
        out[c] = 0.5 * (l[c] + r[c]) - 0.5 * (lo[c] + ro[c]) + dt / dx * (fr[c] - fl[c]) - dt * 0.5 * (gr[c] + gl[c]);
    }
    Ok(out)
}

/// Cell residual scaled for the Newton system together with its partial
/// derivatives with respect to `(ρ_{j−1}, q_{j−1}, ρ_j, q_j)`.
///
/// The first row is the raw mass equation times `(Δx/Δt)/c` [m³/s], the
/// second the raw flow equation times `(Δx/Δt)·c` expressed in bar. Passing
/// `old = None` drops the time difference, which yields the stationary
/// equations in the same scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ScaledCell {
    pub r: [f64; 2],
    pub d: [[f64; 4]; 2],
}

pub(crate) struct OldCell {
    pub dt: f64,
    pub left: [f64; 2],
    pub right: [f64; 2],
}

pub(crate) fn scaled_cell(
    gas: &GasConstants,
    pipe: &PipeFriction,
    dx: f64,
    old: Option<&OldCell>,
    left: [f64; 2],
    right: [f64; 2],
) -> ScaledCell {
    let c = pipe.flux_factor();
    let c2 = c * c;
    let [rl, ql] = left;
    let [rr, qr] = right;

    let (sl, sl_r, sl_q) = pipe.source_with_derivatives(rl, ql);
    let (sr, sr_r, sr_q) = pipe.source_with_derivatives(rr, qr);

    let mut r1 = qr - ql;
    let mut d1 = [0.0, -1.0, 0.0, 1.0];

    let mut r2 = gas.p_of_rho(rr) - gas.p_of_rho(rl) + c2 * (qr * qr / rr - ql * ql / rl) - dx * c * 0.5 * (sl + sr);
    let mut d2 = [
        -gas.dpressure_drho(rl) + c2 * ql * ql / (rl * rl) - dx * c * 0.5 * sl_r,
        -2.0 * c2 * ql / rl - dx * c * 0.5 * sl_q,
        gas.dpressure_drho(rr) - c2 * qr * qr / (rr * rr) - dx * c * 0.5 * sr_r,
        2.0 * c2 * qr / rr - dx * c * 0.5 * sr_q,
    ];

    if let Some(o) = old {
        let w1 = dx / o.dt / c * 0.5;
        r1 += w1 * (rl + rr - o.left[0] - o.right[0]);
        d1[0] += w1;
        d1[2] += w1;
        let w2 = dx / o.dt * c * 0.5;
        r2 += w2 * (ql + qr - o.left[1] - o.right[1]);
        d2[1] += w2;
        d2[3] += w2;
    }

    for d in d2.iter_mut() {
        *d /= BAR;
    }
    ScaledCell {
        r: [r1, r2 / BAR],
        d: [d1, d2],
    }
}
