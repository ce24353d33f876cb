//! Polar-form power-flow equations.
//!
//! For every bus `P_i = Σ_j V_i V_j (G_ij cos φ_ij + B_ij sin φ_ij)` and
//! `Q_i = Σ_j V_i V_j (G_ij sin φ_ij − B_ij cos φ_ij)` with `φ_ij = φ_i − φ_j`.
//! Each bus carries all four of (V, φ, P, Q) as unknowns; its specification
//! pins two of them.

use serde::{Deserialize, Serialize};

use super::admittance::AdmittanceMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BusKind {
    /// Fixed P and Q.
    #[serde(rename = "pq")]
    PQ,
    /// Fixed P and V.
    #[serde(rename = "pv")]
    PV,
    /// Fixed φ and V.
    Slack,
}

/// Electrical state of a bus in per-unit and radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BusState {
    pub v: f64,
    pub phi: f64,
    /// Net active power injection [p.u.].
    pub p: f64,
    /// Net reactive power injection [p.u.].
    pub q: f64,
}

/// Computed injections at bus `i`; `emit(j, ∂P/∂φ_j, ∂P/∂V_j, ∂Q/∂φ_j, ∂Q/∂V_j)`
/// is called once per structural nonzero of row `i`, diagonal included.
pub(crate) fn row_injection(
    y: &AdmittanceMatrix,
    i: usize,
    v: impl Fn(usize) -> f64,
    phi: impl Fn(usize) -> f64,
    mut emit: impl FnMut(usize, f64, f64, f64, f64),
) -> (f64, f64) {
    let vi = v(i);
    let phii = phi(i);
    let mut p = 0.0;
    let mut q = 0.0;
    let mut gii = 0.0;
    let mut bii = 0.0;
    for &(j, yij) in y.row(i) {
        let (g, b) = (yij.re, yij.im);
        if j == i {
            gii = g;
            bii = b;
            p += vi * vi * g;
            q -= vi * vi * b;
            continue;
        }
        let vj = v(j);
        let (s, c) = (phii - phi(j)).sin_cos();
        let gc_bs = g * c + b * s;
        let gs_bc = g * s - b * c;
        p += vi * vj * gc_bs;
        q += vi * vj * gs_bc;
        emit(j, vi * vj * gs_bc, vi * gc_bs, -vi * vj * gc_bs, vi * gs_bc);
    }
    emit(
        i,
        -q - bii * vi * vi,
        p / vi + gii * vi,
        p - gii * vi * vi,
        q / vi - bii * vi,
    );
    (p, q)
}

/// Computed injections `(P_i, Q_i)` for all buses.
pub fn injections(y: &AdmittanceMatrix, v: &[f64], phi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    (0..y.n())
        .map(|i| row_injection(y, i, |j| v[j], |j| phi[j], |_, _, _, _, _| {}))
        .unzip()
}

/// Power-flow mismatch `(P_i − P_i^calc, Q_i − Q_i^calc)` for every bus,
/// laid out as `[ΔP_0, ΔQ_0, ΔP_1, ΔQ_1, …]`.
pub fn pf_residual(states: &[BusState], y: &AdmittanceMatrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * states.len());
    for i in 0..states.len() {
        let (p, q) = row_injection(y, i, |j| states[j].v, |j| states[j].phi, |_, _, _, _, _| {});
        out.push(states[i].p - p);
        out.push(states[i].q - q);
    }
    out
}
