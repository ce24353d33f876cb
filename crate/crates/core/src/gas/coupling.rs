//! Node coupling conditions: mass balance plus equality of an invariant
//! `H` across all incident pipe ends.

use super::constants::GasConstants;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingKind {
    /// `H_p(ρ, q) = p(ρ)`
    Pressure,
    /// `H_b(p, q) = ½v² + c²[ln(p/p0) + α(p − p0)]`
    Bernoulli,
}

impl std::fmt::Display for CouplingKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CouplingKind::Pressure => "pressure",
            CouplingKind::Bernoulli => "bernoulli",
        })
    }
}

impl std::str::FromStr for CouplingKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "pressure" => Ok(CouplingKind::Pressure),
            "bernoulli" => Ok(CouplingKind::Bernoulli),
            _ => Err(format!("unknown coupling '{s}' (expected pressure or bernoulli)")),
        }
    }
}

/// State of one edge end at a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndState {
    pub rho: f64,
    /// Flow in the edge's own direction [m³/s].
    pub q: f64,
    /// Cross section [m²], `None` for edges without one.
    pub area: Option<f64>,
    /// +1 if the edge ends at the node (flow into the node), −1 if it starts there.
    pub orientation: f64,
}

/// Bernoulli invariant for pressure `p` [Pa], flow `q` [m³/s], area `a` [m²].
pub fn bernoulli_invariant(gas: &GasConstants, p: f64, q: f64, area: f64) -> Result<f64> {
    if !(area > 0.0) {
        return Err(Error::InvalidNetwork(format!(
            "Bernoulli invariant needs a cross section, got {area}"
        )));
    }
    let rho = gas.density(p)?;
    let v = gas.rho0 * q / (rho * area);
    let p0 = gas.p0();
    Ok(0.5 * v * v + gas.c_vac_squared() * ((p / p0).ln() + gas.alpha() * (p - p0)))
}

/// H_b as a function of density, with ∂H/∂ρ and ∂H/∂q.
pub(crate) fn bernoulli_rho(gas: &GasConstants, rho: f64, q: f64, area: f64) -> (f64, f64, f64) {
    let m = gas.rho0 / area;
    let p = gas.p_of_rho(rho);
    let p0 = gas.p0();
    let v = m * q / rho;
    let h = 0.5 * v * v + gas.c_vac_squared() * ((p / p0).ln() + gas.alpha() * (p - p0));
    // c²(1/p + α)·p'(ρ) = p'(ρ)/ρ because ρ = p/(c² z)
    let dh_drho = -v * v / rho + gas.dpressure_drho(rho) / rho;
    let dh_dq = m * m * q / (rho * rho);
    (h, dh_drho, dh_dq)
}

/// Invariant value with derivatives for an end state.
pub(crate) fn invariant(
    gas: &GasConstants,
    kind: CouplingKind,
    rho: f64,
    q: f64,
    area: Option<f64>,
) -> Result<(f64, f64, f64)> {
    match (kind, area) {
        (CouplingKind::Pressure, _) => Ok((gas.p_of_rho(rho), gas.dpressure_drho(rho), 0.0)),
        (CouplingKind::Bernoulli, Some(a)) => Ok(bernoulli_rho(gas, rho, q, a)),
        (CouplingKind::Bernoulli, None) => Err(Error::InvalidNetwork(
            "Bernoulli coupling at an end without cross section".into(),
        )),
    }
}

/// Residual of the coupling conditions at a node with `l = ends.len()`
/// incident ends: first the balance `Σ s_k q_k − withdrawal`, then
/// `H(end_k) − H(end_{k−1})` for `k = 1..l`.
///
/// `withdrawal` is the node's net outflow to the outside (sink demand
/// positive, source supply negative). Pressure invariants are in Pa, Bernoulli
/// invariants in m²/s².
pub fn coupling_residual(
    gas: &GasConstants,
    kind: CouplingKind,
    ends: &[EndState],
    withdrawal: f64,
) -> Result<Vec<f64>> {
    if ends.is_empty() {
        return Err(Error::InvalidNetwork("coupling at a node without edges".into()));
    }
    for e in ends {
        if !(e.rho > 0.0) {
            return Err(Error::NonPositiveDensity {
                edge: String::new(),
                point: 0,
                value: e.rho,
            });
        }
    }
    let mut out = Vec::with_capacity(ends.len());
    out.push(ends.iter().map(|e| e.orientation * e.q).sum::<f64>() - withdrawal);
    let h = ends
        .iter()
        .map(|e| invariant(gas, kind, e.rho, e.q, e.area).map(|t| t.0))
        .collect::<Result<Vec<_>>>()?;
    out.extend(h.windows(2).map(|w| w[1] - w[0]));
    Ok(out)
}
