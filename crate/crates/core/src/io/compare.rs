//! Differences between runs with pressure and Bernoulli coupling.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::EdgeKind;

use super::results::{ResultSet, SnapshotLevel};

/// Lower edges of the flow bins [m³/s]; flows below the first are ignored
/// for relative flow differences.
pub const FLOW_BIN_EDGES: [f64; 5] = [1e-3, 1e-2, 1e-1, 1.0, 10.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowBin {
    /// [m³/s]
    pub lower: f64,
    /// [m³/s]; `None` for the open last bin.
    pub upper: Option<f64>,
    pub samples: usize,
    pub max_abs: f64,
    pub max_rel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingComparison {
    /// Pipe grid-point samples compared (over all times).
    pub samples: usize,
    /// max |p_p − p_b| [bar]
    pub max_abs_pressure_bar: f64,
    /// max |p_p − p_b| / |p_p|
    pub max_rel_pressure: f64,
    pub flow_bins: Vec<FlowBin>,
}

impl std::fmt::Display for CouplingComparison {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "pressure  max abs {:.6e} bar  max rel {:.6e}  ({} samples)",
            self.max_abs_pressure_bar, self.max_rel_pressure, self.samples
        )?;
        writeln!(
            f,
            "{:>10} {:>10} {:>9} {:>14} {:>14}",
            "|q| from", "to", "samples", "max abs", "max rel"
        )?;
        for b in &self.flow_bins {
            let upper = b.upper.map_or("inf".to_string(), |u| format!("{u:.0e}"));
            writeln!(
                f,
                "{:>10.0e} {:>10} {:>9} {:>14.6e} {:>14.6e}",
                b.lower, upper, b.samples, b.max_abs, b.max_rel
            )?;
        }
        Ok(())
    }
}

/// Compares two full-snapshot runs point by point over all pipes and
/// times. Flow bins are chosen by the pressure-coupling flow `|q_p|`.
pub fn compare_couplings(results_p: &ResultSet, results_b: &ResultSet) -> Result<CouplingComparison> {
    for (name, r) in [("first", results_p), ("second", results_b)] {
        if r.level < SnapshotLevel::Full {
            return Err(Error::Mismatch(format!(
                "{name} run has no full-network snapshots; rerun it with --snapshots full"
            )));
        }
    }
    if results_p.times_h != results_b.times_h || results_p.dt != results_b.dt || results_p.dx != results_b.dx {
        return Err(Error::Mismatch("runs differ in time levels or grid".into()));
    }
    if results_p.gas_snapshots.len() != results_b.gas_snapshots.len() {
        return Err(Error::Mismatch("runs differ in their gas discretization".into()));
    }
    let mut other: HashMap<(u64, &str, usize), (f64, f64)> = HashMap::with_capacity(results_b.gas_snapshots.len());
    for s in &results_b.gas_snapshots {
        other.insert((s.time_h.to_bits(), s.edge.as_str(), s.point), (s.pressure_bar, s.flow));
    }

    let mut bins: Vec<FlowBin> = FLOW_BIN_EDGES
        .iter()
        .enumerate()
        .map(|(i, &lower)| FlowBin {
            lower,
            upper: FLOW_BIN_EDGES.get(i + 1).copied(),
            samples: 0,
            max_abs: 0.0,
            max_rel: 0.0,
        })
        .collect();
    let mut cmp = CouplingComparison {
        samples: 0,
        max_abs_pressure_bar: 0.0,
        max_rel_pressure: 0.0,
        flow_bins: Vec::new(),
    };
    for s in results_p.gas_snapshots.iter().filter(|s| s.kind == EdgeKind::Pipe) {
        let &(pb, qb) = other
            .get(&(s.time_h.to_bits(), s.edge.as_str(), s.point))
            .ok_or_else(|| {
                Error::Mismatch(format!(
                    "edge {} point {} at {} h missing in second run",
                    s.edge, s.point, s.time_h
                ))
            })?;
        cmp.samples += 1;
        let dp = (s.pressure_bar - pb).abs();
        cmp.max_abs_pressure_bar = cmp.max_abs_pressure_bar.max(dp);
        cmp.max_rel_pressure = cmp.max_rel_pressure.max(dp / s.pressure_bar.abs());
        let qa = s.flow.abs();
        if let Some(k) = FLOW_BIN_EDGES.iter().rposition(|&lo| qa >= lo) {
            let dq = (s.flow - qb).abs();
            let b = &mut bins[k];
            b.samples += 1;
            b.max_abs = b.max_abs.max(dq);
            b.max_rel = b.max_rel.max(dq / qa);
        }
    }
    cmp.flow_bins = bins;
    Ok(cmp)
}
