//! Global residual and Jacobian of one time step.
//!
//! Rows are scaled so that every category is O(1) near typical states:
//! mass equations and balances in m³/s, momentum equations and pressure
//! invariants in bar, Bernoulli invariants multiplied by a reference density
//! (which turns them into bar near the reference pressure), power equations
//! in per-unit.

use crate::error::{Error, Result};
use crate::gas::coupling::invariant;
use crate::gas::scheme::{scaled_cell, OldCell};
use crate::gas::{CouplingKind, PipeFriction};
use crate::layout::UnknownLayout;
use crate::network::Network;
use crate::power::{row_injection, BusKind};
use crate::units::BAR;

use super::linear::Triplets;

/// Pressure at which Bernoulli rows are scaled to bar [bar].
const BERNOULLI_REFERENCE_BAR: f64 = 50.0;

/// What kind of equations to assemble.
#[derive(Debug, Clone, Copy)]
pub enum StepKind<'a> {
    /// Time derivatives dropped; node balances at the anchors replaced by
    /// pressure pins.
    Stationary,
    /// Box scheme from the converged state `old` over `dt` seconds.
    Transient { old: &'a [f64], dt: f64 },
}

/// Everything a residual evaluation depends on besides the iterate.
#[derive(Debug, Clone, Copy)]
pub struct StepContext<'a> {
    /// Time of the new level [s].
    pub t: f64,
    pub kind: StepKind<'a>,
}

/// The assembled square system for a network, layout and coupling choice.
#[derive(Debug, Clone)]
pub struct ResidualSystem<'n> {
    pub net: &'n Network,
    pub layout: &'n UnknownLayout,
    frictions: Vec<Option<PipeFriction>>,
    couplings: Vec<CouplingKind>,
    anchor_of: Vec<Option<f64>>,
    bernoulli_scale: f64,
}

impl<'n> ResidualSystem<'n> {
    pub fn new(net: &'n Network, layout: &'n UnknownLayout, coupling: CouplingKind) -> Self {
        let mut anchor_of = vec![None; net.nodes.len()];
        for &(node, p) in &net.anchors {
            anchor_of[node] = Some(p);
        }
        let rho_ref = net
            .gas
            .density(BERNOULLI_REFERENCE_BAR * BAR)
            .expect("reference pressure is inside the validity range");
        ResidualSystem {
            net,
            layout,
            frictions: net.edges.iter().map(|e| e.friction(&net.gas)).collect(),
            couplings: (0..net.nodes.len())
                .map(|i| net.effective_coupling(i, coupling))
                .collect(),
            anchor_of,
            bernoulli_scale: rho_ref / BAR,
        }
    }

    pub fn n(&self) -> usize {
        self.layout.n
    }

    /// Effective coupling condition per gas node.
    pub fn couplings(&self) -> &[CouplingKind] {
        &self.couplings
    }

    /// Invariant value of an edge end in residual units.
    pub fn scaled_invariant(&self, node: usize, rho: f64, q: f64, area: Option<f64>) -> Result<f64> {
        let kind = self.couplings[node];
        let (h, _, _) = invariant(&self.net.gas, kind, rho, q, area)?;
        Ok(h * self.invariant_scale(kind))
    }

    fn invariant_scale(&self, kind: CouplingKind) -> f64 {
        match kind {
            CouplingKind::Pressure => 1.0 / BAR,
            CouplingKind::Bernoulli => self.bernoulli_scale,
        }
    }

    /// Checks that every density unknown is positive.
    pub fn check_densities(&self, x: &[f64]) -> Result<()> {
        for (e, b) in self.layout.edges.iter().enumerate() {
            for p in 0..b.points {
                let rho = x[b.rho(p)];
                if !(rho > 0.0) || !rho.is_finite() {
                    return Err(Error::NonPositiveDensity {
                        edge: self.net.edges[e].id.clone(),
                        point: p,
                        value: rho,
                    });
                }
                if !(1.0 - self.net.gas.alpha() * self.net.gas.c_vac_squared() * rho > 0.0) {
                    return Err(Error::PressureOutOfRange {
                        pressure_bar: f64::INFINITY,
                    });
                }
            }
        }
        Ok(())
    }

    /// Residual vector at `x`.
    pub fn residual(&self, x: &[f64], ctx: &StepContext) -> Result<Vec<f64>> {
        let mut r = vec![0.0; self.n()];
        self.assemble(x, ctx, &mut r, None)?;
        Ok(r)
    }

    /// Residual and analytic Jacobian at `x`. The Jacobian's entry sequence
    /// depends only on the network, layout and step kind.
    pub fn residual_and_jacobian(&self, x: &[f64], ctx: &StepContext, jac: &mut Triplets) -> Result<Vec<f64>> {
        let mut r = vec![0.0; self.n()];
        jac.clear();
        self.assemble(x, ctx, &mut r, Some(jac))?;
        Ok(r)
    }

    /// Jacobian by central differences with step `1e-6·max(|x_i|, 1)`.
    pub fn finite_difference_jacobian(&self, x: &[f64], ctx: &StepContext) -> Result<Vec<Vec<f64>>> {
        let n = self.n();
        let mut jac = vec![vec![0.0; n]; n];
        let mut xp = x.to_vec();
        for j in 0..n {
            let h = 1e-6 * x[j].abs().max(1.0);
            xp[j] = x[j] + h;
            let rp = self.residual(&xp, ctx)?;
            xp[j] = x[j] - h;
            let rm = self.residual(&xp, ctx)?;
            xp[j] = x[j];
            for i in 0..n {
                jac[i][j] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        Ok(jac)
    }

    fn assemble(&self, x: &[f64], ctx: &StepContext, r: &mut [f64], mut jac: Option<&mut Triplets>) -> Result<()> {
        assert_eq!(x.len(), self.n(), "state vector length");
        self.check_densities(x)?;
        let net = self.net;
        let lay = self.layout;
        let gas = &net.gas;
        let mut put = |row: usize, col: usize, v: f64| {
            if let Some(j) = jac.as_deref_mut() {
                j.push(row, col, v);
            }
        };

        let (old, dt) = match ctx.kind {
            StepKind::Stationary => (None, 0.0),
            StepKind::Transient { old, dt } => {
                assert_eq!(old.len(), self.n(), "old state length");
                (Some(old), dt)
            }
        };

        // Edges.
        for (e, b) in lay.edges.iter().enumerate() {
            match &self.frictions[e] {
                Some(fr) => {
                    for j in 1..b.points {
                        let left = [x[b.rho(j - 1)], x[b.q(j - 1)]];
                        let right = [x[b.rho(j)], x[b.q(j)]];
                        let oc = old.map(|o| OldCell {
                            dt,
                            left: [o[b.rho(j - 1)], o[b.q(j - 1)]],
                            right: [o[b.rho(j)], o[b.q(j)]],
                        });
                        let c = scaled_cell(gas, fr, b.dx, oc.as_ref(), left, right);
                        let row = b.row + 2 * (j - 1);
                        let cols = [b.rho(j - 1), b.q(j - 1), b.rho(j), b.q(j)];
                        for k in 0..2 {
                            r[row + k] = c.r[k];
                            for (m, &col) in cols.iter().enumerate() {
                                put(row + k, col, c.d[k][m]);
                            }
                        }
                    }
                }
                None => {
                    r[b.row] = x[b.rho(0)] - x[b.rho(1)];
                    r[b.row + 1] = x[b.q(0)] - x[b.q(1)];
                    put(b.row, b.rho(0), 1.0);
                    put(b.row, b.rho(1), -1.0);
                    put(b.row + 1, b.q(0), 1.0);
                    put(b.row + 1, b.q(1), -1.0);
                }
            }
        }

        // Gas nodes.
        for (i, node) in net.nodes.iter().enumerate() {
            let row = lay.node_rows[i];
            let anchor = match ctx.kind {
                StepKind::Stationary => self.anchor_of[i],
                StepKind::Transient { .. } => None,
            };
            match anchor {
                Some(p_bar) => {
                    let (ri, _) = lay.end(node.ends[0]);
                    r[row] = gas.p_of_rho(x[ri]) / BAR - p_bar;
                    put(row, ri, gas.dpressure_drho(x[ri]) / BAR);
                }
                None => {
                    let mut bal = -node.withdrawal(ctx.t);
                    for end in &node.ends {
                        let (_, qi) = lay.end(*end);
                        bal += end.orientation() * x[qi];
                        put(row, qi, end.orientation());
                    }
                    for (k, _) in net.conversions_at(i) {
                        let ci = lay.conversion(k);
                        bal -= x[ci];
                        put(row, ci, -1.0);
                    }
                    r[row] = bal;
                }
            }
            let kind = self.couplings[i];
            let scale = self.invariant_scale(kind);
            let mut prev: Option<(usize, usize, f64, f64, f64)> = None;
            for (k, end) in node.ends.iter().enumerate() {
                let (ri, qi) = lay.end(*end);
                let (h, dr, dq) = invariant(gas, kind, x[ri], x[qi], net.edges[end.edge].area)?;
                if let Some((pr, pq, ph, pdr, pdq)) = prev {
                    let rr = row + k;
                    r[rr] = (h - ph) * scale;
                    put(rr, ri, dr * scale);
                    put(rr, pr, -pdr * scale);
                    if kind == CouplingKind::Bernoulli {
                        put(rr, qi, dq * scale);
                        put(rr, pq, -pdq * scale);
                    }
                }
                prev = Some((ri, qi, h, dr, dq));
            }
        }

        // Buses.
        let y = &net.admittance;
        let v_at = |j: usize| x[lay.bus(j)];
        let phi_at = |j: usize| x[lay.bus(j) + 1];
        for (i, bus) in net.buses.iter().enumerate() {
            let col = lay.bus(i);
            let row = lay.bus_row + 4 * i;
            let mut entries: Vec<(usize, f64, f64, f64, f64)> = Vec::new();
            let (p, q) = row_injection(y, i, v_at, phi_at, |j, a, b, c, d| entries.push((j, a, b, c, d)));
            r[row] = x[col + 2] - p;
            r[row + 1] = x[col + 3] - q;
            put(row, col + 2, 1.0);
            put(row + 1, col + 3, 1.0);
            for (j, dp_dphi, dp_dv, dq_dphi, dq_dv) in entries {
                let cj = lay.bus(j);
                put(row, cj + 1, -dp_dphi);
                put(row, cj, -dp_dv);
                put(row + 1, cj + 1, -dq_dphi);
                put(row + 1, cj, -dq_dv);
            }
            let (ps, qs) = net.bus_injection(i, ctx.t);
            match bus.kind {
                BusKind::PQ => {
                    r[row + 2] = x[col + 2] - ps;
                    r[row + 3] = x[col + 3] - qs;
                    put(row + 2, col + 2, 1.0);
                    put(row + 3, col + 3, 1.0);
                }
                BusKind::PV => {
                    r[row + 2] = x[col + 2] - ps;
                    r[row + 3] = x[col] - bus.vm;
                    put(row + 2, col + 2, 1.0);
                    put(row + 3, col, 1.0);
                }
                BusKind::Slack => {
                    r[row + 2] = x[col + 1] - bus.va;
                    r[row + 3] = x[col] - bus.vm;
                    put(row + 2, col + 1, 1.0);
                    put(row + 3, col, 1.0);
                }
            }
        }

        // Conversion plants.
        for (k, c) in net.conversions.iter().enumerate() {
            let row = lay.conversion_row + k;
            let pc = lay.bus(c.bus) + 2;
            let p_mw = x[pc] * net.base_mva;
            r[row] = c.law.residual(x[lay.conversion(k)], p_mw);
            put(row, lay.conversion(k), 1.0);
            put(row, pc, -c.law.slope(p_mw) * net.base_mva);
        }
        Ok(())
    }

    /// A starting point for the stationary solve: uniform density at the
    /// anchor pressure, zero flows, bus setpoints and scheduled injections.
    pub fn initial_guess(&self, t: f64) -> Result<Vec<f64>> {
        let net = self.net;
        let lay = self.layout;
        let mut x = vec![0.0; self.n()];
        let p = net
            .anchors
            .first()
            .map_or(crate::io::scenario::DEFAULT_ANCHOR_BAR, |a| a.1);
        let rho = net.gas.density(p * BAR)?;
        for b in &lay.edges {
            for j in 0..b.points {
                x[b.rho(j)] = rho;
            }
        }
        for (i, bus) in net.buses.iter().enumerate() {
            let c = lay.bus(i);
            let (ps, qs) = net.bus_injection(i, t);
            x[c] = bus.vm;
            x[c + 1] = bus.va;
            match bus.kind {
                BusKind::PQ => {
                    x[c + 2] = ps;
                    x[c + 3] = qs;
                }
                BusKind::PV => x[c + 2] = ps,
                BusKind::Slack => {}
            }
        }
        Ok(x)
    }
}
