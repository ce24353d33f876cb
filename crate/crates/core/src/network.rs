//! Typed graph of the coupled network.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::conversion::{ConversionEdge, ConversionLaw};
use crate::error::{Error, Result};
use crate::gas::{CouplingKind, GasConstants, PipeFriction};
use crate::io::scenario::{ScenarioDescription, DEFAULT_ANCHOR_BAR};
use crate::power::{build_admittance, AdmittanceMatrix, BusKind, Line, LoadProfile, Shunt};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Source,
    Sink,
    Inner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Pipe,
    ShortPipe,
    /// Inactive: behaves as a short pipe.
    Valve,
    /// Inactive: behaves as a short pipe.
    Compressor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    From,
    To,
}

/// One edge end incident to a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeEnd {
    pub edge: usize,
    pub side: Side,
}

impl EdgeEnd {
    /// +1 when positive edge flow enters the node.
    pub fn orientation(&self) -> f64 {
        match self.side {
            Side::From => -1.0,
            Side::To => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GasNode {
    pub id: String,
    pub kind: NodeKind,
    /// Source inflow or sink outflow [m³/s].
    pub boundary_flow: Option<TimeSeries>,
    pub coupling_override: Option<CouplingKind>,
    /// Incident edge ends in edge order.
    pub ends: Vec<EdgeEnd>,
}

impl GasNode {
    pub fn degree(&self) -> usize {
        self.ends.len()
    }

    /// Net flow leaving the network at this node at time `t` [m³/s],
    /// excluding conversion plants.
    pub fn withdrawal(&self, t: f64) -> f64 {
        match (&self.boundary_flow, self.kind) {
            (Some(f), NodeKind::Sink) => f.at(t),
            (Some(f), NodeKind::Source) => -f.at(t),
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipeGeometry {
    /// [m]
    pub length: f64,
    /// [m]
    pub diameter: f64,
    /// [m]
    pub roughness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GasEdge {
    pub id: String,
    pub kind: EdgeKind,
    pub from: usize,
    pub to: usize,
    /// Present exactly for pipes.
    pub geometry: Option<PipeGeometry>,
    /// Cross section [m²]; pipes always have one, valves and compressors
    /// inherit theirs, short pipes only if stated.
    pub area: Option<f64>,
}

impl GasEdge {
    pub fn is_pipe(&self) -> bool {
        self.kind == EdgeKind::Pipe
    }

    pub fn friction(&self, gas: &GasConstants) -> Option<PipeFriction> {
        self.geometry.map(|g| PipeFriction {
            diameter: g.diameter,
            area: self.area.expect("pipes have an area"),
            roughness: g.roughness,
            rho0: gas.rho0,
            viscosity: gas.viscosity,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: String,
    pub kind: BusKind,
    /// Base demand [MW] / [MVAr].
    pub pd: f64,
    pub qd: f64,
    /// Scheduled generation [MW] / [MVAr].
    pub pg: f64,
    pub qg: f64,
    /// Voltage setpoint [p.u.].
    pub vm: f64,
    /// Angle setpoint [rad].
    pub va: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub name: Option<String>,
    pub gas: GasConstants,
    pub nodes: Vec<GasNode>,
    pub edges: Vec<GasEdge>,
    /// Pressure pins `(node, p [bar])` for the stationary initialization,
    /// one per connected gas component.
    pub anchors: Vec<(usize, f64)>,
    /// Coupling condition used unless a node overrides or needs pressure.
    pub default_coupling: CouplingKind,
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub shunts: Vec<Shunt>,
    pub admittance: AdmittanceMatrix,
    pub load_profile: LoadProfile,
    pub conversions: Vec<ConversionEdge>,
    node_index: HashMap<String, usize>,
    bus_index: HashMap<String, usize>,
}

impl Network {
    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    pub fn bus_index(&self, id: &str) -> Option<usize> {
        self.bus_index.get(id).copied()
    }

    pub fn pipes(&self) -> impl Iterator<Item = (usize, &GasEdge)> {
        self.edges.iter().enumerate().filter(|(_, e)| e.is_pipe())
    }

    /// Coupling condition actually enforced at `node` under the run's
    /// `default` choice.
    pub fn effective_coupling(&self, node: usize, default: CouplingKind) -> CouplingKind {
        let n = &self.nodes[node];
        if n.ends.iter().any(|e| self.edges[e.edge].area.is_none()) {
            return CouplingKind::Pressure;
        }
        n.coupling_override.unwrap_or(default)
    }

    /// Conversion plants attached to gas node `node`.
    pub fn conversions_at(&self, node: usize) -> impl Iterator<Item = (usize, &ConversionEdge)> {
        self.conversions
            .iter()
            .enumerate()
            .filter(move |(_, c)| c.gas_node == node)
    }

    /// Fixed net injections `(P, Q)` [p.u.] of bus `i` at time `t`. Demands
    /// of PQ buses follow the load profile; for PV buses only P is used.
    pub fn bus_injection(&self, i: usize, t: f64) -> (f64, f64) {
        let b = &self.buses[i];
        let f = match b.kind {
            BusKind::PQ => self.load_profile.factor(t),
            _ => 1.0,
        };
        ((b.pg - b.pd * f) / self.base_mva, (b.qg - b.qd * f) / self.base_mva)
    }

    /// Sum of pipe lengths [m].
    pub fn total_pipe_length(&self) -> f64 {
        self.edges.iter().filter_map(|e| e.geometry).map(|g| g.length).sum()
    }
}

fn components(n: usize, adjacency: &[Vec<usize>]) -> Vec<usize> {
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = next;
        while let Some(v) = stack.pop() {
            for &w in &adjacency[v] {
                if comp[w] == usize::MAX {
                    comp[w] = next;
                    stack.push(w);
                }
            }
        }
        next += 1;
    }
    comp
}

/// Resolves a scenario into a validated network.
pub fn build_network(s: &ScenarioDescription) -> Result<Network> {
    s.constants.validate()?;
    let node_index: HashMap<String, usize> = s.gas.nodes.iter().enumerate().map(|(i, n)| (n.id.clone(), i)).collect();
    let mut nodes: Vec<GasNode> = s
        .gas
        .nodes
        .iter()
        .map(|n| GasNode {
            id: n.id.clone(),
            kind: n.kind,
            boundary_flow: match n.kind {
                NodeKind::Inner => None,
                _ => Some(n.flow.clone().unwrap_or_else(|| TimeSeries::constant(0.0))),
            },
            coupling_override: n.coupling,
            ends: Vec::new(),
        })
        .collect();

    let mut edges = Vec::with_capacity(s.gas.edges.len());
    for (k, e) in s.gas.edges.iter().enumerate() {
        let lookup = |id: &str| {
            node_index.get(id).copied().ok_or_else(|| Error::DanglingReference {
                edge: e.id.clone(),
                node: id.to_string(),
            })
        };
        let from = lookup(&e.from)?;
        let to = lookup(&e.to)?;
        if from == to {
            return Err(Error::InvalidNetwork(format!("edge `{}` is a self loop", e.id)));
        }
        let (geometry, area) = if e.kind == EdgeKind::Pipe {
            let g = PipeGeometry {
                length: e.length.unwrap_or(0.0),
                diameter: e.diameter.unwrap_or(0.0),
                roughness: e.roughness.unwrap_or(s.roughness),
            };
            if !(g.length > 0.0 && g.diameter > 0.0 && g.roughness > 0.0) {
                return Err(Error::InvalidNetwork(format!(
                    "pipe `{}` needs positive length, diameter and roughness",
                    e.id
                )));
            }
            (Some(g), Some(PI * g.diameter * g.diameter / 4.0))
        } else {
            (None, e.area)
        };
        nodes[from].ends.push(EdgeEnd {
            edge: k,
            side: Side::From,
        });
        nodes[to].ends.push(EdgeEnd {
            edge: k,
            side: Side::To,
        });
        edges.push(GasEdge {
            id: e.id.clone(),
            kind: e.kind,
            from,
            to,
            geometry,
            area,
        });
    }

    // Inactive valves and compressors take the cross section of the single
    // pipe attached to them.
    for k in 0..edges.len() {
        let e = &edges[k];
        if !matches!(e.kind, EdgeKind::Valve | EdgeKind::Compressor) || e.area.is_some() {
            continue;
        }
        let attached: Vec<usize> = [e.from, e.to]
            .iter()
            .flat_map(|&n| nodes[n].ends.iter().map(|end| end.edge))
            .filter(|&j| j != k && edges[j].is_pipe())
            .collect();
        if attached.len() != 1 {
            return Err(Error::InvalidNetwork(format!(
                "{:?} `{}` must be attached to exactly one pipe to inherit its cross section, found {}",
                e.kind,
                e.id,
                attached.len()
            )));
        }
        edges[k].area = edges[attached[0]].area;
    }

    for n in &nodes {
        if n.ends.is_empty() {
            return Err(Error::InvalidNetwork(format!(
                "gas node `{}` has no incident edge",
                n.id
            )));
        }
        if let Some(kind) = n.coupling_override {
            if kind == CouplingKind::Bernoulli && n.ends.iter().any(|e| edges[e.edge].area.is_none()) {
                return Err(Error::InvalidNetwork(format!(
                    "gas node `{}` requests Bernoulli coupling but an incident edge has no cross section",
                    n.id
                )));
            }
        }
    }

    let adjacency: Vec<Vec<usize>> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| {
            n.ends
                .iter()
                .map(|end| {
                    let e = &edges[end.edge];
                    if e.from == i {
                        e.to
                    } else {
                        e.from
                    }
                })
                .collect()
        })
        .collect();
    let comp = components(nodes.len(), &adjacency);
    let n_comp = comp.iter().copied().max().map_or(0, |m| m + 1);
    let mut anchors: Vec<Option<(usize, f64)>> = vec![None; n_comp];
    if let Some(a) = &s.gas.anchor {
        let i = *node_index.get(&a.node).ok_or_else(|| Error::DanglingReference {
            edge: "gas.anchor".into(),
            node: a.node.clone(),
        })?;
        s.constants.density(a.pressure_bar * crate::units::BAR)?;
        anchors[comp[i]] = Some((i, a.pressure_bar));
    }
    for (c, anchor) in anchors.iter_mut().enumerate() {
        let source = nodes
            .iter()
            .enumerate()
            .find(|(i, n)| comp[*i] == c && n.kind == NodeKind::Source);
        match source {
            None => {
                let first = comp.iter().position(|&x| x == c).expect("component is non-empty");
                return Err(Error::DisconnectedGas {
                    node: nodes[first].id.clone(),
                });
            }
            Some((i, _)) => {
                if anchor.is_none() {
                    *anchor = Some((i, DEFAULT_ANCHOR_BAR));
                }
            }
        }
    }
    let anchors = anchors.into_iter().flatten().collect();

    // Power side.
    let bus_index: HashMap<String, usize> = s
        .power
        .buses
        .iter()
        .enumerate()
        .map(|(i, b)| (b.id.clone(), i))
        .collect();
    let base = s.power.base_mva;
    let buses: Vec<Bus> = s
        .power
        .buses
        .iter()
        .map(|b| Bus {
            id: b.id.clone(),
            kind: b.kind,
            pd: b.pd,
            qd: b.qd,
            pg: b.pg,
            qg: b.qg,
            vm: b.vm,
            va: b.va_deg.to_radians(),
        })
        .collect();
    let shunts: Vec<Shunt> = s
        .power
        .buses
        .iter()
        .map(|b| Shunt {
            g: b.gs / base,
            b: b.bs / base,
        })
        .collect();
    let mut lines = Vec::with_capacity(s.power.lines.len());
    for (k, l) in s.power.lines.iter().enumerate() {
        let lookup = |id: &str| {
            bus_index.get(id).copied().ok_or_else(|| Error::DanglingReference {
                edge: format!("line {k}"),
                node: id.to_string(),
            })
        };
        lines.push(Line {
            from: lookup(&l.from)?,
            to: lookup(&l.to)?,
            r: l.r,
            x: l.x,
            b: l.b,
            tap: l.tap,
            shift: l.shift_deg.to_radians(),
        });
    }
    let admittance = build_admittance(buses.len(), &lines, &shunts)?;
    let mut bus_adj = vec![Vec::new(); buses.len()];
    for l in &lines {
        bus_adj[l.from].push(l.to);
        bus_adj[l.to].push(l.from);
    }
    let bus_comp = components(buses.len(), &bus_adj);
    let n_bus_comp = bus_comp.iter().copied().max().map_or(0, |m| m + 1);
    for c in 0..n_bus_comp {
        if !buses
            .iter()
            .enumerate()
            .any(|(i, b)| bus_comp[i] == c && b.kind == BusKind::Slack)
        {
            let first = bus_comp.iter().position(|&x| x == c).expect("component is non-empty");
            return Err(Error::MissingSlack {
                bus: buses[first].id.clone(),
            });
        }
    }

    // Conversion plants.
    let e_gtp = s.coupling.e_gtp(s.constants.rho0);
    let e_ptg = s.coupling.e_ptg(s.constants.rho0);
    let mut conversions = Vec::with_capacity(s.coupling.conversions.len());
    for c in &s.coupling.conversions {
        let fail = |m: String| Error::InvalidConversion {
            conversion: c.id.clone(),
            message: m,
        };
        let gas_node = *node_index
            .get(&c.gas_node)
            .ok_or_else(|| fail(format!("unknown gas node `{}`", c.gas_node)))?;
        if nodes[gas_node].kind != NodeKind::Sink {
            return Err(fail(format!("gas node `{}` is not a sink", c.gas_node)));
        }
        let bus = *bus_index
            .get(&c.bus)
            .ok_or_else(|| fail(format!("unknown bus `{}`", c.bus)))?;
        if buses[bus].kind != BusKind::Slack {
            return Err(fail(format!("bus `{}` is not a slack bus", c.bus)));
        }
        let law = ConversionLaw::new(e_gtp, e_ptg, c.epsilon.unwrap_or(s.coupling.epsilon))
            .map_err(|e| fail(e.to_string()))?;
        conversions.push(ConversionEdge {
            id: c.id.clone(),
            gas_node,
            bus,
            law,
        });
    }

    Ok(Network {
        name: s.name.clone(),
        gas: s.constants,
        nodes,
        edges,
        anchors,
        default_coupling: s.solver.coupling,
        base_mva: base,
        buses,
        lines,
        shunts,
        admittance,
        load_profile: s.power.load_profile,
        conversions,
        node_index,
        bus_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::scenario::{ConversionSpec, EdgeSpec, NodeSpec};

    fn node(id: &str, kind: NodeKind) -> NodeSpec {
        NodeSpec {
            id: id.into(),
            kind,
            flow: None,
            coupling: None,
        }
    }

    fn pipe(id: &str, from: &str, to: &str) -> EdgeSpec {
        EdgeSpec {
            id: id.into(),
            kind: EdgeKind::Pipe,
            from: from.into(),
            to: to.into(),
            length: Some(1000.0),
            diameter: Some(0.5),
            roughness: None,
            area: None,
        }
    }

    fn other(id: &str, kind: EdgeKind, from: &str, to: &str) -> EdgeSpec {
        EdgeSpec {
            kind,
            length: None,
            diameter: None,
            ..pipe(id, from, to)
        }
    }

    fn scenario(nodes: Vec<NodeSpec>, edges: Vec<EdgeSpec>) -> ScenarioDescription {
        let mut s = ScenarioDescription::default();
        s.gas.nodes = nodes;
        s.gas.edges = edges;
        s
    }

    #[test]
    fn compressor_inherits_single_pipe_area() {
        let s = scenario(
            vec![
                node("a", NodeKind::Source),
                node("b", NodeKind::Inner),
                node("c", NodeKind::Inner),
                node("d", NodeKind::Sink),
            ],
            vec![
                pipe("p", "a", "b"),
                other("cs", EdgeKind::Compressor, "b", "c"),
                other("sp", EdgeKind::ShortPipe, "c", "d"),
            ],
        );
        let net = build_network(&s).unwrap();
        assert_eq!(net.edges[1].area, net.edges[0].area);
        assert_eq!(net.edges[2].area, None);
        assert_eq!(
            net.effective_coupling(1, CouplingKind::Bernoulli),
            CouplingKind::Bernoulli
        );
        assert_eq!(
            net.effective_coupling(2, CouplingKind::Bernoulli),
            CouplingKind::Pressure
        );
        assert_eq!(net.anchors, vec![(0, DEFAULT_ANCHOR_BAR)]);
    }

    #[test]
    fn compressor_between_two_pipes_is_rejected() {
        let s = scenario(
            vec![
                node("a", NodeKind::Source),
                node("b", NodeKind::Inner),
                node("c", NodeKind::Inner),
                node("d", NodeKind::Sink),
            ],
            vec![
                pipe("p", "a", "b"),
                other("cs", EdgeKind::Compressor, "b", "c"),
                pipe("q", "c", "d"),
            ],
        );
        assert!(matches!(build_network(&s), Err(Error::InvalidNetwork(_))));
    }

    #[test]
    fn degrees_match_incidence() {
        let s = scenario(
            vec![
                node("a", NodeKind::Source),
                node("b", NodeKind::Inner),
                node("c", NodeKind::Sink),
                node("d", NodeKind::Sink),
            ],
            vec![pipe("p", "a", "b"), pipe("q", "b", "c"), pipe("r", "b", "d")],
        );
        let net = build_network(&s).unwrap();
        for (i, n) in net.nodes.iter().enumerate() {
            let count = net.edges.iter().filter(|e| e.from == i || e.to == i).count();
            assert_eq!(n.degree(), count);
        }
        assert_eq!(net.nodes[1].degree(), 3);
    }

    #[test]
    fn dangling_and_disconnected() {
        let s = scenario(
            vec![node("a", NodeKind::Source), node("b", NodeKind::Sink)],
            vec![pipe("p", "a", "x")],
        );
        assert!(matches!(build_network(&s), Err(Error::DanglingReference { .. })));
        let s = scenario(
            vec![
                node("a", NodeKind::Source),
                node("b", NodeKind::Sink),
                node("c", NodeKind::Sink),
                node("d", NodeKind::Sink),
            ],
            vec![pipe("p", "a", "b"), pipe("q", "c", "d")],
        );
        assert!(matches!(build_network(&s), Err(Error::DisconnectedGas { .. })));
    }

    #[test]
    fn conversion_needs_sink_and_slack() {
        use crate::io::scenario::BusSpec;
        let mut s = scenario(
            vec![node("a", NodeKind::Source), node("b", NodeKind::Sink)],
            vec![pipe("p", "a", "b")],
        );
        s.power.buses = vec![BusSpec::new("1", BusKind::Slack), BusSpec::new("2", BusKind::PV)];
        s.power.lines = vec![crate::io::scenario::LineSpec {
            from: "1".into(),
            to: "2".into(),
            r: 0.0,
            x: 0.1,
            b: 0.0,
            tap: 1.0,
            shift_deg: 0.0,
        }];
        let conv = |g: &str, b: &str| ConversionSpec {
            id: "c".into(),
            gas_node: g.into(),
            bus: b.into(),
            epsilon: None,
        };
        s.coupling.conversions = vec![conv("b", "1")];
        assert_eq!(build_network(&s).unwrap().conversions.len(), 1);
        s.coupling.conversions = vec![conv("b", "2")];
        assert!(matches!(build_network(&s), Err(Error::InvalidConversion { .. })));
        s.coupling.conversions = vec![conv("a", "1")];
        assert!(matches!(build_network(&s), Err(Error::InvalidConversion { .. })));
    }

    #[test]
    fn power_island_without_slack() {
        use crate::io::scenario::BusSpec;
        let mut s = ScenarioDescription::default();
        s.power.buses = vec![BusSpec::new("1", BusKind::Slack), BusSpec::new("2", BusKind::PQ)];
        assert!(matches!(build_network(&s), Err(Error::MissingSlack { .. })));
    }
}
