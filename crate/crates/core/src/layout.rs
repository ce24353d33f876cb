//! Placement of unknowns and equations in the global Newton system.
//!
//! Unknowns, in order:
//! - per gas edge, `(ρ, q)` at each of its points: `M + 1` grid points for a
//!   pipe with `M` cells, the two end states for every other edge;
//! - per bus, `(V, φ, P, Q)`;
//! - per conversion plant, its gas flow.
//!
//! Equations, in order: two per pipe cell (two identities per non-pipe
//! edge), `degree` per gas node (balance then invariants), four per bus
//! (two power-flow, two specification), one per conversion plant.

use std::fmt;

use crate::network::{EdgeEnd, Network, Side};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeBlock {
    /// Index of ρ at point 0.
    pub offset: usize,
    /// Number of points carrying `(ρ, q)`.
    pub points: usize,
    /// Cell length [m]; zero for non-pipe edges.
    pub dx: f64,
    /// First equation row of the edge.
    pub row: usize,
}

impl EdgeBlock {
    pub fn rho(&self, point: usize) -> usize {
        self.offset + 2 * point
    }

    pub fn q(&self, point: usize) -> usize {
        self.offset + 2 * point + 1
    }

    pub fn cells(&self) -> usize {
        self.points - 1
    }
}

/// Unknown and equation counts by category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LayoutCounts {
    pub pipe_unknowns: usize,
    pub other_edge_unknowns: usize,
    pub bus_unknowns: usize,
    pub conversion_unknowns: usize,
    pub scheme_equations: usize,
    pub identity_equations: usize,
    pub node_equations: usize,
    pub boundary_equations: usize,
    pub power_flow_equations: usize,
    pub bus_spec_equations: usize,
    pub conversion_equations: usize,
}

impl LayoutCounts {
    pub fn unknowns(&self) -> usize {
        self.pipe_unknowns + self.other_edge_unknowns + self.bus_unknowns + self.conversion_unknowns
    }

    /// Node balances at degree-1 boundary nodes are counted as boundary
    /// equations, all other node rows as node equations.
    pub fn equations(&self) -> usize {
        self.scheme_equations
            + self.identity_equations
            + self.node_equations
            + self.boundary_equations
            + self.power_flow_equations
            + self.bus_spec_equations
            + self.conversion_equations
    }
}

impl fmt::Display for LayoutCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknowns {} (pipes {}, other edges {}, buses {}, conversions {}); \
             equations {} (scheme {}, identities {}, nodes {}, boundaries {}, power flow {}, bus specs {}, conversions {})",
            self.unknowns(),
            self.pipe_unknowns,
            self.other_edge_unknowns,
            self.bus_unknowns,
            self.conversion_unknowns,
            self.equations(),
            self.scheme_equations,
            self.identity_equations,
            self.node_equations,
            self.boundary_equations,
            self.power_flow_equations,
            self.bus_spec_equations,
            self.conversion_equations
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnknownLayout {
    pub edges: Vec<EdgeBlock>,
    /// First row of each gas node's equations.
    pub node_rows: Vec<usize>,
    pub bus_offset: usize,
    pub bus_row: usize,
    pub conversion_offset: usize,
    pub conversion_row: usize,
    pub n: usize,
    counts: LayoutCounts,
}

/// Number of cells for a pipe of `length` with target cell length `dx`.
pub fn cells_for(length: f64, dx: f64) -> usize {
    ((length / dx).round() as usize).max(1)
}

/// Lays out the unknowns of `network` with target cell length `dx` [m].
///
/// # Panics
///
/// If unknown and equation counts differ, which would be a defect in the
/// network validation.
pub fn build_layout(network: &Network, dx: f64) -> UnknownLayout {
    let mut counts = LayoutCounts::default();
    let mut edges = Vec::with_capacity(network.edges.len());
    let mut offset = 0;
    let mut row = 0;
    for e in &network.edges {
        let (points, cell) = match e.geometry {
            Some(g) => {
                let m = cells_for(g.length, dx);
                counts.pipe_unknowns += 2 * (m + 1);
                counts.scheme_equations += 2 * m;
                (m + 1, g.length / m as f64)
            }
            None => {
                counts.other_edge_unknowns += 4;
                counts.identity_equations += 2;
                (2, 0.0)
            }
        };
        edges.push(EdgeBlock {
            offset,
            points,
            dx: cell,
            row,
        });
        offset += 2 * points;
        row += 2 * (points - 1);
    }
    let mut node_rows = Vec::with_capacity(network.nodes.len());
    for n in &network.nodes {
        node_rows.push(row);
        row += n.degree();
        if n.degree() == 1 {
            counts.boundary_equations += 1;
        } else {
            counts.node_equations += n.degree();
        }
    }
    let bus_offset = offset;
    let bus_row = row;
    offset += 4 * network.buses.len();
    row += 4 * network.buses.len();
    counts.bus_unknowns = 4 * network.buses.len();
    counts.power_flow_equations = 2 * network.buses.len();
    counts.bus_spec_equations = 2 * network.buses.len();
    let conversion_offset = offset;
    let conversion_row = row;
    offset += network.conversions.len();
    row += network.conversions.len();
    counts.conversion_unknowns = network.conversions.len();
    counts.conversion_equations = network.conversions.len();

    assert_eq!(counts.unknowns(), offset);
    assert_eq!(counts.equations(), row);
    assert!(offset == row, "non-square system: {counts}");
    UnknownLayout {
        edges,
        node_rows,
        bus_offset,
        bus_row,
        conversion_offset,
        conversion_row,
        n: offset,
        counts,
    }
}

impl UnknownLayout {
    pub fn counts(&self) -> LayoutCounts {
        self.counts
    }

    /// Indices of `(ρ, q)` at an edge end.
    pub fn end(&self, end: EdgeEnd) -> (usize, usize) {
        let b = &self.edges[end.edge];
        let p = match end.side {
            Side::From => 0,
            Side::To => b.points - 1,
        };
        (b.rho(p), b.q(p))
    }

    /// Index of bus `i`'s V; φ, P and Q follow.
    pub fn bus(&self, i: usize) -> usize {
        self.bus_offset + 4 * i
    }

    pub fn conversion(&self, k: usize) -> usize {
        self.conversion_offset + k
    }

    /// Human-readable name of unknown `i`.
    pub fn unknown_label(&self, net: &Network, i: usize) -> String {
        if i < self.bus_offset {
            let e = self.edges.partition_point(|b| b.offset <= i) - 1;
            let local = i - self.edges[e].offset;
            let var = if local % 2 == 0 { "rho" } else { "q" };
            return format!("edge {} {var}[{}]", net.edges[e].id, local / 2);
        }
        if i < self.conversion_offset {
            let b = (i - self.bus_offset) / 4;
            let var = ["V", "phi", "P", "Q"][(i - self.bus_offset) % 4];
            return format!("bus {} {var}", net.buses[b].id);
        }
        format!("conversion {} q", net.conversions[i - self.conversion_offset].id)
    }

    /// Human-readable name of equation row `r`.
    pub fn equation_label(&self, net: &Network, r: usize) -> String {
        let first_node_row = self.node_rows.first().copied().unwrap_or(self.bus_row);
        if r < first_node_row {
            let e = self.edges.partition_point(|b| b.row <= r) - 1;
            let local = r - self.edges[e].row;
            let eq = if local % 2 == 0 { "mass" } else { "momentum" };
            return if net.edges[e].is_pipe() {
                format!("pipe {} cell {} {eq}", net.edges[e].id, local / 2 + 1)
            } else {
                format!(
                    "edge {} identity {}",
                    net.edges[e].id,
                    if local == 0 { "rho" } else { "q" }
                )
            };
        }
        if r < self.bus_row {
            let n = self.node_rows.partition_point(|&s| s <= r) - 1;
            let local = r - self.node_rows[n];
            return if local == 0 {
                format!("node {} balance", net.nodes[n].id)
            } else {
                format!("node {} invariant {local}", net.nodes[n].id)
            };
        }
        if r < self.conversion_row {
            let b = (r - self.bus_row) / 4;
            let eq = ["P flow", "Q flow", "spec 1", "spec 2"][(r - self.bus_row) % 4];
            return format!("bus {} {eq}", net.buses[b].id);
        }
        format!("conversion {} law", net.conversions[r - self.conversion_row].id)
    }
}
