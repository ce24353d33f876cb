//! Native scenario format.
//!
//! A scenario is a TOML document with the header `format = "gaspower-scenario"`
//! and `version = 1`. Physical quantities are strings `"<number> <unit>"`;
//! per-unit and dimensionless values are bare numbers. Omitted constants take
//! the benchmark defaults.
//!
//! ```toml
//! format = "gaspower-scenario"
//! version = 1
//!
//! [gas]
//! anchor = { node = "S", pressure = "60 bar" }
//!
//! [[gas.nodes]]
//! id = "S"
//! kind = "source"
//! flow = "10 m3/s"
//!
//! [[gas.nodes]]
//! id = "D"
//! kind = "sink"
//! flow = [{ t = "0 h", value = "10 m3/s" }, { t = "12 h", value = "8 m3/s" }]
//!
//! [[gas.edges]]
//! id = "p1"
//! kind = "pipe"
//! from = "S"
//! to = "D"
//! length = "40 km"
//! diameter = "0.6 m"
//! ```

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::conversion::ConversionFactors;
use crate::error::{Error, Result};
use crate::gas::{CouplingKind, GasConstants};
use crate::network::{EdgeKind, NodeKind};
use crate::power::{BusKind, LoadProfile};
use crate::series::TimeSeries;
use crate::solver::{JacobianMode, SolverConfig};
use crate::units::{format_quantity, parse_quantity, Dimension as D};

pub const FORMAT_NAME: &str = "gaspower-scenario";
pub const FORMAT_VERSION: u32 = 1;

/// Default pipe roughness [m].
pub const DEFAULT_ROUGHNESS: f64 = 8e-6;
/// Default anchor pressure for the stationary initialization [bar].
pub const DEFAULT_ANCHOR_BAR: f64 = 60.0;
/// Default smoothing half-width of conversion laws [MW].
pub const DEFAULT_EPSILON_MW: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub id: String,
    pub kind: NodeKind,
    /// Source inflow or sink outflow [m³/s]; `None` for inner nodes.
    pub flow: Option<TimeSeries>,
    pub coupling: Option<CouplingKind>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSpec {
    pub id: String,
    pub kind: EdgeKind,
    pub from: String,
    pub to: String,
    /// [m], pipes only
    pub length: Option<f64>,
    /// [m], pipes only
    pub diameter: Option<f64>,
    /// [m], pipes only
    pub roughness: Option<f64>,
    /// Explicit cross section [m²] for non-pipe edges.
    pub area: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSpec {
    pub node: String,
    pub pressure_bar: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GasSection {
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<EdgeSpec>,
    pub anchor: Option<AnchorSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BusSpec {
    pub id: String,
    pub kind: BusKind,
    /// Demand [MW] / [MVAr].
    pub pd: f64,
    pub qd: f64,
    /// Scheduled generation [MW] / [MVAr].
    pub pg: f64,
    pub qg: f64,
    /// Shunt conductance [MW at V = 1 p.u.] and susceptance [MVAr at V = 1 p.u.].
    pub gs: f64,
    pub bs: f64,
    /// Voltage magnitude setpoint / initial value [p.u.].
    pub vm: f64,
    /// Voltage angle setpoint / initial value [deg].
    pub va_deg: f64,
}

impl BusSpec {
    pub fn new(id: impl Into<String>, kind: BusKind) -> Self {
        BusSpec {
            id: id.into(),
            kind,
            pd: 0.0,
            qd: 0.0,
            pg: 0.0,
            qg: 0.0,
            gs: 0.0,
            bs: 0.0,
            vm: 1.0,
            va_deg: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSpec {
    pub from: String,
    pub to: String,
    /// Series resistance, reactance and total charging [p.u.].
    pub r: f64,
    pub x: f64,
    pub b: f64,
    /// Off-nominal tap ratio (1 for lines).
    pub tap: f64,
    pub shift_deg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSection {
    /// [MVA]
    pub base_mva: f64,
    pub buses: Vec<BusSpec>,
    pub lines: Vec<LineSpec>,
    pub load_profile: LoadProfile,
}

impl Default for PowerSection {
    fn default() -> Self {
        PowerSection {
            base_mva: 100.0,
            buses: Vec::new(),
            lines: Vec::new(),
            load_profile: LoadProfile::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConversionSpec {
    pub id: String,
    pub gas_node: String,
    pub bus: String,
    /// Per-plant smoothing half-width [MW].
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSection {
    pub factors: ConversionFactors,
    /// Explicit factors [m³/MJ] overriding the ones derived from `factors`.
    pub e_gtp: Option<f64>,
    pub e_ptg: Option<f64>,
    /// [MW]
    pub epsilon: f64,
    pub conversions: Vec<ConversionSpec>,
}

impl Default for CouplingSection {
    fn default() -> Self {
        CouplingSection {
            factors: ConversionFactors::default(),
            e_gtp: None,
            e_ptg: None,
            epsilon: DEFAULT_EPSILON_MW,
            conversions: Vec::new(),
        }
    }
}

impl CouplingSection {
    pub fn e_gtp(&self, rho0: f64) -> f64 {
        self.e_gtp.unwrap_or_else(|| self.factors.e_gtp(rho0))
    }

    pub fn e_ptg(&self, rho0: f64) -> f64 {
        self.e_ptg.unwrap_or_else(|| self.factors.e_ptg(rho0))
    }
}

/// A validated scenario in canonical units.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDescription {
    pub name: Option<String>,
    pub constants: GasConstants,
    /// Roughness used for pipes that do not state their own [m].
    pub roughness: f64,
    pub gas: GasSection,
    pub power: PowerSection,
    pub coupling: CouplingSection,
    pub solver: SolverConfig,
}

impl Default for ScenarioDescription {
    fn default() -> Self {
        ScenarioDescription {
            name: None,
            constants: GasConstants::default(),
            roughness: DEFAULT_ROUGHNESS,
            gas: GasSection::default(),
            power: PowerSection::default(),
            coupling: CouplingSection::default(),
            solver: SolverConfig::default(),
        }
    }
}

// ---------------------------------------------------------------------------
// Raw document

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    format: String,
    version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default)]
    constants: RawConstants,
    #[serde(default)]
    gas: RawGas,
    #[serde(default)]
    power: RawPower,
    #[serde(default)]
    coupling: RawCoupling,
    #[serde(default)]
    solver: RawSolver,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstants {
    #[serde(skip_serializing_if = "Option::is_none")]
    rho0: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p0: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    z0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t0: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    temperature: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    viscosity: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    roughness: Option<String>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGas {
    #[serde(skip_serializing_if = "Option::is_none")]
    anchor: Option<RawAnchor>,
    #[serde(default)]
    nodes: Vec<RawNode>,
    #[serde(default)]
    edges: Vec<RawEdge>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnchor {
    node: String,
    pressure: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: String,
    kind: NodeKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    flow: Option<RawSeries>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coupling: Option<CouplingKind>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawSeries {
    Constant(String),
    Samples(Vec<RawSample>),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSample {
    t: String,
    value: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    id: String,
    kind: EdgeKind,
    from: String,
    to: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    length: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diameter: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    roughness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    area: Option<String>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPower {
    #[serde(skip_serializing_if = "Option::is_none")]
    base_mva: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    load_profile: Option<RawProfile>,
    #[serde(default)]
    buses: Vec<RawBus>,
    #[serde(default)]
    lines: Vec<RawLine>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfile {
    #[serde(skip_serializing_if = "Option::is_none")]
    base: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    period: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBus {
    id: String,
    kind: BusKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pd: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    qd: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pg: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    qg: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gs: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bs: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    vm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    va: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLine {
    from: String,
    to: String,
    r: f64,
    x: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    shift: Option<String>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoupling {
    #[serde(skip_serializing_if = "Option::is_none")]
    eta_gtp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta_ptg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lower_heating_value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    upper_to_lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    e_gtp: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    e_ptg: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<String>,
    #[serde(default)]
    conversions: Vec<RawConversion>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConversion {
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    gas_node: String,
    bus: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<String>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    #[serde(skip_serializing_if = "Option::is_none")]
    horizon: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dt: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dx: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_newton_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_halvings: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coupling: Option<CouplingKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    jacobian: Option<JacobianMode>,
}

// ---------------------------------------------------------------------------
// Parsing

fn q(value: &Option<String>, dim: D, path: &str, default: f64) -> Result<f64> {
    match value {
        Some(s) => parse_quantity(s, dim, path),
        None => Ok(default),
    }
}

fn q_opt(value: &Option<String>, dim: D, path: &str) -> Result<Option<f64>> {
    value.as_ref().map(|s| parse_quantity(s, dim, path)).transpose()
}

fn positive(value: f64, path: &str) -> Result<f64> {
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::schema(path, format!("must be positive, got {value}")))
    }
}

fn series(raw: &RawSeries, path: &str) -> Result<TimeSeries> {
    match raw {
        RawSeries::Constant(s) => Ok(TimeSeries::constant(parse_quantity(s, D::VolumetricFlow, path)?)),
        RawSeries::Samples(samples) => {
            let pts = samples
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    Ok((
                        parse_quantity(&s.t, D::Time, &format!("{path}[{i}].t"))?,
                        parse_quantity(&s.value, D::VolumetricFlow, &format!("{path}[{i}].value"))?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            TimeSeries::new(pts).map_err(|m| Error::schema(path, m))
        }
    }
}

fn unique<'a>(ids: impl Iterator<Item = &'a str>, what: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::schema(what, format!("duplicate id `{id}`")));
        }
    }
    Ok(())
}

impl RawScenario {
    fn into_description(self) -> Result<ScenarioDescription> {
        if self.format != FORMAT_NAME {
            return Err(Error::schema(
                "format",
                format!("expected `{FORMAT_NAME}`, found `{}`", self.format),
            ));
        }
        if self.version != FORMAT_VERSION {
            return Err(Error::schema(
                "version",
                format!("unsupported version {}", self.version),
            ));
        }

        let c = &self.constants;
        let d = GasConstants::default();
        let constants = GasConstants {
            rho0: q(&c.rho0, D::Density, "constants.rho0", d.rho0)?,
            p0_bar: q(&c.p0, D::Pressure, "constants.p0", d.p0_bar)?,
            z0: c.z0.unwrap_or(d.z0),
            t0: q(&c.t0, D::Temperature, "constants.t0", d.t0)?,
            temperature: q(&c.temperature, D::Temperature, "constants.temperature", d.temperature)?,
            alpha_per_bar: q(&c.alpha, D::InversePressure, "constants.alpha", d.alpha_per_bar)?,
            viscosity: q(&c.viscosity, D::Viscosity, "constants.viscosity", d.viscosity)?,
        };
        constants.validate()?;
        let roughness = positive(
            q(&c.roughness, D::Length, "constants.roughness", DEFAULT_ROUGHNESS)?,
            "constants.roughness",
        )?;

        let gas = self.gas.into_section()?;
        let power = self.power.into_section()?;
        let coupling = self.coupling.into_section()?;
        let solver = self.solver.into_config()?;

        Ok(ScenarioDescription {
            name: self.name,
            constants,
            roughness,
            gas,
            power,
            coupling,
            solver,
        })
    }
}

impl RawGas {
    fn into_section(self) -> Result<GasSection> {
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (i, n) in self.nodes.into_iter().enumerate() {
            let path = format!("gas.nodes[{i}]");
            let flow = match (&n.flow, n.kind) {
                (Some(_), NodeKind::Inner) => {
                    return Err(Error::schema(
                        format!("{path}.flow"),
                        "inner nodes take no boundary flow",
                    ))
                }
                (Some(f), _) => Some(series(f, &format!("{path}.flow"))?),
                (None, NodeKind::Inner) => None,
                (None, _) => Some(TimeSeries::constant(0.0)),
            };
            nodes.push(NodeSpec {
                id: n.id,
                kind: n.kind,
                flow,
                coupling: n.coupling,
            });
        }
        unique(nodes.iter().map(|n| n.id.as_str()), "gas.nodes")?;

        let mut edges = Vec::with_capacity(self.edges.len());
        for (i, e) in self.edges.into_iter().enumerate() {
            let path = format!("gas.edges[{i}]");
            let length = q_opt(&e.length, D::Length, &format!("{path}.length"))?;
            let diameter = q_opt(&e.diameter, D::Length, &format!("{path}.diameter"))?;
            let roughness = q_opt(&e.roughness, D::Length, &format!("{path}.roughness"))?;
            let area = q_opt(&e.area, D::Area, &format!("{path}.area"))?;
            if e.kind == EdgeKind::Pipe {
                for (name, v) in [("length", length), ("diameter", diameter)] {
                    match v {
                        None => return Err(Error::schema(format!("{path}.{name}"), "required for pipes")),
                        Some(v) => {
                            positive(v, &format!("{path}.{name}"))?;
                        }
                    }
                }
                if area.is_some() {
                    return Err(Error::schema(
                        format!("{path}.area"),
                        "pipes derive their area from the diameter",
                    ));
                }
            } else if length.is_some() || diameter.is_some() || roughness.is_some() {
                return Err(Error::schema(path, "only pipes carry length, diameter and roughness"));
            }
            if let Some(k) = roughness {
                positive(k, &format!("{path}.roughness"))?;
            }
            if let Some(a) = area {
                positive(a, &format!("{path}.area"))?;
            }
            edges.push(EdgeSpec {
                id: e.id,
                kind: e.kind,
                from: e.from,
                to: e.to,
                length,
                diameter,
                roughness,
                area,
            });
        }
        unique(edges.iter().map(|e| e.id.as_str()), "gas.edges")?;

        let anchor = match self.anchor {
            Some(a) => {
                let p = parse_quantity(&a.pressure, D::Pressure, "gas.anchor.pressure")?;
                Some(AnchorSpec {
                    node: a.node,
                    pressure_bar: positive(p, "gas.anchor.pressure")?,
                })
            }
            None => None,
        };
        Ok(GasSection { nodes, edges, anchor })
    }
}

impl RawPower {
    fn into_section(self) -> Result<PowerSection> {
        let d = PowerSection::default();
        let base_mva = positive(
            q(&self.base_mva, D::ApparentPower, "power.base_mva", d.base_mva)?,
            "power.base_mva",
        )?;
        let load_profile = match self.load_profile {
            None => d.load_profile,
            Some(p) => {
                let dp = LoadProfile::default();
                LoadProfile {
                    base: p.base.unwrap_or(dp.base),
                    amplitude: p.amplitude.unwrap_or(dp.amplitude),
                    period: positive(
                        q(&p.period, D::Time, "power.load_profile.period", dp.period)?,
                        "power.load_profile.period",
                    )?,
                }
            }
        };
        let mut buses = Vec::with_capacity(self.buses.len());
        for (i, b) in self.buses.into_iter().enumerate() {
            let path = |f: &str| format!("power.buses[{i}].{f}");
            let vm = b.vm.unwrap_or(1.0);
            positive(vm, &path("vm"))?;
            buses.push(BusSpec {
                pd: q(&b.pd, D::ActivePower, &path("pd"), 0.0)?,
                qd: q(&b.qd, D::ReactivePower, &path("qd"), 0.0)?,
                pg: q(&b.pg, D::ActivePower, &path("pg"), 0.0)?,
                qg: q(&b.qg, D::ReactivePower, &path("qg"), 0.0)?,
                gs: q(&b.gs, D::ActivePower, &path("gs"), 0.0)?,
                bs: q(&b.bs, D::ReactivePower, &path("bs"), 0.0)?,
                vm,
                va_deg: q(&b.va, D::Angle, &path("va"), 0.0)?,
                id: b.id,
                kind: b.kind,
            });
        }
        unique(buses.iter().map(|b| b.id.as_str()), "power.buses")?;
        let lines = self
            .lines
            .into_iter()
            .enumerate()
            .map(|(i, l)| {
                let tap = match l.tap {
                    None | Some(0.0) => 1.0,
                    Some(t) => positive(t, &format!("power.lines[{i}].tap"))?,
                };
                Ok(LineSpec {
                    shift_deg: q(&l.shift, D::Angle, &format!("power.lines[{i}].shift"), 0.0)?,
                    from: l.from,
                    to: l.to,
                    r: l.r,
                    x: l.x,
                    b: l.b.unwrap_or(0.0),
                    tap,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PowerSection {
            base_mva,
            buses,
            lines,
            load_profile,
        })
    }
}

impl RawCoupling {
    fn into_section(self) -> Result<CouplingSection> {
        let d = ConversionFactors::default();
        let factors = ConversionFactors {
            eta_gtp: self.eta_gtp.unwrap_or(d.eta_gtp),
            eta_ptg: self.eta_ptg.unwrap_or(d.eta_ptg),
            lower_heating_value: q(
                &self.lower_heating_value,
                D::SpecificEnergy,
                "coupling.lower_heating_value",
                d.lower_heating_value,
            )?,
            upper_to_lower: self.upper_to_lower.unwrap_or(d.upper_to_lower),
        };
        for (name, v) in [
            ("eta_gtp", factors.eta_gtp),
            ("eta_ptg", factors.eta_ptg),
            ("lower_heating_value", factors.lower_heating_value),
            ("upper_to_lower", factors.upper_to_lower),
        ] {
            positive(v, &format!("coupling.{name}"))?;
        }
        let epsilon = positive(
            q(&self.epsilon, D::ActivePower, "coupling.epsilon", DEFAULT_EPSILON_MW)?,
            "coupling.epsilon",
        )?;
        let conversions = self
            .conversions
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                let path = format!("coupling.conversions[{i}].epsilon");
                let eps = q_opt(&c.epsilon, D::ActivePower, &path)?;
                if let Some(e) = eps {
                    positive(e, &path)?;
                }
                Ok(ConversionSpec {
                    id: c.id.unwrap_or_else(|| format!("{}-{}", c.gas_node, c.bus)),
                    gas_node: c.gas_node,
                    bus: c.bus,
                    epsilon: eps,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        unique(conversions.iter().map(|c| c.id.as_str()), "coupling.conversions")?;
        Ok(CouplingSection {
            factors,
            e_gtp: q_opt(&self.e_gtp, D::ConversionFactor, "coupling.e_gtp")?,
            e_ptg: q_opt(&self.e_ptg, D::ConversionFactor, "coupling.e_ptg")?,
            epsilon,
            conversions,
        })
    }
}

impl RawSolver {
    fn into_config(self) -> Result<SolverConfig> {
        let d = SolverConfig::default();
        let cfg = SolverConfig {
            horizon: q(&self.horizon, D::Time, "solver.horizon", d.horizon)?,
            dt: q(&self.dt, D::Time, "solver.dt", d.dt)?,
            dx: q(&self.dx, D::Length, "solver.dx", d.dx)?,
            tol: self.tol.unwrap_or(d.tol),
            max_newton_iters: self.max_newton_iters.unwrap_or(d.max_newton_iters),
            max_halvings: self.max_halvings.unwrap_or(d.max_halvings),
            coupling: self.coupling.unwrap_or(d.coupling),
            jacobian_mode: self.jacobian.unwrap_or(d.jacobian_mode),
        };
        cfg.validate().map_err(|e| Error::schema("solver", e.to_string()))?;
        Ok(cfg)
    }
}

/// Parses and validates a native scenario document. Cross references and
/// graph properties are checked by building the network.
pub fn parse_scenario(text: &str) -> Result<ScenarioDescription> {
    let desc = parse_scenario_unchecked(text)?;
    crate::network::build_network(&desc)?;
    Ok(desc)
}

/// Parses a document with schema and unit checks only, e.g. for partial
/// scenarios that are merged later.
pub fn parse_scenario_unchecked(text: &str) -> Result<ScenarioDescription> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| {
        let path = e
            .span()
            .map(|s| format!("byte {}..{}", s.start, s.end))
            .unwrap_or_else(|| "document".into());
        Error::schema(path, e.message().to_string())
    })?;
    raw.into_description()
}

pub fn read_scenario(path: &std::path::Path) -> Result<ScenarioDescription> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text)
}

// ---------------------------------------------------------------------------
// Serialization

fn fq(v: f64, dim: D) -> Option<String> {
    Some(format_quantity(v, dim))
}

impl ScenarioDescription {
    /// Writes the scenario with every value explicit, in canonical units.
    pub fn to_toml(&self) -> Result<String> {
        let c = &self.constants;
        let raw = RawScenario {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
            name: self.name.clone(),
            constants: RawConstants {
                rho0: fq(c.rho0, D::Density),
                p0: fq(c.p0_bar, D::Pressure),
                z0: Some(c.z0),
                t0: fq(c.t0, D::Temperature),
                temperature: fq(c.temperature, D::Temperature),
                alpha: fq(c.alpha_per_bar, D::InversePressure),
                viscosity: fq(c.viscosity, D::Viscosity),
                roughness: fq(self.roughness, D::Length),
            },
            gas: RawGas {
                anchor: self.gas.anchor.as_ref().map(|a| RawAnchor {
                    node: a.node.clone(),
                    pressure: format_quantity(a.pressure_bar, D::Pressure),
                }),
                nodes: self
                    .gas
                    .nodes
                    .iter()
                    .map(|n| RawNode {
                        id: n.id.clone(),
                        kind: n.kind,
                        flow: n.flow.as_ref().map(|s| {
                            if s.is_constant() {
                                RawSeries::Constant(format_quantity(s.points()[0].1, D::VolumetricFlow))
                            } else {
                                RawSeries::Samples(
                                    s.points()
                                        .iter()
                                        .map(|&(t, v)| RawSample {
                                            t: format_quantity(t, D::Time),
                                            value: format_quantity(v, D::VolumetricFlow),
                                        })
                                        .collect(),
                                )
                            }
                        }),
                        coupling: n.coupling,
                    })
                    .collect(),
                edges: self
                    .gas
                    .edges
                    .iter()
                    .map(|e| RawEdge {
                        id: e.id.clone(),
                        kind: e.kind,
                        from: e.from.clone(),
                        to: e.to.clone(),
                        length: e.length.and_then(|v| fq(v, D::Length)),
                        diameter: e.diameter.and_then(|v| fq(v, D::Length)),
                        roughness: e.roughness.and_then(|v| fq(v, D::Length)),
                        area: e.area.and_then(|v| fq(v, D::Area)),
                    })
                    .collect(),
            },
            power: RawPower {
                base_mva: fq(self.power.base_mva, D::ApparentPower),
                load_profile: Some(RawProfile {
                    base: Some(self.power.load_profile.base),
                    amplitude: Some(self.power.load_profile.amplitude),
                    period: fq(self.power.load_profile.period, D::Time),
                }),
                buses: self
                    .power
                    .buses
                    .iter()
                    .map(|b| RawBus {
                        id: b.id.clone(),
                        kind: b.kind,
                        pd: fq(b.pd, D::ActivePower),
                        qd: fq(b.qd, D::ReactivePower),
                        pg: fq(b.pg, D::ActivePower),
                        qg: fq(b.qg, D::ReactivePower),
                        gs: fq(b.gs, D::ActivePower),
                        bs: fq(b.bs, D::ReactivePower),
                        vm: Some(b.vm),
                        va: fq(b.va_deg, D::Angle),
                    })
                    .collect(),
                lines: self
                    .power
                    .lines
                    .iter()
                    .map(|l| RawLine {
                        from: l.from.clone(),
                        to: l.to.clone(),
                        r: l.r,
                        x: l.x,
                        b: Some(l.b),
                        tap: Some(l.tap),
                        shift: fq(l.shift_deg, D::Angle),
                    })
                    .collect(),
            },
            coupling: RawCoupling {
                eta_gtp: Some(self.coupling.factors.eta_gtp),
                eta_ptg: Some(self.coupling.factors.eta_ptg),
                lower_heating_value: fq(self.coupling.factors.lower_heating_value, D::SpecificEnergy),
                upper_to_lower: Some(self.coupling.factors.upper_to_lower),
                e_gtp: self.coupling.e_gtp.and_then(|v| fq(v, D::ConversionFactor)),
                e_ptg: self.coupling.e_ptg.and_then(|v| fq(v, D::ConversionFactor)),
                epsilon: fq(self.coupling.epsilon, D::ActivePower),
                conversions: self
                    .coupling
                    .conversions
                    .iter()
                    .map(|c| RawConversion {
                        id: Some(c.id.clone()),
                        gas_node: c.gas_node.clone(),
                        bus: c.bus.clone(),
                        epsilon: c.epsilon.and_then(|v| fq(v, D::ActivePower)),
                    })
                    .collect(),
            },
            solver: RawSolver {
                horizon: fq(self.solver.horizon, D::Time),
                dt: fq(self.solver.dt, D::Time),
                dx: fq(self.solver.dx, D::Length),
                tol: Some(self.solver.tol),
                max_newton_iters: Some(self.solver.max_newton_iters),
                max_halvings: Some(self.solver.max_halvings),
                coupling: Some(self.solver.coupling),
                jacobian: Some(self.solver.jacobian_mode),
            },
        };
        toml::to_string(&raw).map_err(|e| Error::schema("document", e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
format = "gaspower-scenario"
version = 1

[[gas.nodes]]
id = "a"
kind = "source"
flow = "5 m3/s"

[[gas.nodes]]
id = "b"
kind = "sink"
flow = "5 m3/s"

[[gas.edges]]
id = "p"
kind = "pipe"
from = "a"
to = "b"
length = "10 km"
diameter = "500 mm"
"#;

    #[test]
    fn minimal_document_gets_defaults() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.constants, GasConstants::default());
        assert_eq!(s.constants.alpha_per_bar, -0.00224);
        assert_eq!(s.roughness, 8e-6);
        assert_eq!(s.coupling.factors, ConversionFactors::default());
        assert_eq!(s.solver, SolverConfig::default());
        assert_eq!(s.gas.edges[0].length, Some(10_000.0));
        assert_eq!(s.gas.edges[0].diameter, Some(0.5));
        assert_eq!(s.gas.edges[0].roughness, None);
    }

    #[test]
    fn round_trip_is_lossless() {
        let mut s = parse_scenario(MINIMAL).unwrap();
        s.gas.nodes[1].flow = Some(TimeSeries::new(vec![(0.0, 5.0), (3600.0, 4.1), (7200.0, 1.0 / 3.0)]).unwrap());
        s.gas.anchor = Some(AnchorSpec {
            node: "a".into(),
            pressure_bar: 61.25,
        });
        s.power.buses.push(BusSpec {
            pd: 12.5,
            va_deg: -3.7,
            ..BusSpec::new("7001", BusKind::Slack)
        });
        s.power.buses.push(BusSpec::new("2", BusKind::PQ));
        s.power.lines.push(LineSpec {
            from: "7001".into(),
            to: "2".into(),
            r: 0.01,
            x: 0.1,
            b: 0.02,
            tap: 1.0,
            shift_deg: 0.0,
        });
        s.coupling.conversions.push(ConversionSpec {
            id: "c1".into(),
            gas_node: "b".into(),
            bus: "7001".into(),
            epsilon: Some(0.5),
        });
        let text = s.to_toml().unwrap();
        let back = parse_scenario(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_toml().unwrap(), text);
    }

    #[test]
    fn unit_mismatch_names_the_path() {
        let bad = MINIMAL.replace("\"10 km\"", "\"10 bar\"");
        match parse_scenario(&bad) {
            Err(Error::UnitMismatch { path, .. }) => assert_eq!(path, "gas.edges[0].length"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_geometry_rejected() {
        let bad = MINIMAL.replace("\"500 mm\"", "\"-500 mm\"");
        assert!(matches!(parse_scenario(&bad), Err(Error::Schema { .. })));
    }

    #[test]
    fn unknown_fields_rejected() {
        let bad = MINIMAL.replace("kind = \"pipe\"", "kind = \"pipe\"\ncolour = \"red\"");
        assert!(parse_scenario(&bad).is_err());
        let bad = MINIMAL.replace("kind = \"pipe\"", "kind = \"resistor\"");
        assert!(parse_scenario(&bad).is_err());
    }

    #[test]
    fn wrong_header_rejected() {
        assert!(parse_scenario(&MINIMAL.replace("gaspower-scenario", "other")).is_err());
        assert!(parse_scenario(&MINIMAL.replace("version = 1", "version = 2")).is_err());
    }

    #[test]
    fn inner_node_with_flow_rejected() {
        let bad = MINIMAL.replace("kind = \"sink\"", "kind = \"inner\"");
        assert!(parse_scenario(&bad).is_err());
    }

    #[test]
    fn unlisted_boundary_flow_is_zero() {
        let doc = MINIMAL.replace("flow = \"5 m3/s\"\n\n[[gas.edges]]", "\n[[gas.edges]]");
        let s = parse_scenario(&doc).unwrap();
        assert_eq!(s.gas.nodes[1].flow, Some(TimeSeries::constant(0.0)));
    }

    #[test]
    fn solver_step_must_divide_horizon() {
        let doc = format!("{MINIMAL}\n[solver]\ndt = \"7 min\"\n");
        assert!(parse_scenario(&doc).is_err());
        let doc = format!("{MINIMAL}\n[solver]\ndt = \"5 min\"\nhorizon = \"1 h\"\n");
        let s = parse_scenario(&doc).unwrap();
        assert_eq!(s.solver.steps(), 12);
    }
}
