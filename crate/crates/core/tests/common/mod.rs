#![allow(dead_code)]

use std::path::PathBuf;

use num_complex::Complex64;

use gaspower_core::gas::{bernoulli_invariant, CouplingKind};
use gaspower_core::io::scenario::{BusSpec, LineSpec};
use gaspower_core::network::{build_network, Network};
use gaspower_core::power::{pf_residual, BusKind, BusState, LoadProfile};
use gaspower_core::solver::linear::Triplets;
use gaspower_core::solver::{Simulation, StepContext, StepKind};
use gaspower_core::units::BAR;
use gaspower_core::{parse_scenario, read_scenario, ScenarioDescription};

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

pub fn simulation(s: &ScenarioDescription) -> Simulation {
    Simulation::new(build_network(s).unwrap(), s.solver.clone()).unwrap()
}

pub fn toy() -> ScenarioDescription {
    read_scenario(&scenario_path("toy.toml")).unwrap()
}

/// Source `S` feeding sink `D` through one pipe; both boundaries carry
/// `flow` [m³/s].
pub fn single_pipe(flow: f64, length_km: f64) -> ScenarioDescription {
    parse_scenario(&format!(
        r#"
format = "gaspower-scenario"
version = 1
[gas]
anchor = {{ node = "S", pressure = "60 bar" }}
[[gas.nodes]]
id = "S"
kind = "source"
flow = "{flow} m3/s"
[[gas.nodes]]
id = "D"
kind = "sink"
flow = "{flow} m3/s"
[[gas.edges]]
id = "p"
kind = "pipe"
from = "S"
to = "D"
length = "{length_km} km"
diameter = "0.5 m"
"#
    ))
    .unwrap()
}

/// The toy scenario's gas network with every boundary flow zero and no
/// power side.
pub fn toy_gas_at_rest() -> ScenarioDescription {
    let mut s = toy();
    s.power = Default::default();
    s.coupling.conversions.clear();
    for n in &mut s.gas.nodes {
        if n.flow.is_some() {
            n.flow = Some(gaspower_core::TimeSeries::constant(0.0));
        }
    }
    s
}

/// Largest node-balance and invariant violations of the current state,
/// recomputed from edge-end values: `(balance [m³/s], invariant)` where the
/// invariant is measured in bar for pressure coupling and in
/// `ρ(50 bar)·H_b/bar` for Bernoulli coupling.
pub fn node_violations(sim: &Simulation) -> (f64, f64) {
    let net: &Network = sim.network();
    let lay = sim.layout();
    let x = sim.state();
    let gas = &net.gas;
    let t = sim.time();
    let rho_ref = gas.density(50.0 * BAR).unwrap();
    let mut worst = (0.0f64, 0.0f64);
    for (i, node) in net.nodes.iter().enumerate() {
        let mut balance = -node.withdrawal(t);
        for (k, _) in net.conversions_at(i) {
            balance -= x[lay.conversion(k)];
        }
        let mut h = Vec::new();
        let kind = net.effective_coupling(i, sim.config().coupling);
        for end in &node.ends {
            let (ri, qi) = lay.end(*end);
            balance += end.orientation() * x[qi];
            let p = gas.pressure(x[ri]).unwrap();
            h.push(match kind {
                CouplingKind::Pressure => p / BAR,
                CouplingKind::Bernoulli => {
                    let area = net.edges[end.edge].area.unwrap();
                    bernoulli_invariant(gas, p, x[qi], area).unwrap() * rho_ref / BAR
                }
            });
        }
        worst.0 = worst.0.max(balance.abs());
        for w in h.windows(2) {
            worst.1 = worst.1.max((w[1] - w[0]).abs());
        }
    }
    worst
}

/// Pressures [bar] at every grid point of every edge.
pub fn grid_pressures(sim: &Simulation) -> Vec<f64> {
    let x = sim.state();
    let gas = &sim.network().gas;
    sim.layout()
        .edges
        .iter()
        .flat_map(|b| (0..b.points).map(move |j| b.rho(j)))
        .map(|k| gas.pressure(x[k]).unwrap() / BAR)
        .collect()
}

pub fn line(from: &str, to: &str, r: f64, x: f64, b: f64) -> LineSpec {
    LineSpec {
        from: from.into(),
        to: to.into(),
        r,
        x,
        b,
        tap: 1.0,
        shift_deg: 0.0,
    }
}

pub fn power_only(buses: Vec<BusSpec>, lines: Vec<LineSpec>) -> ScenarioDescription {
    let mut s = ScenarioDescription::default();
    s.power.buses = buses;
    s.power.lines = lines;
    s.power.load_profile = LoadProfile::flat();
    s
}

/// Newton solution `(V, φ, P, Q)` per bus.
pub fn solve(s: &ScenarioDescription) -> (Network, Vec<BusState>) {
    let net = build_network(s).unwrap();
    let mut sim = Simulation::new(net.clone(), s.solver.clone()).unwrap();
    sim.initialize().unwrap();
    let x = sim.state();
    let states = (0..net.buses.len())
        .map(|i| {
            let c = sim.layout().bus(i);
            BusState {
                v: x[c],
                phi: x[c + 1],
                p: x[c + 2],
                q: x[c + 3],
            }
        })
        .collect();
    (net, states)
}

/// Gauss–Seidel on the complex voltages. PQ buses hold their injection, PV
/// buses their P and |V| (Q recomputed each sweep), slack buses their
/// voltage.
pub fn gauss_seidel(net: &Network) -> Vec<Complex64> {
    let n = net.buses.len();
    let y = |i: usize, j: usize| net.admittance.get(i, j);
    let mut v: Vec<Complex64> = net.buses.iter().map(|b| Complex64::from_polar(b.vm, b.va)).collect();
    for _ in 0..100_000 {
        let mut change = 0.0f64;
        for i in 0..n {
            let bus = &net.buses[i];
            if bus.kind == BusKind::Slack {
                continue;
            }
            let (p, mut q) = net.bus_injection(i, 0.0);
            let others: Complex64 = (0..n).filter(|&j| j != i).map(|j| y(i, j) * v[j]).sum();
            if bus.kind == BusKind::PV {
                q = -(v[i].conj() * (others + y(i, i) * v[i])).im;
            }
            let s = Complex64::new(p, q);
            let mut vi = ((s / v[i]).conj() - others) / y(i, i);
            if bus.kind == BusKind::PV {
                vi = vi / vi.norm() * bus.vm;
            }
            change = change.max((vi - v[i]).norm());
            v[i] = vi;
        }
        if change < 1e-15 {
            break;
        }
    }
    v
}

/// Largest gaps `(V or φ, power-flow residual)` between the Newton solution
/// of a power-only scenario and the Gauss–Seidel oracle.
pub fn oracle_gaps(s: &ScenarioDescription) -> (f64, f64) {
    let (net, states) = solve(s);
    let oracle = gauss_seidel(&net);
    let mut gap = 0.0f64;
    for (st, v) in states.iter().zip(&oracle) {
        gap = gap.max((st.v - v.norm()).abs()).max((st.phi - v.arg()).abs());
    }
    let r = pf_residual(&states, &net.admittance);
    (gap, r.iter().fold(0.0, |m, e| m.max(e.abs())))
}

pub fn two_bus_case() -> ScenarioDescription {
    let mut load = BusSpec::new("2", BusKind::PQ);
    load.pd = 100.0;
    load.qd = 20.0;
    power_only(
        vec![BusSpec::new("1", BusKind::Slack), load],
        vec![line("1", "2", 0.01, 0.1, 0.0)],
    )
}

pub fn three_bus_case() -> ScenarioDescription {
    let mut slack = BusSpec::new("1", BusKind::Slack);
    slack.vm = 1.02;
    let mut pv = BusSpec::new("2", BusKind::PV);
    pv.pg = 60.0;
    pv.pd = 10.0;
    pv.vm = 1.01;
    let mut pq = BusSpec::new("3", BusKind::PQ);
    pq.pd = 120.0;
    pq.qd = 40.0;
    pq.bs = 5.0;
    power_only(
        vec![slack, pv, pq],
        vec![
            line("1", "2", 0.02, 0.06, 0.03),
            line("1", "3", 0.08, 0.24, 0.025),
            line("2", "3", 0.06, 0.18, 0.02),
        ],
    )
}

/// Largest entrywise gap between the analytic Jacobian and central
/// differences on the toy fixture, at a perturbed state after 20 steps, for
/// both the stationary and the transient system.
pub fn max_jacobian_gap(coupling: CouplingKind) -> f64 {
    let mut s = toy();
    s.solver.coupling = coupling;
    let mut sim = simulation(&s);
    sim.initialize().unwrap();
    for _ in 0..20 {
        sim.step().unwrap();
    }
    let old = sim.state().to_vec();
    let mut x = old.clone();
    for (k, v) in x.iter_mut().enumerate() {
        *v *= 1.0 + 1e-3 * ((k % 7) as f64 - 3.0);
    }
    let system = sim.system();
    let mut gap = 0.0f64;
    for kind in [StepKind::Stationary, StepKind::Transient { old: &old, dt: 900.0 }] {
        let ctx = StepContext { t: 21.0 * 900.0, kind };
        let mut jac = Triplets::default();
        system.residual_and_jacobian(&x, &ctx, &mut jac).unwrap();
        let analytic = jac.to_dense(system.n());
        let fd = system.finite_difference_jacobian(&x, &ctx).unwrap();
        for (ra, rf) in analytic.iter().zip(&fd) {
            for (a, f) in ra.iter().zip(rf) {
                gap = gap.max((a - f).abs());
            }
        }
    }
    gap
}
