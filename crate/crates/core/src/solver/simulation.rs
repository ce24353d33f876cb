//! Stationary initialization and the time loop.

use crate::error::{Error, Result};
use crate::io::results::{BusSnapshot, ConversionSnapshot, GasSnapshot, ResultSet, SnapshotLevel};
use crate::layout::{build_layout, UnknownLayout};
use crate::network::Network;
use crate::units::{BAR, HOUR};

use super::config::SolverConfig;
use super::newton::{Newton, NewtonOptions, NewtonReport};
use super::system::{ResidualSystem, StepContext, StepKind};

/// Flow used to leave the q = 0 point when the stationary Jacobian is
/// singular there (closed loops) [m³/s].
const LOOP_START_FLOW: f64 = 1e-3;

/// A running simulation: network, layout and the converged state at the
/// current time level.
pub struct Simulation {
    network: Network,
    layout: UnknownLayout,
    config: SolverConfig,
    newton: Newton,
    state: Vec<f64>,
    step: usize,
    initialized: bool,
}

impl Simulation {
    pub fn new(network: Network, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let layout = build_layout(&network, config.dx);
        let c = network.gas.c_vac();
        let min_dx = layout
            .edges
            .iter()
            .filter(|b| b.dx > 0.0)
            .map(|b| b.dx)
            .fold(f64::INFINITY, f64::min);
        if min_dx.is_finite() && config.dt < min_dx / c {
            log::warn!(
                "event=small_time_step dt_s={} dx_m={min_dx} c_vac={c:.3} note=\"box scheme prefers dt >= dx/c\"",
                config.dt
            );
        }
        log::info!(
            "event=layout unknowns={} pipes={} buses={} conversions={}",
            layout.n,
            network.pipes().count(),
            network.buses.len(),
            network.conversions.len()
        );
        let state = vec![0.0; layout.n];
        Ok(Simulation {
            network,
            layout,
            config,
            newton: Newton::new(),
            state,
            step: 0,
            initialized: false,
        })
    }

    /// Resumes from a converged `state` at time level `step`.
    pub fn from_state(network: Network, config: SolverConfig, state: Vec<f64>, step: usize) -> Result<Self> {
        let mut sim = Simulation::new(network, config)?;
        if state.len() != sim.layout.n {
            return Err(Error::InvalidConfig(format!(
                "state has {} entries, layout needs {}",
                state.len(),
                sim.layout.n
            )));
        }
        sim.system().check_densities(&state)?;
        sim.state = state;
        sim.step = step;
        sim.initialized = true;
        Ok(sim)
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn layout(&self) -> &UnknownLayout {
        &self.layout
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    /// Time of the current level [s].
    pub fn time(&self) -> f64 {
        self.step as f64 * self.config.dt
    }

    pub fn system(&self) -> ResidualSystem<'_> {
        ResidualSystem::new(&self.network, &self.layout, self.config.coupling)
    }

    pub fn symbolic_factorizations(&self) -> usize {
        self.newton.symbolic_factorizations()
    }

    /// Solves the stationary equations at the current time and makes the
    /// result the current state.
    pub fn initialize(&mut self) -> Result<NewtonReport> {
        let t = self.time();
        let opts = NewtonOptions::from(&self.config);
        let system = ResidualSystem::new(&self.network, &self.layout, self.config.coupling);
        let ctx = StepContext {
            t,
            kind: StepKind::Stationary,
        };
        let guess = system.initial_guess(t)?;
        let mut x = guess.clone();
        let report = match self.newton.solve(&system, &ctx, &mut x, &opts) {
            Ok(r) => r,
            Err(first @ (Error::SingularJacobian(_) | Error::NewtonFailed { .. })) => {
                log::info!("event=stationary_retry reason=\"{first}\"");
                x = guess;
                for b in &self.layout.edges {
                    for j in 0..b.points {
                        x[b.q(j)] = LOOP_START_FLOW;
                    }
                }
                self.newton
                    .solve(&system, &ctx, &mut x, &opts)
                    .map_err(|e| Error::Initialization(Box::new(e)))?
            }
            Err(e) => return Err(Error::Initialization(Box::new(e))),
        };
        log::info!(
            "event=stationary iterations={} residual={:.3e}",
            report.iterations,
            report.residual()
        );
        self.state = x;
        self.initialized = true;
        Ok(report)
    }

    /// Advances one time step.
    pub fn step(&mut self) -> Result<NewtonReport> {
        if !self.initialized {
            return Err(Error::InvalidConfig("simulation stepped before initialization".into()));
        }
        let next = self.step + 1;
        let t = next as f64 * self.config.dt;
        let opts = NewtonOptions::from(&self.config);
        let system = ResidualSystem::new(&self.network, &self.layout, self.config.coupling);
        let ctx = StepContext {
            t,
            kind: StepKind::Transient {
                old: &self.state,
                dt: self.config.dt,
            },
        };
        let mut x = self.state.clone();
        let report = self
            .newton
            .solve(&system, &ctx, &mut x, &opts)
            .map_err(|e| Error::StepFailed {
                step: next,
                time_h: t / HOUR,
                source: Box::new(e),
            })?;
        log::info!(
            "step={next} t_h={:.4} iterations={} residual={:.3e} halvings={}",
            t / HOUR,
            report.iterations,
            report.residual(),
            report.halvings
        );
        self.state = x;
        self.step = next;
        Ok(report)
    }

    /// Pressure [bar] at `node`, read from its first incident edge end.
    pub fn node_pressure_bar(&self, node: usize) -> f64 {
        let (ri, _) = self.layout.end(self.network.nodes[node].ends[0]);
        self.network.gas.p_of_rho(self.state[ri]) / BAR
    }

    /// Flow [m³/s] of conversion plant `k` (positive: gas consumed).
    pub fn conversion_flow(&self, k: usize) -> f64 {
        self.state[self.layout.conversion(k)]
    }

    /// Runs from the current level to the horizon, recording results.
    pub fn run(&mut self, level: SnapshotLevel) -> Result<ResultSet> {
        if !self.initialized {
            self.initialize()?;
        }
        let mut results = ResultSet::new(&self.network, &self.config, level);
        self.record(&mut results);
        let steps = self.config.steps();
        while self.step < steps {
            let report = self.step()?;
            results.newton_iterations.push(report.iterations);
            self.record(&mut results);
        }
        Ok(results)
    }

    fn record(&self, results: &mut ResultSet) {
        let net = &self.network;
        let t = self.time();
        results.times_h.push(t / HOUR);
        let (pressure, flow): (Vec<f64>, Vec<f64>) = results
            .conversion_nodes
            .iter()
            .map(|id| {
                let node = net.node_index(id).expect("conversion node exists");
                let q: f64 = net.conversions_at(node).map(|(k, _)| self.conversion_flow(k)).sum();
                (self.node_pressure_bar(node), q)
            })
            .unzip();
        results.pressure.push(pressure);
        results.flow.push(flow);

        if results.level >= SnapshotLevel::Conversion {
            for (k, c) in net.conversions.iter().enumerate() {
                results.conversion_snapshots.push(ConversionSnapshot {
                    time_h: t / HOUR,
                    conversion: c.id.clone(),
                    gas_node: net.nodes[c.gas_node].id.clone(),
                    bus: net.buses[c.bus].id.clone(),
                    power_mw: self.state[self.layout.bus(c.bus) + 2] * net.base_mva,
                    flow: self.conversion_flow(k),
                    pressure_bar: self.node_pressure_bar(c.gas_node),
                });
            }
        }
        if results.level >= SnapshotLevel::Full {
            for (e, b) in self.layout.edges.iter().enumerate() {
                for j in 0..b.points {
                    results.gas_snapshots.push(GasSnapshot {
                        time_h: t / HOUR,
                        edge: net.edges[e].id.clone(),
                        kind: net.edges[e].kind,
                        point: j,
                        position_m: j as f64 * b.dx,
                        pressure_bar: net.gas.p_of_rho(self.state[b.rho(j)]) / BAR,
                        flow: self.state[b.q(j)],
                    });
                }
            }
            for (i, bus) in net.buses.iter().enumerate() {
                let c = self.layout.bus(i);
                results.bus_snapshots.push(BusSnapshot {
                    time_h: t / HOUR,
                    bus: bus.id.clone(),
                    v: self.state[c],
                    angle_deg: self.state[c + 1].to_degrees(),
                    p_mw: self.state[c + 2] * net.base_mva,
                    q_mvar: self.state[c + 3] * net.base_mva,
                });
            }
        }
    }
}

/// Initializes from the stationary state at t = 0 and runs to the horizon.
pub fn run_simulation(network: Network, config: SolverConfig, level: SnapshotLevel) -> Result<ResultSet> {
    let mut sim = Simulation::new(network, config)?;
    sim.initialize()?;
    sim.run(level)
}
