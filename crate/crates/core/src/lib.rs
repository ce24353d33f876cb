//! Transient simulation of coupled gas and electricity networks.
//!
//! Each time step solves one nonlinear system that combines an implicit box
//! scheme on every gas pipe, node coupling conditions, the AC power-flow
//! equations and the gas-power conversion plants, with Newton's method on a
//! sparse analytic Jacobian.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conversion;
pub mod error;
pub mod gas;
pub mod io;
pub mod layout;
pub mod network;
pub mod power;
pub mod series;
pub mod solver;
pub mod units;

pub use conversion::{conversion_flow, smoothing_s, ConversionEdge, ConversionFactors, ConversionLaw};
pub use error::{Error, Result};
pub use gas::{CouplingKind, GasConstants};
pub use io::scenario::{parse_scenario, read_scenario, ScenarioDescription};
pub use layout::{build_layout, UnknownLayout};
pub use network::{build_network, Network};
pub use series::TimeSeries;
pub use solver::{JacobianMode, SolverConfig};
