//! Residual assembly, Newton iteration and time stepping.

mod config;
pub mod linear;
pub mod newton;
pub mod simulation;
pub mod system;

pub use config::{JacobianMode, SolverConfig};
pub use newton::{Newton, NewtonOptions, NewtonReport};
pub use simulation::{run_simulation, Simulation};
pub use system::{ResidualSystem, StepContext, StepKind};
