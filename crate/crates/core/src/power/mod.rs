//! AC power flow: admittance assembly, polar power-flow equations and the
//! daily load profile.

mod admittance;
mod flow;
mod profile;

pub use admittance::{build_admittance, AdmittanceMatrix, Line, Shunt};
pub(crate) use flow::row_injection;
pub use flow::{injections, pf_residual, BusKind, BusState};
pub use profile::{load_at, LoadProfile};
