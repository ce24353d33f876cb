//! Scenario format, importers and result files.

pub mod assemble;
pub mod compare;
pub mod gaslib;
pub mod matpower;
pub mod results;
pub mod scenario;

pub use assemble::{assemble, conversion_buses, merge, parse_conversion_table};
pub use compare::{compare_couplings, CouplingComparison, FlowBin};
pub use gaslib::{apply_nominations, import_gaslib};
pub use matpower::import_matpower;
pub use results::{
    read_results, read_summary, write_results, write_summary, ResultSet, SnapshotLevel, Summary, Totals,
};
pub use scenario::{parse_scenario, read_scenario, ScenarioDescription};
