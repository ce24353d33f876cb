//! Assembly of a coupled scenario from a gas section, a power section and a
//! table linking gas sinks to power buses.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::network::build_network;

use super::gaslib::{apply_nominations, import_gaslib};
use super::matpower::import_matpower;
use super::scenario::{ConversionSpec, GasSection, PowerSection, ScenarioDescription};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Row {
    bus: String,
    gas_node: String,
}

/// Reads a CSV table with columns `bus,gas_node`. Plants are named
/// `plant_<bus>`.
pub fn parse_conversion_table(text: &str) -> Result<Vec<ConversionSpec>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    reader
        .deserialize::<Row>()
        .enumerate()
        .map(|(i, row)| {
            let row = row.map_err(|e| Error::Import {
                format: "conversion table",
                message: format!("row {}: {e}", i + 1),
            })?;
            Ok(ConversionSpec {
                id: format!("plant_{}", row.bus),
                gas_node: row.gas_node,
                bus: row.bus,
                epsilon: None,
            })
        })
        .collect()
}

/// Buses of the conversion table, in table order.
pub fn conversion_buses(conversions: &[ConversionSpec]) -> Vec<String> {
    conversions.iter().map(|c| c.bus.clone()).collect()
}

/// Combines the sections into a scenario with default constants and solver
/// settings and validates it.
pub fn merge(gas: GasSection, power: PowerSection, conversions: Vec<ConversionSpec>) -> Result<ScenarioDescription> {
    let mut s = ScenarioDescription {
        gas,
        power,
        ..ScenarioDescription::default()
    };
    s.coupling.conversions = conversions;
    build_network(&s)?;
    Ok(s)
}

/// Builds a coupled scenario from the texts of a GasLib network, its
/// nominations, a Matpower case and a conversion table. The buses of the
/// table become the slack buses of the power network.
pub fn assemble(network_xml: &str, nominations_xml: &str, case: &str, table_csv: &str) -> Result<ScenarioDescription> {
    let mut gas = import_gaslib(network_xml)?;
    apply_nominations(&mut gas, nominations_xml)?;
    let conversions = parse_conversion_table(table_csv)?;
    let power = import_matpower(case, Some(&conversion_buses(&conversions)))?;
    merge(gas, power, conversions)
}
