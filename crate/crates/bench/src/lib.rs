//! Fixtures shared by the benchmarks.

use std::path::PathBuf;

use gaspower_core::io::{self, scenario::EdgeSpec, scenario::NodeSpec};
use gaspower_core::network::{EdgeKind, NodeKind};
use gaspower_core::{read_scenario, ScenarioDescription, TimeSeries};

fn scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/scenarios")
}

/// The bundled 3-pipe, 3-bus toy scenario.
pub fn toy() -> ScenarioDescription {
    read_scenario(&scenarios().join("toy.toml")).expect("toy scenario is valid")
}

/// The bundled 300-bus case with the ten conversion buses as slacks, no gas.
pub fn case300() -> ScenarioDescription {
    let read = |name: &str| std::fs::read_to_string(scenarios().join("benchmark").join(name)).expect("bundled file");
    let table = io::parse_conversion_table(&read("conversion_table.csv")).expect("bundled table");
    let power = io::import_matpower(&read("case300.m"), Some(&io::conversion_buses(&table))).expect("bundled case");
    ScenarioDescription {
        power,
        ..Default::default()
    }
}

/// A line of `pipes` 10 km pipes from one source to a sink, with a side
/// sink at every inner node whose demand rises by half within the first hour.
pub fn pipeline(pipes: usize) -> ScenarioDescription {
    let mut s = ScenarioDescription::default();
    let node = |id: String, kind, flow: Option<f64>| NodeSpec {
        id,
        kind,
        flow: flow.map(TimeSeries::constant),
        coupling: None,
    };
    let per_sink = 1.0;
    s.gas
        .nodes
        .push(node("n0".into(), NodeKind::Source, Some(per_sink * pipes as f64)));
    for i in 1..=pipes {
        let kind = if i == pipes { NodeKind::Sink } else { NodeKind::Inner };
        s.gas
            .nodes
            .push(node(format!("n{i}"), kind, (i == pipes).then_some(per_sink)));
        s.gas.edges.push(EdgeSpec {
            id: format!("p{i}"),
            kind: EdgeKind::Pipe,
            from: format!("n{}", i - 1),
            to: format!("n{i}"),
            length: Some(10_000.0),
            diameter: Some(0.6),
            roughness: None,
            area: None,
        });
        if i < pipes {
            let mut side = node(format!("d{i}"), NodeKind::Sink, None);
            side.flow =
                Some(TimeSeries::new(vec![(0.0, per_sink), (3600.0, 1.5 * per_sink)]).expect("increasing times"));
            s.gas.nodes.push(side);
            s.gas.edges.push(EdgeSpec {
                id: format!("s{i}"),
                kind: EdgeKind::ShortPipe,
                from: format!("n{i}"),
                to: format!("d{i}"),
                length: None,
                diameter: None,
                roughness: None,
                area: None,
            });
        }
    }
    s
}
