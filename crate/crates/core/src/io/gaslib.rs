//! GasLib network (`.net`) and nomination (`.scn`) files.
//!
//! Supported topology: `source`, `sink` and `innode` nodes; `pipe`,
//! `shortPipe`, `valve` and `compressorStation` connections. Valves and
//! compressors are taken as open and get the cross section of the single
//! pipe attached to them. Resistors and control valves are rejected.

use std::collections::HashMap;
use std::f64::consts::PI;

use roxmltree::{Document, Node};

use crate::error::{Error, Result};
use crate::network::{EdgeKind, NodeKind};
use crate::series::TimeSeries;

use super::scenario::{EdgeSpec, GasSection, NodeSpec};

fn fail(message: impl Into<String>) -> Error {
    Error::Import {
        format: "gaslib",
        message: message.into(),
    }
}

fn parse(text: &str) -> Result<Document<'_>> {
    Document::parse(text).map_err(|e| fail(format!("malformed XML: {e}")))
}

fn attr<'a>(n: Node<'a, '_>, name: &str) -> Result<&'a str> {
    n.attribute(name).ok_or_else(|| {
        fail(format!(
            "<{}> at byte {} lacks attribute `{name}`",
            n.tag_name().name(),
            n.range().start
        ))
    })
}

fn length_factor(unit: &str) -> Option<f64> {
    match unit {
        "m" => Some(1.0),
        "km" => Some(1e3),
        "cm" => Some(1e-2),
        "mm" => Some(1e-3),
        _ => None,
    }
}

/// Flow in m³/s.
fn flow_in_m3s(value: f64, unit: &str) -> Option<f64> {
    match unit {
        "1000m_cube_per_hour" => Some(value * 1000.0 / 3600.0),
        "m_cube_per_hour" => Some(value / 3600.0),
        "m_cube_per_s" => Some(value),
        _ => None,
    }
}

/// Value of the child element `<name value=".." unit=".."/>` in metres.
fn child_length(e: Node, name: &str, id: &str) -> Result<Option<f64>> {
    let Some(c) = e.children().find(|c| c.tag_name().name() == name) else {
        return Ok(None);
    };
    let raw = attr(c, "value")?;
    let value: f64 = raw
        .parse()
        .map_err(|_| fail(format!("pipe `{id}`: {name} `{raw}` is not a number")))?;
    let unit = c.attribute("unit").unwrap_or("m");
    let f = length_factor(unit).ok_or_else(|| fail(format!("pipe `{id}`: unsupported {name} unit `{unit}`")))?;
    Ok(Some(value * f))
}

/// Reads the gas topology of a GasLib network file. Nodes carry no flows
/// until [`apply_nominations`] is run.
pub fn import_gaslib(text: &str) -> Result<GasSection> {
    let doc = parse(text)?;
    let mut gas = GasSection::default();
    for e in doc.descendants().filter(Node::is_element) {
        let tag = e.tag_name().name();
        let kind = match tag {
            "source" => NodeKind::Source,
            "sink" => NodeKind::Sink,
            "innode" => NodeKind::Inner,
            _ => continue,
        };
        gas.nodes.push(NodeSpec {
            id: attr(e, "id")?.to_string(),
            kind,
            flow: None,
            coupling: None,
        });
    }
    for e in doc.descendants().filter(Node::is_element) {
        let tag = e.tag_name().name();
        let kind = match tag {
            "pipe" => EdgeKind::Pipe,
            "shortPipe" => EdgeKind::ShortPipe,
            "valve" => EdgeKind::Valve,
            "compressorStation" => EdgeKind::Compressor,
            "resistor" | "controlValve" => {
                return Err(fail(format!(
                    "unsupported element <{tag}> `{}`",
                    e.attribute("id").unwrap_or("?")
                )))
            }
            _ => continue,
        };
        let id = attr(e, "id")?.to_string();
        let mut edge = EdgeSpec {
            id: id.clone(),
            kind,
            from: attr(e, "from")?.to_string(),
            to: attr(e, "to")?.to_string(),
            length: None,
            diameter: None,
            roughness: None,
            area: None,
        };
        if kind == EdgeKind::Pipe {
            edge.length =
                Some(child_length(e, "length", &id)?.ok_or_else(|| fail(format!("pipe `{id}` has no length")))?);
            edge.diameter =
                Some(child_length(e, "diameter", &id)?.ok_or_else(|| fail(format!("pipe `{id}` has no diameter")))?);
            edge.roughness = child_length(e, "roughness", &id)?;
        }
        gas.edges.push(edge);
    }
    if gas.nodes.is_empty() {
        return Err(fail("no nodes found"));
    }
    inherit_cross_sections(&mut gas)?;
    Ok(gas)
}

fn inherit_cross_sections(gas: &mut GasSection) -> Result<()> {
    let mut pipes_at: HashMap<&str, Vec<usize>> = HashMap::new();
    for (k, e) in gas.edges.iter().enumerate().filter(|(_, e)| e.kind == EdgeKind::Pipe) {
        pipes_at.entry(e.from.as_str()).or_default().push(k);
        pipes_at.entry(e.to.as_str()).or_default().push(k);
    }
    let mut areas = Vec::new();
    for (k, e) in gas.edges.iter().enumerate() {
        if !matches!(e.kind, EdgeKind::Valve | EdgeKind::Compressor) {
            continue;
        }
        let attached: Vec<usize> = [&e.from, &e.to]
            .iter()
            .flat_map(|n| pipes_at.get(n.as_str()).into_iter().flatten().copied())
            .collect();
        let [pipe] = attached[..] else {
            return Err(fail(format!(
                "{} `{}` must be attached to exactly one pipe, found {}",
                if e.kind == EdgeKind::Valve {
                    "valve"
                } else {
                    "compressor"
                },
                e.id,
                attached.len()
            )));
        };
        let d = gas.edges[pipe].diameter.expect("pipes have a diameter");
        areas.push((k, PI * d * d / 4.0));
    }
    for (k, a) in areas {
        gas.edges[k].area = Some(a);
    }
    Ok(())
}

/// Sets constant boundary flows from a GasLib nomination file: `entry`
/// nodes must be sources and `exit` nodes sinks.
pub fn apply_nominations(gas: &mut GasSection, text: &str) -> Result<()> {
    let doc = parse(text)?;
    let index: HashMap<String, usize> = gas.nodes.iter().enumerate().map(|(i, n)| (n.id.clone(), i)).collect();
    for n in doc
        .descendants()
        .filter(|n| n.is_element() && n.tag_name().name() == "node")
    {
        let id = attr(n, "id")?;
        let &i = index
            .get(id)
            .ok_or_else(|| fail(format!("nomination for unknown node `{id}`")))?;
        let expected = match attr(n, "type")? {
            "entry" => NodeKind::Source,
            "exit" => NodeKind::Sink,
            other => return Err(fail(format!("node `{id}`: unknown nomination type `{other}`"))),
        };
        if gas.nodes[i].kind != expected {
            return Err(fail(format!(
                "node `{id}` is a {:?} but is nominated as {:?}",
                gas.nodes[i].kind, expected
            )));
        }
        let mut lower = None;
        let mut upper = None;
        for f in n.children().filter(|c| c.tag_name().name() == "flow") {
            let raw = attr(f, "value")?;
            let unit = attr(f, "unit")?;
            let value: f64 = raw
                .parse()
                .map_err(|_| fail(format!("node `{id}`: flow `{raw}` is not a number")))?;
            let q =
                flow_in_m3s(value, unit).ok_or_else(|| fail(format!("node `{id}`: unsupported flow unit `{unit}`")))?;
            match attr(f, "bound")? {
                "both" => (lower, upper) = (Some(q), Some(q)),
                "lower" => lower = Some(q),
                "upper" => upper = Some(q),
                other => return Err(fail(format!("node `{id}`: unknown flow bound `{other}`"))),
            }
        }
        let q = match (lower, upper) {
            (Some(a), Some(b)) if a == b => a,
            (Some(_), Some(_)) => {
                return Err(fail(format!(
                    "node `{id}`: flow bounds differ; a fixed nomination is required"
                )))
            }
            _ => return Err(fail(format!("node `{id}`: incomplete flow nomination"))),
        };
        gas.nodes[i].flow = Some(TimeSeries::constant(q));
    }
    Ok(())
}
