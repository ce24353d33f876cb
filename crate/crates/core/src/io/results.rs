//! Result sets and their on-disk form.
//!
//! A result directory holds
//! - `pressure.csv`, `flow.csv`: one row per time level, one column per gas
//!   node with a conversion plant (sorted by id), values with six decimals;
//! - `summary.json`: run metadata and the trapezoidal gas totals;
//! - `conversion_snapshots.csv` with `--snapshots conversion` or `full`;
//! - `snapshots.csv` (every gas edge point) and `bus_snapshots.csv` with
//!   `--snapshots full`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::CouplingKind;
use crate::network::{EdgeKind, Network};
use crate::solver::SolverConfig;
use crate::units::HOUR;

use super::compare::CouplingComparison;

pub const SUMMARY_FORMAT: &str = "gaspower-results";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnapshotLevel {
    None,
    Conversion,
    Full,
}

impl std::str::FromStr for SnapshotLevel {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(SnapshotLevel::None),
            "conversion" => Ok(SnapshotLevel::Conversion),
            "full" => Ok(SnapshotLevel::Full),
            _ => Err(format!(
                "unknown snapshot level '{s}' (expected none, conversion or full)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversionSnapshot {
    pub time_h: f64,
    pub conversion: String,
    pub gas_node: String,
    pub bus: String,
    pub power_mw: f64,
    #[serde(rename = "flow_m3s")]
    pub flow: f64,
    pub pressure_bar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasSnapshot {
    pub time_h: f64,
    pub edge: String,
    pub kind: EdgeKind,
    pub point: usize,
    pub position_m: f64,
    pub pressure_bar: f64,
    #[serde(rename = "flow_m3s")]
    pub flow: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusSnapshot {
    pub time_h: f64,
    pub bus: String,
    #[serde(rename = "v_pu")]
    pub v: f64,
    pub angle_deg: f64,
    pub p_mw: f64,
    pub q_mvar: f64,
}

/// Gas consumed and generated by conversion plants [m³].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Totals {
    pub consumed_m3: f64,
    pub generated_m3: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultSet {
    pub coupling: CouplingKind,
    /// [s]
    pub dt: f64,
    /// [m]
    pub dx: f64,
    pub level: SnapshotLevel,
    /// Gas nodes with conversion plants, sorted by id.
    pub conversion_nodes: Vec<String>,
    pub times_h: Vec<f64>,
    /// `[time][node]` [bar]
    pub pressure: Vec<Vec<f64>>,
    /// `[time][node]` [m³/s], positive when gas is consumed.
    pub flow: Vec<Vec<f64>>,
    /// Newton iterations per time step.
    pub newton_iterations: Vec<usize>,
    pub conversion_snapshots: Vec<ConversionSnapshot>,
    pub gas_snapshots: Vec<GasSnapshot>,
    pub bus_snapshots: Vec<BusSnapshot>,
}

/// Rounds to the six decimals written to CSV.
pub fn at_csv_precision(v: f64) -> f64 {
    fmt6(v).parse().expect("formatted float parses")
}

fn fmt6(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

/// Trapezoidal integrals of the positive and negative parts of `flow`
/// [m³/s] over `times_h` [h]; both returned as non-negative volumes [m³].
pub fn trapezoid_totals(times_h: &[f64], flow: &[f64]) -> Totals {
    let mut t = Totals::default();
    for k in 1..times_h.len().min(flow.len()) {
        let dt = (times_h[k] - times_h[k - 1]) * HOUR;
        let (a, b) = (flow[k - 1], flow[k]);
        t.consumed_m3 += 0.5 * dt * (a.max(0.0) + b.max(0.0));
        t.generated_m3 += 0.5 * dt * ((-a).max(0.0) + (-b).max(0.0));
    }
    t
}

impl ResultSet {
    pub fn new(net: &Network, config: &SolverConfig, level: SnapshotLevel) -> Self {
        let mut nodes: Vec<String> = net
            .conversions
            .iter()
            .map(|c| net.nodes[c.gas_node].id.clone())
            .collect();
        nodes.sort();
        nodes.dedup();
        ResultSet {
            coupling: config.coupling,
            dt: config.dt,
            dx: config.dx,
            level,
            conversion_nodes: nodes,
            times_h: Vec::new(),
            pressure: Vec::new(),
            flow: Vec::new(),
            newton_iterations: Vec::new(),
            conversion_snapshots: Vec::new(),
            gas_snapshots: Vec::new(),
            bus_snapshots: Vec::new(),
        }
    }

    /// Flow series of one conversion node column.
    pub fn flow_series(&self, column: usize) -> Vec<f64> {
        self.flow.iter().map(|row| row[column]).collect()
    }

    /// Totals per conversion node, from the flows at CSV precision.
    pub fn node_totals(&self) -> Vec<Totals> {
        (0..self.conversion_nodes.len())
            .map(|c| {
                let f: Vec<f64> = self.flow_series(c).into_iter().map(at_csv_precision).collect();
                trapezoid_totals(&self.times_h, &f)
            })
            .collect()
    }

    /// Network totals: the sum over conversion nodes.
    pub fn totals(&self) -> Totals {
        self.node_totals().iter().fold(Totals::default(), |acc, t| Totals {
            consumed_m3: acc.consumed_m3 + t.consumed_m3,
            generated_m3: acc.generated_m3 + t.generated_m3,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSummary {
    pub node: String,
    #[serde(flatten)]
    pub totals: Totals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonSummary {
    pub steps: usize,
    pub total_iterations: usize,
    pub max_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub format: String,
    pub version: u32,
    pub coupling: CouplingKind,
    pub dt_s: f64,
    pub dx_m: f64,
    pub snapshots: SnapshotLevel,
    pub time_levels: usize,
    pub conversion_nodes: Vec<String>,
    pub totals: Totals,
    pub per_node: Vec<NodeSummary>,
    pub newton: NewtonSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<CouplingComparison>,
}

impl Summary {
    pub fn of(results: &ResultSet) -> Self {
        Summary {
            format: SUMMARY_FORMAT.into(),
            version: 1,
            coupling: results.coupling,
            dt_s: results.dt,
            dx_m: results.dx,
            snapshots: results.level,
            time_levels: results.times_h.len(),
            conversion_nodes: results.conversion_nodes.clone(),
            totals: results.totals(),
            per_node: results
                .conversion_nodes
                .iter()
                .zip(results.node_totals())
                .map(|(n, t)| NodeSummary {
                    node: n.clone(),
                    totals: t,
                })
                .collect(),
            newton: NewtonSummary {
                steps: results.newton_iterations.len(),
                total_iterations: results.newton_iterations.iter().sum(),
                max_iterations: results.newton_iterations.iter().copied().max().unwrap_or(0),
            },
            comparison: None,
        }
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn write_table(path: &Path, header: &[String], rows: &[(f64, &[f64])]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for (t, values) in rows {
        let mut rec = vec![fmt6(*t)];
        rec.extend(values.iter().map(|v| fmt6(*v)));
        w.write_record(&rec).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_records<T: Serialize>(
    path: &Path,
    header: &[&str],
    rows: &[T],
    fields: impl Fn(&T) -> Vec<String>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record(fields(r)).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_summary(summary: &Summary, dir: &Path) -> Result<()> {
    let path = dir.join("summary.json");
    let text = serde_json::to_string_pretty(summary).map_err(|e| Error::Format {
        path: path.clone(),
        message: e.to_string(),
    })?;
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
}

/// Writes all files of `results` into `dir`, creating it if needed.
pub fn write_results(results: &ResultSet, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut header = vec!["time_h".to_string()];
    header.extend(results.conversion_nodes.iter().cloned());
    for (name, table) in [("pressure.csv", &results.pressure), ("flow.csv", &results.flow)] {
        let rows: Vec<(f64, &[f64])> = results
            .times_h
            .iter()
            .zip(table)
            .map(|(t, r)| (*t, r.as_slice()))
            .collect();
        write_table(&dir.join(name), &header, &rows)?;
    }
    if results.level >= SnapshotLevel::Conversion {
        write_records(
            &dir.join("conversion_snapshots.csv"),
            &[
                "time_h",
                "conversion",
                "gas_node",
                "bus",
                "power_mw",
                "flow_m3s",
                "pressure_bar",
            ],
            &results.conversion_snapshots,
            |s| {
                vec![
                    fmt6(s.time_h),
                    s.conversion.clone(),
                    s.gas_node.clone(),
                    s.bus.clone(),
                    fmt6(s.power_mw),
                    fmt6(s.flow),
                    fmt6(s.pressure_bar),
                ]
            },
        )?;
    }
    if results.level >= SnapshotLevel::Full {
        write_records(
            &dir.join("snapshots.csv"),
            &[
                "time_h",
                "edge",
                "kind",
                "point",
                "position_m",
                "pressure_bar",
                "flow_m3s",
            ],
            &results.gas_snapshots,
            |s| {
                vec![
                    fmt6(s.time_h),
                    s.edge.clone(),
                    edge_kind_name(s.kind).into(),
                    s.point.to_string(),
                    fmt6(s.position_m),
                    fmt6(s.pressure_bar),
                    fmt6(s.flow),
                ]
            },
        )?;
        write_records(
            &dir.join("bus_snapshots.csv"),
            &["time_h", "bus", "v_pu", "angle_deg", "p_mw", "q_mvar"],
            &results.bus_snapshots,
            |s| {
                vec![
                    fmt6(s.time_h),
                    s.bus.clone(),
                    fmt6(s.v),
                    fmt6(s.angle_deg),
                    fmt6(s.p_mw),
                    fmt6(s.q_mvar),
                ]
            },
        )?;
    }
    write_summary(&Summary::of(results), dir)
}

fn edge_kind_name(k: EdgeKind) -> &'static str {
    match k {
        EdgeKind::Pipe => "pipe",
        EdgeKind::ShortPipe => "short_pipe",
        EdgeKind::Valve => "valve",
        EdgeKind::Compressor => "compressor",
    }
}

pub fn read_summary(dir: &Path) -> Result<Summary> {
    let path = dir.join("summary.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path,
        message: e.to_string(),
    })
}

/// Column names, times and value rows of a CSV table.
type Table = (Vec<String>, Vec<f64>, Vec<Vec<f64>>);

fn read_table(path: &Path) -> Result<Table> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(String::from)
        .collect();
    if header.first().map(String::as_str) != Some("time_h") {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: "first column must be time_h".into(),
        });
    }
    let mut times = Vec::new();
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let vals = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Format {
                path: path.to_path_buf(),
                message: format!("row {}: {e}", line + 2),
            })?;
        times.push(vals[0]);
        rows.push(vals[1..].to_vec());
    }
    Ok((header[1..].to_vec(), times, rows))
}

fn read_records<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    r.deserialize().map(|rec| rec.map_err(|e| csv_err(path, e))).collect()
}

/// Reads a result directory written by [`write_results`]. Values come back
/// at the written precision.
pub fn read_results(dir: &Path) -> Result<ResultSet> {
    let summary = read_summary(dir)?;
    let (nodes, times_h, pressure) = read_table(&dir.join("pressure.csv"))?;
    let (flow_nodes, flow_times, flow) = read_table(&dir.join("flow.csv"))?;
    if nodes != flow_nodes || times_h != flow_times {
        return Err(Error::Format {
            path: dir.to_path_buf(),
            message: "pressure.csv and flow.csv disagree on columns or times".into(),
        });
    }
    let mut results = ResultSet {
        coupling: summary.coupling,
        dt: summary.dt_s,
        dx: summary.dx_m,
        level: summary.snapshots,
        conversion_nodes: nodes,
        times_h,
        pressure,
        flow,
        newton_iterations: Vec::new(),
        conversion_snapshots: Vec::new(),
        gas_snapshots: Vec::new(),
        bus_snapshots: Vec::new(),
    };
    if results.level >= SnapshotLevel::Conversion {
        results.conversion_snapshots = read_records(&dir.join("conversion_snapshots.csv"))?;
    }
    if results.level >= SnapshotLevel::Full {
        results.gas_snapshots = read_records(&dir.join("snapshots.csv"))?;
        results.bus_snapshots = read_records(&dir.join("bus_snapshots.csv"))?;
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty(level: SnapshotLevel) -> ResultSet {
        ResultSet {
            coupling: CouplingKind::Pressure,
            dt: 900.0,
            dx: 1000.0,
            level,
            conversion_nodes: Vec::new(),
            times_h: Vec::new(),
            pressure: Vec::new(),
            flow: Vec::new(),
            newton_iterations: Vec::new(),
            conversion_snapshots: Vec::new(),
            gas_snapshots: Vec::new(),
            bus_snapshots: Vec::new(),
        }
    }

    #[test]
    fn constant_unit_flow_for_a_day() {
        let times: Vec<f64> = (0..=96).map(|k| k as f64 * 0.25).collect();
        let t = trapezoid_totals(&times, &vec![1.0; 97]);
        assert_eq!(t.consumed_m3, 86400.0);
        assert_eq!(t.generated_m3, 0.0);
        let t = trapezoid_totals(&times, &vec![-2.0; 97]);
        assert_eq!(t.generated_m3, 172800.0);
    }

    #[test]
    fn trapezoid_splits_signs() {
        let t = trapezoid_totals(&[0.0, 1.0], &[1.0, -1.0]);
        assert_eq!(t.consumed_m3, 1800.0);
        assert_eq!(t.generated_m3, 1800.0);
    }

    #[test]
    fn empty_conversion_set_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = empty(SnapshotLevel::None);
        r.times_h = vec![0.0, 0.25];
        r.pressure = vec![vec![], vec![]];
        r.flow = vec![vec![], vec![]];
        write_results(&r, dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("flow.csv")).unwrap();
        assert_eq!(text.lines().next(), Some("time_h"));
        let s = read_summary(dir.path()).unwrap();
        assert_eq!(s.totals, Totals::default());
        assert_eq!(read_results(dir.path()).unwrap().times_h, r.times_h);
    }

    #[test]
    fn csv_round_trip_at_precision() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = empty(SnapshotLevel::Full);
        r.conversion_nodes = vec!["a".into(), "b".into()];
        r.times_h = vec![0.0, 0.25, 0.5];
        r.pressure = vec![vec![60.123456789, 59.0], vec![60.2, 58.9], vec![60.3, 58.8]];
        r.flow = vec![vec![1.0, -1e-9], vec![2.0000004, -0.5], vec![3.0, -0.25]];
        r.gas_snapshots.push(GasSnapshot {
            time_h: 0.0,
            edge: "p,1".into(),
            kind: EdgeKind::Pipe,
            point: 3,
            position_m: 1500.0,
            pressure_bar: 50.5,
            flow: 3.25,
        });
        r.bus_snapshots.push(BusSnapshot {
            time_h: 0.0,
            bus: "7001".into(),
            v: 1.02,
            angle_deg: -4.5,
            p_mw: 120.0,
            q_mvar: 3.0,
        });
        write_results(&r, dir.path()).unwrap();
        let back = read_results(dir.path()).unwrap();
        assert_eq!(back.conversion_nodes, r.conversion_nodes);
        for (a, b) in back.pressure.iter().flatten().zip(r.pressure.iter().flatten()) {
            assert_eq!(*a, at_csv_precision(*b));
        }
        assert_eq!(back.flow[0][1], 0.0);
        assert_eq!(back.gas_snapshots, r.gas_snapshots);
        assert_eq!(back.bus_snapshots, r.bus_snapshots);
        assert_eq!(back.totals(), r.totals());
        let flow_text = fs::read_to_string(dir.path().join("flow.csv")).unwrap();
        assert!(flow_text.contains("0.250000,2.000000,-0.500000"));
    }
}
