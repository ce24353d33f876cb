//! Matpower case files (`mpc.baseMVA`, `mpc.bus`, `mpc.gen`, `mpc.branch`).

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::power::BusKind;

use super::scenario::{BusSpec, LineSpec, PowerSection};

const BUS_COLUMNS: usize = 13;
const GEN_COLUMNS: usize = 10;
const BRANCH_COLUMNS: usize = 11;

fn fail(message: impl Into<String>) -> Error {
    Error::Import {
        format: "matpower",
        message: message.into(),
    }
}

/// Numeric matrix `mpc.<name> = [ ... ];` with rows separated by `;` or
/// line breaks.
fn matrix(text: &str, name: &str) -> Result<Vec<Vec<f64>>> {
    let key = format!("mpc.{name}");
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, strip_comment(l)));
    let mut current = lines
        .by_ref()
        .find_map(|(no, l)| {
            let rest = l.trim_start().strip_prefix(&key)?.trim_start().strip_prefix('=')?;
            Some((no, rest.trim_start().strip_prefix('[').unwrap_or(rest)))
        })
        .ok_or_else(|| fail(format!("missing matrix {key}")))?;
    let mut rows = Vec::new();
    loop {
        let (no, line) = current;
        let (content, closed) = match line.find(']') {
            Some(k) => (&line[..k], true),
            None => (line, false),
        };
        for row in content.split(';').map(str::trim).filter(|r| !r.is_empty()) {
            let values = row
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| fail(format!("{key} line {no}: `{s}` is not a number")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(values);
        }
        if closed {
            return Ok(rows);
        }
        current = lines
            .next()
            .ok_or_else(|| fail(format!("{key} is not terminated by ']'")))?;
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('%') {
        Some(k) => &line[..k],
        None => line,
    }
}

fn scalar(text: &str, name: &str) -> Result<f64> {
    let key = format!("mpc.{name}");
    for line in text.lines().map(strip_comment) {
        let Some(rest) = line.trim_start().strip_prefix(&key) else {
            continue;
        };
        let Some(value) = rest.trim_start().strip_prefix('=') else {
            continue;
        };
        let value = value.trim().trim_end_matches(';').trim();
        return value
            .parse()
            .map_err(|_| fail(format!("{key}: `{value}` is not a number")));
    }
    Err(fail(format!("missing {key}")))
}

fn check_width(rows: &[Vec<f64>], name: &str, width: usize) -> Result<()> {
    match rows.iter().position(|r| r.len() < width) {
        Some(i) => Err(fail(format!(
            "mpc.{name} row {} has {} columns, expected at least {width}",
            i + 1,
            rows[i].len()
        ))),
        None => Ok(()),
    }
}

fn bus_id(v: f64, what: &str) -> Result<String> {
    if v.fract() != 0.0 || v < 1.0 {
        return Err(fail(format!("{what}: `{v}` is not a bus number")));
    }
    Ok(format!("{}", v as u64))
}

/// Reads a Matpower case into a power section.
///
/// In-service generators are summed per bus; their voltage setpoint replaces
/// the bus `Vm`. Branches out of service are dropped and a zero tap means a
/// plain line. With `new_slacks`, every original slack bus becomes PV and the
/// listed buses become slack.
pub fn import_matpower(text: &str, new_slacks: Option<&[String]>) -> Result<PowerSection> {
    let base_mva = scalar(text, "baseMVA")?;
    if !(base_mva > 0.0) {
        return Err(fail("baseMVA must be positive"));
    }
    let bus_rows = matrix(text, "bus")?;
    let gen_rows = matrix(text, "gen")?;
    let branch_rows = matrix(text, "branch")?;
    check_width(&bus_rows, "bus", BUS_COLUMNS)?;
    check_width(&gen_rows, "gen", GEN_COLUMNS)?;
    check_width(&branch_rows, "branch", BRANCH_COLUMNS)?;

    let mut buses = Vec::with_capacity(bus_rows.len());
    let mut index = HashMap::new();
    for (i, r) in bus_rows.iter().enumerate() {
        let id = bus_id(r[0], &format!("mpc.bus row {}", i + 1))?;
        let kind = match r[1] {
            1.0 => BusKind::PQ,
            2.0 => BusKind::PV,
            3.0 => BusKind::Slack,
            _ => return Err(fail(format!("bus {id}: unknown bus type code {}", r[1]))),
        };
        let mut b = BusSpec::new(id.clone(), kind);
        b.pd = r[2];
        b.qd = r[3];
        b.gs = r[4];
        b.bs = r[5];
        b.vm = r[7];
        b.va_deg = r[8];
        if index.insert(id.clone(), buses.len()).is_some() {
            return Err(fail(format!("duplicate bus {id}")));
        }
        buses.push(b);
    }

    let mut has_gen = vec![false; buses.len()];
    for (i, r) in gen_rows.iter().enumerate() {
        let id = bus_id(r[0], &format!("mpc.gen row {}", i + 1))?;
        let &k = index
            .get(&id)
            .ok_or_else(|| fail(format!("generator {} at unknown bus {id}", i + 1)))?;
        if r[7] <= 0.0 {
            continue;
        }
        let b = &mut buses[k];
        b.pg += r[1];
        b.qg += r[2];
        if !has_gen[k] {
            b.vm = r[5];
            has_gen[k] = true;
        }
    }

    let mut lines = Vec::with_capacity(branch_rows.len());
    for (i, r) in branch_rows.iter().enumerate() {
        let what = format!("mpc.branch row {}", i + 1);
        let from = bus_id(r[0], &what)?;
        let to = bus_id(r[1], &what)?;
        for id in [&from, &to] {
            if !index.contains_key(id) {
                return Err(fail(format!("{what} references unknown bus {id}")));
            }
        }
        if r[10] <= 0.0 {
            continue;
        }
        lines.push(LineSpec {
            from,
            to,
            r: r[2],
            x: r[3],
            b: r[4],
            tap: if r[8] == 0.0 { 1.0 } else { r[8] },
            shift_deg: r[9],
        });
    }

    if let Some(slacks) = new_slacks {
        for b in buses.iter_mut().filter(|b| b.kind == BusKind::Slack) {
            b.kind = BusKind::PV;
        }
        for id in slacks {
            let &k = index
                .get(id)
                .ok_or_else(|| fail(format!("slack bus {id} is not in the case")))?;
            buses[k].kind = BusKind::Slack;
        }
    }

    Ok(PowerSection {
        base_mva,
        buses,
        lines,
        ..PowerSection::default()
    })
}
