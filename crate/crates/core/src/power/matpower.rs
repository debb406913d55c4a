//! Minimal reader for MATPOWER case files (`mpc.bus` / `mpc.branch`).

use std::collections::BTreeMap;

use super::grid::{AcGridModel, Branch};
use crate::error::{Error, Result};
use crate::Scalar;

/// Raw branch row: bus numbers as written, series `r + jx`, status.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatpowerBranch {
    pub from_bus: u64,
    pub to_bus: u64,
    pub r: f64,
    pub x: f64,
    pub in_service: bool,
}

/// Converts a MATPOWER case to a grid.
///
/// Buses are renumbered `1..=N` in ascending bus-number order. Each in-service
/// branch contributes its series admittance `1 / (r + jx)`, i.e.
/// `g = r / (r^2 + x^2)` and `b = x / (r^2 + x^2)`; parallel circuits are
/// summed. Taps, phase shifts, line charging and bus shunts are ignored.
pub fn import_matpower<T: Scalar>(text: &str) -> Result<AcGridModel<T>> {
    let buses = table(text, "bus")?;
    let branches = table(text, "branch")?;
    let mut index = BTreeMap::new();
    for row in &buses {
        let id = bus_id(row[0])?;
        index.insert(id, 0usize);
    }
    for (k, v) in index.values_mut().enumerate() {
        *v = k;
    }
    let mut acc: BTreeMap<(usize, usize), (f64, f64)> = BTreeMap::new();
    for (k, row) in branches.iter().enumerate() {
        if row.len() < 11 {
            return Err(Error::Parse(format!("branch row {} has {} columns, need 11", k + 1, row.len())));
        }
        let br = MatpowerBranch {
            from_bus: bus_id(row[0])?,
            to_bus: bus_id(row[1])?,
            r: row[2],
            x: row[3],
            in_service: row[10] != 0.0,
        };
        if !br.in_service {
            continue;
        }
        let lookup = |b: u64| {
            index
                .get(&b)
                .copied()
                .ok_or_else(|| Error::Parse(format!("branch row {} references unknown bus {b}", k + 1)))
        };
        let (i, j) = (lookup(br.from_bus)?, lookup(br.to_bus)?);
        if i == j {
            continue;
        }
        let z2 = br.r * br.r + br.x * br.x;
        if z2 == 0.0 {
            return Err(Error::Parse(format!("branch row {} has zero impedance", k + 1)));
        }
        let e = acc.entry((i.min(j), i.max(j))).or_insert((0.0, 0.0));
        e.0 += br.r / z2;
        e.1 += br.x / z2;
    }
    let list = acc
        .into_iter()
        .map(|((i, j), (g, b))| Branch {
            from: i,
            to: j,
            conductance: T::lit(g),
            susceptance: T::lit(b),
        })
        .collect();
    AcGridModel::new(index.len(), list)
}

fn bus_id(v: f64) -> Result<u64> {
    if v >= 1.0 && v.fract() == 0.0 {
        Ok(v as u64)
    } else {
        Err(Error::Parse(format!("invalid bus number {v}")))
    }
}

/// Numeric rows of `mpc.<name> = [ ... ];`.
fn table(text: &str, name: &str) -> Result<Vec<Vec<f64>>> {
    let key = format!("mpc.{name}");
    let mut lines = text.lines();
    let mut found = false;
    for line in lines.by_ref() {
        let code = strip_comment(line).trim();
        if let Some(rest) = code.strip_prefix(&key) {
            if rest.trim_start().starts_with('=') {
                found = true;
                break;
            }
        }
    }
    if !found {
        return Err(Error::Parse(format!("no {key} table")));
    }
    let mut rows = Vec::new();
    for line in lines {
        let code = strip_comment(line);
        let done = code.contains(']');
        let body = code.split(']').next().unwrap_or("");
        for chunk in body.split(';') {
            let vals: Vec<f64> = chunk
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("{key}: bad number {t:?}: {e}"))))
                .collect::<Result<_>>()?;
            if !vals.is_empty() {
                rows.push(vals);
            }
        }
        if done {
            return Ok(rows);
        }
    }
    Err(Error::Parse(format!("{key} table is not terminated")))
}

fn strip_comment(line: &str) -> &str {
    line.split('%').next().unwrap_or("")
}
