//! Edge-list CSV (`from,to,weight`, 0-based) and spectrum JSON.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{SpectralGraph, WeightedGraph};
use crate::error::{Error, Result};
use crate::Scalar;

/// Writes the edges with weights at 17 significant digits.
pub fn write_edge_csv<T: Scalar, W: Write>(g: &WeightedGraph<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["from", "to", "weight"])?;
    for e in g.edges() {
        w.write_record([e.i.to_string(), e.j.to_string(), format!("{:.16e}", e.weight.as_f64())])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an edge list. The vertex count is `n` when given, otherwise one more
/// than the largest index seen.
pub fn read_edge_csv<T: Scalar, R: Read>(input: R, n: Option<usize>) -> Result<WeightedGraph<T>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["from", "to", "weight"] {
        return Err(Error::Parse(format!("expected header from,to,weight, got {:?}", headers)));
    }
    let mut edges = Vec::new();
    let mut max_idx = 0usize;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |k: usize| rec.get(k).ok_or_else(|| Error::Parse(format!("row {}: missing field {k}", line + 1)));
        let i: usize = field(0)?.parse().map_err(|e| Error::Parse(format!("row {}: {e}", line + 1)))?;
        let j: usize = field(1)?.parse().map_err(|e| Error::Parse(format!("row {}: {e}", line + 1)))?;
        let w: f64 = field(2)?.parse().map_err(|e| Error::Parse(format!("row {}: {e}", line + 1)))?;
        max_idx = max_idx.max(i).max(j);
        edges.push((i, j, T::lit(w)));
    }
    let n = n.unwrap_or(if edges.is_empty() { 1 } else { max_idx + 1 });
    WeightedGraph::new(n, edges)
}

/// Spectrum dump: eigenvalues and row-major eigenvectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumJson {
    pub n: usize,
    pub eigvals: Vec<f64>,
    pub eigvecs: Vec<Vec<f64>>,
}

impl<T: Scalar> From<&SpectralGraph<T>> for SpectrumJson {
    fn from(sg: &SpectralGraph<T>) -> Self {
        let v = sg.eigvecs();
        Self {
            n: sg.n(),
            eigvals: sg.eigvals().iter().map(|x| x.as_f64()).collect(),
            eigvecs: (0..sg.n()).map(|i| v.row(i).iter().map(|x| x.as_f64()).collect()).collect(),
        }
    }
}
