use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{SpectralGraph, VertexMap, WeightedGraph};
use crate::model::Measurement;
use crate::Scalar;

/// Transmission line between buses `from` and `to` (0-based internally).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch<T> {
    pub from: usize,
    pub to: usize,
    pub conductance: T,
    pub susceptance: T,
}

/// Active-power injections as a function of the bus voltage phases:
///
/// `[g]_n = sum_m |v_n||v_m| (G_nm cos(x_n - x_m) + B_nm sin(x_n - x_m))`
///
/// `G` follows the bus-admittance convention (`G_nm = -g_nm`,
/// `G_nn = sum_m g_nm`) and `B_nm = b_nm` for every branch with a zero
/// diagonal. The graph Laplacian is `diag(B 1) - B`.
#[derive(Debug, Clone)]
pub struct AcGridModel<T: Scalar> {
    n: usize,
    branches: Vec<Branch<T>>,
    voltage: DVector<T>,
    self_conductance: DVector<T>,
}

/// JSON export of a grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridJson {
    pub n: usize,
    pub branches: Vec<BranchJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchJson {
    pub from: usize,
    pub to: usize,
    pub g: f64,
    pub b: f64,
}

const IEEE118: &str = include_str!("../../data/ieee118_branches.csv");

impl<T: Scalar> AcGridModel<T> {
    /// Unit voltage magnitudes. Rejects duplicate or self-looped branches,
    /// negative susceptances and disconnected networks.
    pub fn new(n: usize, branches: Vec<Branch<T>>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for b in &branches {
            if b.from >= n || b.to >= n || b.from == b.to {
                return Err(Error::InvalidGraph(format!("branch ({}, {}) is invalid for {n} buses", b.from + 1, b.to + 1)));
            }
            if !seen.insert((b.from.min(b.to), b.from.max(b.to))) {
                return Err(Error::InvalidGraph(format!("duplicate branch between buses {} and {}", b.from + 1, b.to + 1)));
            }
            if !(b.susceptance >= T::zero()) || !b.conductance.is_finite() || !b.susceptance.is_finite() {
                return Err(Error::InvalidGraph(format!("branch ({}, {}) has invalid admittance", b.from + 1, b.to + 1)));
            }
        }
        let mut self_conductance = DVector::zeros(n);
        for b in &branches {
            self_conductance[b.from] += b.conductance;
            self_conductance[b.to] += b.conductance;
        }
        let model = Self {
            n,
            branches,
            voltage: DVector::from_element(n, T::one()),
            self_conductance,
        };
        let g = model.graph()?;
        if !g.is_connected() {
            return Err(Error::Disconnected {
                lambda2: g.algebraic_connectivity().as_f64(),
            });
        }
        Ok(model)
    }

    /// Bundled IEEE 118-bus network.
    pub fn ieee118() -> Self {
        Self::load_csv(IEEE118.as_bytes()).expect("bundled grid is valid")
    }

    /// Reads `from,to,conductance,susceptance` with 1-based bus numbers.
    pub fn load_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["from", "to", "conductance", "susceptance"] {
            return Err(Error::Parse(format!("expected header from,to,conductance,susceptance, got {headers:?}")));
        }
        let mut branches = Vec::new();
        let mut n = 0;
        for (k, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            if rec.len() != 4 {
                return Err(Error::Parse(format!("row {}: expected 4 fields, got {}", k + 1, rec.len())));
            }
            let bus = |i: usize| -> Result<usize> {
                let v: usize = rec[i].parse().map_err(|e| Error::Parse(format!("row {}: {e}", k + 1)))?;
                if v == 0 {
                    return Err(Error::Parse(format!("row {}: bus numbers are 1-based", k + 1)));
                }
                Ok(v - 1)
            };
            let real = |i: usize| -> Result<f64> { rec[i].parse().map_err(|e| Error::Parse(format!("row {}: {e}", k + 1))) };
            let (from, to) = (bus(0)?, bus(1)?);
            n = n.max(from + 1).max(to + 1);
            branches.push(Branch {
                from,
                to,
                conductance: T::lit(real(2)?),
                susceptance: T::lit(real(3)?),
            });
        }
        Self::new(n, branches)
    }

    pub fn load_path(path: &std::path::Path) -> Result<Self> {
        Self::load_csv(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["from", "to", "conductance", "susceptance"])?;
        for b in &self.branches {
            w.write_record([
                (b.from + 1).to_string(),
                (b.to + 1).to_string(),
                format!("{:.16e}", b.conductance.as_f64()),
                format!("{:.16e}", b.susceptance.as_f64()),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> GridJson {
        GridJson {
            n: self.n,
            branches: self
                .branches
                .iter()
                .map(|b| BranchJson {
                    from: b.from + 1,
                    to: b.to + 1,
                    g: b.conductance.as_f64(),
                    b: b.susceptance.as_f64(),
                })
                .collect(),
        }
    }

    pub fn n_buses(&self) -> usize {
        self.n
    }

    pub fn branches(&self) -> &[Branch<T>] {
        &self.branches
    }

    pub fn voltage_mags(&self) -> &DVector<T> {
        &self.voltage
    }

    pub fn with_voltage_mags(mut self, v: DVector<T>) -> Result<Self> {
        if v.len() != self.n {
            return Err(Error::dim(self.n, v.len()));
        }
        self.voltage = v;
        Ok(self)
    }

    /// Copy of the grid with every conductance set to zero.
    pub fn lossless(&self) -> Self {
        let branches = self.branches.iter().map(|b| Branch { conductance: T::zero(), ..*b }).collect();
        Self {
            n: self.n,
            branches,
            voltage: self.voltage.clone(),
            self_conductance: DVector::zeros(self.n),
        }
    }

    pub fn conductance_matrix(&self) -> DMatrix<T> {
        let mut g = DMatrix::from_diagonal(&self.self_conductance);
        for b in &self.branches {
            g[(b.from, b.to)] -= b.conductance;
            g[(b.to, b.from)] -= b.conductance;
        }
        g
    }

    pub fn susceptance_matrix(&self) -> DMatrix<T> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for b in &self.branches {
            m[(b.from, b.to)] += b.susceptance;
            m[(b.to, b.from)] += b.susceptance;
        }
        m
    }

    /// Graph whose edge weights are the branch susceptances.
    pub fn graph(&self) -> Result<WeightedGraph<T>> {
        WeightedGraph::new(self.n, self.branches.iter().map(|b| (b.from, b.to, b.susceptance)))
    }

    pub fn spectral_graph(&self) -> Result<SpectralGraph<T>> {
        SpectralGraph::build(self.graph()?)
    }

    pub fn ac_power(&self, x: &DVector<T>) -> Result<DVector<T>> {
        if x.len() != self.n {
            return Err(Error::dim(self.n, x.len()));
        }
        Ok(self.injections(x))
    }

    fn injections(&self, x: &DVector<T>) -> DVector<T> {
        let v = &self.voltage;
        let mut out = DVector::from_fn(self.n, |i, _| v[i] * v[i] * self.self_conductance[i]);
        for b in &self.branches {
            let (i, j) = (b.from, b.to);
            let d = x[i] - x[j];
            let (s, c) = (d.sin(), d.cos());
            let vv = v[i] * v[j];
            let gc = -b.conductance * c;
            out[i] += vv * (gc + b.susceptance * s);
            out[j] += vv * (gc - b.susceptance * s);
        }
        out
    }

    /// Grid on a perturbed topology whose edge weights are susceptances.
    /// Branches present before keep their conductance; new ones get zero.
    pub fn with_topology(&self, graph: &WeightedGraph<T>, map: Option<&VertexMap>) -> Result<Self> {
        let ident;
        let map = match map {
            Some(m) => m,
            None => {
                ident = VertexMap::identity(self.n);
                &ident
            }
        };
        if map.old_len() != self.n || map.new_len() != graph.n_vertices() {
            return Err(Error::dim(map.new_len(), graph.n_vertices()));
        }
        let mut old_g = std::collections::BTreeMap::new();
        for b in &self.branches {
            old_g.insert((b.from.min(b.to), b.from.max(b.to)), b.conductance);
        }
        let branches = graph
            .edges()
            .iter()
            .map(|e| {
                let g = match (map.old_index(e.i), map.old_index(e.j)) {
                    (Some(a), Some(b)) => old_g.get(&(a.min(b), a.max(b))).copied().unwrap_or(T::zero()),
                    _ => T::zero(),
                };
                Branch {
                    from: e.i,
                    to: e.j,
                    conductance: g,
                    susceptance: e.weight,
                }
            })
            .collect();
        let mut out = Self::new(graph.n_vertices(), branches)?;
        for new in 0..out.n {
            if let Some(old) = map.old_index(new) {
                out.voltage[new] = self.voltage[old];
            }
        }
        Ok(out)
    }
}

impl<T: Scalar> Measurement<T> for AcGridModel<T> {
    fn input_dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &DVector<T>) -> DVector<T> {
        self.injections(x)
    }
}
