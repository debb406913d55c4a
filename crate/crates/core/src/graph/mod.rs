//! Undirected weighted graphs, Laplacians and their spectra.

mod io;
mod perturb;
mod spectral;

pub use io::{read_edge_csv, write_edge_csv, SpectrumJson};
pub use perturb::{perturb_edges, perturb_edges_with, perturb_vertices, perturb_vertices_with, PerturbMode, PerturbOptions, VertexMap};
pub use spectral::{Cutoff, ReducedSpectrum, SpectralGraph};

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::Scalar;

/// Threshold on lambda_2 for a graph to count as connected.
pub const TOL_CONNECT: f64 = 1e-6;

/// Threshold on lambda_2 that perturbations must stay above.
pub const TOL_WELLCONNECTED: f64 = 1e-6;

/// Undirected edge, stored with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<T> {
    pub i: usize,
    pub j: usize,
    pub weight: T,
}

/// Undirected graph with nonnegative edge weights and no self-loops.
///
/// Edges are kept in canonical form: `i < j`, sorted by `(i, j)`, at most one
/// per unordered pair.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph<T> {
    n: usize,
    edges: Vec<Edge<T>>,
}

impl<T: Scalar> WeightedGraph<T> {
    pub fn new<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, T)>,
    {
        if n == 0 {
            return Err(Error::InvalidGraph("graph needs at least one vertex".into()));
        }
        let mut map = BTreeMap::new();
        for (a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) outside 0..{n}")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            if !w.is_finite() || w < T::zero() {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) has weight {w:e}")));
            }
            let key = (a.min(b), a.max(b));
            if map.insert(key, w).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate edge ({}, {})", key.0, key.1)));
            }
        }
        let edges = map.into_iter().map(|((i, j), weight)| Edge { i, j, weight }).collect();
        Ok(Self { n, edges })
    }

    /// Builds a graph from a symmetric weight matrix with zero diagonal.
    /// Entries equal to zero mean "no edge".
    pub fn from_weights(w: &DMatrix<T>) -> Result<Self> {
        let n = w.nrows();
        if w.ncols() != n {
            return Err(Error::InvalidGraph(format!("weight matrix is {}x{}", n, w.ncols())));
        }
        let mut edges = Vec::new();
        for i in 0..n {
            if w[(i, i)] != T::zero() {
                return Err(Error::InvalidGraph(format!("nonzero diagonal at {i}")));
            }
            for j in (i + 1)..n {
                if w[(i, j)] != w[(j, i)] {
                    return Err(Error::InvalidGraph(format!("weight matrix not symmetric at ({i}, {j})")));
                }
                if w[(i, j)] != T::zero() {
                    edges.push((i, j, w[(i, j)]));
                }
            }
        }
        Self::new(n, edges)
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn weight(&self, a: usize, b: usize) -> Option<T> {
        let key = (a.min(b), a.max(b));
        self.edges
            .binary_search_by(|e| (e.i, e.j).cmp(&key))
            .ok()
            .map(|k| self.edges[k].weight)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.weight(a, b).is_some()
    }

    /// Smallest and largest edge weight, `None` for an edgeless graph.
    pub fn weight_range(&self) -> Option<(T, T)> {
        let mut it = self.edges.iter().map(|e| e.weight);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), w| (lo.min(w), hi.max(w))))
    }

    pub fn weight_matrix(&self) -> DMatrix<T> {
        let mut w = DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            w[(e.i, e.j)] = e.weight;
            w[(e.j, e.i)] = e.weight;
        }
        w
    }

    pub fn degrees(&self) -> DVector<T> {
        let w = self.weight_matrix();
        DVector::from_fn(self.n, |i, _| w.row(i).sum())
    }

    /// `diag(W 1) - W`.
    pub fn laplacian(&self) -> DMatrix<T> {
        let w = self.weight_matrix();
        let mut l = -w.clone();
        for i in 0..self.n {
            l[(i, i)] = w.row(i).sum();
        }
        l
    }

    /// Second-smallest Laplacian eigenvalue (0 for a single vertex).
    pub fn algebraic_connectivity(&self) -> T {
        if self.n < 2 {
            return T::zero();
        }
        let ev = crate::linalg::sym_eigenvalues(&self.laplacian());
        ev[1]
    }

    pub fn is_connected(&self) -> bool {
        self.n == 1 || self.algebraic_connectivity().as_f64() > TOL_CONNECT
    }

    pub(crate) fn from_canonical(n: usize, edges: Vec<Edge<T>>) -> Self {
        let mut edges = edges;
        edges.sort_by(|a, b| (a.i, a.j).cmp(&(b.i, b.j)));
        Self { n, edges }
    }
}
