//! Seeded random topology changes that keep the graph well connected.

use rand::seq::index::sample;
use rand::Rng;

use super::{Edge, WeightedGraph, TOL_WELLCONNECTED};
use crate::error::{Error, Result};
use crate::rng;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbMode {
    Add,
    Remove,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbOptions {
    /// Edges attached to each added vertex.
    pub k_attach: usize,
    /// Rejected draws allowed per removed edge or vertex.
    pub max_retries: usize,
    /// lambda_2 threshold a removal must stay above.
    pub tol_wellconnected: f64,
}

impl Default for PerturbOptions {
    fn default() -> Self {
        Self {
            k_attach: 2,
            max_retries: 100,
            tol_wellconnected: TOL_WELLCONNECTED,
        }
    }
}

/// Correspondence between the vertices of a graph before and after a change.
///
/// Removed vertices map to `None`; added vertices get fresh indices appended
/// after the survivors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexMap {
    old_to_new: Vec<Option<usize>>,
    new_to_old: Vec<Option<usize>>,
}

impl VertexMap {
    pub fn identity(n: usize) -> Self {
        Self {
            old_to_new: (0..n).map(Some).collect(),
            new_to_old: (0..n).map(Some).collect(),
        }
    }

    pub fn from_old_to_new(old_to_new: Vec<Option<usize>>, new_n: usize) -> Result<Self> {
        let mut new_to_old = vec![None; new_n];
        for (o, n) in old_to_new.iter().enumerate() {
            if let Some(n) = *n {
                if n >= new_n || new_to_old[n].is_some() {
                    return Err(Error::InvalidInput(format!("vertex map sends {o} to invalid index {n}")));
                }
                new_to_old[n] = Some(o);
            }
        }
        Ok(Self { old_to_new, new_to_old })
    }

    pub fn old_len(&self) -> usize {
        self.old_to_new.len()
    }

    pub fn new_len(&self) -> usize {
        self.new_to_old.len()
    }

    pub fn new_index(&self, old: usize) -> Option<usize> {
        self.old_to_new.get(old).copied().flatten()
    }

    pub fn old_index(&self, new: usize) -> Option<usize> {
        self.new_to_old.get(new).copied().flatten()
    }

    pub fn is_identity(&self) -> bool {
        self.old_len() == self.new_len() && self.old_to_new.iter().enumerate().all(|(i, m)| *m == Some(i))
    }

    /// New indices with no preimage.
    pub fn added(&self) -> Vec<usize> {
        (0..self.new_len()).filter(|&n| self.new_to_old[n].is_none()).collect()
    }

    pub fn removed(&self) -> Vec<usize> {
        (0..self.old_len()).filter(|&o| self.old_to_new[o].is_none()).collect()
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &VertexMap) -> Result<VertexMap> {
        if next.old_len() != self.new_len() {
            return Err(Error::dim(self.new_len(), next.old_len()));
        }
        let o2n = self.old_to_new.iter().map(|m| m.and_then(|k| next.new_index(k))).collect();
        VertexMap::from_old_to_new(o2n, next.new_len())
    }
}

/// Adds or removes `m` edges using [`PerturbOptions::default`].
pub fn perturb_edges<T: Scalar>(g: &WeightedGraph<T>, m: usize, mode: PerturbMode, seed: u64) -> Result<WeightedGraph<T>> {
    perturb_edges_with(g, m, mode, seed, &PerturbOptions::default())
}

/// Added edges join `m` distinct absent pairs drawn uniformly, with weights
/// uniform over the graph's current weight range. Removed edges are drawn
/// uniformly; a draw that pushes lambda_2 to or below the threshold is
/// rejected and redrawn.
pub fn perturb_edges_with<T: Scalar>(
    g: &WeightedGraph<T>,
    m: usize,
    mode: PerturbMode,
    seed: u64,
    opts: &PerturbOptions,
) -> Result<WeightedGraph<T>> {
    if m == 0 {
        return Ok(g.clone());
    }
    let mut r = rng::stream(seed, 0);
    let n = g.n_vertices();
    match mode {
        PerturbMode::Add => {
            let absent: Vec<(usize, usize)> = (0..n)
                .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                .filter(|&(i, j)| !g.has_edge(i, j))
                .collect();
            if absent.len() < m {
                return Err(Error::PerturbationInfeasible(format!(
                    "only {} vertex pairs are unconnected, cannot add {m} edges",
                    absent.len()
                )));
            }
            let (lo, hi) = g.weight_range().unwrap_or((T::one(), T::one()));
            let mut edges = g.edges().to_vec();
            for k in sample(&mut r, absent.len(), m).into_iter() {
                let (i, j) = absent[k];
                edges.push(Edge { i, j, weight: uniform(&mut r, lo, hi) });
            }
            Ok(WeightedGraph::from_canonical(n, edges))
        }
        PerturbMode::Remove => {
            let mut cur = g.clone();
            for step in 0..m {
                let mut done = false;
                for _ in 0..opts.max_retries {
                    if cur.n_edges() == 0 {
                        break;
                    }
                    let k = r.random_range(0..cur.n_edges());
                    let mut edges = cur.edges().to_vec();
                    edges.remove(k);
                    let cand = WeightedGraph::from_canonical(n, edges);
                    if cand.algebraic_connectivity().as_f64() > opts.tol_wellconnected {
                        cur = cand;
                        done = true;
                        break;
                    }
                }
                if !done {
                    return Err(Error::PerturbationInfeasible(format!(
                        "no removable edge found for removal {} of {m} after {} draws",
                        step + 1,
                        opts.max_retries
                    )));
                }
            }
            Ok(cur)
        }
    }
}

pub fn perturb_vertices<T: Scalar>(
    g: &WeightedGraph<T>,
    m: usize,
    mode: PerturbMode,
    seed: u64,
) -> Result<(WeightedGraph<T>, VertexMap)> {
    perturb_vertices_with(g, m, mode, seed, &PerturbOptions::default())
}

/// Added vertices attach to `k_attach` distinct existing vertices drawn
/// uniformly, with weights uniform over the original weight range. Removed
/// vertices are drawn uniformly, rejecting draws that disconnect the graph.
pub fn perturb_vertices_with<T: Scalar>(
    g: &WeightedGraph<T>,
    m: usize,
    mode: PerturbMode,
    seed: u64,
    opts: &PerturbOptions,
) -> Result<(WeightedGraph<T>, VertexMap)> {
    let n = g.n_vertices();
    if m == 0 {
        return Ok((g.clone(), VertexMap::identity(n)));
    }
    let mut r = rng::stream(seed, 1);
    match mode {
        PerturbMode::Add => {
            let (lo, hi) = g.weight_range().unwrap_or((T::one(), T::one()));
            let mut edges = g.edges().to_vec();
            for k in 0..m {
                let cur = n + k;
                let deg = opts.k_attach.min(cur);
                for j in sample(&mut r, cur, deg).into_iter() {
                    edges.push(Edge { i: j, j: cur, weight: uniform(&mut r, lo, hi) });
                }
            }
            let out = WeightedGraph::from_canonical(n + m, edges);
            let map = VertexMap::from_old_to_new((0..n).map(Some).collect(), n + m)?;
            Ok((out, map))
        }
        PerturbMode::Remove => {
            if m >= n {
                return Err(Error::PerturbationInfeasible(format!("cannot remove {m} of {n} vertices")));
            }
            let mut cur = g.clone();
            let mut map = VertexMap::identity(n);
            for step in 0..m {
                let mut done = false;
                for _ in 0..opts.max_retries {
                    let v = r.random_range(0..cur.n_vertices());
                    let (cand, step_map) = drop_vertex(&cur, v);
                    if cand.n_vertices() == 1 || cand.algebraic_connectivity().as_f64() > opts.tol_wellconnected {
                        cur = cand;
                        map = map.then(&step_map)?;
                        done = true;
                        break;
                    }
                }
                if !done {
                    return Err(Error::PerturbationInfeasible(format!(
                        "every drawn vertex disconnects the graph at removal {} of {m}",
                        step + 1
                    )));
                }
            }
            Ok((cur, map))
        }
    }
}

fn drop_vertex<T: Scalar>(g: &WeightedGraph<T>, v: usize) -> (WeightedGraph<T>, VertexMap) {
    let n = g.n_vertices();
    let shift = |k: usize| if k > v { k - 1 } else { k };
    let edges = g
        .edges()
        .iter()
        .filter(|e| e.i != v && e.j != v)
        .map(|e| Edge { i: shift(e.i), j: shift(e.j), weight: e.weight })
        .collect();
    let o2n = (0..n).map(|k| if k == v { None } else { Some(shift(k)) }).collect();
    let map = VertexMap::from_old_to_new(o2n, n - 1).expect("shift is a bijection onto 0..n-1");
    (WeightedGraph::from_canonical(n - 1, edges), map)
}

fn uniform<T: Scalar, R: Rng + ?Sized>(r: &mut R, lo: T, hi: T) -> T {
    let u: f64 = r.random();
    lo + (hi - lo) * T::lit(u)
}
