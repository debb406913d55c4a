#![allow(dead_code)]

use gsp_core::rng;
use gsp_core::{DMatrix, DVector, SpectralGraph, WeightedGraph};
use rand::Rng;

/// Random connected graph: a random spanning tree plus each remaining pair
/// with probability `p_extra`, weights uniform in [0.2, 3).
pub fn random_graph(n: usize, p_extra: f64, seed: u64) -> WeightedGraph<f64> {
    let mut r = rng::stream(seed, 0);
    let mut edges = Vec::new();
    let mut have = std::collections::BTreeSet::new();
    for v in 1..n {
        let u = r.random_range(0..v);
        edges.push((u, v, r.random_range(0.2..3.0)));
        have.insert((u, v));
    }
    for i in 0..n {
        for j in i + 1..n {
            if !have.contains(&(i, j)) && r.random_bool(p_extra) {
                edges.push((i, j, r.random_range(0.2..3.0)));
            }
        }
    }
    WeightedGraph::new(n, edges).unwrap()
}

pub fn random_sg(n: usize, seed: u64) -> SpectralGraph<f64> {
    SpectralGraph::build(random_graph(n, 0.3, seed)).unwrap()
}

pub fn random_vec(n: usize, seed: u64) -> DVector<f64> {
    rng::normal_vec(&mut rng::stream(seed, 99), n)
}

/// Symmetric positive-definite matrix `B B' + shift I`.
pub fn random_spd(n: usize, shift: f64, seed: u64) -> DMatrix<f64> {
    let mut r = rng::stream(seed, 7);
    let b = DMatrix::from_fn(n, n, |_, _| rng::normal::<f64, _>(&mut r));
    &b * b.transpose() + DMatrix::identity(n, n) * shift
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.amax()
}
