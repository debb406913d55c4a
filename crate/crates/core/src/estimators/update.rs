//! Estimators carried over to a changed graph topology.

use nalgebra::{DMatrix, DVector};

use super::{FittedGspEstimator, LinearEstimator};
use crate::error::{Error, Result};
use crate::graph::{SpectralGraph, VertexMap};
use crate::moments::SampleMoments;
use crate::Scalar;

fn resolve_map(old_n: usize, new_n: usize, map: Option<&VertexMap>) -> Result<VertexMap> {
    match map {
        Some(m) => {
            if m.old_len() != old_n {
                return Err(Error::dim(old_n, m.old_len()));
            }
            if m.new_len() != new_n {
                return Err(Error::dim(new_n, m.new_len()));
            }
            Ok(m.clone())
        }
        None if old_n == new_n => Ok(VertexMap::identity(old_n)),
        None => Err(Error::dim(old_n, new_n)),
    }
}

/// Surviving entries keep their old value, added vertices get 0.
fn remap_vector<T: Scalar>(v: &DVector<T>, map: &VertexMap) -> DVector<T> {
    DVector::from_fn(map.new_len(), |i, _| map.old_index(i).map_or(T::zero(), |o| v[o]))
}

/// Re-evaluates a fitted filter on the new spectrum, keeping its
/// coefficients. The centre is the old `y^` at surviving vertices and 0 at
/// added ones; `E[x]` is extended the same way.
pub fn update_for_topology<T: Scalar>(
    fit: &FittedGspEstimator<T>,
    new_sg: &SpectralGraph<T>,
    old_moments: &SampleMoments<T>,
    map: Option<&VertexMap>,
) -> Result<LinearEstimator<T>> {
    let map = resolve_map(old_moments.dim(), new_sg.n(), map)?;
    let spec = fit.spec.clamped_to(new_sg.n());
    let response = spec.response(new_sg)?;
    LinearEstimator::new(
        fit.base.label.clone(),
        remap_vector(&old_moments.x_mean, &map),
        new_sg.filter_matrix(&response.values)?,
        remap_vector(&old_moments.y_mean, &map),
    )
}

/// Stale estimator on the new vertex set: rows and columns of removed
/// vertices are deleted, added vertices get zero rows and columns.
pub fn remap<T: Scalar>(est: &LinearEstimator<T>, map: &VertexMap) -> Result<LinearEstimator<T>> {
    let n = est.gain.nrows();
    if est.gain.ncols() != n {
        return Err(Error::InvalidInput("vertex remapping needs a square gain".into()));
    }
    let map = resolve_map(n, map.new_len(), Some(map))?;
    let k = map.new_len();
    let gain = DMatrix::from_fn(k, k, |i, j| match (map.old_index(i), map.old_index(j)) {
        (Some(a), Some(b)) => est.gain[(a, b)],
        _ => T::zero(),
    });
    LinearEstimator::new(
        est.label.clone(),
        remap_vector(&est.x_mean, &map),
        gain,
        remap_vector(&est.y_center, &map),
    )
}

/// GSP-LMMSE moved to new edges without refitting:
/// `V_new diag(f^_old) V_new'`, centred at the old `y^`.
pub fn gsp_refit_free<T: Scalar>(
    old_response: &DVector<T>,
    new_sg: &SpectralGraph<T>,
    old_moments: &SampleMoments<T>,
) -> Result<LinearEstimator<T>> {
    new_sg.check_dim(old_response.len())?;
    new_sg.check_dim(old_moments.dim())?;
    LinearEstimator::new(
        "gsp",
        old_moments.x_mean.clone(),
        new_sg.filter_matrix(old_response)?,
        old_moments.y_mean.clone(),
    )
}
