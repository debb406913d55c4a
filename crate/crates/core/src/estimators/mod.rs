//! Affine estimators `x^ = E[x] + A (y - m)` built from moments or fitted
//! graph filters.

mod fit;
mod nelder_mead;
mod update;

pub use fit::{
    arma_inner_coefficients, arma_rank_condition, fit_arma, fit_linear, fit_lpi, fit_lr_arma, lpi_rank_condition,
    mse_objective, wls_objective, ArmaOptions, Solver,
};
pub use nelder_mead::{nelder_mead, NelderMeadOptions, NelderMeadResult};
pub use update::{gsp_refit_free, remap, update_for_topology};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{FilterSpec, FrequencyResponse};
use crate::graph::SpectralGraph;
use crate::linalg::{self, MAX_CONDITION};
use crate::moments::SampleMoments;
use crate::Scalar;

/// `estimate(y) = x_mean + gain (y - y_center)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearEstimator<T: Scalar> {
    pub label: String,
    pub x_mean: DVector<T>,
    pub gain: DMatrix<T>,
    pub y_center: DVector<T>,
}

impl<T: Scalar> LinearEstimator<T> {
    pub fn new(label: impl Into<String>, x_mean: DVector<T>, gain: DMatrix<T>, y_center: DVector<T>) -> Result<Self> {
        if gain.nrows() != x_mean.len() {
            return Err(Error::dim(gain.nrows(), x_mean.len()));
        }
        if gain.ncols() != y_center.len() {
            return Err(Error::dim(gain.ncols(), y_center.len()));
        }
        let finite = gain.iter().chain(x_mean.iter()).chain(y_center.iter()).all(|v| v.is_finite());
        if !finite {
            return Err(Error::SingularMoments("estimator has non-finite entries".into()));
        }
        Ok(Self {
            label: label.into(),
            x_mean,
            gain,
            y_center,
        })
    }

    /// Always returns `E[x]`.
    pub fn constant(label: impl Into<String>, x_mean: DVector<T>, ny: usize) -> Self {
        let nx = x_mean.len();
        Self {
            label: label.into(),
            x_mean,
            gain: DMatrix::zeros(nx, ny),
            y_center: DVector::zeros(ny),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.gain.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.gain.nrows()
    }

    pub fn estimate(&self, y: &DVector<T>) -> Result<DVector<T>> {
        if y.len() != self.input_dim() {
            return Err(Error::dim(self.input_dim(), y.len()));
        }
        Ok(&self.x_mean + &self.gain * (y - &self.y_center))
    }

    /// Estimates for every row of `ys`.
    pub fn estimate_batch(&self, ys: &DMatrix<T>) -> Result<DMatrix<T>> {
        if ys.ncols() != self.input_dim() {
            return Err(Error::dim(self.input_dim(), ys.ncols()));
        }
        let mut centred = ys.clone();
        for mut row in centred.row_iter_mut() {
            row -= self.y_center.transpose();
        }
        let mut out = centred * self.gain.transpose();
        for mut row in out.row_iter_mut() {
            row += self.x_mean.transpose();
        }
        Ok(out)
    }

    pub fn to_json(&self, filter: Option<&FilterSpec<T>>) -> EstimatorJson {
        let f = |v: &T| v.as_f64();
        EstimatorJson {
            label: self.label.clone(),
            rows: self.gain.nrows(),
            cols: self.gain.ncols(),
            x_mean: self.x_mean.iter().map(f).collect(),
            gain: (0..self.gain.nrows())
                .flat_map(|i| (0..self.gain.ncols()).map(move |j| (i, j)))
                .map(|(i, j)| self.gain[(i, j)].as_f64())
                .collect(),
            y_center: self.y_center.iter().map(f).collect(),
            filter: filter.map(|s| s.cast()),
        }
    }

    pub fn from_json(j: &EstimatorJson) -> Result<Self> {
        if j.gain.len() != j.rows * j.cols {
            return Err(Error::dim(j.rows * j.cols, j.gain.len()));
        }
        let gain = DMatrix::from_row_iterator(j.rows, j.cols, j.gain.iter().map(|&v| T::lit(v)));
        let v = |x: &[f64]| DVector::from_iterator(x.len(), x.iter().map(|&v| T::lit(v)));
        Self::new(j.label.clone(), v(&j.x_mean), gain, v(&j.y_center))
    }
}

/// JSON form of a [`LinearEstimator`]; `gain` is row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorJson {
    pub label: String,
    pub rows: usize,
    pub cols: usize,
    pub x_mean: Vec<f64>,
    pub gain: Vec<f64>,
    pub y_center: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<FilterSpec<f64>>,
}

/// A graph-filter estimator whose response was fitted to `d^ / D^`.
#[derive(Debug, Clone)]
pub struct FittedGspEstimator<T: Scalar> {
    pub base: LinearEstimator<T>,
    pub spec: FilterSpec<T>,
    pub response: FrequencyResponse<T>,
    /// The unconstrained response `f^ = d^ / D^` the fit targeted.
    pub target: DVector<T>,
    pub mu: T,
    /// Final value of the regularized weighted least-squares objective.
    pub objective: T,
    pub iterations: usize,
    pub converged: bool,
    pub solver: Solver,
}

impl<T: Scalar> FittedGspEstimator<T> {
    pub fn estimate(&self, y: &DVector<T>) -> Result<DVector<T>> {
        self.base.estimate(y)
    }

    pub fn to_json(&self) -> EstimatorJson {
        self.base.to_json(Some(&self.spec))
    }
}

fn check_nonsingular<T: Scalar>(c: &DMatrix<T>) -> Result<()> {
    let cond = linalg::sym_condition(c);
    if cond >= MAX_CONDITION {
        return Err(Error::SingularMoments(format!(
            "covariance of y has condition number {cond:e}"
        )));
    }
    Ok(())
}

/// `C_xy C_yy^-1` by a symmetric solve.
fn wiener_gain<T: Scalar>(m: &SampleMoments<T>) -> Result<DMatrix<T>> {
    check_nonsingular(&m.y_cov)?;
    let rhs = m.cross_cov.transpose();
    let sol = match m.y_cov.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => m
            .y_cov
            .clone()
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::SingularMoments("covariance of y is singular".into()))?,
    };
    Ok(sol.transpose())
}

/// LMMSE estimator from exact moments.
pub fn lmmse<T: Scalar>(m: &SampleMoments<T>) -> Result<LinearEstimator<T>> {
    LinearEstimator::new("lmmse", m.x_mean.clone(), wiener_gain(m)?, m.y_mean.clone())
}

/// Sample-LMMSE: `C^_xy C^_yy^-1`. Fails instead of regularizing when
/// `C^_yy` is numerically singular.
pub fn sample_lmmse<T: Scalar>(m: &SampleMoments<T>) -> Result<LinearEstimator<T>> {
    LinearEstimator::new("slmmse", m.x_mean.clone(), wiener_gain(m)?, m.y_mean.clone())
}

/// Vertex-wise scalar LMMSE: `diag(C^_xy) diag(C^_yy)^-1`.
pub fn sample_diag_lmmse<T: Scalar>(m: &SampleMoments<T>) -> Result<LinearEstimator<T>> {
    let n = m.dim();
    let mut gain = DMatrix::zeros(n, m.y_cov.nrows());
    for i in 0..n {
        let v = m.y_cov[(i, i)];
        if !(v > T::zero()) {
            return Err(Error::SingularMoments(format!("variance of y_{i} is {v:e}")));
        }
        gain[(i, i)] = m.cross_cov[(i, i)] / v;
    }
    LinearEstimator::new("dlmmse", m.x_mean.clone(), gain, m.y_mean.clone())
}

/// Frequency response `d^_n / D^_nn` of the GSP-LMMSE estimator.
pub fn gsp_response<T: Scalar>(m: &SampleMoments<T>) -> Result<DVector<T>> {
    let d = &m.freq_cross_diag;
    let dd = &m.freq_var_diag;
    if let Some(i) = dd.iter().position(|v| !(*v > T::zero())) {
        return Err(Error::SingularMoments(format!("frequency variance {i} is {:e}", dd[i])));
    }
    Ok(d.component_div(dd))
}

/// Estimator `E[x] + V diag(response) V' (y - y^)`.
pub fn graph_filter_estimator<T: Scalar>(
    label: &str,
    sg: &SpectralGraph<T>,
    m: &SampleMoments<T>,
    response: &DVector<T>,
) -> Result<LinearEstimator<T>> {
    sg.check_dim(m.dim())?;
    LinearEstimator::new(label, m.x_mean.clone(), sg.filter_matrix(response)?, m.y_mean.clone())
}

/// (Sample-)GSP-LMMSE: `V diag(d^) D^^-1 V'`, centred at `y^`.
pub fn gsp_lmmse<T: Scalar>(m: &SampleMoments<T>, sg: &SpectralGraph<T>) -> Result<LinearEstimator<T>> {
    let f = gsp_response(m)?;
    graph_filter_estimator("gsp", sg, m, &f)
}

/// LMMSE estimator of the linearized model `y = L x + w` under the smooth
/// prior: `V diag(beta [lambda > 0] / (beta lambda + sigma^2)) V'`, which equals
/// `beta L^+ L (beta L + sigma^2 I)^-1`.
pub fn almmse<T: Scalar>(sg: &SpectralGraph<T>, beta: T, sigma2: T) -> Result<LinearEstimator<T>> {
    sg.require_connected()?;
    let resp = sg.eigvals().map(|lam| {
        let den = beta * lam + sigma2;
        if lam > T::zero() && den > T::zero() {
            beta / den
        } else {
            T::zero()
        }
    });
    let n = sg.n();
    LinearEstimator::new("almmse", DVector::zeros(n), sg.filter_matrix(&resp)?, DVector::zeros(n))
}

/// Relative Frobenius gap between the LMMSE and GSP-LMMSE gains.
pub fn coincidence_gap<T: Scalar>(m: &SampleMoments<T>, sg: &SpectralGraph<T>) -> Result<f64> {
    let a = wiener_gain(m)?;
    let b = sg.filter_matrix(&gsp_response(m)?)?;
    Ok(linalg::rel_diff(&b, &a).as_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightedGraph;

    fn sg() -> SpectralGraph<f64> {
        let g = WeightedGraph::new(4, [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 0.5), (0, 3, 1.5)]).unwrap();
        SpectralGraph::build(g).unwrap()
    }

    #[test]
    fn estimate_at_center_is_mean() {
        let e = LinearEstimator::new(
            "t",
            DVector::from_vec(vec![1.0, 2.0]),
            DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]),
            DVector::from_vec(vec![0.5, -0.5]),
        )
        .unwrap();
        assert_eq!(e.estimate(&e.y_center.clone()).unwrap(), e.x_mean);
        assert!(e.estimate(&DVector::zeros(3)).is_err());
    }

    #[test]
    fn batch_matches_single() {
        let e = LinearEstimator::new(
            "t",
            DVector::from_vec(vec![1.0, 2.0]),
            DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
            DVector::from_vec(vec![0.5, -0.5, 0.25]),
        )
        .unwrap();
        let ys = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 2.0, -1.0, 3.0, 0.5]);
        let b = e.estimate_batch(&ys).unwrap();
        for i in 0..2 {
            let s = e.estimate(&ys.row(i).transpose()).unwrap();
            assert!((b.row(i).transpose() - s).norm() < 1e-14);
        }
    }

    #[test]
    fn json_round_trip() {
        let e = almmse(&sg(), 3.0, 0.05).unwrap();
        let j = e.to_json(Some(&FilterSpec::identity()));
        let s = serde_json::to_string(&j).unwrap();
        let back: EstimatorJson = serde_json::from_str(&s).unwrap();
        assert_eq!(LinearEstimator::<f64>::from_json(&back).unwrap(), e);
        assert_eq!(back.filter, Some(FilterSpec::identity()));
    }

    #[test]
    fn almmse_annihilates_dc() {
        let s = sg();
        let e = almmse(&s, 3.0, 0.05).unwrap();
        let v1 = s.eigvecs().column(0).into_owned();
        assert!((&e.gain * &v1).norm() < 1e-12);
        assert!(almmse(&s, 3.0, 1e12).unwrap().gain.norm() < 1e-10);
    }

    #[test]
    fn singular_y_cov_is_reported() {
        let s = sg();
        let m = SampleMoments::from_covariances(
            &s,
            DVector::zeros(4),
            DVector::zeros(4),
            DMatrix::zeros(4, 4),
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 1.0, 0.0])),
        )
        .unwrap();
        assert!(matches!(sample_lmmse(&m), Err(Error::SingularMoments(_))));
    }
}
