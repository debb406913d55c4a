//! Measurement models with closed-form moments, for checking the estimators
//! against exact answers.

use nalgebra::{DMatrix, DVector};

use super::prior::DiagonalFrequencyPrior;
use crate::error::{Error, Result};
use crate::filters::FilterSpec;
use crate::graph::SpectralGraph;
use crate::model::{Measurement, NoiseModel, Prior};
use crate::moments::SampleMoments;
use crate::Scalar;

/// Output of a graph filter: `g(x) = V h(Lambda) V' x`.
#[derive(Debug, Clone)]
pub struct LinearFilterModel<T: Scalar> {
    matrix: DMatrix<T>,
    response: DVector<T>,
}

impl<T: Scalar> LinearFilterModel<T> {
    pub fn new(sg: &SpectralGraph<T>, spec: &FilterSpec<T>) -> Result<Self> {
        let response = spec.response(sg)?.values;
        let matrix = sg.filter_matrix(&response)?;
        Ok(Self { matrix, response })
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn response(&self) -> &DVector<T> {
        &self.response
    }

    /// Exact moments for any prior with a known covariance.
    pub fn exact_moments(&self, sg: &SpectralGraph<T>, prior: &dyn Prior<T>, noise: &NoiseModel<T>) -> Result<SampleMoments<T>> {
        linear_moments(sg, &self.matrix, prior, noise)
    }
}

impl<T: Scalar> Measurement<T> for LinearFilterModel<T> {
    fn input_dim(&self) -> usize {
        self.matrix.ncols()
    }

    fn eval(&self, x: &DVector<T>) -> DVector<T> {
        &self.matrix * x
    }
}

/// The linearized power-flow model `g(x) = L x`.
#[derive(Debug, Clone)]
pub struct LaplacianModel<T: Scalar> {
    laplacian: DMatrix<T>,
}

impl<T: Scalar> LaplacianModel<T> {
    pub fn new(sg: &SpectralGraph<T>) -> Self {
        Self {
            laplacian: sg.laplacian().clone(),
        }
    }

    pub fn exact_moments(&self, sg: &SpectralGraph<T>, prior: &dyn Prior<T>, noise: &NoiseModel<T>) -> Result<SampleMoments<T>> {
        linear_moments(sg, &self.laplacian, prior, noise)
    }
}

impl<T: Scalar> Measurement<T> for LaplacianModel<T> {
    fn input_dim(&self) -> usize {
        self.laplacian.ncols()
    }

    fn eval(&self, x: &DVector<T>) -> DVector<T> {
        &self.laplacian * x
    }
}

fn linear_moments<T: Scalar>(sg: &SpectralGraph<T>, h: &DMatrix<T>, prior: &dyn Prior<T>, noise: &NoiseModel<T>) -> Result<SampleMoments<T>> {
    let cxx = prior
        .covariance()
        .ok_or_else(|| Error::InvalidInput("prior covariance is not available in closed form".into()))?;
    let x_mean = prior.mean();
    let y_mean = h * &x_mean;
    let cxy = &cxx * h.transpose();
    let cyy = h * &cxy + noise.covariance();
    SampleMoments::from_covariances(sg, x_mean, y_mean, cxy, cyy)
}

/// Frequency-separable cubic map `g~_n = x~_n + kappa_n x~_n^3`, i.e.
/// `g(x) = V phi(V' x)`. Each output frequency depends on its own input
/// frequency only.
#[derive(Debug, Clone)]
pub struct SeparableCubicModel<T: Scalar> {
    eigvecs: DMatrix<T>,
    kappa: DVector<T>,
}

impl<T: Scalar> SeparableCubicModel<T> {
    pub fn new(sg: &SpectralGraph<T>, kappa: DVector<T>) -> Result<Self> {
        sg.check_dim(kappa.len())?;
        Ok(Self {
            eigvecs: sg.eigvecs().clone(),
            kappa,
        })
    }

    /// Exact moments under a zero-mean Gaussian prior with independent
    /// frequencies: with `s = var_n`, `Cov(x~_n, g~_n) = s + 3 kappa s^2` and
    /// `Var(g~_n) = s + 6 kappa s^2 + 15 kappa^2 s^3`.
    pub fn exact_moments(&self, sg: &SpectralGraph<T>, prior: &DiagonalFrequencyPrior<T>, noise: &NoiseModel<T>) -> Result<SampleMoments<T>> {
        if prior.mean().amax() != T::zero() {
            return Err(Error::InvalidInput("closed-form cubic moments need a zero-mean prior".into()));
        }
        let s = prior.freq_variances();
        let k = &self.kappa;
        let (three, six, fifteen) = (T::lit(3.0), T::lit(6.0), T::lit(15.0));
        let cross = DVector::from_fn(s.len(), |i, _| s[i] + three * k[i] * s[i] * s[i]);
        let var = DVector::from_fn(s.len(), |i, _| s[i] + six * k[i] * s[i] * s[i] + fifteen * k[i] * k[i] * s[i] * s[i] * s[i]);
        let cxy = sg.filter_matrix(&cross)?;
        let cyy = sg.filter_matrix(&var)? + noise.covariance();
        let n = sg.n();
        SampleMoments::from_covariances(sg, DVector::zeros(n), DVector::zeros(n), cxy, cyy)
    }
}

impl<T: Scalar> Measurement<T> for SeparableCubicModel<T> {
    fn input_dim(&self) -> usize {
        self.kappa.len()
    }

    fn eval(&self, x: &DVector<T>) -> DVector<T> {
        let xf = self.eigvecs.tr_mul(x);
        let gf = DVector::from_fn(xf.len(), |i, _| xf[i] + self.kappa[i] * xf[i] * xf[i] * xf[i]);
        &self.eigvecs * gf
    }
}
