//! Measurement models `y = g(x) + w` and priors on `x`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};
use crate::Scalar;

/// Noiseless measurement map `x -> g(L, x)`.
pub trait Measurement<T: Scalar>: Send + Sync {
    fn input_dim(&self) -> usize;

    fn output_dim(&self) -> usize {
        self.input_dim()
    }

    fn eval(&self, x: &DVector<T>) -> DVector<T>;
}

/// Distribution of the graph signal `x`.
pub trait Prior<T: Scalar>: Send + Sync {
    fn dim(&self) -> usize;

    fn mean(&self) -> DVector<T>;

    fn sample(&self, rng: &mut StreamRng) -> DVector<T>;

    /// Covariance when it is known in closed form.
    fn covariance(&self) -> Option<DMatrix<T>> {
        None
    }
}

/// Zero-mean Gaussian noise with covariance `C_ww`.
#[derive(Debug, Clone)]
pub struct NoiseModel<T: Scalar> {
    cov: DMatrix<T>,
    factor: DMatrix<T>,
}

impl<T: Scalar> NoiseModel<T> {
    /// `sigma2 * I`.
    pub fn white(n: usize, sigma2: T) -> Result<Self> {
        if !(sigma2 >= T::zero()) {
            return Err(Error::InvalidInput(format!("noise variance {sigma2:e} is negative")));
        }
        Ok(Self {
            cov: DMatrix::identity(n, n) * sigma2,
            factor: DMatrix::identity(n, n) * sigma2.sqrt(),
        })
    }

    /// General symmetric PSD covariance.
    pub fn from_covariance(cov: DMatrix<T>) -> Result<Self> {
        let n = cov.nrows();
        if cov.ncols() != n {
            return Err(Error::dim(n, cov.ncols()));
        }
        let scale = if cov.amax() > T::zero() { cov.amax() } else { T::one() };
        if (&cov - cov.transpose()).amax() > T::lit(1e-12) * scale {
            return Err(Error::InvalidInput("noise covariance is not symmetric".into()));
        }
        let eig = SymmetricEigen::new(cov.clone());
        let tol = T::lit(1e-10) * scale;
        if eig.eigenvalues.iter().any(|&v| v < -tol) {
            return Err(Error::InvalidInput("noise covariance is not positive semidefinite".into()));
        }
        let mut factor = eig.eigenvectors.clone();
        for (k, mut col) in factor.column_iter_mut().enumerate() {
            col *= eig.eigenvalues[k].max(T::zero()).sqrt();
        }
        Ok(Self { cov, factor })
    }

    pub fn dim(&self) -> usize {
        self.cov.nrows()
    }

    pub fn covariance(&self) -> &DMatrix<T> {
        &self.cov
    }

    pub fn sample(&self, rng: &mut StreamRng) -> DVector<T> {
        &self.factor * rng::normal_vec::<T, _>(rng, self.dim())
    }
}

/// A measurement map, a prior on its input and the additive noise.
#[derive(Clone)]
pub struct MeasurementModel<T: Scalar> {
    pub measurement: Arc<dyn Measurement<T>>,
    pub prior: Arc<dyn Prior<T>>,
    pub noise: NoiseModel<T>,
}

impl<T: Scalar> std::fmt::Debug for MeasurementModel<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MeasurementModel")
            .field("input_dim", &self.measurement.input_dim())
            .field("output_dim", &self.measurement.output_dim())
            .finish()
    }
}

impl<T: Scalar> MeasurementModel<T> {
    pub fn new(measurement: Arc<dyn Measurement<T>>, prior: Arc<dyn Prior<T>>, noise: NoiseModel<T>) -> Result<Self> {
        if prior.dim() != measurement.input_dim() {
            return Err(Error::dim(measurement.input_dim(), prior.dim()));
        }
        if noise.dim() != measurement.output_dim() {
            return Err(Error::dim(measurement.output_dim(), noise.dim()));
        }
        Ok(Self { measurement, prior, noise })
    }

    pub fn input_dim(&self) -> usize {
        self.measurement.input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.measurement.output_dim()
    }

    /// One noisy observation pair `(x, g(x) + w)` from its own stream.
    pub fn draw(&self, seed: u64, index: u64) -> (DVector<T>, DVector<T>) {
        let mut r = rng::stream(seed, index);
        let x = self.prior.sample(&mut r);
        let w = self.noise.sample(&mut r);
        let y = self.measurement.eval(&x) + w;
        (x, y)
    }
}
