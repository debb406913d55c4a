use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::SpectralGraph;
use crate::model::Prior;
use crate::rng::{self, StreamRng};
use crate::Scalar;

/// Smooth Gaussian graph signal: `x~_1 = 0` and `x~_n ~ N(0, beta / lambda_n)`
/// independently for `n >= 2`, with `x = V x~`.
#[derive(Debug, Clone)]
pub struct SmoothPrior<T: Scalar> {
    inner: DiagonalFrequencyPrior<T>,
    beta: T,
}

impl<T: Scalar> SmoothPrior<T> {
    pub fn new(sg: &SpectralGraph<T>, beta: T) -> Result<Self> {
        sg.require_connected()?;
        if !(beta >= T::zero()) {
            return Err(Error::InvalidInput(format!("smoothness beta = {beta:e} must be nonnegative")));
        }
        let var = DVector::from_fn(sg.n(), |i, _| if i == 0 { T::zero() } else { beta / sg.eigvals()[i] });
        let inner = DiagonalFrequencyPrior::new(sg, DVector::zeros(sg.n()), var)?;
        Ok(Self { inner, beta })
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn freq_variances(&self) -> &DVector<T> {
        self.inner.freq_variances()
    }

    /// `count` draws as rows, draw `k` from stream `(seed, k)`.
    pub fn sample_matrix(&self, count: usize, seed: u64) -> DMatrix<T> {
        self.inner.sample_matrix(count, seed)
    }

    pub fn as_diagonal(&self) -> &DiagonalFrequencyPrior<T> {
        &self.inner
    }
}

impl<T: Scalar> Prior<T> for SmoothPrior<T> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn mean(&self) -> DVector<T> {
        self.inner.mean()
    }

    fn sample(&self, rng: &mut StreamRng) -> DVector<T> {
        self.inner.sample(rng)
    }

    fn covariance(&self) -> Option<DMatrix<T>> {
        self.inner.covariance()
    }
}

/// Gaussian signal with independent graph frequencies:
/// `x~_n ~ N(mean~_n, var_n)`, stored in the vertex domain as `x = V x~`.
#[derive(Debug, Clone)]
pub struct DiagonalFrequencyPrior<T: Scalar> {
    eigvecs: DMatrix<T>,
    mean: DVector<T>,
    var: DVector<T>,
    std: DVector<T>,
}

impl<T: Scalar> DiagonalFrequencyPrior<T> {
    /// `freq_mean` and `freq_var` are given in the graph frequency domain.
    pub fn new(sg: &SpectralGraph<T>, freq_mean: DVector<T>, freq_var: DVector<T>) -> Result<Self> {
        sg.check_dim(freq_mean.len())?;
        sg.check_dim(freq_var.len())?;
        if freq_var.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
            return Err(Error::InvalidInput("frequency variances must be finite and nonnegative".into()));
        }
        let mean = sg.igft(&freq_mean)?;
        let std = freq_var.map(|v| v.sqrt());
        Ok(Self {
            eigvecs: sg.eigvecs().clone(),
            mean,
            var: freq_var,
            std,
        })
    }

    pub fn freq_variances(&self) -> &DVector<T> {
        &self.var
    }

    pub fn sample_matrix(&self, count: usize, seed: u64) -> DMatrix<T> {
        let n = self.dim();
        let mut out = DMatrix::zeros(count, n);
        for k in 0..count {
            let x = self.sample(&mut rng::stream(seed, k as u64));
            out.set_row(k, &x.transpose());
        }
        out
    }
}

impl<T: Scalar> Prior<T> for DiagonalFrequencyPrior<T> {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn mean(&self) -> DVector<T> {
        self.mean.clone()
    }

    fn sample(&self, rng: &mut StreamRng) -> DVector<T> {
        let z: DVector<T> = rng::normal_vec(rng, self.dim());
        &self.mean + &self.eigvecs * z.component_mul(&self.std)
    }

    fn covariance(&self) -> Option<DMatrix<T>> {
        let mut scaled = self.eigvecs.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= self.var[k];
        }
        Some(scaled * self.eigvecs.transpose())
    }
}
