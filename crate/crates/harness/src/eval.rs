//! Problem setup and Monte Carlo MSE evaluation.

use std::sync::Arc;

use gsp_core::power::{AcGridModel, LaplacianModel, SmoothPrior};
use gsp_core::{DMatrix, LinearEstimator, Measurement, MeasurementModel, NoiseModel, SpectralGraph};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ModelKind};
use crate::HarnessError;

/// A grid, its spectrum and the generative model `y = g(x) + w` on it.
#[derive(Clone)]
pub struct Problem {
    pub grid: AcGridModel<f64>,
    pub sg: Arc<SpectralGraph<f64>>,
    pub prior: Arc<SmoothPrior<f64>>,
    pub model: MeasurementModel<f64>,
    pub beta: f64,
    pub sigma2: f64,
}

impl Problem {
    pub fn new(grid: AcGridModel<f64>, kind: ModelKind, beta: f64, sigma2: f64) -> Result<Self, HarnessError> {
        let sg = Arc::new(grid.spectral_graph()?);
        let prior = Arc::new(SmoothPrior::new(&sg, beta)?);
        let measurement: Arc<dyn Measurement<f64>> = match kind {
            ModelKind::Ac => Arc::new(grid.clone()),
            ModelKind::Linear => Arc::new(LaplacianModel::new(&sg)),
        };
        let noise = NoiseModel::white(sg.n(), sigma2)?;
        let model = MeasurementModel::new(measurement, prior.clone(), noise)?;
        Ok(Self {
            grid,
            sg,
            prior,
            model,
            beta,
            sigma2,
        })
    }

    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self, HarnessError> {
        Self::new(load_grid(cfg)?, cfg.model, cfg.beta, cfg.sigma2)
    }

    /// Same grid and prior with a different noise level.
    pub fn with_sigma2(&self, sigma2: f64, kind: ModelKind) -> Result<Self, HarnessError> {
        Self::new(self.grid.clone(), kind, self.beta, sigma2)
    }

    pub fn n(&self) -> usize {
        self.sg.n()
    }
}

pub fn load_grid(cfg: &ExperimentConfig) -> Result<AcGridModel<f64>, HarnessError> {
    match &cfg.grid {
        Some(p) => AcGridModel::load_path(p)
            .map_err(|e| HarnessError::Config(format!("cannot load grid {}: {e}", p.display()))),
        None => Ok(AcGridModel::ieee118()),
    }
}

/// Fresh test draws `(x_t, y_t)`, one per row, shared by every estimator
/// evaluated against them.
#[derive(Debug, Clone)]
pub struct TestSet {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
}

impl TestSet {
    pub fn generate(model: &MeasurementModel<f64>, trials: usize, seed: u64) -> Self {
        let rows: Vec<_> = (0..trials).into_par_iter().map(|t| model.draw(seed, t as u64)).collect();
        let nx = model.input_dim();
        let ny = model.output_dim();
        Self {
            x: DMatrix::from_fn(trials, nx, |i, j| rows[i].0[j]),
            y: DMatrix::from_fn(trials, ny, |i, j| rows[i].1[j]),
        }
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.nrows() == 0
    }

    /// Squared error `|x^(y_t) - x_t|^2` for every trial.
    pub fn errors(&self, est: &LinearEstimator<f64>) -> Result<Vec<f64>, HarnessError> {
        let xhat = est.estimate_batch(&self.y)?;
        Ok((xhat - &self.x).row_iter().map(|r| r.norm_squared()).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseStat {
    pub mse: f64,
    pub stderr: f64,
}

/// Mean and standard error of the mean.
pub fn mean_stderr(v: &[f64]) -> MseStat {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    MseStat {
        mse: mean,
        stderr: (var / n).sqrt(),
    }
}

/// Mean and standard error of the paired differences `a_t - b_t`.
pub fn paired(a: &[f64], b: &[f64]) -> MseStat {
    assert_eq!(a.len(), b.len(), "paired samples differ in length");
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    mean_stderr(&d)
}

/// Empirical MSE of `est` over `trials` fresh draws from `model`.
pub fn evaluate_mse(
    est: &LinearEstimator<f64>,
    model: &MeasurementModel<f64>,
    trials: usize,
    seed: u64,
) -> Result<MseStat, HarnessError> {
    if trials < 2 {
        return Err(HarnessError::Config("trials must be at least 2".into()));
    }
    let ts = TestSet::generate(model, trials, seed);
    Ok(mean_stderr(&ts.errors(est)?))
}
