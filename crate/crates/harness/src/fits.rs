//! Builds every configured estimator from one set of moments.

use std::time::Instant;

use gsp_core::estimators::{self, ArmaOptions, FittedGspEstimator};
use gsp_core::graph::Cutoff;
use gsp_core::{LinearEstimator, SampleMoments};

use crate::config::{ExperimentConfig, ModelKind};
use crate::eval::Problem;
use crate::HarnessError;

#[derive(Debug, Clone)]
pub enum Fitted {
    Plain(LinearEstimator<f64>),
    Filter(Box<FittedGspEstimator<f64>>),
}

impl Fitted {
    pub fn linear(&self) -> &LinearEstimator<f64> {
        match self {
            Fitted::Plain(e) => e,
            Fitted::Filter(f) => &f.base,
        }
    }

    pub fn filter(&self) -> Option<&FittedGspEstimator<f64>> {
        match self {
            Fitted::Plain(_) => None,
            Fitted::Filter(f) => Some(f),
        }
    }
}

pub fn arma_options(cfg: &ExperimentConfig) -> ArmaOptions {
    ArmaOptions::new(cfg.r_arma, cfg.q_arma, cfg.mu_arma)
}

pub fn lr_arma_options(cfg: &ExperimentConfig) -> ArmaOptions {
    ArmaOptions::new(cfg.r_lr, cfg.q_lr, cfg.mu_lrarma)
}

/// Fits estimator `label` (see [`crate::config::KNOWN_ESTIMATORS`]) from
/// `m`. `pinf` is the sample LMMSE and is only meaningful for large `m`.
pub fn fit(label: &str, problem: &Problem, m: &SampleMoments<f64>, cfg: &ExperimentConfig) -> Result<Fitted, HarnessError> {
    let sg = &problem.sg;
    let plain = |e: LinearEstimator<f64>| Ok(Fitted::Plain(e));
    let filt = |f: FittedGspEstimator<f64>| Ok(Fitted::Filter(Box::new(f)));
    match label {
        "lmmse" => {
            if cfg.model != ModelKind::Linear {
                return Err(HarnessError::Config("exact LMMSE is only available for the linear model".into()));
            }
            let exact = gsp_core::power::LaplacianModel::new(sg).exact_moments(sg, problem.prior.as_ref(), &problem.model.noise)?;
            plain(estimators::lmmse(&exact)?)
        }
        "slmmse" => plain(estimators::sample_lmmse(m)?),
        "pinf" => {
            let mut e = estimators::sample_lmmse(m)?;
            e.label = "pinf".into();
            plain(e)
        }
        "dlmmse" => plain(estimators::sample_diag_lmmse(m)?),
        "gsp" => plain(estimators::gsp_lmmse(m, sg)?),
        "lpi" => filt(estimators::fit_lpi(m, sg, cfg.k_lpi, cfg.mu_lpi)?),
        "arma" => filt(estimators::fit_arma(m, sg, &arma_options(cfg))?),
        "linear" => filt(estimators::fit_linear(m, sg, cfg.q_linear, cfg.mu_linear)?),
        "lrarma" => {
            let rs = sg.reduce(Cutoff::Fraction(cfg.ns_fraction))?;
            filt(estimators::fit_lr_arma(m, &rs, &lr_arma_options(cfg))?)
        }
        "almmse" => plain(estimators::almmse(sg, problem.beta, problem.sigma2)?),
        other => Err(HarnessError::Config(format!("unknown estimator '{other}'"))),
    }
}

/// `fit` plus its wall time in milliseconds.
pub fn timed_fit(
    label: &str,
    problem: &Problem,
    m: &SampleMoments<f64>,
    cfg: &ExperimentConfig,
) -> (Result<Fitted, HarnessError>, f64) {
    let t = Instant::now();
    let r = fit(label, problem, m, cfg);
    (r, t.elapsed().as_secs_f64() * 1e3)
}
