use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use gsp_core::graph::PerturbMode;

use crate::HarnessError;

/// Which measurement function generates `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// AC active-power injections.
    Ac,
    /// Linearized model `y = L x + w`.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbTarget {
    Edges,
    Vertices,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSchedule {
    pub target: PerturbTarget,
    pub mode: PerturbMode,
    pub m_list: Vec<usize>,
    pub repetitions: usize,
}

impl Default for PerturbationSchedule {
    fn default() -> Self {
        Self {
            target: PerturbTarget::Edges,
            mode: PerturbMode::Add,
            m_list: vec![0, 1, 3, 5, 7],
            repetitions: 20,
        }
    }
}

pub const KNOWN_ESTIMATORS: &[&str] = &[
    "lmmse", "slmmse", "dlmmse", "gsp", "lpi", "arma", "linear", "lrarma", "almmse", "pinf",
];

/// Experiment parameters. Everything has a desk-scale default, so `{}` is a
/// valid config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Branch CSV (`from,to,conductance,susceptance`); the bundled IEEE
    /// 118-bus grid when absent.
    pub grid: Option<PathBuf>,
    pub model: ModelKind,
    pub beta: f64,
    pub sigma2: f64,
    /// Training sizes swept by experiment A.
    pub p_list: Vec<usize>,
    /// Noise levels swept by experiment A at `p_sigma` training samples.
    pub sigma2_list: Vec<f64>,
    pub p_sigma: usize,
    /// Training size of the large-sample LMMSE benchmark.
    pub p_inf: usize,
    /// Training size used by experiment B.
    pub p_train: usize,
    pub trials: usize,
    pub k_lpi: usize,
    pub r_arma: usize,
    pub q_arma: usize,
    pub r_lr: usize,
    pub q_lr: usize,
    pub q_linear: usize,
    pub ns_fraction: f64,
    pub mu_lpi: f64,
    pub mu_arma: f64,
    pub mu_lrarma: f64,
    pub mu_linear: f64,
    pub estimators: Vec<String>,
    pub perturbation: PerturbationSchedule,
    /// Target MSEs for the runtime table.
    pub target_mses: Vec<f64>,
    /// Repeated fits per estimator when timing.
    pub timing_runs: usize,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            grid: None,
            model: ModelKind::Ac,
            beta: 3.0,
            sigma2: 0.05,
            p_list: vec![59, 118, 500, 1000, 10_000, 100_000],
            sigma2_list: vec![],
            p_sigma: 500,
            p_inf: 200_000,
            p_train: 500,
            trials: 2000,
            k_lpi: 6,
            r_arma: 3,
            q_arma: 3,
            r_lr: 2,
            q_lr: 2,
            q_linear: 3,
            ns_fraction: 0.3,
            mu_lpi: 1e-8,
            mu_arma: 1e-8,
            mu_lrarma: 1e-8,
            mu_linear: 1e-8,
            estimators: ["slmmse", "dlmmse", "gsp", "lpi", "arma", "lrarma", "almmse", "pinf"]
                .map(String::from)
                .to_vec(),
            perturbation: PerturbationSchedule::default(),
            target_mses: vec![30.0, 20.0, 15.0, 12.0, 11.0],
            timing_runs: 10,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: Self =
            serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        if !(self.sigma2 > 0.0) || self.sigma2_list.iter().any(|s| !(*s > 0.0)) {
            return bad("noise variances must be positive".into());
        }
        if self.trials < 2 {
            return bad("trials must be at least 2".into());
        }
        if self.p_list.iter().chain([&self.p_inf, &self.p_train, &self.p_sigma]).any(|&p| p < 2) {
            return bad("training sizes must be at least 2".into());
        }
        if !(self.ns_fraction > 0.0 && self.ns_fraction <= 1.0) {
            return bad(format!("ns_fraction must lie in (0, 1], got {}", self.ns_fraction));
        }
        for mu in [self.mu_lpi, self.mu_arma, self.mu_lrarma, self.mu_linear] {
            if !(mu >= 0.0) || !mu.is_finite() {
                return bad(format!("regularization weight must be nonnegative, got {mu}"));
            }
        }
        if let Some(e) = self.estimators.iter().find(|e| !KNOWN_ESTIMATORS.contains(&e.as_str())) {
            return bad(format!("unknown estimator '{e}' (known: {})", KNOWN_ESTIMATORS.join(", ")));
        }
        if self.perturbation.repetitions == 0 {
            return bad("perturbation repetitions must be positive".into());
        }
        if self.timing_runs == 0 {
            return bad("timing_runs must be positive".into());
        }
        Ok(())
    }

    pub fn wants(&self, label: &str) -> bool {
        self.estimators.iter().any(|e| e == label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_default() {
        let c: ExperimentConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        c.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_estimator_and_field() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"estimators": ["gsp", "magic"]}"#).unwrap();
        assert!(c.validate().is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"betta": 3}"#).is_err());
    }
}
