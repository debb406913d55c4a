//! Wall-clock comparisons of the estimators.

use std::time::Instant;

use gsp_core::SampleMoments;

use crate::config::ExperimentConfig;
use crate::eval::{mean_stderr, Problem, TestSet};
use crate::experiments::{test_seed, train_moments};
use crate::fits::{fit, timed_fit};
use crate::report::RuntimeRow;
use crate::HarnessError;

#[derive(Debug, Clone, Default)]
pub struct RuntimeReport {
    pub rows: Vec<RuntimeRow>,
    /// Median fit time in milliseconds per estimator at `p_train` samples.
    pub fit_medians: Vec<(String, f64)>,
}

impl RuntimeReport {
    pub fn median(&self, label: &str) -> Option<f64> {
        self.fit_medians.iter().find(|(l, _)| l == label).map(|(_, t)| *t)
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median over `runs` repeated fits of each estimator from the same moments.
pub fn fit_time_medians(
    problem: &Problem,
    m: &SampleMoments<f64>,
    cfg: &ExperimentConfig,
    labels: &[&str],
    runs: usize,
) -> Result<Vec<(String, f64)>, HarnessError> {
    let mut out = Vec::new();
    for &label in labels {
        let mut times = Vec::with_capacity(runs);
        for _ in 0..runs {
            let t = Instant::now();
            let r = fit(label, problem, m, cfg);
            times.push(t.elapsed().as_secs_f64() * 1e3);
            std::hint::black_box(r?);
        }
        out.push((label.to_string(), median(times)));
    }
    Ok(out)
}

/// For every target MSE and estimator: data generation, moments and fit time
/// at the smallest configured training size whose MSE meets the target.
pub fn measure_runtime(cfg: &ExperimentConfig) -> Result<RuntimeReport, HarnessError> {
    cfg.validate()?;
    let problem = Problem::from_config(cfg)?;
    let ts = TestSet::generate(&problem.model, cfg.trials, test_seed(cfg.seed));
    let labels: Vec<&str> = cfg.estimators.iter().map(String::as_str).filter(|l| *l != "pinf").collect();
    let mut ps = cfg.p_list.clone();
    ps.sort_unstable();
    ps.dedup();

    // (p, label, total ms, mse)
    let mut table: Vec<(usize, &str, f64, f64)> = Vec::new();
    for &p in &ps {
        let (m, moments_ms) = train_moments(&problem, p, cfg.seed)?;
        for &label in &labels {
            let (r, ms) = timed_fit(label, &problem, &m, cfg);
            let f = match r {
                Ok(f) => f,
                Err(HarnessError::Core(e)) if e.is_numerical() => continue,
                Err(e) => return Err(e),
            };
            let mse = mean_stderr(&ts.errors(f.linear())?).mse;
            let total = if label == "almmse" { ms } else { moments_ms + ms };
            table.push((p, label, total, mse));
        }
    }
    let mut rows = Vec::new();
    for &target in &cfg.target_mses {
        for &label in &labels {
            let hit = table.iter().find(|(_, l, _, mse)| *l == label && *mse <= target);
            rows.push(RuntimeRow {
                estimator: label.to_string(),
                target_mse: target,
                p: hit.map(|h| h.0),
                wall_ms: hit.map(|h| h.2),
            });
        }
    }
    let (m, _) = train_moments(&problem, cfg.p_train, cfg.seed)?;
    let fit_medians = fit_time_medians(&problem, &m, cfg, &labels, cfg.timing_runs)?;
    Ok(RuntimeReport { rows, fit_medians })
}
