//! Experiment A (MSE versus training size and noise level) and experiment B
//! (MSE after topology changes).

use std::collections::BTreeMap;
use std::time::Instant;

use gsp_core::estimators::{self, update_for_topology};
use gsp_core::graph::{perturb_edges, perturb_vertices, VertexMap};
use gsp_core::rng::derive;
use gsp_core::{LinearEstimator, SampleMoments};

use crate::config::{ExperimentConfig, PerturbTarget};
use crate::eval::{mean_stderr, paired, MseStat, Problem, TestSet};
use crate::fits::{timed_fit, Fitted};
use crate::report::{MseReport, MseRow};
use crate::HarnessError;

const TAG_TEST: u64 = 1;
const TAG_TRAIN: u64 = 2;
const TAG_PERTURB: u64 = 5;

/// Seed of the common test set.
pub fn test_seed(seed: u64) -> u64 {
    derive(seed, TAG_TEST)
}

/// Training seed for `p` samples. Noise never enters the training set, so
/// the noise sweep reuses the same draws.
pub fn train_seed(seed: u64, p: usize) -> u64 {
    derive(derive(seed, TAG_TRAIN), p as u64)
}

pub fn perturb_seed(seed: u64, m: usize, rep: usize) -> u64 {
    derive(derive(seed, TAG_PERTURB), ((m as u64) << 32) | rep as u64)
}

pub fn train_moments(problem: &Problem, p: usize, seed: u64) -> Result<(SampleMoments<f64>, f64), HarnessError> {
    let t = Instant::now();
    let m = SampleMoments::from_model(&problem.model, &problem.sg, p, train_seed(seed, p))?;
    Ok((m, t.elapsed().as_secs_f64() * 1e3))
}

/// MSE table plus the per-trial squared errors behind every row, keyed by
/// `(estimator, scenario, value)`, for paired comparisons.
#[derive(Debug, Clone, Default)]
pub struct ExperimentA {
    pub report: MseReport,
    pub errors: BTreeMap<(String, String, u64), Vec<f64>>,
}

impl ExperimentA {
    pub fn errors_for(&self, estimator: &str, scenario: &str, value: f64) -> Option<&[f64]> {
        self.errors
            .get(&(estimator.to_string(), scenario.to_string(), value.to_bits()))
            .map(Vec::as_slice)
    }

    /// Paired `mse(a) - mse(b)` on the common test draws.
    pub fn paired_gap(&self, a: &str, b: &str, scenario: &str, value: f64) -> Option<MseStat> {
        Some(paired(self.errors_for(a, scenario, value)?, self.errors_for(b, scenario, value)?))
    }

    fn push(&mut self, row: MseRow, errs: Option<Vec<f64>>) {
        if let Some(e) = errs {
            self.errors
                .insert((row.estimator.clone(), row.scenario.clone(), row.value.to_bits()), e);
        }
        self.report.rows.push(row);
    }
}

fn evaluate_row(
    label: &str,
    scenario: &str,
    param: &str,
    value: f64,
    fitted: Result<LinearEstimator<f64>, HarnessError>,
    wall_ms: f64,
    ts: &TestSet,
) -> Result<(MseRow, Option<Vec<f64>>), HarnessError> {
    let mut row = MseRow {
        estimator: label.to_string(),
        scenario: scenario.to_string(),
        param: param.to_string(),
        value,
        stat: None,
        failure: None,
        wall_ms,
    };
    match fitted {
        Ok(est) => {
            let e = ts.errors(&est)?;
            row.stat = Some(mean_stderr(&e));
            Ok((row, Some(e)))
        }
        Err(HarnessError::Core(err)) if err.is_numerical() => {
            log::info!("{label} at {param} = {value}: {err}");
            row.failure = Some(err.to_string());
            Ok((row, None))
        }
        Err(e) => Err(e),
    }
}

/// Experiment A on a single problem: one row per (estimator, training
/// size), all evaluated on the same test draws.
pub fn experiment_a(cfg: &ExperimentConfig) -> Result<ExperimentA, HarnessError> {
    cfg.validate()?;
    let problem = Problem::from_config(cfg)?;
    let mut out = ExperimentA::default();
    let ts = TestSet::generate(&problem.model, cfg.trials, test_seed(cfg.seed));
    let labels: Vec<&str> = cfg.estimators.iter().map(String::as_str).filter(|l| *l != "pinf").collect();

    for &p in &cfg.p_list {
        let (m, moments_ms) = train_moments(&problem, p, cfg.seed)?;
        log::info!("P = {p}: moments in {moments_ms:.1} ms");
        for &label in &labels {
            let (fitted, ms) = timed_fit(label, &problem, &m, cfg);
            let (row, e) = evaluate_row(label, "p_sweep", "P", p as f64, fitted.map(|f| f.linear().clone()), ms, &ts)?;
            out.push(row, e);
        }
    }
    if cfg.wants("pinf") {
        let (m, _) = train_moments(&problem, cfg.p_inf, cfg.seed)?;
        let (fitted, ms) = timed_fit("pinf", &problem, &m, cfg);
        let (row, e) = evaluate_row("pinf", "p_sweep", "P", cfg.p_inf as f64, fitted.map(|f| f.linear().clone()), ms, &ts)?;
        out.push(row, e);
    }
    for (i, &s2) in cfg.sigma2_list.iter().enumerate() {
        let prob = problem.with_sigma2(s2, cfg.model)?;
        let ts = TestSet::generate(&prob.model, cfg.trials, derive(test_seed(cfg.seed), 1 + i as u64));
        let (m, _) = train_moments(&prob, cfg.p_sigma, cfg.seed)?;
        for label in &cfg.estimators {
            let (fitted, ms) = timed_fit(label, &prob, &m, cfg);
            let (row, e) = evaluate_row(label, "sigma2_sweep", "sigma2", s2, fitted.map(|f| f.linear().clone()), ms, &ts)?;
            out.push(row, e);
        }
    }
    Ok(out)
}

/// Per-repetition results of experiment B for one `M`.
#[derive(Debug, Clone, Default)]
pub struct Repetitions {
    /// Squared errors per estimator, one vector per completed repetition.
    pub errors: BTreeMap<String, Vec<Vec<f64>>>,
    pub skipped: usize,
}

impl Repetitions {
    /// Pooled paired `mse(a) - mse(b)`: the average over repetitions of the
    /// per-repetition paired mean, with its standard error.
    pub fn paired_gap(&self, a: &str, b: &str) -> Option<MseStat> {
        let ea = self.errors.get(a)?;
        let eb = self.errors.get(b)?;
        if ea.len() != eb.len() || ea.is_empty() {
            return None;
        }
        let r = ea.len() as f64;
        let (mut mean, mut var) = (0.0, 0.0);
        for (x, y) in ea.iter().zip(eb) {
            let s = paired(x, y);
            mean += s.mse / r;
            var += s.stderr * s.stderr;
        }
        Some(MseStat {
            mse: mean,
            stderr: var.sqrt() / r,
        })
    }

    /// MSE of each repetition.
    pub fn mses(&self, label: &str) -> Option<Vec<f64>> {
        self.errors.get(label).map(|v| v.iter().map(|e| mean_stderr(e).mse).collect())
    }
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentB {
    /// Rows average over repetitions; `stderr` holds half the standard
    /// deviation across repetitions.
    pub report: MseReport,
    pub by_m: BTreeMap<usize, Repetitions>,
}

fn scenario_name(cfg: &ExperimentConfig) -> String {
    let t = match cfg.perturbation.target {
        PerturbTarget::Edges => "edges",
        PerturbTarget::Vertices => "vertices",
    };
    let m = match cfg.perturbation.mode {
        gsp_core::graph::PerturbMode::Add => "add",
        gsp_core::graph::PerturbMode::Remove => "remove",
    };
    format!("{t}_{m}")
}

/// Experiment B: estimators trained on the original grid, carried over to
/// perturbed grids and evaluated on data generated from the new topology.
pub fn experiment_b(cfg: &ExperimentConfig) -> Result<ExperimentB, HarnessError> {
    cfg.validate()?;
    let problem = Problem::from_config(cfg)?;
    let (m_old, _) = train_moments(&problem, cfg.p_train, cfg.seed)?;
    let labels: Vec<&str> = cfg.estimators.iter().map(String::as_str).filter(|l| *l != "pinf").collect();

    let mut old: BTreeMap<&str, (Result<Fitted, HarnessError>, f64)> = BTreeMap::new();
    for &label in &labels {
        old.insert(label, timed_fit(label, &problem, &m_old, cfg));
    }
    let old_response = estimators::gsp_response(&m_old).ok();
    let graph = problem.grid.graph()?;
    let scenario = scenario_name(cfg);
    let sched = &cfg.perturbation;
    let mut out = ExperimentB::default();

    for &mm in &sched.m_list {
        let mut reps = Repetitions::default();
        let mut walls: BTreeMap<String, f64> = BTreeMap::new();
        for rep in 0..sched.repetitions {
            let ps = perturb_seed(cfg.seed, mm, rep);
            let perturbed = match sched.target {
                PerturbTarget::Edges => perturb_edges(&graph, mm, sched.mode, ps).map(|g| (g, None)),
                PerturbTarget::Vertices => perturb_vertices(&graph, mm, sched.mode, ps).map(|(g, map)| (g, Some(map))),
            };
            let (new_graph, map) = match perturbed {
                Ok(v) => v,
                Err(e) if e.is_numerical() => {
                    log::warn!("M = {mm}, repetition {rep}: {e}; skipped");
                    reps.skipped += 1;
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            let new_grid = problem.grid.with_topology(&new_graph, map.as_ref())?;
            let new_problem = Problem::new(new_grid, cfg.model, cfg.beta, cfg.sigma2)?;
            let ts = TestSet::generate(&new_problem.model, cfg.trials, test_seed(cfg.seed));
            let ident = VertexMap::identity(problem.n());
            let vmap = map.as_ref().unwrap_or(&ident);

            let mut rep_errors: Vec<(String, Vec<f64>)> = Vec::new();
            for &label in &labels {
                let t = Instant::now();
                let carried: Result<LinearEstimator<f64>, HarnessError> = match (label, &old[label].0) {
                    ("almmse", _) => estimators::almmse(&new_problem.sg, cfg.beta, cfg.sigma2).map_err(Into::into),
                    (_, Err(_)) => continue,
                    ("gsp", Ok(f)) if map.is_none() => match &old_response {
                        Some(r) => estimators::gsp_refit_free(r, &new_problem.sg, &m_old).map_err(Into::into),
                        None => Ok(f.linear().clone()),
                    },
                    (_, Ok(Fitted::Filter(f))) => {
                        update_for_topology(f, &new_problem.sg, &m_old, map.as_ref()).map_err(Into::into)
                    }
                    (_, Ok(Fitted::Plain(e))) => estimators::remap(e, vmap).map_err(Into::into),
                };
                let ms = t.elapsed().as_secs_f64() * 1e3;
                match carried {
                    Ok(est) => {
                        rep_errors.push((label.to_string(), ts.errors(&est)?));
                        *walls.entry(label.to_string()).or_default() += ms;
                    }
                    Err(HarnessError::Core(e)) if e.is_numerical() => {
                        log::warn!("{label}, M = {mm}, repetition {rep}: {e}");
                    }
                    Err(e) => return Err(e),
                }
            }
            for (label, e) in rep_errors {
                reps.errors.entry(label).or_default().push(e);
            }
        }
        for &label in &labels {
            let mut row = MseRow {
                estimator: label.to_string(),
                scenario: scenario.clone(),
                param: "M".into(),
                value: mm as f64,
                stat: None,
                failure: None,
                wall_ms: walls.get(label).copied().unwrap_or(0.0),
            };
            match reps.mses(label) {
                Some(v) if !v.is_empty() => {
                    let s = mean_stderr(&v);
                    let sd = s.stderr * (v.len() as f64).sqrt();
                    row.stat = Some(MseStat {
                        mse: s.mse,
                        stderr: 0.5 * sd,
                    });
                }
                _ => {
                    row.failure = Some(match &old[label].0 {
                        Err(e) => e.to_string(),
                        Ok(_) => "no feasible repetition".into(),
                    });
                }
            }
            out.report.rows.push(row);
        }
        out.by_m.insert(mm, reps);
    }
    Ok(out)
}
