use std::io::Write;

use crate::eval::MseStat;
use crate::HarnessError;

/// One line of an MSE table. A failed fit keeps its row with `stat = None`
/// and the failure message.
#[derive(Debug, Clone)]
pub struct MseRow {
    pub estimator: String,
    pub scenario: String,
    pub param: String,
    pub value: f64,
    pub stat: Option<MseStat>,
    pub failure: Option<String>,
    pub wall_ms: f64,
}

impl MseRow {
    pub fn mse(&self) -> Option<f64> {
        self.stat.map(|s| s.mse)
    }
}

#[derive(Debug, Clone, Default)]
pub struct MseReport {
    pub rows: Vec<MseRow>,
}

pub const CSV_HEADER: [&str; 7] = ["estimator", "scenario", "param", "value", "mse", "stderr", "wall_ms"];

impl MseReport {
    pub fn find(&self, estimator: &str, scenario: &str, value: f64) -> Option<&MseRow> {
        self.rows
            .iter()
            .find(|r| r.estimator == estimator && r.scenario == scenario && r.value == value)
    }

    /// Long-format CSV; failed rows carry `failed` in the `mse` column and
    /// an empty `stderr`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            let (mse, se) = match r.stat {
                Some(s) => (format!("{:.10e}", s.mse), format!("{:.10e}", s.stderr)),
                None => ("failed".to_string(), String::new()),
            };
            w.write_record([
                r.estimator.as_str(),
                r.scenario.as_str(),
                r.param.as_str(),
                &r.value.to_string(),
                &mse,
                &se,
                &format!("{:.3}", r.wall_ms),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Row of the runtime table: time to fit an estimator that meets
/// `target_mse`, at the smallest training size that does.
#[derive(Debug, Clone, PartialEq)]
pub struct RuntimeRow {
    pub estimator: String,
    pub target_mse: f64,
    /// `None` when no configured training size reaches the target.
    pub p: Option<usize>,
    pub wall_ms: Option<f64>,
}

pub fn write_runtime_csv<W: Write>(rows: &[RuntimeRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["estimator", "target_mse", "p", "wall_ms", "status"])?;
    for r in rows {
        let (p, ms, status) = match (r.p, r.wall_ms) {
            (Some(p), Some(ms)) => (p.to_string(), format!("{ms:.3}"), "ok"),
            _ => (String::new(), String::new(), "unreachable"),
        };
        w.write_record([r.estimator.as_str(), &r.target_mse.to_string(), &p, &ms, status])?;
    }
    w.flush()?;
    Ok(())
}
