//! CSV flattening of reports.

use serde::Serialize;

use super::RunReport;
use crate::distance::Regime;
use crate::error::{Error, Result};

#[derive(Serialize)]
struct TrialRow {
    trial: usize,
    size: usize,
    regime: Regime,
    distance_set_size: usize,
    quotient_set_size: usize,
    missing: usize,
    conclusion_holds: bool,
    key_inequalities_hold: bool,
    full_distance_set: Option<bool>,
    mandatory: bool,
    pass: bool,
}

#[derive(Serialize)]
struct CheckRow<'a> {
    name: &'a str,
    max_deviation: f64,
    samples: u64,
    exhaustive: bool,
    mandatory: bool,
    pass: bool,
}

fn to_csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// One row per theorem trial.
pub fn trial_rows_csv(report: &RunReport) -> Result<String> {
    to_csv(report.trials.iter().map(|t| TrialRow {
        trial: t.index,
        size: t.theorem.size,
        regime: t.theorem.regime,
        distance_set_size: t.theorem.distance_set.len(),
        quotient_set_size: t.theorem.quotient_set.len(),
        missing: t.theorem.missing.len(),
        conclusion_holds: t.theorem.pass,
        key_inequalities_hold: t.covered_key_inequalities_hold,
        full_distance_set: t.full_distance.as_ref().map(|r| r.pass),
        mandatory: t.mandatory,
        pass: t.pass,
    }))
}

/// One row per check, for runs without trials.
pub fn check_rows_csv(report: &RunReport) -> Result<String> {
    to_csv(report.checks.iter().map(|c| CheckRow {
        name: &c.name,
        max_deviation: c.max_deviation,
        samples: c.samples,
        exhaustive: c.exhaustive,
        mandatory: c.mandatory,
        pass: c.pass,
    }))
}
