//! Experiment driver behind the `fqdist` binary: configuration, the four run
//! modes, and the JSON/CSV report.

mod experiments;
mod output;
mod verify;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::characters::CharacterCtx;
use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElement, DEFAULT_ELEMENT_CAP};
use crate::geometry::{GridDomain, DEFAULT_GRID_CAP};
use crate::numeric::{DevTracker, EPS};

pub use experiments::{
    run_nu, run_sharpness, run_theorem, NuSection, SharpnessSection, TrialRecord,
};
pub use output::{check_rows_csv, trial_rows_csv};
pub use verify::{run_verify, EXHAUSTIVE_ORTHOGONALITY, EXHAUSTIVE_SUMS, SAMPLE_BUDGET};

/// Grids up to this size get dense sphere transforms; larger grids evaluate
/// sphere transforms through the closed form (itself checked by DFT on a
/// sample of radii).
pub const DENSE_HAT_LIMIT: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Verify,
    Theorem,
    Sharpness,
    Nu,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub p: u32,
    pub ell: u32,
    pub d: usize,
    /// Set size for theorem trials; defaults to the smallest size meeting the
    /// active threshold.
    pub size: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Replaces the constant `C` in the size gate `|E| ≥ C q^{d/2}`.
    pub threshold_override: Option<f64>,
    /// Restricts ratio checks to these element indices.
    pub ratios: Option<Vec<u64>>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub cap: u64,
    /// Point-set file for `nu`.
    pub input: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(mode: Mode, p: u32, ell: u32, d: usize) -> Self {
        Self {
            mode,
            p,
            ell,
            d,
            size: None,
            trials: 20,
            seed: 0,
            threshold_override: None,
            ratios: None,
            out: None,
            csv: None,
            cap: DEFAULT_GRID_CAP,
            input: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trial count must be at least 1".into()));
        }
        if let Some(c) = self.threshold_override {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::Config(format!(
                    "threshold override must be a finite constant ≥ 0, got {c}"
                )));
            }
        }
        if self.mode == Mode::Nu && self.input.is_none() {
            return Err(Error::Config("nu needs a point-set file".into()));
        }
        Ok(())
    }

    /// Builds the field, characters and grid, enforcing the grid cap.
    pub fn domain(&self) -> Result<Arc<GridDomain>> {
        self.validate()?;
        let field = FieldCtx::build_with_cap(self.p, self.ell, DEFAULT_ELEMENT_CAP)?;
        let chars = CharacterCtx::new(Arc::new(field))?;
        Ok(Arc::new(GridDomain::with_cap(
            Arc::new(chars),
            self.d,
            self.cap,
        )?))
    }

    /// The `--r` list as field elements, or `None` when unrestricted.
    pub fn ratio_elements(&self, field: &FieldCtx) -> Result<Option<Vec<FieldElement>>> {
        let Some(list) = &self.ratios else {
            return Ok(None);
        };
        let mut out = Vec::with_capacity(list.len());
        for &r in list {
            let e = field.element(r).map_err(|_| {
                Error::Config(format!(
                    "ratio {r} is not an element index below q = {}",
                    field.q()
                ))
            })?;
            if e.is_zero() {
                return Err(Error::Config("ratios must be nonzero".into()));
            }
            out.push(e);
        }
        out.sort_unstable();
        out.dedup();
        if out.is_empty() {
            return Err(Error::Config("empty ratio list".into()));
        }
        Ok(Some(out))
    }
}

/// Everything needed to interpret element indices in the report.
#[derive(Clone, Debug, Serialize)]
pub struct ConfigEcho {
    pub mode: Mode,
    pub p: u32,
    pub ell: u32,
    pub q: u32,
    pub d: usize,
    pub grid_size: usize,
    /// Modulus coefficients `c_0 … c_ℓ`, lowest degree first.
    pub modulus: Vec<u32>,
    /// Index of the primitive element and its coefficients.
    pub generator: u32,
    pub generator_coeffs: Vec<u32>,
    pub element_encoding: &'static str,
    pub size: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    pub threshold_override: Option<f64>,
    pub ratios: Option<Vec<u64>>,
    pub cap: u64,
    pub input: Option<String>,
    pub epsilon: f64,
}

impl ConfigEcho {
    fn new(cfg: &ExperimentConfig, domain: &GridDomain) -> Self {
        let f = domain.field();
        Self {
            mode: cfg.mode,
            p: f.p(),
            ell: f.ell(),
            q: f.q(),
            d: domain.d(),
            grid_size: domain.size(),
            modulus: f.modulus().to_vec(),
            generator: f.generator().raw(),
            generator_coeffs: f.coeffs(f.generator()),
            element_encoding: "index = sum of c_i p^i over polynomial coefficients c_i",
            size: cfg.size,
            trials: cfg.trials,
            seed: cfg.seed,
            threshold_override: cfg.threshold_override,
            ratios: cfg.ratios.clone(),
            cap: cfg.cap,
            input: cfg.input.as_ref().map(|p| p.display().to_string()),
            epsilon: EPS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BranchCounts {
    /// Samples with `||m|| = r||m'||`.
    pub matched: u64,
    pub unmatched: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    /// The identity or property being checked.
    pub identity: String,
    pub max_deviation: f64,
    pub samples: u64,
    pub exhaustive: bool,
    pub pass: bool,
    pub mandatory: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branches: Option<BranchCounts>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
}

impl CheckRecord {
    pub fn from_tracker(name: &str, identity: &str, dev: DevTracker, exhaustive: bool) -> Self {
        Self {
            name: name.into(),
            identity: identity.into(),
            max_deviation: dev.max_dev,
            samples: dev.samples,
            exhaustive,
            pass: dev.pass(),
            mandatory: true,
            branches: None,
            values: BTreeMap::new(),
        }
    }

    /// A check with an exact verdict; `mismatches` is reported as the deviation.
    pub fn exact(
        name: &str,
        identity: &str,
        samples: u64,
        mismatches: u64,
        exhaustive: bool,
    ) -> Self {
        Self {
            name: name.into(),
            identity: identity.into(),
            max_deviation: mismatches as f64,
            samples,
            exhaustive,
            pass: mismatches == 0,
            mandatory: true,
            branches: None,
            values: BTreeMap::new(),
        }
    }

    pub fn with_value(mut self, key: &str, v: f64) -> Self {
        self.values.insert(key.into(), v);
        self
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Timings {
    pub total_ms: f64,
    pub per_check_ms: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: ConfigEcho,
    pub checks: Vec<CheckRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trials: Vec<TrialRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sharpness: Option<SharpnessSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<NuSection>,
    pub overall_pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl RunReport {
    fn new(cfg: &ExperimentConfig, domain: &GridDomain) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config: ConfigEcho::new(cfg, domain),
            checks: Vec::new(),
            trials: Vec::new(),
            sharpness: None,
            nu: None,
            overall_pass: false,
            timings: Some(Timings::default()),
        }
    }

    /// Overall verdict: every mandatory check and every mandatory trial passed.
    fn finish(&mut self, started: Instant) {
        self.overall_pass = self.checks.iter().filter(|c| c.mandatory).all(|c| c.pass)
            && self.trials.iter().filter(|t| t.mandatory).all(|t| t.pass);
        if let Some(t) = self.timings.as_mut() {
            t.total_ms = started.elapsed().as_secs_f64() * 1e3;
        }
    }

    /// Runs `f`, records its wall time under `name`, and appends its checks.
    fn timed<F>(&mut self, name: &str, f: F) -> Result<()>
    where
        F: FnOnce() -> Result<Vec<CheckRecord>>,
    {
        let t0 = Instant::now();
        let recs = f()?;
        if let Some(t) = self.timings.as_mut() {
            t.per_check_ms
                .insert(name.into(), t0.elapsed().as_secs_f64() * 1e3);
        }
        self.checks.extend(recs);
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON with the timing block removed; identical across reruns.
    pub fn deterministic_json(&self) -> String {
        let mut copy = self.clone();
        copy.timings = None;
        copy.to_json()
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| c.mandatory && !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    match cfg.mode {
        Mode::Verify => run_verify(cfg),
        Mode::Theorem => run_theorem(cfg),
        Mode::Sharpness => run_sharpness(cfg),
        Mode::Nu => run_nu(cfg),
    }
}

/// Writes the JSON report to `--out` (or returns it for stdout) and the CSV
/// flattening to `--csv`.
pub fn emit(cfg: &ExperimentConfig, report: &RunReport) -> Result<Option<String>> {
    if let Some(path) = &cfg.csv {
        let text = if report.trials.is_empty() {
            check_rows_csv(report)?
        } else {
            trial_rows_csv(report)?
        };
        std::fs::write(path, text)?;
    }
    let json = report.to_json();
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, json + "\n")?;
            Ok(None)
        }
        None => Ok(Some(json)),
    }
}

/// Process exit status for a library error: 1 when a built-in consistency
/// check failed, 2 for usage and configuration problems.
pub fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::ClosedFormMismatch { .. } => 1,
        _ => 2,
    }
}
