//! Scenario files: one flat JSON document per scenario.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use dampwave::coefficients::{AdmissibilityMode, InitialShape};
use dampwave::{PowerLawEnvelope, ProfileKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoTag {
    Auto,
}

/// `"auto"` picks the midpoint of the admissible window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OmegaChoice {
    Value(f64),
    Auto(AutoTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub shape: InitialShape,
    pub amplitude: f64,
    pub radius: f64,
    /// Multiplies the same shape to give `u_t(0)`.
    pub velocity: f64,
}

/// `amplitude * bump(r/radius) * exp(-rate t)` with `order` time derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub amplitude: f64,
    pub radius: f64,
    pub rate: f64,
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub envelope: PowerLawEnvelope,
    pub profile: ProfileKind,
    pub admissibility: AdmissibilityMode,
    pub initial: InitialSpec,
    /// Absent means `h = 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceSpec>,
    pub n: usize,
    pub t_end: f64,
    pub k_max: usize,
    pub cfl: f64,
    /// Number of grid nodes.
    pub grid: usize,
    pub delta: f64,
    pub margin: f64,
    pub omega: OmegaChoice,
    pub seed: u64,
    /// Snapshots per decade of time.
    pub per_decade: usize,
    /// Absent means `[max(20, 2 T0), 0.9 t_end]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<(f64, f64)>,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error("scenario {name}: {msg}")]
    Invalid { name: String, msg: String },
}

/// Command-line overrides applied after parsing.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub k_max: Option<usize>,
    pub grid: Option<usize>,
    pub cfl: Option<f64>,
    pub t_end: Option<f64>,
    pub delta: Option<f64>,
    pub margin: Option<f64>,
    pub seed: Option<u64>,
}

impl Scenario {
    pub fn from_json(text: &str, origin: &str) -> Result<Scenario, ScenarioError> {
        let s: Scenario = serde_json::from_str(text).map_err(|source| ScenarioError::Parse {
            path: origin.to_string(),
            source,
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Scenario::from_json(&text, &path.display().to_string())
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), ScenarioError> {
        if let Some(v) = o.k_max {
            self.k_max = v;
        }
        if let Some(v) = o.grid {
            self.grid = v;
        }
        if let Some(v) = o.cfl {
            self.cfl = v;
        }
        if let Some(v) = o.t_end {
            self.t_end = v;
        }
        if let Some(v) = o.delta {
            self.delta = v;
        }
        if let Some(v) = o.margin {
            self.margin = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        self.validate()
    }

    fn invalid(&self, msg: impl Into<String>) -> ScenarioError {
        ScenarioError::Invalid {
            name: self.name.clone(),
            msg: msg.into(),
        }
    }

    /// Field-level checks; envelope admissibility is a pipeline stage.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let ok_name = !self.name.is_empty()
            && self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
        if !ok_name {
            return Err(self.invalid("name must be non-empty ASCII letters, digits, '_' or '-'"));
        }
        if self.n == 0 {
            return Err(self.invalid("n must be at least 1"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(self.invalid(format!("t_end = {} must be positive", self.t_end)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(self.invalid(format!("cfl = {} must lie in (0, 1]", self.cfl)));
        }
        if self.grid < dampwave::solver::MIN_NODES {
            return Err(self.invalid(format!("grid = {} is below {}", self.grid, dampwave::solver::MIN_NODES)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(self.invalid(format!("delta = {} must lie in (0, 1)", self.delta)));
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return Err(self.invalid(format!("margin = {} must be nonnegative", self.margin)));
        }
        if self.per_decade == 0 {
            return Err(self.invalid("per_decade must be positive"));
        }
        if !(self.initial.radius > 0.0 && self.initial.radius.is_finite()) {
            return Err(self.invalid("initial.radius must be positive"));
        }
        if let Some(src) = self.source {
            if !(src.radius > 0.0 && src.rate >= 0.0) {
                return Err(self.invalid("source needs radius > 0 and rate >= 0"));
            }
        }
        if let OmegaChoice::Value(w) = self.omega {
            if !w.is_finite() {
                return Err(self.invalid("omega must be finite or \"auto\""));
            }
        }
        if let Some((lo, hi)) = self.fit_window {
            if !(lo > 0.0 && hi > lo) {
                return Err(self.invalid(format!("fit_window [{lo}, {hi}] is empty")));
            }
        }
        Ok(())
    }
}
