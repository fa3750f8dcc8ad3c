use std::path::Path;

use gie_core::dynamics::{DephasingBasis, TrajectoryRule};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    QuantumLocal,
    ClassicalLocal,
    ClassicalNonlocal,
    MeanfieldLocal,
    MeasuredMediator,
    NewtonianScan,
    Audit,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::QuantumLocal => "quantum-local",
            Scenario::ClassicalLocal => "classical-local",
            Scenario::ClassicalNonlocal => "classical-nonlocal",
            Scenario::MeanfieldLocal => "meanfield-local",
            Scenario::MeasuredMediator => "measured-mediator",
            Scenario::NewtonianScan => "newtonian-scan",
            Scenario::Audit => "audit",
        }
    }

    pub fn is_time_series(&self) -> bool {
        !matches!(self, Scenario::NewtonianScan | Scenario::Audit)
    }
}

/// Hamiltonians the audit knows by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuiltinModel {
    Local,
    Diagonalized,
    ClassicalizedLocal,
    ClassicalizedDiagonalized,
}

impl BuiltinModel {
    pub fn name(&self) -> &'static str {
        match self {
            BuiltinModel::Local => "local",
            BuiltinModel::Diagonalized => "diagonalized",
            BuiltinModel::ClassicalizedLocal => "classicalized-local",
            BuiltinModel::ClassicalizedDiagonalized => "classicalized-diagonalized",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        serde_json::from_value(Value::String(name.to_string())).ok()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldStart {
    Vacuum,
    /// Coherent state with amplitude `alpha0`.
    Coherent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NewtonianConfig {
    pub r_min: f64,
    pub r_max: f64,
    /// Log-spaced radii between `r_min` and `r_max`.
    pub n_r: usize,
    pub k_max: f64,
    pub g: f64,
    /// Mediator mass; absent for a massless mode.
    pub mass: Option<f64>,
    /// Quadrature intervals; absent to size the grid from `r_max`.
    pub n_k: Option<usize>,
}

impl Default for NewtonianConfig {
    fn default() -> Self {
        Self { r_min: 1.0, r_max: 10.0, n_r: 10, k_max: 500.0, g: 1.0, mass: None, n_k: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub omega: f64,
    pub lambda: f64,
    pub n_cut: usize,
    pub alpha0: [f64; 2],
    pub t_max: f64,
    pub n_steps: usize,
    pub output_path: String,
    pub seed: u64,
    pub model: BuiltinModel,
    pub field_init: FieldStart,
    pub field_rule: TrajectoryRule,
    pub dephasing: DephasingBasis,
    /// Amplitudes `[re, im]` on `|00⟩, |01⟩, |10⟩, |11⟩`; `|++⟩` if absent.
    pub mass_init: Option<[[f64; 2]; 4]>,
    pub newtonian: NewtonianConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::QuantumLocal,
            omega: 1.0,
            lambda: 0.5,
            n_cut: 32,
            alpha0: [0.0, 0.0],
            t_max: 2.0 * std::f64::consts::PI,
            n_steps: 512,
            output_path: String::new(),
            seed: 0,
            model: BuiltinModel::Local,
            field_init: FieldStart::Vacuum,
            field_rule: TrajectoryRule::FreeRotation,
            dephasing: DephasingBasis::Quadrature,
            mass_init: None,
            newtonian: NewtonianConfig::default(),
        }
    }
}

impl ScenarioConfig {
    /// Parses a JSON document, applies `key=value` overrides, fills defaults
    /// and validates. `scenario` is required.
    pub fn from_json(text: &str, overrides: &[String]) -> CliResult<Self> {
        let mut value: Value =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("malformed config: {e}")))?;
        if !value.is_object() {
            return Err(CliError::Config("config must be a JSON object".into()));
        }
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        if value.get("scenario").is_none() {
            return Err(CliError::Config("missing field `scenario`".into()));
        }
        let mut cfg: Self = serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.output_path.is_empty() {
            cfg.output_path = format!("{}.csv", cfg.scenario.name());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text, overrides).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return bad(format!("omega must be positive, got {}", self.omega));
        }
        if !self.lambda.is_finite() {
            return bad("lambda must be finite".into());
        }
        if self.n_cut < 2 {
            return bad(format!("n_cut must be at least 2, got {}", self.n_cut));
        }
        if !self.alpha0.iter().all(|x| x.is_finite()) {
            return bad("alpha0 must be finite".into());
        }
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return bad(format!("t_max must be positive, got {}", self.t_max));
        }
        if self.n_steps == 0 {
            return bad("n_steps must be at least 1".into());
        }
        if let Some(m) = &self.mass_init {
            let norm: f64 = m.iter().map(|[re, im]| re * re + im * im).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-10 {
                return bad(format!("mass_init must be normalized, norm is {norm}"));
            }
        }
        if self.scenario == Scenario::ClassicalLocal && self.field_rule == TrajectoryRule::MeanField {
            return bad("classical-local takes field_rule free-rotation or constant".into());
        }
        let n = &self.newtonian;
        if !(n.r_min > 0.0) || !(n.r_max >= n.r_min) || !n.r_max.is_finite() {
            return bad(format!("newtonian radii must satisfy 0 < r_min <= r_max, got {} and {}", n.r_min, n.r_max));
        }
        if n.n_r < 2 {
            return bad("newtonian.n_r must be at least 2".into());
        }
        if !(n.k_max > 0.0) || !n.g.is_finite() {
            return bad("newtonian.k_max must be positive and g finite".into());
        }
        Ok(())
    }
}

/// `key=value` with dotted keys for nested objects. The value is read as
/// JSON when it parses, else as a bare string.
pub fn apply_override(root: &mut Value, item: &str) -> CliResult<()> {
    let (key, raw) =
        item.split_once('=').ok_or_else(|| CliError::Config(format!("override `{item}` is not key=value")))?;
    if key.is_empty() {
        return Err(CliError::Config(format!("override `{item}` has an empty key")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        let obj = node.as_object_mut().ok_or_else(|| CliError::Config(format!("`{key}` is not an object path")))?;
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = node.as_object_mut().ok_or_else(|| CliError::Config(format!("`{key}` is not an object path")))?;
    obj.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
