//! Declarative scenario configuration: a sectioned key-value text format
//! (JSON accepted as an alternative) parsed strictly — unknown keys are
//! rejected before any computation starts.

use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Accept either a single scalar or a list for vector-valued keys.
fn one_or_many<'de, D, T>(deserializer: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(match OneOrMany::deserialize(deserializer)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    })
}

/// `one_or_many` for optional fields.
fn opt_one_or_many<'de, D, T>(deserializer: D) -> std::result::Result<Option<Vec<T>>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    one_or_many(deserializer).map(Some)
}

/// Complete description of a scenario run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub potential: PotentialConfig,
    #[serde(default)]
    pub frame: FrameConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub dynamics: DynamicsConfig,
    #[serde(default)]
    pub wavepacket: WavepacketConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

/// Potential selection and parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    /// One of `cosine`, `quadratic-saddle`, `quadratic-saddle-confined`,
    /// `coulomb`.
    pub kind: String,
    /// Cosine amplitude parameter (`V = 2 g cos x`).
    #[serde(default)]
    pub g: Option<f64>,
    /// Quadratic coefficients per axis.
    #[serde(default, deserialize_with = "opt_one_or_many")]
    pub sigmas: Option<Vec<f64>>,
    /// Quartic confinement coefficients per axis.
    #[serde(default, deserialize_with = "opt_one_or_many")]
    pub quartic: Option<Vec<f64>>,
    /// Coulomb regularization length.
    #[serde(default)]
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrameConfig {
    #[serde(deserialize_with = "one_or_many")]
    pub masses: Vec<f64>,
    pub hbar: f64,
    /// Newton start guess for the critical-point search.
    #[serde(deserialize_with = "one_or_many")]
    pub start: Vec<f64>,
    pub newton_tol: f64,
}

impl Default for FrameConfig {
    fn default() -> Self {
        FrameConfig {
            masses: vec![1.0, 1.0],
            hbar: 1.0,
            start: vec![0.0, 0.0],
            newton_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Plane-wave basis half-size (1D).
    pub k_half: usize,
    pub n_levels: usize,
    /// Dirichlet box for the 2D grid solver.
    #[serde(deserialize_with = "one_or_many")]
    pub box_lo: Vec<f64>,
    #[serde(deserialize_with = "one_or_many")]
    pub box_hi: Vec<f64>,
    #[serde(deserialize_with = "one_or_many")]
    pub grid_n: Vec<usize>,
    /// Sample count for 1D densities.
    pub density_grid: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            k_half: 128,
            n_levels: 60,
            box_lo: vec![-6.0, -7.5],
            box_hi: vec![6.0, 7.5],
            grid_n: vec![96, 120],
            density_grid: 1024,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsConfig {
    /// Longitudinal orbit amplitude on the stable axis.
    pub amplitude: f64,
    /// Integration step as a fraction of the orbit period.
    pub dt_fraction: f64,
    /// `second` or `fourth`.
    pub integrator: String,
    /// Number of passings for the multiple-passing table.
    pub n_pass: usize,
    /// Maslov parameter of the passing-sum phases.
    pub nu: i32,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            amplitude: 1.0,
            dt_fraction: 1e-4,
            integrator: "fourth".into(),
            n_pass: 8,
            nu: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WavepacketConfig {
    #[serde(deserialize_with = "one_or_many")]
    pub grid_lo: Vec<f64>,
    #[serde(deserialize_with = "one_or_many")]
    pub grid_length: Vec<f64>,
    #[serde(deserialize_with = "one_or_many")]
    pub grid_n: Vec<usize>,
    #[serde(deserialize_with = "one_or_many")]
    pub center: Vec<f64>,
    #[serde(deserialize_with = "one_or_many")]
    pub momentum: Vec<f64>,
    /// Packet widths; zeros select the stable-axis ground-state width.
    #[serde(deserialize_with = "one_or_many")]
    pub width: Vec<f64>,
    pub dt: f64,
    pub steps: usize,
}

impl Default for WavepacketConfig {
    fn default() -> Self {
        WavepacketConfig {
            grid_lo: vec![-10.0, -32.0],
            grid_length: vec![20.0, 64.0],
            grid_n: vec![128, 256],
            center: vec![2.5, 0.0],
            momentum: vec![0.0, 0.0],
            width: vec![0.0, 0.0],
            dt: 0.02,
            steps: 1022,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    /// Target energy of the 1D comparison.
    pub target_energy: f64,
    /// Selection window around the target.
    pub energy_window: f64,
    /// Energy grid for the spectral transform.
    pub e_min: f64,
    pub e_max: f64,
    pub n_energies: usize,
    /// Smoothing width of level densities.
    pub smoothing_width: f64,
    /// `lorentzian` or `gaussian`.
    pub kernel: String,
    /// Longitudinal quantum numbers examined by scar detection.
    #[serde(deserialize_with = "one_or_many")]
    pub n_values: Vec<usize>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            target_energy: 101.189,
            energy_window: 0.5,
            e_min: 0.0,
            e_max: 8.0,
            n_energies: 1601,
            smoothing_width: 0.1,
            kernel: "lorentzian".into(),
            n_values: vec![0, 1, 2],
        }
    }
}

impl ScenarioConfig {
    /// Parse from text (sectioned key-value or JSON), apply dotted
    /// `section.key=value` overrides, and validate strictly.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        let mut tree = if text.trim_start().starts_with('{') {
            serde_json::from_str::<Value>(text)
                .map_err(|e| Error::Config(format!("invalid JSON config: {e}")))?
        } else {
            parse_sectioned(text)?
        };
        for ov in overrides {
            apply_override(&mut tree, ov)?;
        }
        let config: ScenarioConfig = serde_json::from_value(tree)
            .map_err(|e| Error::Config(format!("config rejected: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.into()));
        match self.potential.kind.as_str() {
            "cosine" => {
                if self.potential.g.unwrap_or(0.0) <= 0.0 {
                    return fail("cosine potential needs g > 0");
                }
            }
            "quadratic-saddle" | "quadratic-saddle-confined" => {
                if self.potential.sigmas.as_deref().is_none_or(<[f64]>::is_empty) {
                    return fail("quadratic potentials need sigmas");
                }
            }
            "coulomb" => {
                if self.potential.eps.unwrap_or(0.0) <= 0.0 {
                    return fail("coulomb potential needs eps > 0");
                }
            }
            other => {
                return Err(Error::Config(format!("unknown potential kind `{other}`")));
            }
        }
        if self.frame.hbar <= 0.0 {
            return fail("hbar must be positive");
        }
        if self.frame.masses.iter().any(|&m| m <= 0.0) {
            return fail("masses must be positive");
        }
        if self.frame.newton_tol <= 0.0 {
            return fail("newton_tol must be positive");
        }
        if self.dynamics.amplitude <= 0.0
            || self.dynamics.dt_fraction <= 0.0
            || self.dynamics.n_pass == 0
        {
            return fail("dynamics parameters must be positive");
        }
        if !matches!(self.dynamics.integrator.as_str(), "second" | "fourth") {
            return fail("integrator must be `second` or `fourth`");
        }
        if self.wavepacket.dt <= 0.0 || self.wavepacket.steps == 0 {
            return fail("wavepacket dt and steps must be positive");
        }
        if self.wavepacket.width.iter().any(|&w| w < 0.0) {
            return fail("packet widths must be nonnegative");
        }
        if self.analysis.energy_window <= 0.0
            || self.analysis.smoothing_width <= 0.0
            || self.analysis.n_energies < 2
        {
            return fail("analysis parameters must be positive");
        }
        if !matches!(self.analysis.kernel.as_str(), "lorentzian" | "gaussian") {
            return fail("kernel must be `lorentzian` or `gaussian`");
        }
        Ok(())
    }

    /// Canonical JSON serialization, hashed into the output manifest.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }
}

/// Parse a scalar token: bool, number, or bare string.
fn parse_scalar(token: &str) -> Value {
    match token {
        "true" => return Value::Bool(true),
        "false" => return Value::Bool(false),
        _ => {}
    }
    if let Ok(i) = token.parse::<i64>() {
        return Value::from(i);
    }
    if let Ok(f) = token.parse::<f64>() {
        if f.is_finite() {
            return Value::from(f);
        }
    }
    Value::String(token.to_string())
}

/// Parse a value token: a comma-separated list becomes an array.
fn parse_value(token: &str) -> Value {
    let trimmed = token.trim();
    if trimmed.contains(',') {
        Value::Array(trimmed.split(',').map(|t| parse_scalar(t.trim())).collect())
    } else {
        parse_scalar(trimmed)
    }
}

/// Sectioned key-value text into a JSON object tree.
fn parse_sectioned(text: &str) -> Result<Value> {
    let mut root = Map::new();
    let mut section: Option<String> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            if name.is_empty() {
                return Err(Error::Config(format!("line {}: empty section name", lineno + 1)));
            }
            root.entry(name.to_string())
                .or_insert_with(|| Value::Object(Map::new()));
            section = Some(name.to_string());
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected `key = value`, got `{line}`",
                lineno + 1
            )));
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
        }
        let target = match &section {
            Some(name) => root
                .get_mut(name)
                .and_then(Value::as_object_mut)
                .expect("section object just inserted"),
            None => &mut root,
        };
        if target
            .insert(key.to_string(), parse_value(value))
            .is_some()
        {
            return Err(Error::Config(format!(
                "line {}: duplicate key `{key}`",
                lineno + 1
            )));
        }
    }
    Ok(Value::Object(root))
}

/// Apply one `section.key=value` override to the parsed tree.
fn apply_override(tree: &mut Value, spec: &str) -> Result<()> {
    let Some((path, value)) = spec.split_once('=') else {
        return Err(Error::Config(format!(
            "override `{spec}` must look like section.key=value"
        )));
    };
    let mut cursor = tree;
    let parts: Vec<&str> = path.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("override path `{path}` has empty segments")));
    }
    for (i, part) in parts.iter().enumerate() {
        let obj = cursor.as_object_mut().ok_or_else(|| {
            Error::Config(format!("override path `{path}` descends into a non-object"))
        })?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), parse_value(value));
            return Ok(());
        }
        cursor = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
    }
    unreachable!("override paths are nonempty")
}
