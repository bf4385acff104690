use std::fmt;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Every option a run can take. Config-file keys are the field names; flags
/// are the same names in kebab case. Options a mode does not use are ignored.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Opts {
    /// JSON file with keys named like the flags (snake_case); flags win
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Accepted in config files for documentation; the subcommand decides
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,

    /// mu'/mu of the two solids
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_ratio: Option<f64>,
    /// c1'/c1 of the two solids
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speed_ratio: Option<f64>,

    /// Anti-plane stiffness of the first solid (Pa)
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c44: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c45: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c55: Option<f64>,
    /// Density of the first solid (kg/m^3)
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Second solid; omitted means identical to the first
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c44_prime: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c45_prime: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c55_prime: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_prime: Option<f64>,

    /// Direct-effect coefficient
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Evolution-effect coefficient
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// Characteristic slip distance (m)
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    /// Normal stress (Pa)
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_o: Option<f64>,
    /// Steady slip velocity (m/s)
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_o: Option<f64>,
    /// Steady-state friction coefficient at v_o
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,

    /// Nondimensional steady slip velocity
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_over_a: Option<f64>,

    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_points: Option<usize>,
    /// Geometric q spacing
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log: Option<bool>,

    /// Output file, or directory for `figures`
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,

    /// Normalized wavenumber for `roots`
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_hat: Option<f64>,
    /// Wavenumber (1/m) for `roots`
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,

    /// `continuum` or `spring-block` for `kcr`
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// Spring stiffness (Pa/m)
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stiffness: Option<f64>,
    /// Block mass per unit area (kg/m^2)
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    /// `ageing` or `slip`
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub law: Option<String>,
    /// Simulated time (s)
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    /// Integrator relative tolerance
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Output spacing (s); every accepted step when omitted
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_init: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_init: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_init: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputError {
    pub field: String,
    pub message: String,
}

impl InputError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn read_file(path: &Path) -> Result<Map<String, Value>, InputError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| InputError::new("config", format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| InputError::new("config", format!("{} is not valid JSON: {e}", path.display())))?;
    let Value::Object(map) = value else {
        return Err(InputError::new("config", "top level must be a JSON object"));
    };
    // one key at a time so a bad value is blamed on its own key
    for (key, v) in &map {
        let single = Value::Object(Map::from_iter([(key.clone(), v.clone())]));
        serde_json::from_value::<Opts>(single).map_err(|e| {
            let msg = e.to_string();
            if msg.starts_with("unknown field") {
                InputError::new(key.clone(), "unknown config key")
            } else {
                InputError::new(key.clone(), msg)
            }
        })?;
    }
    Ok(map)
}

/// Flags layered over the config file, if any.
pub fn resolve(cli: Opts) -> Result<Opts, InputError> {
    let Some(path) = cli.config.clone() else {
        return Ok(cli);
    };
    let mut merged = read_file(&path)?;
    let Value::Object(flags) = serde_json::to_value(&cli).expect("options serialize") else {
        unreachable!("options serialize to an object");
    };
    merged.extend(flags);
    let mut opts: Opts = serde_json::from_value(Value::Object(merged)).map_err(|e| InputError::new("config", e.to_string()))?;
    opts.config = Some(path);
    Ok(opts)
}

/// Canonical JSON of the resolved options for the provenance header.
pub fn canonical(opts: &Opts) -> String {
    serde_json::to_string(opts).expect("options serialize")
}
