use std::path::Path;

use callreward::eval::EvalConfig;
use callreward::grpo::GrpoConfig;
use callreward::reward::RewardConfig;
use callreward::sim::SimConfig;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::CliError;

/// Contents of a `--config` file.
///
/// ```json
/// {
///   "seed": 3,
///   "reward": {"kappa": 0.2, "midpoint": 25},
///   "sim": {"steps": 300, "group_size": 8},
///   "commands": {"train-sim": {"task": "bundled:default"}}
/// }
/// ```
///
/// `reward` and `grpo` also replace the corresponding parts of `sim`.
/// `commands` holds flag defaults per subcommand, keyed by flag name without
/// dashes; `seed` and `quiet` are defaults for the global flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub quiet: Option<bool>,
    pub reward: Option<RewardConfig>,
    pub grpo: Option<GrpoConfig>,
    pub sim: Option<SimConfig>,
    pub eval: Option<EvalConfig>,
    #[serde(default)]
    pub commands: Map<String, Value>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = crate::io::read_text(path.to_str().unwrap_or_default())?;
        let cfg: FileConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("config {}: {e}", path.display())))?;
        if let Some(r) = &cfg.reward {
            r.validate().map_err(|e| CliError::Invalid(format!("config: {e}")))?;
        }
        Ok(cfg)
    }

    pub fn reward(&self) -> RewardConfig {
        self.reward.clone().unwrap_or_default()
    }

    pub fn sim(&self) -> SimConfig {
        let mut sim = self.sim.clone().unwrap_or_default();
        if let Some(r) = &self.reward {
            sim.reward = r.clone();
        }
        if let Some(g) = &self.grpo {
            sim.grpo = g.clone();
        }
        sim
    }

    pub fn eval(&self) -> EvalConfig {
        self.eval.unwrap_or_default()
    }

    /// Flag tokens for `subcommand`, to be placed before the user's own
    /// flags so that those win.
    pub fn default_args(&self, subcommand: &str) -> Result<Vec<String>, CliError> {
        let mut out = Vec::new();
        if let Some(seed) = self.seed {
            out.push("--seed".to_string());
            out.push(seed.to_string());
        }
        if self.quiet == Some(true) {
            out.push("--quiet".to_string());
        }
        let Some(section) = self.commands.get(subcommand) else {
            return Ok(out);
        };
        let Value::Object(flags) = section else {
            return Err(CliError::Invalid(format!("config: commands.{subcommand} must be an object")));
        };
        for (name, value) in flags {
            let flag = format!("--{name}");
            match value {
                Value::Bool(true) => out.push(flag),
                Value::Bool(false) | Value::Null => {}
                Value::String(s) => out.extend([flag, s.clone()]),
                Value::Number(n) => out.extend([flag, n.to_string()]),
                Value::Array(items) => {
                    let parts: Vec<String> = items
                        .iter()
                        .map(|v| match v {
                            Value::String(s) => s.clone(),
                            other => other.to_string(),
                        })
                        .collect();
                    out.extend([flag, parts.join(",")]);
                }
                Value::Object(_) => {
                    return Err(CliError::Invalid(format!("config: commands.{subcommand}.{name} cannot be an object")));
                }
            }
        }
        Ok(out)
    }
}
