use serde::{Deserialize, Serialize};

use super::RewardError;

/// Which text the general (token-overlap) reward looks at.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneralRewardScope {
    /// The `<answer>` segment when present, otherwise the whole completion.
    #[default]
    Answer,
    Full,
}

/// Reward shaping parameters. Loaded from JSON with exactly these field
/// names; unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    /// Sigmoid steepness.
    pub kappa: f64,
    /// Training step at which strict and general rewards are weighted equally.
    pub midpoint: u64,
    /// Added to a full AST match when the ground truth has two or more calls.
    pub multi_tool_bonus: f64,
    /// Subtracted once per predicted argument with a wrong value.
    pub value_error_penalty: f64,
    pub general_floor: f64,
    pub strict_clamp_min: f64,
    /// Token delimiters for the general reward. Whitespace always splits.
    pub delimiters: String,
    pub format_weight: f64,
    pub general_reward_scope: GeneralRewardScope,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            kappa: 0.2,
            midpoint: 25,
            multi_tool_bonus: 0.3,
            value_error_penalty: 0.3,
            general_floor: -0.5,
            strict_clamp_min: -1.0,
            delimiters: "()[],.:'\"=".to_string(),
            format_weight: 1.0,
            general_reward_scope: GeneralRewardScope::Answer,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), RewardError> {
        let bad = |msg: &str| Err(RewardError::InvalidConfig(msg.to_string()));
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return bad("kappa must be positive and finite");
        }
        if !(self.multi_tool_bonus >= 0.0) {
            return bad("multi_tool_bonus must be >= 0");
        }
        if !(self.value_error_penalty >= 0.0) {
            return bad("value_error_penalty must be >= 0");
        }
        if !(self.strict_clamp_min <= 0.0) {
            return bad("strict_clamp_min must be <= 0");
        }
        if !self.general_floor.is_finite() || !self.format_weight.is_finite() {
            return bad("general_floor and format_weight must be finite");
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, RewardError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| RewardError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn is_delimiter(&self, c: char) -> bool {
        c.is_whitespace() || self.delimiters.contains(c)
    }

    /// Upper bound of the strict reward.
    pub fn strict_max(&self) -> f64 {
        1.0 + self.multi_tool_bonus
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RewardConfig::default().validate().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = RewardConfig::from_json(r#"{"kappa": 0.5, "kapa": 1}"#).unwrap_err();
        assert!(err.to_string().contains("kapa"), "{err}");
    }

    #[test]
    fn partial_json_fills_defaults() {
        let cfg = RewardConfig::from_json(r#"{"kappa": 1.0, "midpoint": 50, "general_reward_scope": "full"}"#).unwrap();
        assert_eq!(cfg.kappa, 1.0);
        assert_eq!(cfg.midpoint, 50);
        assert_eq!(cfg.general_reward_scope, GeneralRewardScope::Full);
        assert_eq!(cfg.multi_tool_bonus, 0.3);
    }

    #[test]
    fn invariants_enforced() {
        assert!(RewardConfig::from_json(r#"{"kappa": 0}"#).is_err());
        assert!(RewardConfig::from_json(r#"{"multi_tool_bonus": -0.1}"#).is_err());
        assert!(RewardConfig::from_json(r#"{"value_error_penalty": -1}"#).is_err());
        assert!(RewardConfig::from_json(r#"{"strict_clamp_min": 0.5}"#).is_err());
    }
}
