//! Group-relative policy optimization.
//!
//! For one prompt, `G` completions are sampled from the old policy and scored.
//! Each completion's advantage is its reward standardized within the group:
//!
//! ```text
//! A_i = (r_i − mean(r)) / std(r)          (population std)
//! ρ_{i,t} = π_θ(o_{i,t} | ·) / π_old(o_{i,t} | ·)
//! J = mean_groups (1/G) Σ_i (1/|o_i|) Σ_t min(ρ A_i, clip(ρ, 1−ε, 1+ε) A_i)
//! ```
//!
//! `J` is maximized; there is no KL term and no critic. A loss, where one is
//! wanted, is `-J`.

use serde::{Deserialize, Serialize};

use crate::parallel::{map_slice, Execution};
use crate::policy::{PolicyDelta, PolicyTable};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GrpoError {
    #[error("group needs at least 2 rewards, got {0}")]
    GroupTooSmall(usize),
    #[error("group {0:?} has no advantages")]
    MissingAdvantages(String),
    #[error("completion token, old and new log-prob lengths differ or are empty")]
    LengthMismatch,
    #[error("prompt {0:?} is not in the policy table")]
    UnknownPrompt(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrpoConfig {
    /// Clip range ε.
    pub epsilon: f64,
    /// Groups whose reward std falls below this get zero advantages.
    pub std_floor: f64,
    pub learning_rate: f64,
}

impl Default for GrpoConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.2,
            std_floor: 1e-8,
            learning_rate: 30.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Completion {
    pub tokens: Vec<usize>,
    pub old_logprobs: Vec<f64>,
    pub new_logprobs: Vec<f64>,
    pub reward: f64,
}

impl Completion {
    pub fn validate(&self) -> Result<(), GrpoError> {
        let n = self.tokens.len();
        if n == 0 || self.old_logprobs.len() != n || self.new_logprobs.len() != n {
            Err(GrpoError::LengthMismatch)
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RolloutGroup {
    pub prompt_id: String,
    pub completions: Vec<Completion>,
    pub advantages: Option<Vec<f64>>,
}

impl RolloutGroup {
    pub fn rewards(&self) -> Vec<f64> {
        self.completions.iter().map(|c| c.reward).collect()
    }

    /// Fills `advantages` from the completions' rewards.
    pub fn compute_advantages(&mut self, cfg: &GrpoConfig) -> Result<(), GrpoError> {
        self.advantages = Some(compute_advantages(&self.rewards(), cfg)?);
        Ok(())
    }

    /// Replaces `new_logprobs` with the current policy's log-probabilities.
    pub fn refresh_new_logprobs(&mut self, policy: &PolicyTable) -> Result<(), GrpoError> {
        let prompt = policy
            .prompt_index(&self.prompt_id)
            .ok_or_else(|| GrpoError::UnknownPrompt(self.prompt_id.clone()))?;
        for c in &mut self.completions {
            c.new_logprobs = policy.sequence_log_probs(prompt, &c.tokens);
        }
        Ok(())
    }
}

/// Standardizes rewards within a group using the population std.
pub fn compute_advantages(rewards: &[f64], cfg: &GrpoConfig) -> Result<Vec<f64>, GrpoError> {
    if rewards.len() < 2 {
        return Err(GrpoError::GroupTooSmall(rewards.len()));
    }
    let n = rewards.len() as f64;
    let mean = rewards.iter().sum::<f64>() / n;
    let var = rewards.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if std < cfg.std_floor {
        return Ok(vec![0.0; rewards.len()]);
    }
    Ok(rewards.iter().map(|r| (r - mean) / std).collect())
}

/// `exp(new − old)` per token.
pub fn importance_ratios(c: &Completion) -> Vec<f64> {
    c.new_logprobs
        .iter()
        .zip(&c.old_logprobs)
        .map(|(new, old)| (new - old).exp())
        .collect()
}

/// Clipped surrogate term for one token.
pub fn clipped_term(ratio: f64, advantage: f64, epsilon: f64) -> f64 {
    let clipped = ratio.clamp(1.0 - epsilon, 1.0 + epsilon);
    (ratio * advantage).min(clipped * advantage)
}

/// Derivative of [`clipped_term`] with respect to the token log-probability.
/// Zero where the clipped branch is active and the ratio lies outside the
/// clip range.
pub fn clipped_term_grad(ratio: f64, advantage: f64, epsilon: f64) -> f64 {
    let clipped_out = (advantage > 0.0 && ratio > 1.0 + epsilon) || (advantage < 0.0 && ratio < 1.0 - epsilon);
    if clipped_out || advantage == 0.0 {
        0.0
    } else {
        ratio * advantage
    }
}

fn group_objective(group: &RolloutGroup, cfg: &GrpoConfig) -> Result<f64, GrpoError> {
    let adv = group
        .advantages
        .as_ref()
        .filter(|a| a.len() == group.completions.len())
        .ok_or_else(|| GrpoError::MissingAdvantages(group.prompt_id.clone()))?;
    let mut total = 0.0;
    for (c, a) in group.completions.iter().zip(adv) {
        c.validate()?;
        let per_token: f64 = importance_ratios(c).iter().map(|r| clipped_term(*r, *a, cfg.epsilon)).sum();
        total += per_token / c.tokens.len() as f64;
    }
    Ok(total / group.completions.len() as f64)
}

/// Mean over groups of the clipped surrogate, from the stored log-probs.
pub fn grpo_objective(groups: &[RolloutGroup], cfg: &GrpoConfig) -> Result<f64, GrpoError> {
    grpo_objective_with(groups, cfg, Execution::Sequential)
}

pub fn grpo_objective_with(groups: &[RolloutGroup], cfg: &GrpoConfig, exec: Execution) -> Result<f64, GrpoError> {
    if groups.is_empty() {
        return Ok(0.0);
    }
    let per_group = map_slice(exec, groups, |g| group_objective(g, cfg));
    let mut sum = 0.0;
    for v in per_group {
        sum += v?;
    }
    Ok(sum / groups.len() as f64)
}

/// Exact gradient of [`grpo_objective`] with respect to the policy logits.
///
/// Ratios use the policy's current log-probabilities (temperature 1), so the
/// result is the derivative of the objective evaluated at `policy`; the
/// completions' stored `new_logprobs` are not consulted. Contributions are
/// accumulated in group order, so the result is deterministic.
pub fn grpo_gradient_tabular(
    groups: &[RolloutGroup],
    policy: &PolicyTable,
    cfg: &GrpoConfig,
) -> Result<PolicyDelta, GrpoError> {
    let mut grad = PolicyDelta::new();
    if groups.is_empty() {
        return Ok(grad);
    }
    let group_weight = 1.0 / groups.len() as f64;
    for group in groups {
        let adv = group
            .advantages
            .as_ref()
            .filter(|a| a.len() == group.completions.len())
            .ok_or_else(|| GrpoError::MissingAdvantages(group.prompt_id.clone()))?;
        let prompt = policy
            .prompt_index(&group.prompt_id)
            .ok_or_else(|| GrpoError::UnknownPrompt(group.prompt_id.clone()))?;
        let completion_weight = group_weight / group.completions.len() as f64;
        for (c, a) in group.completions.iter().zip(adv) {
            if c.tokens.is_empty() || c.old_logprobs.len() != c.tokens.len() {
                return Err(GrpoError::LengthMismatch);
            }
            if *a == 0.0 {
                continue;
            }
            let token_weight = completion_weight / c.tokens.len() as f64;
            for (t, &token) in c.tokens.iter().enumerate() {
                let key = policy.state(prompt, &c.tokens, t);
                let log_probs = policy.log_probs(&key, 1.0);
                let ratio = (log_probs[token] - c.old_logprobs[t]).exp();
                let d = clipped_term_grad(ratio, *a, cfg.epsilon) * token_weight;
                if d == 0.0 {
                    continue;
                }
                let row = grad.entry(key).or_insert_with(|| vec![0.0; policy.vocab_size()]);
                // d log π(token) / d z_v = 1[v = token] − π(v)
                for (v, lp) in log_probs.iter().enumerate() {
                    let indicator = if v == token { 1.0 } else { 0.0 };
                    row[v] += d * (indicator - lp.exp());
                }
            }
        }
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> GrpoConfig {
        GrpoConfig::default()
    }

    fn single(ratio: f64, adv: f64) -> Vec<RolloutGroup> {
        vec![RolloutGroup {
            prompt_id: "q".into(),
            completions: vec![Completion {
                tokens: vec![0],
                old_logprobs: vec![0.0],
                new_logprobs: vec![ratio.ln()],
                reward: 0.0,
            }],
            advantages: Some(vec![adv]),
        }]
    }

    #[test]
    fn advantage_examples() {
        assert_eq!(compute_advantages(&[1.0, 0.0], &cfg()).unwrap(), vec![1.0, -1.0]);
        assert_eq!(compute_advantages(&[0.7; 4], &cfg()).unwrap(), vec![0.0; 4]);
        let a = compute_advantages(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], &cfg()).unwrap();
        assert!((a[0] - 2.645_751_311_064_590_6).abs() < 1e-12);
        for x in &a[1..] {
            assert!((x + 0.377_964_473_009_227_2).abs() < 1e-12);
        }
        assert_eq!(compute_advantages(&[1.0], &cfg()), Err(GrpoError::GroupTooSmall(1)));
    }

    #[test]
    fn ratio_examples() {
        let c = Completion {
            tokens: vec![0, 1, 2],
            old_logprobs: vec![-1.0, -1.0, -1.0],
            new_logprobs: vec![-1.0, -1.0 + 2f64.ln(), -1.0 - 4f64.ln()],
            reward: 0.0,
        };
        let r = importance_ratios(&c);
        assert_eq!(r[0], 1.0);
        assert!((r[1] - 2.0).abs() < 1e-15);
        assert!((r[2] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn objective_examples() {
        assert_eq!(grpo_objective(&single(1.0, 1.0), &cfg()).unwrap(), 1.0);
        assert_eq!(grpo_objective(&single(1.5, 1.0), &cfg()).unwrap(), 1.2);
        assert_eq!(grpo_objective(&single(0.5, -1.0), &cfg()).unwrap(), -0.8);
    }

    #[test]
    fn missing_advantages() {
        let mut g = single(1.0, 1.0);
        g[0].advantages = None;
        assert!(matches!(grpo_objective(&g, &cfg()), Err(GrpoError::MissingAdvantages(_))));
    }

    #[test]
    fn clip_gradient_branches() {
        let eps = 0.2;
        assert_eq!(clipped_term_grad(1.5, 1.0, eps), 0.0);
        assert_eq!(clipped_term_grad(0.5, 1.0, eps), 0.5);
        assert_eq!(clipped_term_grad(0.5, -1.0, eps), 0.0);
        assert_eq!(clipped_term_grad(1.5, -1.0, eps), -1.5);
        assert_eq!(clipped_term_grad(1.1, 2.0, eps), 2.2);
    }

    #[test]
    fn zero_advantages_give_zero_gradient() {
        let policy = PolicyTable::new(vec!["q".into()], 4, 3);
        let g = single(1.0, 0.0);
        assert!(grpo_gradient_tabular(&g, &policy, &cfg()).unwrap().is_empty());
    }
}
