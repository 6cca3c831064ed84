//! Progressive rule-based reward for tool-call completions.
//!
//! The final reward is `format_weight · R_format + R_tool` where
//!
//! ```text
//! R_tool = σ(t)·r_strict + (1 − σ(t))·r_general
//! σ(t)   = 1 / (1 + exp(−κ(t − m)))
//! ```
//!
//! `r_general` is a dense token-overlap score in `[−0.5, 0.5]` that gives
//! partial credit early in training. `r_strict` is an AST match (0/1) with a
//! bonus for correct multi-call answers and a penalty per wrong argument
//! value. As `t` passes the midpoint `m` the weight moves from the former to
//! the latter.

mod ast;
mod config;
mod schedule;
mod tokens;

use serde::{Deserialize, Serialize};

use crate::parallel::{map_slice, Execution};
use crate::toolcall::{parse_structured_response, AnswerSet, StructuredResponse};

pub use ast::{align_calls, ast_equal, count_value_errors, strict_match, strict_reward, StrictOutcome};
pub use config::{GeneralRewardScope, RewardConfig};
pub use schedule::sigma;
pub use tokens::{general_reward, tokenize, TokenBag};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RewardError {
    #[error("ground truth has no tokens after splitting on delimiters")]
    DegenerateGroundTruth,
    #[error("invalid reward config: {0}")]
    InvalidConfig(String),
}

/// Every component of one scored completion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub format: f64,
    pub general: f64,
    pub strict: f64,
    pub sigma: f64,
    pub tool: f64,
    #[serde(rename = "final")]
    pub final_reward: f64,
    pub value_errors: usize,
    pub multi_tool_applied: bool,
}

/// 1 when the `<think>`/`<answer>` tags are present exactly once each and in
/// order, else 0.
pub fn format_reward(pred: &StructuredResponse) -> f64 {
    if pred.is_well_formed() {
        1.0
    } else {
        0.0
    }
}

/// Scores a raw completion at training step `t`.
pub fn compute_reward(
    pred_raw: &str,
    gt: &AnswerSet,
    gt_text: &str,
    t: u64,
    cfg: &RewardConfig,
) -> Result<RewardBreakdown, RewardError> {
    compute_reward_with_sigma(&parse_structured_response(pred_raw), gt, gt_text, sigma(t, cfg), cfg)
}

/// Same as [`compute_reward`] with an explicit strict weight, for fixed
/// schedules (strict-only, general-only) and pre-parsed completions.
pub fn compute_reward_with_sigma(
    pred: &StructuredResponse,
    gt: &AnswerSet,
    gt_text: &str,
    sigma: f64,
    cfg: &RewardConfig,
) -> Result<RewardBreakdown, RewardError> {
    let format = format_reward(pred);
    let scored_text = match (cfg.general_reward_scope, &pred.answer) {
        (GeneralRewardScope::Answer, Some(answer)) => answer.as_str(),
        _ => pred.raw.as_str(),
    };
    let general = general_reward(scored_text, gt_text, cfg)?;
    let strict = strict_reward(pred, gt, cfg);
    let tool = sigma * strict.score + (1.0 - sigma) * general;
    Ok(RewardBreakdown {
        format,
        general,
        strict: strict.score,
        sigma,
        tool,
        final_reward: cfg.format_weight * format + tool,
        value_errors: strict.value_errors,
        multi_tool_applied: strict.multi_tool_applied,
    })
}

/// One (prediction, ground truth) pair for batch scoring.
#[derive(Clone, Debug)]
pub struct ScoreItem {
    pub pred_raw: String,
    pub gt: AnswerSet,
    pub gt_text: String,
}

/// Scores a batch at one shared training step. Results are in input order
/// regardless of `exec`.
pub fn score_batch(
    items: &[ScoreItem],
    t: u64,
    cfg: &RewardConfig,
    exec: Execution,
) -> Vec<Result<RewardBreakdown, RewardError>> {
    let s = sigma(t, cfg);
    map_slice(exec, items, |item| {
        compute_reward_with_sigma(&parse_structured_response(&item.pred_raw), &item.gt, &item.gt_text, s, cfg)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toolcall::parse_call_expression;

    const GT: &str = r#"[get_weather(city="Paris", unit="C")]"#;

    #[test]
    fn perfect_at_midpoint() {
        let cfg = RewardConfig::default();
        let gt = parse_call_expression(GT).unwrap();
        let b = compute_reward(&format!("<think>x</think><answer>{GT}</answer>"), &gt, GT, 25, &cfg).unwrap();
        assert_eq!(b.format, 1.0);
        assert_eq!(b.strict, 1.0);
        assert_eq!(b.general, 0.5);
        assert_eq!(b.sigma, 0.5);
        assert_eq!(b.tool, 0.75);
        assert_eq!(b.final_reward, 1.75);
    }

    #[test]
    fn empty_completion() {
        let cfg = RewardConfig::default();
        let gt = parse_call_expression(GT).unwrap();
        for t in [0, 25, 80] {
            let b = compute_reward("", &gt, GT, t, &cfg).unwrap();
            assert_eq!(b.format, 0.0);
            assert_eq!(b.general, -0.5);
            assert_eq!(b.strict, 0.0);
            assert_eq!(b.final_reward, -0.5 * (1.0 - sigma(t, &cfg)));
        }
    }

    #[test]
    fn late_training_approaches_two() {
        let cfg = RewardConfig::default();
        let gt = parse_call_expression(GT).unwrap();
        let b = compute_reward(&format!("<think></think><answer>{GT}</answer>"), &gt, GT, 1000, &cfg).unwrap();
        assert!((b.final_reward - 2.0).abs() < 1e-12);
    }

    #[test]
    fn general_scope() {
        let gt = parse_call_expression(GT).unwrap();
        let raw = "<think> Paris weather </think><answer>nothing</answer>".to_string();
        let answer_scope = compute_reward(&raw, &gt, GT, 0, &RewardConfig::default()).unwrap();
        assert_eq!(answer_scope.general, -0.5);
        let full = RewardConfig {
            general_reward_scope: GeneralRewardScope::Full,
            ..Default::default()
        };
        // "Paris" is picked up from the think segment
        let full_scope = compute_reward(&raw, &gt, GT, 0, &full).unwrap();
        assert!((full_scope.general - (-0.5 + 1.0 / 5.0)).abs() < 1e-15);
    }

    #[test]
    fn degenerate_ground_truth_propagates() {
        let cfg = RewardConfig::default();
        assert_eq!(
            compute_reward("x", &AnswerSet::default(), "[]", 0, &cfg),
            Err(RewardError::DegenerateGroundTruth)
        );
    }

    #[test]
    fn breakdown_json_field_names() {
        let b = RewardBreakdown {
            format: 1.0,
            general: 0.5,
            strict: 1.0,
            sigma: 0.5,
            tool: 0.75,
            final_reward: 1.75,
            value_errors: 0,
            multi_tool_applied: false,
        };
        let text = serde_json::to_string(&b).unwrap();
        assert_eq!(
            text,
            r#"{"format":1.0,"general":0.5,"strict":1.0,"sigma":0.5,"tool":0.75,"final":1.75,"value_errors":0,"multi_tool_applied":false}"#
        );
    }

    #[test]
    fn batch_matches_sequential() {
        let cfg = RewardConfig::default();
        let gt = parse_call_expression(GT).unwrap();
        let items: Vec<ScoreItem> = ["", "[get_weather(city=\"Rome\")]", "<think></think><answer>[]</answer>"]
            .iter()
            .map(|p| ScoreItem {
                pred_raw: p.to_string(),
                gt: gt.clone(),
                gt_text: GT.into(),
            })
            .collect();
        assert_eq!(
            score_batch(&items, 10, &cfg, Execution::Parallel),
            score_batch(&items, 10, &cfg, Execution::Sequential)
        );
    }
}
