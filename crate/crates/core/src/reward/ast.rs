use crate::toolcall::{AnswerSet, StructuredResponse, ToolCall};

use super::RewardConfig;

fn normalized_text(s: &str) -> &str {
    s.trim()
}

/// AST equivalence of two answers.
///
/// Calls are compared as a multiset (order-free), arguments as maps, values
/// structurally with numeric number comparison. Direct responses compare by
/// trimmed text; an answer with calls never equals a direct response.
pub fn ast_equal(a: &AnswerSet, b: &AnswerSet) -> bool {
    match (&a.direct_response, &b.direct_response) {
        (Some(x), Some(y)) => return a.calls.is_empty() && b.calls.is_empty() && normalized_text(x) == normalized_text(y),
        (None, None) => {}
        _ => return false,
    }
    if a.calls.len() != b.calls.len() {
        return false;
    }
    // call equality is an equivalence relation, so first-fit matching decides
    // multiset equality
    let mut used = vec![false; b.calls.len()];
    a.calls.iter().all(|call| {
        match b.calls.iter().enumerate().position(|(j, other)| !used[j] && other == call) {
            Some(j) => {
                used[j] = true;
                true
            }
            None => false,
        }
    })
}

fn exact_pairs(a: &ToolCall, b: &ToolCall) -> usize {
    a.args.iter().filter(|(k, v)| b.args.get(*k) == Some(*v)).count()
}

/// Greedy alignment of predicted calls onto ground-truth calls.
///
/// Only calls with the same name can pair up. Pairs are claimed greedily by
/// the number of identical arguments they share; ties go to the closest
/// argument count, then to the lowest predicted and ground-truth index.
/// Returns `(pred index, gt index)` pairs sorted by predicted index.
pub fn align_calls(pred: &[ToolCall], gt: &[ToolCall]) -> Vec<(usize, usize)> {
    let mut candidates: Vec<(usize, usize, usize, usize)> = Vec::new();
    for (i, p) in pred.iter().enumerate() {
        for (j, g) in gt.iter().enumerate() {
            if p.name == g.name {
                candidates.push((exact_pairs(p, g), p.args.len().abs_diff(g.args.len()), i, j));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)).then(a.3.cmp(&b.3)));
    let mut pred_taken = vec![false; pred.len()];
    let mut gt_taken = vec![false; gt.len()];
    let mut pairs = Vec::new();
    for (_, _, i, j) in candidates {
        if !pred_taken[i] && !gt_taken[j] {
            pred_taken[i] = true;
            gt_taken[j] = true;
            pairs.push((i, j));
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Predicted arguments whose call and argument names line up with the ground
/// truth but whose value differs.
pub fn count_value_errors(pred: &[ToolCall], gt: &[ToolCall]) -> usize {
    align_calls(pred, gt)
        .into_iter()
        .map(|(i, j)| {
            pred[i]
                .args
                .iter()
                .filter(|(k, v)| matches!(gt[j].args.get(*k), Some(g) if g != *v))
                .count()
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrictOutcome {
    pub score: f64,
    /// The prediction matched the ground truth (the 0/1 base term).
    pub matched: bool,
    pub value_errors: usize,
    pub multi_tool_applied: bool,
}

/// Whether a prediction earns the base strict reward of 1.
///
/// For a direct-response ground truth this means: no parseable call and a
/// non-empty answer segment.
pub fn strict_match(pred: &StructuredResponse, gt: &AnswerSet) -> bool {
    if gt.is_direct() {
        let has_calls = pred.parsed.as_ref().is_some_and(|p| !p.calls.is_empty());
        let has_text = pred.answer.as_deref().is_some_and(|a| !a.trim().is_empty());
        return !has_calls && has_text;
    }
    pred.parsed.as_ref().is_some_and(|p| ast_equal(p, gt))
}

/// AST reward with the multi-tool bonus and per-value-error penalty,
/// clamped to `[strict_clamp_min, 1 + multi_tool_bonus]`.
pub fn strict_reward(pred: &StructuredResponse, gt: &AnswerSet, cfg: &RewardConfig) -> StrictOutcome {
    let matched = strict_match(pred, gt);
    let multi_tool_applied = matched && gt.calls.len() >= 2;
    let value_errors = match (&pred.parsed, matched) {
        (Some(p), false) if !gt.is_direct() => count_value_errors(&p.calls, &gt.calls),
        _ => 0,
    };
    let base = if matched { 1.0 } else { 0.0 };
    let bonus = if multi_tool_applied { cfg.multi_tool_bonus } else { 0.0 };
    let raw = base + bonus - cfg.value_error_penalty * value_errors as f64;
    StrictOutcome {
        score: raw.clamp(cfg.strict_clamp_min, cfg.strict_max()),
        matched,
        value_errors,
        multi_tool_applied,
    }
}
