//! Desk-scale training loop: a tabular policy learns to emit tool calls under
//! the progressive reward and GRPO updates.
//!
//! Each step samples `G` completions per prompt, scores them with
//! [`compute_reward_with_sigma`] at the step's schedule weight, standardizes
//! rewards within each group and applies `inner_updates` gradient-ascent
//! steps on the clipped surrogate. Sampling uses `temperature`; the recorded
//! old log-probabilities are those of the untempered (temperature 1) policy,
//! which is the policy being optimized.

mod ablation;
mod task;

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::grpo::{grpo_gradient_tabular, Completion, GrpoConfig, GrpoError, RolloutGroup};
use crate::parallel::{map_indexed, Execution};
use crate::policy::{softmax, PolicyTable, StateKey};
use crate::reward::{compute_reward_with_sigma, sigma, strict_match, RewardConfig, RewardError};
use crate::toolcall::{parse_structured_response, ANSWER_CLOSE, ANSWER_OPEN, THINK_CLOSE, THINK_OPEN};

pub use ablation::{schedule_ablation, AblationCell, AblationReport};
pub use task::{answer_pieces, bundled, Granularity, bundled_default, bundled_single, bundled_sparse, target_pieces, TaskFile, TaskFilePrompt, ToyPrompt, ToyTask, EOS, MAX_PROMPTS, MAX_VOCAB};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid task: {0}")]
    InvalidTask(String),
    #[error("invalid simulator config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error(transparent)]
    Grpo(#[from] GrpoError),
}

/// How the strict/general mixing weight evolves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Sigmoid switch from general to strict around the midpoint.
    #[default]
    Sigmoid,
    /// σ ≡ 1.
    StrictOnly,
    /// σ ≡ 0.
    GeneralOnly,
}

impl Schedule {
    pub fn weight(self, t: u64, cfg: &RewardConfig) -> f64 {
        match self {
            Schedule::Sigmoid => sigma(t, cfg),
            Schedule::StrictOnly => 1.0,
            Schedule::GeneralOnly => 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub group_size: usize,
    pub temperature: f64,
    pub steps: u64,
    pub inner_updates: usize,
    pub seed: u64,
    pub reward: RewardConfig,
    pub grpo: GrpoConfig,
    pub schedule: Schedule,
    /// Emit the think/answer tags as tokens instead of wrapping completions
    /// in them, so the format reward is learned too.
    pub emit_tags_as_tokens: bool,
    /// Strength of the bigram prior the policy starts from; 0 starts
    /// uniform. See [`bigram_prior_policy`].
    pub prior_strength: f64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            group_size: 8,
            temperature: 0.8,
            steps: 300,
            inner_updates: 2,
            seed: 7,
            reward: RewardConfig::default(),
            grpo: GrpoConfig::default(),
            schedule: Schedule::Sigmoid,
            emit_tags_as_tokens: false,
            prior_strength: 2.0,
            execution: Execution::Parallel,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.group_size < 2 {
            return Err(SimError::InvalidConfig("group_size must be at least 2".into()));
        }
        if !(self.temperature > 0.0) {
            return Err(SimError::InvalidConfig("temperature must be positive".into()));
        }
        if !(self.prior_strength >= 0.0 && self.prior_strength.is_finite()) {
            return Err(SimError::InvalidConfig("prior_strength must be finite and non-negative".into()));
        }
        if !(self.grpo.epsilon > 0.0 && self.grpo.epsilon < 1.0) {
            return Err(SimError::InvalidConfig("epsilon must lie in (0, 1)".into()));
        }
        self.reward.validate()?;
        Ok(())
    }
}

/// One line of the training log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub mean_reward: f64,
    pub exact_match_rate: f64,
    pub sigma: f64,
    pub policy_entropy: f64,
}

/// Per-step training telemetry. Serialized as JSONL, one [`StepRecord`] per
/// line. `policy_entropy` is the mean entropy (nats, temperature 1) of the
/// next-token distribution over every token sampled in that step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingLog {
    pub records: Vec<StepRecord>,
}

impl TrainingLog {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let _ = writeln!(out, "{}", serde_json::to_string(r).expect("record serializes"));
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, serde_json::Error> {
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<_, _>>()?;
        Ok(Self { records })
    }

    pub fn last(&self) -> Option<&StepRecord> {
        self.records.last()
    }
}

/// A sampled group together with the completion texts that were scored.
#[derive(Clone, Debug)]
pub struct Rollout {
    pub group: RolloutGroup,
    pub texts: Vec<String>,
    /// Sum of next-token entropies over all sampled tokens, and their count.
    pub entropy_sum: f64,
    pub token_count: usize,
}

fn sample_index(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left u above the cumulative sum; take the last token with mass
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}

/// Seeded generator for one (step, prompt) pair, independent of thread
/// scheduling.
pub fn rollout_rng(seed: u64, step: u64, prompt: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((step << 16) ^ prompt as u64);
    rng
}

/// Samples `group_size` completions for one prompt.
///
/// Generation stops at the end token (which is kept as the last emitted
/// token) or after `max_len` tokens. Rewards are left at 0.
pub fn rollout(
    policy: &PolicyTable,
    task: &ToyTask,
    prompt: usize,
    group_size: usize,
    temperature: f64,
    emit_tags: bool,
    rng: &mut impl Rng,
) -> Rollout {
    let mut completions = Vec::with_capacity(group_size);
    let mut texts = Vec::with_capacity(group_size);
    let mut entropy_sum = 0.0;
    let mut token_count = 0;
    for _ in 0..group_size {
        let mut tokens = Vec::new();
        let mut old_logprobs = Vec::new();
        while tokens.len() < policy.max_len() {
            let key = policy.state(prompt, &tokens, tokens.len());
            let logits = policy.logits(&key);
            let token = sample_index(&softmax(logits, temperature), rng);
            let lp = policy.log_probs(&key, 1.0);
            entropy_sum += crate::policy::entropy(logits);
            token_count += 1;
            old_logprobs.push(lp[token]);
            tokens.push(token);
            if token == 0 {
                break;
            }
        }
        let body = task.detokenize(&tokens);
        texts.push(if emit_tags {
            body
        } else {
            format!("{THINK_OPEN}{THINK_CLOSE}{ANSWER_OPEN}{body}{ANSWER_CLOSE}")
        });
        completions.push(Completion {
            new_logprobs: old_logprobs.clone(),
            old_logprobs,
            tokens,
            reward: 0.0,
        });
    }
    Rollout {
        group: RolloutGroup {
            prompt_id: task.prompts[prompt].id.clone(),
            completions,
            advantages: None,
        },
        texts,
        entropy_sum,
        token_count,
    }
}

/// A fresh uniform policy sized for the task.
pub fn initial_policy(task: &ToyTask) -> PolicyTable {
    PolicyTable::new(task.prompt_ids(), task.vocabulary.len(), task.max_len)
}

/// A policy that starts from a bigram model of the task's target corpus:
/// every (previous token → next token) transition seen in any prompt's
/// target, including the start and the end token, gets `strength` added to
/// its logit in every prompt and position. The prior is shared across
/// prompts, so it carries syntax but not which call a prompt wants.
pub fn bigram_prior_policy(task: &ToyTask, strength: f64, emit_tags: bool) -> PolicyTable {
    let mut policy = initial_policy(task);
    if strength == 0.0 {
        return policy;
    }
    let bos = policy.bos();
    let mut transitions = std::collections::BTreeSet::new();
    for p in 0..task.prompts.len() {
        let mut prev = bos;
        for id in task.target_ids(p, emit_tags) {
            transitions.insert((prev, id));
            prev = id;
        }
    }
    for prompt in 0..task.prompts.len() {
        for position in 0..task.max_len {
            for &(prev, next) in &transitions {
                if (position == 0) != (prev == bos) {
                    continue;
                }
                policy.logits_mut(StateKey { prompt, position, prev })[next] += strength;
            }
        }
    }
    policy
}

/// Sets logits so the policy emits every prompt's target with probability
/// close to 1 (`margin` on the target token, 0 elsewhere). With `emit_tags`
/// the task must carry tag tokens (see [`ToyTask::with_tag_tokens`]).
pub fn one_hot_policy(task: &ToyTask, margin: f64, emit_tags: bool) -> PolicyTable {
    let mut policy = initial_policy(task);
    for p in 0..task.prompts.len() {
        let ids = task.target_ids(p, emit_tags);
        for t in 0..ids.len() {
            let key = policy.state(p, &ids, t);
            policy.logits_mut(key)[ids[t]] = margin;
        }
    }
    policy
}

/// Trains from the bigram-prior policy. With `emit_tags_as_tokens` the tag
/// tokens are added to the vocabulary first.
pub fn train(task: &ToyTask, cfg: &SimConfig) -> Result<TrainingLog, SimError> {
    cfg.validate()?;
    let task = if cfg.emit_tags_as_tokens { task.with_tag_tokens() } else { task.clone() };
    task.validate()?;
    let policy = bigram_prior_policy(&task, cfg.prior_strength, cfg.emit_tags_as_tokens);
    train_from(&task, cfg, policy).map(|(log, _)| log)
}

/// Runs the training loop from a given policy and returns the log and the
/// final policy. The policy must be sized for `task`, and the task must
/// already carry tag tokens when `emit_tags_as_tokens` is set.
pub fn train_from(task: &ToyTask, cfg: &SimConfig, mut policy: PolicyTable) -> Result<(TrainingLog, PolicyTable), SimError> {
    cfg.validate()?;
    task.validate()?;
    if policy.vocab_size() != task.vocabulary.len() || policy.prompt_ids() != task.prompt_ids().as_slice() {
        return Err(SimError::InvalidConfig("policy does not match the task".into()));
    }
    if cfg.emit_tags_as_tokens && !task.has_tag_tokens() {
        return Err(SimError::InvalidTask("tag tokens missing from the vocabulary".into()));
    }
    let mut log = TrainingLog::default();
    for step in 0..cfg.steps {
        let weight = cfg.schedule.weight(step, &cfg.reward);
        let sampled = map_indexed(cfg.execution, task.prompts.len(), |p| {
            let mut rng = rollout_rng(cfg.seed, step, p);
            let mut r = rollout(&policy, task, p, cfg.group_size, cfg.temperature, cfg.emit_tags_as_tokens, &mut rng);
            let prompt = &task.prompts[p];
            let mut exact = 0usize;
            for (c, text) in r.group.completions.iter_mut().zip(&r.texts) {
                let parsed = parse_structured_response(text);
                let b = compute_reward_with_sigma(&parsed, &prompt.gt, &prompt.gt_text, weight, &cfg.reward)?;
                c.reward = b.final_reward;
                if strict_match(&parsed, &prompt.gt) {
                    exact += 1;
                }
            }
            r.group.compute_advantages(&cfg.grpo)?;
            Ok::<_, SimError>((r, exact))
        });
        let mut groups = Vec::with_capacity(sampled.len());
        let (mut reward_sum, mut exact_sum, mut n) = (0.0, 0usize, 0usize);
        let (mut entropy_sum, mut token_count) = (0.0, 0usize);
        for item in sampled {
            let (r, exact) = item?;
            reward_sum += r.group.completions.iter().map(|c| c.reward).sum::<f64>();
            n += r.group.completions.len();
            exact_sum += exact;
            entropy_sum += r.entropy_sum;
            token_count += r.token_count;
            groups.push(r.group);
        }
        for _ in 0..cfg.inner_updates {
            let grad = grpo_gradient_tabular(&groups, &policy, &cfg.grpo)?;
            policy.apply(&grad, cfg.grpo.learning_rate);
        }
        log.records.push(StepRecord {
            step,
            mean_reward: reward_sum / n as f64,
            exact_match_rate: exact_sum as f64 / n as f64,
            sigma: weight,
            policy_entropy: entropy_sum / token_count.max(1) as f64,
        });
    }
    Ok((log, policy))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_steps_gives_empty_log() {
        let cfg = SimConfig { steps: 0, ..Default::default() };
        assert!(train(&bundled_default(), &cfg).unwrap().records.is_empty());
    }

    #[test]
    fn config_validation() {
        let task = bundled_default();
        for bad in [
            SimConfig { group_size: 1, ..Default::default() },
            SimConfig { temperature: 0.0, ..Default::default() },
        ] {
            assert!(matches!(train(&task, &bad), Err(SimError::InvalidConfig(_))));
        }
    }

    #[test]
    fn one_hot_policy_rolls_out_target() {
        let task = bundled_sparse();
        let policy = one_hot_policy(&task, 60.0, false);
        let mut rng = rollout_rng(1, 0, 0);
        let r = rollout(&policy, &task, 0, 4, 0.8, false, &mut rng);
        let want = format!("<think></think><answer>{}</answer>", task.prompts[0].gt_text);
        assert!(r.texts.iter().all(|t| *t == want));
        assert!(r.group.completions.iter().all(|c| c.tokens == r.group.completions[0].tokens));
    }

    #[test]
    fn sequential_and_parallel_runs_agree() {
        let task = bundled_default();
        let base = SimConfig { steps: 5, ..Default::default() };
        let seq = SimConfig { execution: Execution::Sequential, ..base.clone() };
        assert_eq!(train(&task, &base).unwrap(), train(&task, &seq).unwrap());
    }

    #[test]
    fn config_json_uses_field_names() {
        let cfg: SimConfig = serde_json::from_str(r#"{"steps": 10, "schedule": "strict_only", "grpo": {"epsilon": 0.1}}"#).unwrap();
        assert_eq!(cfg.steps, 10);
        assert_eq!(cfg.schedule, Schedule::StrictOnly);
        assert_eq!(cfg.grpo.epsilon, 0.1);
        assert!(serde_json::from_str::<SimConfig>(r#"{"stepz": 1}"#).is_err());
    }

    #[test]
    fn optimum_is_stationary_under_strict_reward() {
        let task = bundled_single();
        let policy = one_hot_policy(&task, 60.0, false);
        let cfg = SimConfig { steps: 20, schedule: Schedule::StrictOnly, ..Default::default() };
        let (log, after) = train_from(&task, &cfg, policy.clone()).unwrap();
        assert!(log.records.iter().all(|r| r.mean_reward == 2.0 && r.exact_match_rate == 1.0));
        assert_eq!(after, policy);
    }

    #[test]
    fn tag_tokens_only_when_emitted() {
        let task = bundled_default();
        assert!(!task.has_tag_tokens());
        let tagged = task.with_tag_tokens();
        assert_eq!(tagged.vocabulary.len(), task.vocabulary.len() + 4);
        let cfg = SimConfig { steps: 3, emit_tags_as_tokens: true, ..Default::default() };
        assert_eq!(train(&task, &cfg).unwrap().records.len(), 3);
        assert!(matches!(train_from(&task, &cfg, initial_policy(&task)), Err(SimError::InvalidTask(_))));
        let policy = one_hot_policy(&tagged, 60.0, true);
        let mut rng = rollout_rng(3, 0, 1);
        let r = rollout(&policy, &tagged, 1, 2, 1.0, true, &mut rng);
        let want = format!("<think></think><answer>{}</answer>", tagged.prompts[1].gt_text);
        assert_eq!(r.texts[0], want);
    }

    #[test]
    fn bigram_prior_favours_corpus_transitions() {
        let task = bundled_default();
        let policy = bigram_prior_policy(&task, 2.0, false);
        let start = StateKey { prompt: 0, position: 0, prev: policy.bos() };
        let opener = task.token_id("[get_weather(").unwrap();
        let arg = task.token_id("city=\"Paris\")]").unwrap();
        assert_eq!(policy.logits(&start)[opener], 2.0);
        assert_eq!(policy.logits(&start)[arg], 0.0);
        let next = StateKey { prompt: 3, position: 4, prev: opener };
        assert_eq!(policy.logits(&next)[arg], 2.0);
        assert_eq!(policy.logits(&next)[0], 0.0);
        assert!(bigram_prior_policy(&task, 0.0, false).is_empty());
    }

    #[test]
    fn mismatched_policy_rejected() {
        let cfg = SimConfig { steps: 1, ..Default::default() };
        let other = initial_policy(&bundled_sparse());
        assert!(matches!(train_from(&bundled_default(), &cfg, other), Err(SimError::InvalidConfig(_))));
    }
}
