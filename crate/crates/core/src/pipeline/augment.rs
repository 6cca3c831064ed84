use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::toolcall::{schemas_to_json, AnswerSet, Value};

use super::{Provenance, Role, Sample, Source, Turn};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Concatenate two single-turn dialogues that share a tool.
    Combine,
    /// Ask for a tool that is not offered yet, then offer it.
    ToolRemoval,
    /// Withhold a required argument until the assistant asks for it.
    ParamClarification,
    /// Show a wrong call, challenge it, expect the correct one.
    ResultValidation,
}

pub const STRATEGIES: [Strategy; 4] = [
    Strategy::Combine,
    Strategy::ToolRemoval,
    Strategy::ParamClarification,
    Strategy::ResultValidation,
];

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Combine => "combine",
            Strategy::ToolRemoval => "tool_removal",
            Strategy::ParamClarification => "param_clarification",
            Strategy::ResultValidation => "result_validation",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        STRATEGIES
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| format!("unknown strategy {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentReport {
    pub strategy: Strategy,
    pub input: usize,
    pub produced: usize,
    /// Samples the strategy could not use: multi-turn inputs, inputs failing
    /// the strategy's preconditions, and an unpaired leftover for `combine`.
    pub skipped: usize,
    /// `combine` pairs made without a shared tool.
    pub fallback_pairs: usize,
}

/// Derives multi-turn samples from the single-turn samples of `corpus`.
///
/// Only the new samples are returned. The same corpus and seed always give
/// the same output.
pub fn augment_multi_turn(corpus: &[Sample], strategy: Strategy, seed: u64) -> (Vec<Sample>, AugmentReport) {
    let mut report = AugmentReport {
        strategy,
        input: corpus.len(),
        produced: 0,
        skipped: 0,
        fallback_pairs: 0,
    };
    let singles: Vec<usize> = (0..corpus.len()).filter(|&i| !corpus[i].multi_turn).collect();
    report.skipped += corpus.len() - singles.len();
    let out = match strategy {
        Strategy::Combine => {
            let (out, fallback, leftover) = combine(corpus, &singles, seed);
            report.fallback_pairs = fallback;
            report.skipped += leftover;
            out
        }
        _ => {
            let vocab = string_vocabulary(corpus);
            let mut out = Vec::new();
            for &i in &singles {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64 + 1);
                let s = &corpus[i];
                let made = match strategy {
                    Strategy::ToolRemoval => tool_removal(s, seed),
                    Strategy::ParamClarification => param_clarification(s, seed, &mut rng),
                    Strategy::ResultValidation => result_validation(s, seed, &vocab, &mut rng),
                    Strategy::Combine => unreachable!(),
                };
                match made {
                    Some(sample) => out.push(sample),
                    None => report.skipped += 1,
                }
            }
            out
        }
    };
    report.produced = out.len();
    (out, report)
}

fn provenance(strategy: Strategy, parents: &[&Sample], seed: u64, detail: Option<String>) -> Provenance {
    Provenance {
        strategy,
        parents: parents.iter().map(|s| s.id.clone()).collect(),
        seed,
        fallback: false,
        detail,
    }
}

fn derived(s: &Sample, strategy: Strategy, turns: Vec<Turn>, seed: u64, detail: Option<String>) -> Sample {
    Sample {
        id: format!("{}#{}", s.id, strategy),
        schemas: s.schemas.clone(),
        turns,
        gt: s.gt.clone(),
        gt_text: s.gt_text.clone(),
        source: s.source,
        multi_turn: true,
        provenance: Some(provenance(strategy, &[s], seed, detail)),
    }
}

fn shares_tool(a: &Sample, b: &Sample) -> bool {
    a.schemas.iter().any(|x| b.schemas.iter().any(|y| x.name == y.name))
}

/// Returns (samples, fallback pairs, unpaired leftovers).
fn combine(corpus: &[Sample], singles: &[usize], seed: u64) -> (Vec<Sample>, usize, usize) {
    let mut order = singles.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut paired = vec![false; order.len()];
    let mut pairs = Vec::new();
    for i in 0..order.len() {
        if paired[i] {
            continue;
        }
        let partner = (i + 1..order.len()).find(|&j| !paired[j] && shares_tool(&corpus[order[i]], &corpus[order[j]]));
        if let Some(j) = partner {
            paired[i] = true;
            paired[j] = true;
            pairs.push((order[i], order[j], false));
        }
    }
    let rest: Vec<usize> = (0..order.len()).filter(|&i| !paired[i]).map(|i| order[i]).collect();
    for chunk in rest.chunks_exact(2) {
        pairs.push((chunk[0], chunk[1], true));
    }
    let fallback = pairs.iter().filter(|p| p.2).count();
    let out = pairs
        .into_iter()
        .map(|(a, b, fallback)| combine_pair(&corpus[a], &corpus[b], seed, fallback))
        .collect();
    (out, fallback, rest.len() % 2)
}

fn answer_turn(answer: &AnswerSet) -> Turn {
    match &answer.direct_response {
        Some(text) => Turn::assistant(text.clone(), None),
        None => Turn::assistant("", Some(answer.clone())),
    }
}

fn combine_pair(a: &Sample, b: &Sample, seed: u64, fallback: bool) -> Sample {
    let mut schemas = a.schemas.clone();
    for s in &b.schemas {
        if !schemas.iter().any(|x| x.name == s.name) {
            schemas.push(s.clone());
        }
    }
    let mut turns = a.turns.clone();
    turns.push(answer_turn(&a.gt));
    turns.extend(b.turns.iter().cloned());
    let mut prov = provenance(Strategy::Combine, &[a, b], seed, None);
    prov.fallback = fallback;
    Sample {
        id: format!("{}+{}#combine", a.id, b.id),
        schemas,
        turns,
        gt: b.gt.clone(),
        gt_text: b.gt_text.clone(),
        source: if a.source == b.source { a.source } else { Source::Synthetic },
        multi_turn: true,
        provenance: Some(prov),
    }
}

/// Names of the ground-truth calls, first occurrence order.
fn called_names(s: &Sample) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for c in &s.gt.calls {
        if !names.contains(&c.name) {
            names.push(c.name.clone());
        }
    }
    names
}

/// The sample's `schemas` remain the full list offered in the final turn;
/// the first turn's list lacks the called tools, which the provenance detail
/// records.
fn tool_removal(s: &Sample, seed: u64) -> Option<Sample> {
    if s.gt.is_direct() || s.gt.calls.is_empty() {
        return None;
    }
    let names = called_names(s);
    let removed: Vec<_> = names.iter().map(|n| s.schema(n).cloned()).collect::<Option<_>>()?;
    let listed = names.join(", ");
    let mut turns = s.turns.clone();
    turns.push(Turn::assistant(
        format!("None of the available tools can do this; {listed} is not in the tool list."),
        None,
    ));
    turns.push(Turn::user(format!(
        "These tools are available now: {}. Please try again.",
        schemas_to_json(&removed)
    )));
    Some(derived(s, Strategy::ToolRemoval, turns, seed, Some(format!("removed: {listed}"))))
}

/// Text by which a value is mentioned in free text, if it has one.
fn mention(value: &Value) -> Option<String> {
    match value {
        Value::String(s) if !s.trim().is_empty() => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn last_user_turn(turns: &[Turn]) -> Option<usize> {
    turns.iter().rposition(|t| t.role == Role::User)
}

fn param_clarification(s: &Sample, seed: u64, rng: &mut ChaCha8Rng) -> Option<Sample> {
    let user = last_user_turn(&s.turns)?;
    let content = &s.turns[user].content;
    let mut candidates = Vec::new();
    for call in &s.gt.calls {
        let Some(schema) = s.schema(&call.name) else { continue };
        for (param, value) in &call.args {
            let required = schema.parameters.get(param).is_some_and(|p| p.required);
            match mention(value) {
                Some(m) if required && content.contains(&m) => candidates.push((call.name.clone(), param.clone(), m)),
                _ => {}
            }
        }
    }
    let (function, param, m) = candidates.choose(rng)?.clone();
    let blanked = content.replacen(&m, "", 1).split_whitespace().collect::<Vec<_>>().join(" ");
    let mut turns = s.turns.clone();
    turns[user].content = blanked;
    turns.push(Turn::assistant(format!("Which {param} should I use for {function}?"), None));
    turns.push(Turn::user(format!("The {param} is {m}.")));
    Some(derived(s, Strategy::ParamClarification, turns, seed, Some(format!("{function}.{param}"))))
}

/// Whitespace-separated tokens of every string argument in the corpus.
fn string_vocabulary(corpus: &[Sample]) -> Vec<String> {
    fn collect(v: &Value, out: &mut BTreeSet<String>) {
        match v {
            Value::String(s) => out.extend(s.split_whitespace().map(str::to_string)),
            Value::List(items) => items.iter().for_each(|x| collect(x, out)),
            Value::Map(m) => m.values().for_each(|x| collect(x, out)),
            _ => {}
        }
    }
    let mut out = BTreeSet::new();
    for s in corpus {
        for c in &s.gt.calls {
            c.args.values().for_each(|v| collect(v, &mut out));
        }
    }
    out.into_iter().collect()
}

/// A different value of the same type, or `None` when none can be made.
fn mutate(value: &Value, vocab: &[String], rng: &mut ChaCha8Rng) -> Option<Value> {
    match value {
        Value::Bool(b) => Some(Value::Bool(!b)),
        Value::Number(n) => {
            let mut options = vec![n.add_integer(1), n.add_integer(-1)];
            if !n.is_zero() {
                options.push(n.doubled());
            }
            options.choose(rng).cloned().map(Value::Number)
        }
        Value::String(s) => {
            let tokens: Vec<&str> = s.split_whitespace().collect();
            if tokens.is_empty() {
                return None;
            }
            let at = rng.gen_range(0..tokens.len());
            let choices: Vec<&String> = vocab.iter().filter(|v| v.as_str() != tokens[at]).collect();
            let pick = choices.choose(rng)?;
            let mut out: Vec<&str> = tokens.clone();
            out[at] = pick;
            Some(Value::String(out.join(" ")))
        }
        _ => None,
    }
}

fn is_mutable(value: &Value, vocab: &[String]) -> bool {
    match value {
        Value::Bool(_) | Value::Number(_) => true,
        Value::String(s) => s.split_whitespace().any(|t| vocab.iter().any(|v| v != t)),
        _ => false,
    }
}

fn result_validation(s: &Sample, seed: u64, vocab: &[String], rng: &mut ChaCha8Rng) -> Option<Sample> {
    if s.gt.is_direct() || s.gt.calls.is_empty() {
        return None;
    }
    let args: Vec<(usize, String)> = s
        .gt
        .calls
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.args.keys().map(move |k| (i, k.clone())))
        .collect();
    let mutable: Vec<&(usize, String)> = args
        .iter()
        .filter(|(i, k)| is_mutable(&s.gt.calls[*i].args[k.as_str()], vocab))
        .collect();
    let mut kinds = Vec::new();
    if s.gt.calls.len() >= 2 {
        kinds.push("drop_call");
    }
    if !args.is_empty() {
        kinds.push("delete_param");
    }
    if !mutable.is_empty() {
        kinds.push("alter_value");
    }
    let kind = *kinds.choose(rng)?;
    let mut wrong = s.gt.clone();
    let detail = match kind {
        "drop_call" => {
            let i = rng.gen_range(0..wrong.calls.len());
            let name = wrong.calls.remove(i).name;
            format!("drop_call:{name}")
        }
        "delete_param" => {
            let (i, k) = args.choose(rng)?;
            wrong.calls[*i].args.shift_remove(k);
            format!("delete_param:{}.{k}", wrong.calls[*i].name)
        }
        _ => {
            let (i, k) = *mutable.choose(rng)?;
            let new = mutate(&wrong.calls[*i].args[k.as_str()], vocab, rng)?;
            wrong.calls[*i].args.insert(k.clone(), new);
            format!("alter_value:{}.{k}", wrong.calls[*i].name)
        }
    };
    let mut turns = s.turns.clone();
    turns.push(Turn::assistant("", Some(wrong)));
    turns.push(Turn::user("That call doesn't look right. Please check it and try again."));
    Some(derived(s, Strategy::ResultValidation, turns, seed, Some(detail)))
}
