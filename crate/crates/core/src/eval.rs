//! Offline metrics: AST-match accuracy, function and parameter F1, and
//! toolset overlap between datasets.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::io::BufRead;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::parallel::{map_slice, Execution};
use crate::pipeline::answer_from_raw;
use crate::reward::{strict_reward, RewardConfig};
use crate::toolcall::{parse_answer, parse_structured_response, AnswerSet, StructuredResponse, ANSWER_OPEN};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("duplicate record id {0:?}")]
    DuplicateId(String),
    #[error("line {line}: {message}")]
    BadRecord { line: usize, message: String },
    #[error("toolset {0:?} is empty")]
    EmptyToolset(String),
    #[error("need at least two inventories, got {0}")]
    TooFewInventories(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalRecord {
    pub id: String,
    /// Raw model output: a tagged completion or a bare call list.
    pub prediction: String,
    pub gt: AnswerSet,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WireRecord {
    id: String,
    prediction: String,
    #[serde(default)]
    gt: Option<Box<RawValue>>,
    #[serde(default)]
    gt_text: Option<String>,
}

/// Reads `{"id", "prediction", "gt" | "gt_text"}` lines. `gt` takes the
/// sample corpus forms; `gt_text` is parsed as a call list.
pub fn read_eval_records(reader: impl BufRead) -> Result<Vec<EvalRecord>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let bad = |message: String| EvalError::BadRecord { line: i + 1, message };
        let line = line.map_err(|e| bad(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let w: WireRecord = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        let gt = match (&w.gt, &w.gt_text) {
            (Some(raw), _) => answer_from_raw(raw).map_err(bad)?,
            (None, Some(text)) => parse_answer(text).map_err(|e| bad(e.to_string()))?,
            (None, None) => return Err(bad("record needs \"gt\" or \"gt_text\"".into())),
        };
        out.push(EvalRecord {
            id: w.id,
            prediction: w.prediction,
            gt,
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Parameter instances are (call, parameter) pairs instead of
    /// (call, parameter, value) triples.
    pub param_f1_names_only: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleResult {
    pub id: String,
    pub matched: bool,
    pub value_errors: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub count: usize,
    pub ast_accuracy: f64,
    pub function_f1: f64,
    pub parameter_f1: f64,
    pub per_sample: Vec<SampleResult>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<14}{:>10}", "records", self.count);
        for (name, v) in [
            ("ast_accuracy", self.ast_accuracy),
            ("function_f1", self.function_f1),
            ("parameter_f1", self.parameter_f1),
        ] {
            let _ = writeln!(out, "{name:<14}{v:>10.4}");
        }
        out
    }
}

/// How a raw prediction is read: tagged completions go through the
/// structured parser, anything else is taken as a bare answer.
pub fn parse_prediction(raw: &str) -> StructuredResponse {
    if raw.contains(ANSWER_OPEN) {
        parse_structured_response(raw)
    } else {
        StructuredResponse::bare(raw)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Counts {
    hits: usize,
    predicted: usize,
    expected: usize,
}

impl Counts {
    fn add(self, o: Counts) -> Counts {
        Counts {
            hits: self.hits + o.hits,
            predicted: self.predicted + o.predicted,
            expected: self.expected + o.expected,
        }
    }

    /// Micro F1; two empty multisets agree perfectly.
    fn f1(self) -> f64 {
        if self.predicted == 0 && self.expected == 0 {
            return 1.0;
        }
        if self.hits == 0 {
            return 0.0;
        }
        let p = self.hits as f64 / self.predicted as f64;
        let r = self.hits as f64 / self.expected as f64;
        2.0 * p * r / (p + r)
    }
}

fn multiset_counts(pred: &[String], gt: &[String]) -> Counts {
    let mut bag: BTreeMap<&str, usize> = BTreeMap::new();
    for g in gt {
        *bag.entry(g).or_default() += 1;
    }
    let mut hits = 0;
    for p in pred {
        if let Some(n) = bag.get_mut(p.as_str()) {
            if *n > 0 {
                *n -= 1;
                hits += 1;
            }
        }
    }
    Counts {
        hits,
        predicted: pred.len(),
        expected: gt.len(),
    }
}

fn function_instances(a: &AnswerSet) -> Vec<String> {
    a.calls.iter().map(|c| c.name.clone()).collect()
}

fn parameter_instances(a: &AnswerSet, names_only: bool) -> Vec<String> {
    a.calls
        .iter()
        .flat_map(|c| {
            c.args.iter().map(move |(k, v)| {
                if names_only {
                    format!("{}\u{1f}{k}", c.name)
                } else {
                    format!("{}\u{1f}{k}\u{1f}{}", c.name, v.canonical_key())
                }
            })
        })
        .collect()
}

/// Scores every record; see [`evaluate_with`].
pub fn evaluate(records: &[EvalRecord], cfg: &EvalConfig) -> Result<EvalReport, EvalError> {
    evaluate_with(records, cfg, Execution::Sequential)
}

/// `matched` is the strict reward's AST decision, so a matched record is
/// exactly one with strict base 1. F1 scores are micro-averaged over all
/// call-name (function) and parameter instances; an unparseable prediction
/// contributes no predicted instances. An empty record list gives zeros.
pub fn evaluate_with(records: &[EvalRecord], cfg: &EvalConfig, exec: Execution) -> Result<EvalReport, EvalError> {
    let mut seen = HashSet::new();
    for r in records {
        if !seen.insert(r.id.as_str()) {
            return Err(EvalError::DuplicateId(r.id.clone()));
        }
    }
    if records.is_empty() {
        return Ok(EvalReport {
            count: 0,
            ast_accuracy: 0.0,
            function_f1: 0.0,
            parameter_f1: 0.0,
            per_sample: Vec::new(),
        });
    }
    let reward_cfg = RewardConfig::default();
    let scored = map_slice(exec, records, |r| {
        let pred = parse_prediction(&r.prediction);
        let outcome = strict_reward(&pred, &r.gt, &reward_cfg);
        let empty = AnswerSet::default();
        let parsed = pred.parsed.as_ref().unwrap_or(&empty);
        let f = multiset_counts(&function_instances(parsed), &function_instances(&r.gt));
        let p = multiset_counts(
            &parameter_instances(parsed, cfg.param_f1_names_only),
            &parameter_instances(&r.gt, cfg.param_f1_names_only),
        );
        (
            SampleResult {
                id: r.id.clone(),
                matched: outcome.matched,
                value_errors: outcome.value_errors,
            },
            f,
            p,
        )
    });
    let mut per_sample = Vec::with_capacity(scored.len());
    let (mut fc, mut pc) = (Counts::default(), Counts::default());
    for (s, f, p) in scored {
        fc = fc.add(f);
        pc = pc.add(p);
        per_sample.push(s);
    }
    let matched = per_sample.iter().filter(|s| s.matched).count();
    Ok(EvalReport {
        count: records.len(),
        ast_accuracy: matched as f64 / records.len() as f64,
        function_f1: fc.f1(),
        parameter_f1: pc.f1(),
        per_sample,
    })
}

/// `|A ∩ B| / min(|A|, |B|) × 100`.
pub fn overlap_rate(a: &BTreeSet<String>, b: &BTreeSet<String>) -> Result<f64, EvalError> {
    if a.is_empty() {
        return Err(EvalError::EmptyToolset("a".into()));
    }
    if b.is_empty() {
        return Err(EvalError::EmptyToolset("b".into()));
    }
    let common = a.intersection(b).count();
    Ok(common as f64 / a.len().min(b.len()) as f64 * 100.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OverlapMatrix {
    pub names: Vec<String>,
    /// `values[i][j]` is the overlap rate of inventories `i` and `j`.
    pub values: Vec<Vec<f64>>,
}

impl OverlapMatrix {
    /// Header `dataset,<names…>`, one row per dataset, two decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (n, row) in self.names.iter().zip(&self.values) {
            out.push_str(n);
            for v in row {
                let _ = write!(out, ",{v:.2}");
            }
            out.push('\n');
        }
        out
    }
}

/// Pairwise overlap rates, in the inventories' order.
pub fn overlap_matrix(inventories: &IndexMap<String, BTreeSet<String>>) -> Result<OverlapMatrix, EvalError> {
    if inventories.len() < 2 {
        return Err(EvalError::TooFewInventories(inventories.len()));
    }
    if let Some((name, _)) = inventories.iter().find(|(_, s)| s.is_empty()) {
        return Err(EvalError::EmptyToolset(name.clone()));
    }
    let sets: Vec<&BTreeSet<String>> = inventories.values().collect();
    let values = sets
        .iter()
        .map(|a| sets.iter().map(|b| overlap_rate(a, b)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(OverlapMatrix {
        names: inventories.keys().cloned().collect(),
        values,
    })
}
