//! Corpus preparation: validity filtering, name masking, multi-turn
//! augmentation and per-stage statistics.
//!
//! Samples travel as JSONL, one object per line:
//!
//! ```text
//! {"id": "x1", "schemas": [...], "turns": [{"role": "user", "content": "..."}],
//!  "gt": [{"name": "f", "arguments": {"a": 1}}], "gt_text": "[f(a=1)]",
//!  "source": "xlam", "multi_turn": false}
//! ```
//!
//! `gt` is either a JSON call array or `{"direct_response": "..."}`; it may be
//! omitted on input, in which case it is derived from `gt_text`. Assistant
//! turns may carry `calls` in the same array form (a bracketed call string is
//! accepted on input). Augmented samples also carry `provenance`.

mod augment;
mod filter;
mod mask;
mod stats;

use std::io::BufRead;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::toolcall::{
    parse_answer, parse_json_calls, parse_tool_schemas, print_json_calls, schemas_to_json, AnswerSet, ToolSchema,
};

pub use augment::{augment_multi_turn, AugmentReport, Strategy, STRATEGIES};
pub use filter::{filter_corpus, filter_records, FilterReport};
pub use mask::{is_masked_name, mask_answer, mask_sample, unmask_sample, MaskError, MaskMapping};
pub use stats::{corpus_stats, StatsRow, StatsTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    User,
    Assistant,
    Tool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    #[serde(rename = "toolace")]
    ToolAce,
    Xlam,
    Synthetic,
}

impl Source {
    pub const ALL: [Source; 3] = [Source::ToolAce, Source::Xlam, Source::Synthetic];

    pub fn as_str(self) -> &'static str {
        match self {
            Source::ToolAce => "toolace",
            Source::Xlam => "xlam",
            Source::Synthetic => "synthetic",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Turn {
    pub role: Role,
    pub content: String,
    /// Calls made by an assistant turn.
    pub calls: Option<AnswerSet>,
    /// Tool output, for tool turns.
    pub observation: Option<String>,
}

impl Turn {
    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: Role::User,
            content: content.into(),
            calls: None,
            observation: None,
        }
    }

    pub fn assistant(content: impl Into<String>, calls: Option<AnswerSet>) -> Self {
        Self {
            role: Role::Assistant,
            content: content.into(),
            calls,
            observation: None,
        }
    }

    pub fn tool(observation: impl Into<String>) -> Self {
        Self {
            role: Role::Tool,
            content: String::new(),
            calls: None,
            observation: Some(observation.into()),
        }
    }
}

/// Where an augmented sample came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub strategy: Strategy,
    pub parents: Vec<String>,
    pub seed: u64,
    /// Set when `combine` paired samples without a shared tool.
    #[serde(default)]
    pub fallback: bool,
    /// Strategy-specific note, e.g. the corruption applied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub id: String,
    pub schemas: Vec<ToolSchema>,
    pub turns: Vec<Turn>,
    pub gt: AnswerSet,
    pub gt_text: String,
    pub source: Source,
    pub multi_turn: bool,
    pub provenance: Option<Provenance>,
}

impl Sample {
    /// The schema with the given function name.
    pub fn schema(&self, name: &str) -> Option<&ToolSchema> {
        self.schemas.iter().find(|s| s.name == name)
    }

    pub fn to_json(&self) -> String {
        let wire = WireSample {
            id: self.id.clone(),
            schemas: raw(schemas_to_json(&self.schemas)),
            turns: self
                .turns
                .iter()
                .map(|t| WireTurn {
                    role: t.role,
                    content: t.content.clone(),
                    calls: t.calls.as_ref().map(answer_to_raw),
                    observation: t.observation.clone(),
                })
                .collect(),
            gt: Some(answer_to_raw(&self.gt)),
            gt_text: self.gt_text.clone(),
            source: self.source,
            multi_turn: self.multi_turn,
            provenance: self.provenance.clone(),
        };
        serde_json::to_string(&wire).expect("sample serializes")
    }

    /// Parses one JSONL line.
    pub fn from_json(line: &str) -> Result<Self, RecordError> {
        let wire: WireSample = serde_json::from_str(line).map_err(|e| RecordError::Malformed(e.to_string()))?;
        wire.into_sample()
    }
}

/// Why a record could not be turned into a [`Sample`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RecordError {
    #[error("malformed record: {0}")]
    Malformed(String),
    #[error("invalid tool call: {0}")]
    BadCall(String),
    #[error("invalid schemas: {0}")]
    BadSchema(String),
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {error}")]
    Record { line: usize, error: RecordError },
}

/// Reads a JSONL corpus; blank lines are skipped, any invalid record is an
/// error.
pub fn read_samples(reader: impl BufRead) -> Result<Vec<Sample>, PipelineError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(Sample::from_json(&line).map_err(|error| PipelineError::Record { line: i + 1, error })?);
    }
    Ok(out)
}

pub fn samples_to_jsonl(samples: &[Sample]) -> String {
    let mut out = String::new();
    for s in samples {
        out.push_str(&s.to_json());
        out.push('\n');
    }
    out
}

fn raw(text: String) -> Box<RawValue> {
    RawValue::from_string(text).expect("printer emits valid JSON")
}

fn answer_to_raw(answer: &AnswerSet) -> Box<RawValue> {
    match &answer.direct_response {
        Some(text) => raw(serde_json::json!({ "direct_response": text }).to_string()),
        None => raw(print_json_calls(answer)),
    }
}

/// Reads a `gt`/`calls` field: a JSON call array or object, a bracketed call
/// string, or `{"direct_response": …}`.
pub(crate) fn answer_from_raw(value: &RawValue) -> Result<AnswerSet, String> {
    let text = value.get().trim_start();
    if text.starts_with('"') {
        let s: String = serde_json::from_str(text).map_err(|e| e.to_string())?;
        return parse_answer(&s).map_err(|e| e.to_string());
    }
    if text.starts_with('{') {
        if let Ok(direct) = serde_json::from_str::<DirectResponse>(text) {
            return Ok(AnswerSet::direct(direct.direct_response));
        }
    }
    parse_json_calls(text).map_err(|e| e.to_string())
}

fn schemas_from_raw(value: &RawValue) -> Result<Vec<ToolSchema>, String> {
    let text = value.get().trim_start();
    let parsed = if text.starts_with('"') {
        let s: String = serde_json::from_str(text).map_err(|e| e.to_string())?;
        parse_tool_schemas(&s)
    } else {
        parse_tool_schemas(text)
    };
    parsed.map_err(|e| e.to_string())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DirectResponse {
    direct_response: String,
}

#[derive(Serialize, Deserialize)]
struct WireTurn {
    role: Role,
    #[serde(default)]
    content: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    calls: Option<Box<RawValue>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    observation: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct WireSample {
    id: String,
    schemas: Box<RawValue>,
    turns: Vec<WireTurn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gt: Option<Box<RawValue>>,
    gt_text: String,
    source: Source,
    #[serde(default)]
    multi_turn: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
}

impl WireSample {
    fn into_sample(self) -> Result<Sample, RecordError> {
        if !self.turns.iter().any(|t| t.role == Role::User) {
            return Err(RecordError::Malformed("no user turn".into()));
        }
        let mut turns = Vec::with_capacity(self.turns.len());
        for (i, t) in self.turns.into_iter().enumerate() {
            if t.role == Role::Tool && t.observation.is_none() {
                return Err(RecordError::Malformed(format!("tool turn {i} has no observation")));
            }
            if t.role != Role::Assistant && t.calls.is_some() {
                return Err(RecordError::Malformed(format!("turn {i}: only assistant turns carry calls")));
            }
            let calls = match t.calls {
                Some(raw) => Some(answer_from_raw(&raw).map_err(|e| RecordError::BadCall(format!("turn {i}: {e}")))?),
                None => None,
            };
            turns.push(Turn {
                role: t.role,
                content: t.content,
                calls,
                observation: t.observation,
            });
        }
        let gt = match &self.gt {
            Some(raw) => answer_from_raw(raw).map_err(|e| RecordError::BadCall(format!("gt: {e}")))?,
            None => parse_answer(&self.gt_text).map_err(|e| RecordError::BadCall(format!("gt_text: {e}")))?,
        };
        gt.validate().map_err(RecordError::BadCall)?;
        match &gt.direct_response {
            Some(text) => {
                if text.trim().is_empty() || *text != self.gt_text {
                    return Err(RecordError::BadCall("direct response must be non-empty and equal gt_text".into()));
                }
            }
            None => {
                let from_text = parse_answer(&self.gt_text).map_err(|e| RecordError::BadCall(format!("gt_text: {e}")))?;
                if !crate::reward::ast_equal(&from_text, &gt) {
                    return Err(RecordError::BadCall("gt does not match gt_text".into()));
                }
            }
        }
        let schemas = schemas_from_raw(&self.schemas).map_err(RecordError::BadSchema)?;
        Ok(Sample {
            id: self.id,
            schemas,
            turns,
            gt,
            gt_text: self.gt_text,
            source: self.source,
            multi_turn: self.multi_turn,
            provenance: self.provenance,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE: &str = r#"{"id":"a","schemas":[{"name":"f","description":"d","parameters":{"x":{"type":"int"}}}],"turns":[{"role":"user","content":"hi"}],"gt_text":"[f(x=1.50)]","source":"xlam"}"#;

    #[test]
    fn json_round_trip() {
        let s = Sample::from_json(LINE).unwrap();
        assert_eq!(s.gt.calls[0].name, "f");
        assert!(!s.multi_turn);
        let line = s.to_json();
        assert!(line.contains(r#""gt":[{"name": "f", "arguments": {"x": 1.50}}]"#), "{line}");
        let back = Sample::from_json(&line).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_json(), line);
    }

    #[test]
    fn schemas_as_string_and_direct_gt() {
        let line = r#"{"id":"b","schemas":"[{\"name\": \"f\", \"parameters\": {}}]","turns":[{"role":"user","content":"hi"}],"gt":{"direct_response":"No tool fits."},"gt_text":"No tool fits.","source":"synthetic"}"#;
        let s = Sample::from_json(line).unwrap();
        assert_eq!(s.schemas[0].name, "f");
        assert_eq!(s.gt.direct_response.as_deref(), Some("No tool fits."));
        assert_eq!(Sample::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn record_errors_are_classified() {
        let bad_call = LINE.replace("[f(x=1.50)]", "f(a=");
        assert!(matches!(Sample::from_json(&bad_call), Err(RecordError::BadCall(_))));
        let bad_schema = LINE.replace(r#""schemas":[{"#, r#""schemas":[{"name":1,"#);
        assert!(matches!(Sample::from_json(&bad_schema), Err(RecordError::BadSchema(_))));
        assert!(matches!(Sample::from_json("[1]"), Err(RecordError::Malformed(_))));
        let no_user = LINE.replace(r#""role":"user""#, r#""role":"assistant""#);
        assert!(matches!(Sample::from_json(&no_user), Err(RecordError::Malformed(_))));
        let mismatch = LINE.replace(r#""gt_text""#, r#""gt":[{"name":"g","arguments":{}}],"gt_text""#);
        assert!(matches!(Sample::from_json(&mismatch), Err(RecordError::BadCall(_))));
    }

    #[test]
    fn turn_calls_accept_both_forms() {
        let line = LINE.replace(
            r#"{"role":"user","content":"hi"}"#,
            r#"{"role":"user","content":"hi"},{"role":"assistant","calls":"[f(x=2)]"},{"role":"tool","observation":"ok"},{"role":"user","content":"again"}"#,
        );
        let s = Sample::from_json(&line).unwrap();
        assert_eq!(s.turns[1].calls.as_ref().unwrap().calls[0].name, "f");
        assert_eq!(Sample::from_json(&s.to_json()).unwrap(), s);
    }
}
