use serde::{Deserialize, Serialize};

use crate::toolcall::{parse_answer, parse_tool_schemas, print_value, schemas_to_json, AnswerSet, ToolSchema};
use crate::toolcall::{ANSWER_CLOSE, ANSWER_OPEN, THINK_CLOSE, THINK_OPEN};

use super::SimError;

pub const EOS: &str = "<eos>";
pub const MAX_VOCAB: usize = 64;
pub const MAX_PROMPTS: usize = 32;

#[derive(Clone, Debug)]
pub struct ToyPrompt {
    pub id: String,
    pub schemas: Vec<ToolSchema>,
    pub gt: AnswerSet,
    pub gt_text: String,
}

/// How a target answer is cut into tokens.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    /// Brackets, parentheses, separators, names and values are separate
    /// tokens.
    #[default]
    Fine,
    /// One token per call opener (`[f(`) and per argument, with separators
    /// and closing brackets attached (`a=1`, `, b=2)]`). A call without
    /// arguments is a single token (`[f()]`).
    Chunked,
}

/// Prompts plus the token vocabulary the tabular policy emits.
///
/// Token 0 is always the end-of-sequence token.
#[derive(Clone, Debug)]
pub struct ToyTask {
    pub prompts: Vec<ToyPrompt>,
    pub vocabulary: Vec<String>,
    pub max_len: usize,
    pub granularity: Granularity,
}

/// Splits an answer into the token pieces the simulator emits. Concatenating
/// the pieces yields the canonical call expression.
pub fn answer_pieces(answer: &AnswerSet, granularity: Granularity) -> Vec<String> {
    match granularity {
        Granularity::Fine => fine_pieces(answer),
        Granularity::Chunked => chunked_pieces(answer),
    }
}

fn chunked_pieces(answer: &AnswerSet) -> Vec<String> {
    let mut out = Vec::new();
    let last = answer.calls.len().saturating_sub(1);
    for (i, call) in answer.calls.iter().enumerate() {
        let lead = if i == 0 { "[" } else { ", " };
        let close = if i == last { ")]" } else { ")" };
        let mut piece = format!("{lead}{}(", call.name);
        for (j, (name, value)) in call.args.iter().enumerate() {
            if j > 0 {
                out.push(std::mem::take(&mut piece));
                piece.push_str(", ");
            } else if !piece.is_empty() {
                out.push(std::mem::take(&mut piece));
            }
            piece.push_str(&format!("{name}={}", print_value(value)));
        }
        piece.push_str(close);
        out.push(piece);
    }
    if out.is_empty() {
        out.push("[]".into());
    }
    out
}

fn fine_pieces(answer: &AnswerSet) -> Vec<String> {
    let mut out = vec!["[".to_string()];
    for (i, call) in answer.calls.iter().enumerate() {
        if i > 0 {
            out.push(", ".into());
        }
        out.push(call.name.clone());
        out.push("(".into());
        for (j, (name, value)) in call.args.iter().enumerate() {
            if j > 0 {
                out.push(", ".into());
            }
            out.push(format!("{name}="));
            out.push(print_value(value));
        }
        out.push(")".into());
    }
    out.push("]".into());
    out
}

fn tag_pieces() -> [&'static str; 4] {
    [THINK_OPEN, THINK_CLOSE, ANSWER_OPEN, ANSWER_CLOSE]
}

/// Target token pieces for a prompt, without the end token.
pub fn target_pieces(gt: &AnswerSet, granularity: Granularity, with_tags: bool) -> Vec<String> {
    let mut pieces = answer_pieces(gt, granularity);
    if with_tags {
        let [to, tc, ao, ac] = tag_pieces();
        let mut tagged = vec![to.to_string(), tc.to_string(), ao.to_string()];
        tagged.append(&mut pieces);
        tagged.push(ac.to_string());
        pieces = tagged;
    }
    pieces
}

/// On-disk task description.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskFile {
    pub prompts: Vec<TaskFilePrompt>,
    /// Extra tokens that never appear in a target.
    #[serde(default)]
    pub distractors: Vec<String>,
    /// Explicit vocabulary; derived from the targets when absent.
    #[serde(default)]
    pub vocabulary: Option<Vec<String>>,
    #[serde(default)]
    pub max_len: Option<usize>,
    #[serde(default)]
    pub granularity: Granularity,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskFilePrompt {
    pub id: String,
    #[serde(default)]
    pub schemas: Option<serde_json::Value>,
    pub gt_text: String,
}

impl ToyTask {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let file: TaskFile = serde_json::from_str(text).map_err(|e| SimError::InvalidTask(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn from_file(file: TaskFile) -> Result<Self, SimError> {
        let mut prompts = Vec::new();
        for p in file.prompts {
            let schemas = match p.schemas {
                Some(v) => parse_tool_schemas(&v.to_string()).map_err(|e| SimError::InvalidTask(format!("{}: {e}", p.id)))?,
                None => Vec::new(),
            };
            let gt = parse_answer(&p.gt_text).map_err(|e| SimError::InvalidTask(format!("{}: {e}", p.id)))?;
            prompts.push(ToyPrompt {
                id: p.id,
                schemas,
                gt,
                gt_text: p.gt_text,
            });
        }
        Self::build(prompts, file.granularity, file.vocabulary, &file.distractors, file.max_len)
    }

    /// Assembles a task, deriving the vocabulary from the targets when none is
    /// given.
    pub fn build(
        prompts: Vec<ToyPrompt>,
        granularity: Granularity,
        vocabulary: Option<Vec<String>>,
        distractors: &[String],
        max_len: Option<usize>,
    ) -> Result<Self, SimError> {
        let mut vocab: Vec<String> = vec![EOS.to_string()];
        let push = |tok: &str, vocab: &mut Vec<String>| {
            if !vocab.iter().any(|v| v == tok) {
                vocab.push(tok.to_string());
            }
        };
        match vocabulary {
            Some(explicit) => {
                for t in &explicit {
                    push(t, &mut vocab);
                }
            }
            None => {
                for p in &prompts {
                    for piece in answer_pieces(&p.gt, granularity) {
                        push(&piece, &mut vocab);
                    }
                }
            }
        }
        for d in distractors {
            push(d, &mut vocab);
        }
        let longest = prompts
            .iter()
            .map(|p| target_pieces(&p.gt, granularity, true).len())
            .max()
            .unwrap_or(0);
        let task = ToyTask {
            max_len: max_len.unwrap_or(longest + 1),
            prompts,
            vocabulary: vocab,
            granularity,
        };
        task.validate()?;
        Ok(task)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.prompts.is_empty() {
            return Err(SimError::InvalidTask("task has no prompts".into()));
        }
        if self.prompts.len() > MAX_PROMPTS {
            return Err(SimError::InvalidTask(format!("more than {MAX_PROMPTS} prompts")));
        }
        if self.vocabulary.len() > MAX_VOCAB {
            return Err(SimError::InvalidTask(format!(
                "vocabulary has {} tokens, limit is {MAX_VOCAB}",
                self.vocabulary.len()
            )));
        }
        if self.vocabulary.first().map(String::as_str) != Some(EOS) {
            return Err(SimError::InvalidTask("token 0 must be the end token".into()));
        }
        for p in &self.prompts {
            if p.gt.calls.is_empty() {
                return Err(SimError::InvalidTask(format!("{}: target must contain a call", p.id)));
            }
            if let Some(missing) = answer_pieces(&p.gt, self.granularity).into_iter().find(|piece| self.token_id(piece).is_none()) {
                return Err(SimError::InvalidTask(format!("{}: token {missing:?} missing from vocabulary", p.id)));
            }
            if target_pieces(&p.gt, self.granularity, false).len() + 1 > self.max_len {
                return Err(SimError::InvalidTask(format!("{}: target longer than max_len", p.id)));
            }
        }
        Ok(())
    }

    /// The same task with the think/answer tags added to the vocabulary.
    pub fn with_tag_tokens(&self) -> ToyTask {
        let mut task = self.clone();
        for t in tag_pieces() {
            if task.token_id(t).is_none() {
                task.vocabulary.push(t.to_string());
            }
        }
        task
    }

    pub fn has_tag_tokens(&self) -> bool {
        tag_pieces().iter().all(|t| self.token_id(t).is_some())
    }

    pub fn token_id(&self, piece: &str) -> Option<usize> {
        self.vocabulary.iter().position(|v| v == piece)
    }

    /// Target token ids including the trailing end token.
    pub fn target_ids(&self, prompt: usize, with_tags: bool) -> Vec<usize> {
        let mut ids: Vec<usize> = target_pieces(&self.prompts[prompt].gt, self.granularity, with_tags)
            .iter()
            .map(|p| self.token_id(p).expect("validated vocabulary"))
            .collect();
        ids.push(0);
        ids
    }

    /// Concatenates token strings, stopping at the end token.
    pub fn detokenize(&self, tokens: &[usize]) -> String {
        tokens
            .iter()
            .take_while(|t| **t != 0)
            .map(|t| self.vocabulary[*t].as_str())
            .collect()
    }

    pub fn prompt_ids(&self) -> Vec<String> {
        self.prompts.iter().map(|p| p.id.clone()).collect()
    }

    pub fn to_file(&self) -> TaskFile {
        TaskFile {
            prompts: self
                .prompts
                .iter()
                .map(|p| TaskFilePrompt {
                    id: p.id.clone(),
                    schemas: serde_json::from_str(&schemas_to_json(&p.schemas)).ok(),
                    gt_text: p.gt_text.clone(),
                })
                .collect(),
            distractors: Vec::new(),
            vocabulary: Some(self.vocabulary[1..].to_vec()),
            max_len: Some(self.max_len),
            granularity: self.granularity,
        }
    }
}

fn prompt(id: &str, schemas: &str, gt_text: &str) -> ToyPrompt {
    ToyPrompt {
        id: id.into(),
        schemas: parse_tool_schemas(schemas).expect("bundled schema"),
        gt: parse_answer(gt_text).expect("bundled target"),
        gt_text: gt_text.into(),
    }
}

const WEATHER: &str = r#"[{"name":"get_weather","description":"Current weather for a city","parameters":{"city":{"type":"string","required":true},"unit":{"type":"string","required":false}}}]"#;
const TIME: &str = r#"[{"name":"get_time","description":"Local time in a timezone","parameters":{"tz":{"type":"string","required":true}}}]"#;
const SEARCH: &str = r#"[{"name":"search","description":"Web search","parameters":{"query":{"type":"string","required":true},"limit":{"type":"integer","required":false}}}]"#;
const CONVERT: &str = r#"[{"name":"convert","description":"Currency conversion","parameters":{"amount":{"type":"float","required":true},"to":{"type":"string","required":true}}}]"#;

/// Four short single-call prompts.
pub fn bundled_default() -> ToyTask {
    let prompts = vec![
        prompt("weather", WEATHER, r#"[get_weather(city="Paris")]"#),
        prompt("time", TIME, r#"[get_time(tz="UTC")]"#),
        prompt("search", SEARCH, r#"[search(query="rust")]"#),
        prompt("convert", CONVERT, r#"[convert(amount=10)]"#),
    ];
    let distractors: Vec<String> = ["city=\"London\")]", "tz=\"EST\")]", "[get_city(", "city=\"Paris\""].iter().map(|s| s.to_string()).collect();
    ToyTask::build(prompts, Granularity::Chunked, None, &distractors, None).expect("bundled task is valid")
}

/// Long targets (at least 8 tokens, up to two calls) where random exact
/// matches are practically impossible.
pub fn bundled_sparse() -> ToyTask {
    let mut schemas = String::from(WEATHER);
    schemas.pop();
    schemas.push(',');
    schemas.push_str(&TIME[1..]);
    let prompts = vec![
        prompt("weather_unit", WEATHER, r#"[get_weather(city="Paris", unit="C")]"#),
        prompt("search_limit", SEARCH, r#"[search(query="rust", limit=5)]"#),
        prompt("convert_to", CONVERT, r#"[convert(amount=10, to="EUR")]"#),
        prompt("weather_time", &schemas, r#"[get_weather(city="Tokyo"), get_time(tz="JST")]"#),
    ];
    let distractors: Vec<String> = ["\"London\"", "\"USD\"", "3"].iter().map(|s| s.to_string()).collect();
    ToyTask::build(prompts, Granularity::Fine, None, &distractors, None).expect("bundled task is valid")
}

/// One prompt with one single-argument call.
pub fn bundled_single() -> ToyTask {
    let prompts = vec![prompt("weather", WEATHER, r#"[get_weather(city="Paris")]"#)];
    ToyTask::build(prompts, Granularity::Chunked, None, &[], None).expect("bundled task is valid")
}

/// Looks up a bundled task by name: `default`, `sparse` or `single`.
pub fn bundled(name: &str) -> Option<ToyTask> {
    match name {
        "default" => Some(bundled_default()),
        "single" => Some(bundled_single()),
        "sparse" => Some(bundled_sparse()),
        _ => None,
    }
}
