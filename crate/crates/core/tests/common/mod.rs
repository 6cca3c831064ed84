//! Seeded generators shared by the integration test targets.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use callreward::pipeline::{Sample, Source, Turn};
use callreward::toolcall::{AnswerSet, Number, ParamSpec, ToolCall, ToolSchema, Value};
use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub const FUNCTIONS: [&str; 8] = ["get_weather", "search", "convert", "book_hotel", "send_mail", "f", "g", "lookup"];
pub const WORDS: [&str; 10] = ["Paris", "London", "blue", "rust lang", "a b c", "x", "", "42nd street", "ok?", "C"];

/// Parameter names are unique per function so masking never merges tokens.
pub fn param_pool(function: &str) -> Vec<String> {
    let stem: String = function.chars().filter(|c| c.is_ascii_alphabetic()).take(3).collect();
    ["id", "key", "mode", "count", "flag"].iter().map(|p| format!("{stem}_{p}")).collect()
}

pub fn number(rng: &mut ChaCha8Rng) -> Number {
    let text = match rng.gen_range(0..4) {
        0 => rng.gen_range(-50i64..50).to_string(),
        1 => format!("{}.{}", rng.gen_range(-20i64..20), rng.gen_range(0..100)),
        2 => format!("{}.0", rng.gen_range(0..10)),
        _ => format!("{}e{}", rng.gen_range(1..9), rng.gen_range(-2..3)),
    };
    Number::parse(&text).unwrap()
}

pub fn value(rng: &mut ChaCha8Rng, depth: u32) -> Value {
    let kinds = if depth == 0 { 4 } else { 6 };
    match rng.gen_range(0..kinds) {
        0 => Value::String(WORDS.choose(rng).unwrap().to_string()),
        1 => Value::Number(number(rng)),
        2 => Value::Bool(rng.gen()),
        3 => {
            if rng.gen_bool(0.3) {
                Value::Null
            } else {
                Value::Number(number(rng))
            }
        }
        4 => Value::List((0..rng.gen_range(0..4)).map(|_| value(rng, depth - 1)).collect()),
        _ => {
            let mut m = IndexMap::new();
            for i in 0..rng.gen_range(0..3) {
                m.insert(format!("k{i}"), value(rng, depth - 1));
            }
            Value::Map(m)
        }
    }
}

pub fn call(rng: &mut ChaCha8Rng, name: &str, min_args: usize) -> ToolCall {
    let mut pool = param_pool(name);
    pool.shuffle(rng);
    let n = rng.gen_range(min_args..=4.max(min_args));
    let mut c = ToolCall::new(name);
    for p in pool.into_iter().take(n) {
        c.args.insert(p, value(rng, 2));
    }
    c
}

/// 1 to `max_calls` calls with distinct function names.
pub fn answer(rng: &mut ChaCha8Rng, max_calls: usize, min_args: usize) -> AnswerSet {
    let mut names = FUNCTIONS.to_vec();
    names.shuffle(rng);
    let n = rng.gen_range(1..=max_calls);
    AnswerSet::from_calls(names[..n].iter().map(|f| call(rng, f, min_args)).collect())
}

/// A different value, so that the holding argument no longer matches.
pub fn mutate(v: &Value) -> Value {
    match v {
        Value::String(s) => Value::String(format!("{s}~")),
        Value::Number(n) => Value::Number(n.add_integer(1)),
        Value::Bool(b) => Value::Bool(!b),
        Value::Null => Value::int(0),
        Value::List(items) => {
            let mut items = items.clone();
            items.push(Value::Null);
            Value::List(items)
        }
        Value::Map(m) => {
            let mut m = m.clone();
            m.insert("extra".into(), Value::Null);
            Value::Map(m)
        }
    }
}

/// Every number in `v` printed in the other integer/fraction style.
pub fn flip_numbers(v: &Value) -> Value {
    match v {
        Value::Number(n) => Value::Number(n.with_flipped_style()),
        Value::List(items) => Value::List(items.iter().map(flip_numbers).collect()),
        Value::Map(m) => Value::Map(m.iter().map(|(k, x)| (k.clone(), flip_numbers(x))).collect()),
        other => other.clone(),
    }
}

/// Schemas covering every call of `a`, all parameters required.
pub fn schemas_for(a: &AnswerSet) -> Vec<ToolSchema> {
    a.calls
        .iter()
        .map(|c| ToolSchema {
            name: c.name.clone(),
            description: format!("{} tool", c.name),
            parameters: c
                .args
                .keys()
                .map(|k| {
                    (
                        k.clone(),
                        ParamSpec {
                            type_tag: "any".into(),
                            description: String::new(),
                            required: true,
                        },
                    )
                })
                .collect(),
        })
        .collect()
}

pub fn sample_for(id: &str, gt: &AnswerSet) -> Sample {
    Sample {
        id: id.into(),
        schemas: schemas_for(gt),
        turns: vec![Turn::user("please help")],
        gt: gt.clone(),
        gt_text: callreward::toolcall::print_call_expression(gt),
        source: Source::Synthetic,
        multi_turn: false,
        provenance: None,
    }
}

pub fn tagged(answer_text: &str) -> String {
    format!("<think>reasoning</think><answer>{answer_text}</answer>")
}
