//! Parsing and printing of tool invocations.
//!
//! Two surface syntaxes are understood:
//!
//! ```text
//! [get_weather(city="Paris", unit="C"), get_time()]
//! [{"name": "get_weather", "arguments": {"city": "Paris"}}]
//! ```
//!
//! Both produce the same [`AnswerSet`]. Model completions wrap their answer in
//! `<think>…</think><answer>…</answer>`; see [`parse_structured_response`].

mod grammar;
mod number;
mod print;
mod response;
mod schema;
mod value;

use std::fmt;

pub use grammar::parse_json_value;
pub use number::{Number, NumberError};
pub use print::{print_call_expression, print_call_expression_with, print_json_calls, print_value, PrintStyle};
pub use response::{parse_structured_response, StructuredResponse, ANSWER_CLOSE, ANSWER_OPEN, THINK_CLOSE, THINK_OPEN};
pub use schema::{parse_tool_schemas, schemas_to_json, ParamSpec, SchemaError, ToolSchema, TYPE_TAGS};
pub use value::{is_identifier, AnswerSet, ToolCall, Value};

use grammar::{Cursor, Dialect};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    /// Byte offset into the input.
    pub position: usize,
    pub expected: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at byte {}: expected {}", self.position, self.expected)
    }
}

/// Parses a bracketed call list such as `[f(a=1, b="x"), g()]`.
pub fn parse_call_expression(text: &str) -> Result<AnswerSet, ParseError> {
    Cursor::new(text, Dialect::Pythonic).call_list()
}

/// Parses `{"name": …, "arguments": {…}}` or an array of such objects.
/// `"parameters"` is accepted in place of `"arguments"`. Missing arguments are
/// an error; use [`parse_json_calls_lenient`] to default them to `{}`.
pub fn parse_json_calls(text: &str) -> Result<AnswerSet, ParseError> {
    json_calls(text, false)
}

pub fn parse_json_calls_lenient(text: &str) -> Result<AnswerSet, ParseError> {
    json_calls(text, true)
}

fn json_calls(text: &str, lenient: bool) -> Result<AnswerSet, ParseError> {
    let root = parse_json_value(text)?;
    let shape_error = |expected: &str| ParseError {
        position: 0,
        expected: expected.to_string(),
    };
    let objects = match root {
        Value::Map(_) => vec![root],
        Value::List(items) => items,
        _ => return Err(shape_error("call object or array of call objects")),
    };
    let mut calls = Vec::with_capacity(objects.len());
    for obj in objects {
        let Value::Map(mut map) = obj else {
            return Err(shape_error("call object"));
        };
        let name = match map.shift_remove("name") {
            Some(Value::String(s)) if is_identifier(&s) => s,
            Some(_) => return Err(shape_error("identifier string in \"name\"")),
            None => return Err(shape_error("\"name\" field")),
        };
        let args = match (map.shift_remove("arguments"), map.shift_remove("parameters")) {
            (Some(_), Some(_)) => return Err(shape_error("only one of \"arguments\" or \"parameters\"")),
            (Some(Value::Map(a)), None) | (None, Some(Value::Map(a))) => a,
            (None, None) if lenient => Default::default(),
            (None, None) => return Err(shape_error("\"arguments\" field")),
            _ => return Err(shape_error("object in \"arguments\"")),
        };
        if let Some(extra) = map.keys().next() {
            return Err(shape_error(&format!("no field {extra:?}")));
        }
        if let Some(bad) = args.keys().find(|k| !is_identifier(k)) {
            return Err(shape_error(&format!("identifier argument name, got {bad:?}")));
        }
        calls.push(ToolCall { name, args });
    }
    Ok(AnswerSet::from_calls(calls))
}

/// Tries the bracketed syntax first, then JSON. On double failure the error
/// that got further into the input is returned.
pub fn parse_answer(text: &str) -> Result<AnswerSet, ParseError> {
    match parse_call_expression(text) {
        Ok(a) => Ok(a),
        Err(bracket_err) => parse_json_calls(text).map_err(|json_err| {
            if json_err.position > bracket_err.position {
                json_err
            } else {
                bracket_err
            }
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracketed_basic() {
        let a = parse_call_expression(r#"[get_weather(city="Paris", unit="C")]"#).unwrap();
        let want = ToolCall::new("get_weather")
            .arg("city", Value::str("Paris"))
            .arg("unit", Value::str("C"));
        assert_eq!(a.calls, vec![want]);
        assert!(a.direct_response.is_none());
    }

    #[test]
    fn empty_list() {
        let a = parse_call_expression("[]").unwrap();
        assert!(a.calls.is_empty());
        assert!(parse_call_expression("  [ ]  ").unwrap().calls.is_empty());
    }

    #[test]
    fn nested_values() {
        let a = parse_call_expression(r#"[f(a=[1, 2], b={"k": True})]"#).unwrap();
        let mut inner = indexmap::IndexMap::new();
        inner.insert("k".to_string(), Value::Bool(true));
        let want = ToolCall::new("f")
            .arg("a", Value::List(vec![Value::int(1), Value::int(2)]))
            .arg("b", Value::Map(inner));
        assert_eq!(a.calls, vec![want]);
    }

    #[test]
    fn literal_grammar() {
        let a = parse_call_expression(
            r#"[f(s='it\'s', d="a\"b\\c\n\t", n=-1.5e2, t=true, u=False, x=None, y=null, z=+3)]"#,
        )
        .unwrap();
        let args = &a.calls[0].args;
        assert_eq!(args["s"], Value::str("it's"));
        assert_eq!(args["d"], Value::str("a\"b\\c\n\t"));
        assert_eq!(args["n"], Value::int(-150));
        assert_eq!(args["t"], Value::Bool(true));
        assert_eq!(args["u"], Value::Bool(false));
        assert_eq!(args["x"], Value::Null);
        assert_eq!(args["y"], Value::Null);
        assert_eq!(args["z"], Value::int(3));
    }

    #[test]
    fn malformed_inputs_report_position() {
        let e = parse_call_expression("f(a=").unwrap_err();
        assert_eq!(e.position, 0);
        let e = parse_call_expression("[f(a=").unwrap_err();
        assert_eq!(e.position, 5);
        assert!(parse_call_expression("[f(a=1, a=2)]").is_err());
        assert!(parse_call_expression("[f(1)]").is_err());
        assert!(parse_call_expression("[f(a=g())]").is_err());
        assert!(parse_call_expression("[f(a=1)] trailing").is_err());
        assert!(parse_call_expression("[f(a=1),]").is_err());
        assert!(parse_call_expression("[1f()]").is_err());
    }

    #[test]
    fn json_shapes() {
        let a = parse_json_calls(r#"{"name":"f","arguments":{"a":1}}"#).unwrap();
        assert_eq!(a.calls, vec![ToolCall::new("f").arg("a", Value::int(1))]);
        let b = parse_json_calls(r#"[{"name":"f","arguments":{}},{"name":"g","arguments":{"x":"y"}}]"#).unwrap();
        assert_eq!(b.calls.len(), 2);
        assert_eq!(b.calls[1], ToolCall::new("g").arg("x", Value::str("y")));
        let c = parse_json_calls(r#"{"name":"f","parameters":{"a":1}}"#).unwrap();
        assert_eq!(c.calls, a.calls);
    }

    #[test]
    fn json_missing_arguments_is_strict_by_default() {
        let err = parse_json_calls(r#"{"name":"f"}"#).unwrap_err();
        assert!(err.expected.contains("arguments"));
        let lenient = parse_json_calls_lenient(r#"{"name":"f"}"#).unwrap();
        assert_eq!(lenient.calls, vec![ToolCall::new("f")]);
    }

    #[test]
    fn json_rejects_other_shapes() {
        assert!(parse_json_calls(r#"{"arguments":{}}"#).is_err());
        assert!(parse_json_calls(r#"{"name":"f","arguments":{},"id":3}"#).is_err());
        assert!(parse_json_calls(r#"{"name":"f","arguments":[]}"#).is_err());
        assert!(parse_json_calls(r#"{"name":"f","arguments":{"a":1,"a":2}}"#).is_err());
        assert!(parse_json_calls("42").is_err());
        assert!(parse_json_calls("not json").is_err());
    }

    #[test]
    fn answer_prefers_bracketed() {
        // `[]` is valid in both syntaxes.
        assert!(parse_answer("[]").unwrap().calls.is_empty());
        let a = parse_answer(r#"[{"name":"f","arguments":{"a":2.0}}]"#).unwrap();
        assert_eq!(a.calls, vec![ToolCall::new("f").arg("a", Value::int(2))]);
        assert!(parse_answer("hello").is_err());
    }
}
