use std::fmt::Write;

use super::value::{AnswerSet, Value};

/// Knobs for non-canonical printing, used to produce equivalent variants of
/// an answer (quote style, padding).
#[derive(Clone, Copy, Debug, Default)]
pub struct PrintStyle {
    pub single_quotes: bool,
    /// Extra spaces inserted around every punctuation token.
    pub padding: usize,
}

/// Canonical bracketed form: `[f(a=1, b="x"), g()]`.
///
/// Only the calls are printed; an answer without calls prints as `[]`.
pub fn print_call_expression(answer: &AnswerSet) -> String {
    print_call_expression_with(answer, PrintStyle::default())
}

pub fn print_call_expression_with(answer: &AnswerSet, style: PrintStyle) -> String {
    let pad = " ".repeat(style.padding);
    let mut out = String::new();
    out.push('[');
    out.push_str(&pad);
    for (i, call) in answer.calls.iter().enumerate() {
        if i > 0 {
            let _ = write!(out, "{pad},{pad} ");
        }
        out.push_str(&call.name);
        let _ = write!(out, "{pad}({pad}");
        for (j, (name, value)) in call.args.iter().enumerate() {
            if j > 0 {
                let _ = write!(out, "{pad},{pad} ");
            }
            let _ = write!(out, "{name}{pad}={pad}");
            write_value(&mut out, value, style, false);
        }
        let _ = write!(out, "{pad})");
    }
    let _ = write!(out, "{pad}]");
    out
}

/// Canonical bracketed-syntax literal.
pub fn print_value(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, PrintStyle::default(), false);
    out
}

/// `[{"name": …, "arguments": {…}}, …]`
pub fn print_json_calls(answer: &AnswerSet) -> String {
    let mut out = String::from("[");
    for (i, call) in answer.calls.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str("{\"name\": ");
        write_string(&mut out, &call.name, '"', true);
        out.push_str(", \"arguments\": {");
        for (j, (name, value)) in call.args.iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            write_string(&mut out, name, '"', true);
            out.push_str(": ");
            write_value(&mut out, value, PrintStyle::default(), true);
        }
        out.push_str("}}");
    }
    out.push(']');
    out
}

pub(crate) fn write_value(out: &mut String, value: &Value, style: PrintStyle, json: bool) {
    let quote = if style.single_quotes && !json { '\'' } else { '"' };
    match value {
        Value::String(s) => write_string(out, s, quote, json),
        Value::Number(n) => {
            let _ = write!(out, "{n}");
        }
        Value::Bool(b) => out.push_str(match (json, b) {
            (true, true) => "true",
            (true, false) => "false",
            (false, true) => "True",
            (false, false) => "False",
        }),
        Value::Null => out.push_str(if json { "null" } else { "None" }),
        Value::List(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(out, item, style, json);
            }
            out.push(']');
        }
        Value::Map(map) => {
            out.push('{');
            for (i, (k, v)) in map.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_string(out, k, quote, json);
                out.push_str(": ");
                write_value(out, v, style, json);
            }
            out.push('}');
        }
    }
}

pub(crate) fn write_string(out: &mut String, s: &str, quote: char, json: bool) {
    out.push(quote);
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c == quote => {
                out.push('\\');
                out.push(c);
            }
            c if json && (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push(quote);
}
