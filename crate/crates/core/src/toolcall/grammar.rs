//! Recursive-descent parsing of bracketed call lists and JSON literals.

use indexmap::IndexMap;

use super::number::{Number, NumberError};
use super::value::{AnswerSet, ToolCall, Value};
use super::ParseError;

const MAX_DEPTH: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Dialect {
    /// `True`/`None`, single quotes, trailing commas.
    Pythonic,
    Json,
}

pub(crate) struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    dialect: Dialect,
    depth: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(src: &'a str, dialect: Dialect) -> Self {
        Self {
            src,
            pos: 0,
            dialect,
            depth: 0,
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn error(&self, expected: impl Into<String>) -> ParseError {
        ParseError {
            position: self.pos,
            expected: expected.into(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn expect(&mut self, want: char) -> Result<(), ParseError> {
        if self.peek() == Some(want) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("'{want}'")))
        }
    }

    fn eat(&mut self, want: char) -> bool {
        if self.peek() == Some(want) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn finish(&mut self) -> Result<(), ParseError> {
        self.skip_ws();
        if self.pos == self.src.len() {
            Ok(())
        } else {
            Err(self.error("end of input"))
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            Err(self.error("shallower nesting"))
        } else {
            Ok(())
        }
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn identifier(&mut self) -> Result<String, ParseError> {
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                self.bump();
            }
            _ => return Err(self.error("identifier")),
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                self.bump();
            } else {
                break;
            }
        }
        Ok(self.src[start..self.pos].to_string())
    }

    pub(crate) fn value(&mut self) -> Result<Value, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some('"') => self.string('"').map(Value::String),
            Some('\'') if self.dialect == Dialect::Pythonic => self.string('\'').map(Value::String),
            Some('[') => self.list(),
            Some('{') => self.map(),
            Some(c) if c == '-' || c == '+' || c == '.' || c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.keyword(),
            _ => Err(self.error("literal value")),
        }
    }

    fn keyword(&mut self) -> Result<Value, ParseError> {
        let start = self.pos;
        let word = self.identifier()?;
        let value = match (self.dialect, word.as_str()) {
            (_, "true") | (Dialect::Pythonic, "True") => Some(Value::Bool(true)),
            (_, "false") | (Dialect::Pythonic, "False") => Some(Value::Bool(false)),
            (_, "null") | (Dialect::Pythonic, "None") => Some(Value::Null),
            _ => None,
        };
        value.ok_or(ParseError {
            position: start,
            expected: "literal value".into(),
        })
    }

    fn number(&mut self) -> Result<Value, ParseError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E') {
                self.bump();
            } else {
                break;
            }
        }
        let text = &self.src[start..self.pos];
        if self.dialect == Dialect::Json && !json_number_shape(text) {
            return Err(ParseError {
                position: start,
                expected: "JSON number".into(),
            });
        }
        Number::parse(text).map(Value::Number).map_err(|e| ParseError {
            position: start,
            expected: match e {
                NumberError::ExponentRange => "exponent within range".into(),
                _ => "number".into(),
            },
        })
    }

    fn string(&mut self, quote: char) -> Result<String, ParseError> {
        self.expect(quote)?;
        let mut out = String::new();
        loop {
            let c = match self.bump() {
                Some(c) => c,
                None => return Err(self.error(format!("closing {quote}"))),
            };
            if c == quote {
                return Ok(out);
            }
            if c == '\\' {
                let esc_pos = self.pos;
                match self.bump() {
                    Some('\\') => out.push('\\'),
                    Some('"') => out.push('"'),
                    Some('\'') if self.dialect == Dialect::Pythonic => out.push('\''),
                    Some('n') => out.push('\n'),
                    Some('t') => out.push('\t'),
                    Some('r') => out.push('\r'),
                    Some('/') if self.dialect == Dialect::Json => out.push('/'),
                    Some('b') if self.dialect == Dialect::Json => out.push('\u{8}'),
                    Some('f') if self.dialect == Dialect::Json => out.push('\u{c}'),
                    Some('u') => out.push(self.unicode_escape()?),
                    _ => {
                        return Err(ParseError {
                            position: esc_pos,
                            expected: "escape sequence".into(),
                        })
                    }
                }
            } else if self.dialect == Dialect::Json && (c as u32) < 0x20 {
                return Err(self.error("escaped control character"));
            } else {
                out.push(c);
            }
        }
    }

    fn hex4(&mut self) -> Result<u32, ParseError> {
        let start = self.pos;
        let mut v = 0u32;
        for _ in 0..4 {
            match self.bump().and_then(|c| c.to_digit(16)) {
                Some(d) => v = v * 16 + d,
                None => {
                    return Err(ParseError {
                        position: start,
                        expected: "four hex digits".into(),
                    })
                }
            }
        }
        Ok(v)
    }

    fn unicode_escape(&mut self) -> Result<char, ParseError> {
        let start = self.pos;
        let hi = self.hex4()?;
        let code = if (0xD800..0xDC00).contains(&hi) {
            if !(self.eat('\\') && self.eat('u')) {
                return Err(self.error("low surrogate escape"));
            }
            let lo = self.hex4()?;
            if !(0xDC00..0xE000).contains(&lo) {
                return Err(self.error("low surrogate"));
            }
            0x10000 + ((hi - 0xD800) << 10) + (lo - 0xDC00)
        } else {
            hi
        };
        char::from_u32(code).ok_or(ParseError {
            position: start,
            expected: "valid code point".into(),
        })
    }

    fn list(&mut self) -> Result<Value, ParseError> {
        self.enter()?;
        self.expect('[')?;
        let mut items = Vec::new();
        self.skip_ws();
        if !self.eat(']') {
            loop {
                items.push(self.value()?);
                self.skip_ws();
                if self.eat(']') {
                    break;
                }
                self.expect(',')?;
                self.skip_ws();
                if self.dialect == Dialect::Pythonic && self.eat(']') {
                    break;
                }
            }
        }
        self.leave();
        Ok(Value::List(items))
    }

    fn map(&mut self) -> Result<Value, ParseError> {
        self.enter()?;
        let map = self.map_entries()?;
        self.leave();
        Ok(Value::Map(map))
    }

    fn map_entries(&mut self) -> Result<IndexMap<String, Value>, ParseError> {
        self.expect('{')?;
        let mut map = IndexMap::new();
        self.skip_ws();
        if self.eat('}') {
            return Ok(map);
        }
        loop {
            self.skip_ws();
            let key_pos = self.pos;
            let key = match self.peek() {
                Some('"') => self.string('"')?,
                Some('\'') if self.dialect == Dialect::Pythonic => self.string('\'')?,
                _ => return Err(self.error("string key")),
            };
            self.skip_ws();
            self.expect(':')?;
            let value = self.value()?;
            if map.insert(key, value).is_some() {
                return Err(ParseError {
                    position: key_pos,
                    expected: "unique key".into(),
                });
            }
            self.skip_ws();
            if self.eat('}') {
                break;
            }
            self.expect(',')?;
            self.skip_ws();
            if self.dialect == Dialect::Pythonic && self.eat('}') {
                break;
            }
        }
        Ok(map)
    }

    fn call(&mut self) -> Result<ToolCall, ParseError> {
        let name = self.identifier()?;
        self.skip_ws();
        self.expect('(')?;
        let mut call = ToolCall::new(name);
        self.skip_ws();
        if self.eat(')') {
            return Ok(call);
        }
        loop {
            self.skip_ws();
            let arg_pos = self.pos;
            let arg = self.identifier().map_err(|mut e| {
                e.expected = "keyword argument".into();
                e
            })?;
            self.skip_ws();
            self.expect('=')?;
            let value = self.value()?;
            if call.args.insert(arg, value).is_some() {
                return Err(ParseError {
                    position: arg_pos,
                    expected: "unique argument name".into(),
                });
            }
            self.skip_ws();
            if self.eat(')') {
                break;
            }
            self.expect(',')?;
            self.skip_ws();
            if self.eat(')') {
                break;
            }
        }
        Ok(call)
    }

    pub(crate) fn call_list(&mut self) -> Result<AnswerSet, ParseError> {
        self.skip_ws();
        self.expect('[')?;
        let mut calls = Vec::new();
        self.skip_ws();
        if !self.eat(']') {
            loop {
                self.skip_ws();
                calls.push(self.call()?);
                self.skip_ws();
                if self.eat(']') {
                    break;
                }
                self.expect(',')?;
            }
        }
        self.finish()?;
        Ok(AnswerSet::from_calls(calls))
    }
}

fn json_number_shape(text: &str) -> bool {
    let body = text.strip_prefix('-').unwrap_or(text);
    let int_end = body.find(|c: char| !c.is_ascii_digit()).unwrap_or(body.len());
    let int = &body[..int_end];
    if int.is_empty() || (int.len() > 1 && int.starts_with('0')) {
        return false;
    }
    let mut rest = &body[int_end..];
    if let Some(frac) = rest.strip_prefix('.') {
        let n = frac.find(|c: char| !c.is_ascii_digit()).unwrap_or(frac.len());
        if n == 0 {
            return false;
        }
        rest = &frac[n..];
    }
    if let Some(exp) = rest.strip_prefix(['e', 'E']) {
        let exp = exp.strip_prefix(['+', '-']).unwrap_or(exp);
        return !exp.is_empty() && exp.chars().all(|c| c.is_ascii_digit());
    }
    rest.is_empty()
}

/// Parses a complete JSON document into a [`Value`], rejecting duplicate keys.
pub fn parse_json_value(text: &str) -> Result<Value, ParseError> {
    let mut cursor = Cursor::new(text, Dialect::Json);
    let v = cursor.value()?;
    cursor.finish()?;
    Ok(v)
}
