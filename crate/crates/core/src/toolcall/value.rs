use indexmap::IndexMap;

use super::number::Number;

/// A literal argument value.
///
/// `PartialEq` is AST equivalence: numbers compare numerically, lists in
/// order, maps without regard to key order, strings exactly.
#[derive(Clone, Debug)]
pub enum Value {
    String(String),
    Number(Number),
    Bool(bool),
    Null,
    List(Vec<Value>),
    Map(IndexMap<String, Value>),
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::String(a), Value::String(b)) => a == b,
            (Value::Number(a), Value::Number(b)) => a == b,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Null, Value::Null) => true,
            (Value::List(a), Value::List(b)) => a == b,
            (Value::Map(a), Value::Map(b)) => {
                a.len() == b.len() && a.iter().all(|(k, v)| b.get(k) == Some(v))
            }
            _ => false,
        }
    }
}

impl Value {
    pub fn int(v: i64) -> Self {
        Value::Number(Number::from_i64(v))
    }

    pub fn str(s: impl Into<String>) -> Self {
        Value::String(s.into())
    }

    /// A string that is equal for equal values, usable as a hash/set key.
    pub fn canonical_key(&self) -> String {
        match self {
            Value::String(s) => format!("{s:?}"),
            Value::Number(n) => n.canonical_key(),
            Value::Bool(b) => b.to_string(),
            Value::Null => "null".into(),
            Value::List(items) => {
                let inner: Vec<String> = items.iter().map(Value::canonical_key).collect();
                format!("[{}]", inner.join(","))
            }
            Value::Map(map) => {
                let mut entries: Vec<(String, String)> = map
                    .iter()
                    .map(|(k, v)| (format!("{k:?}"), v.canonical_key()))
                    .collect();
                entries.sort();
                let inner: Vec<String> = entries.into_iter().map(|(k, v)| format!("{k}:{v}")).collect();
                format!("{{{}}}", inner.join(","))
            }
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::String(_) => "string",
            Value::Number(_) => "number",
            Value::Bool(_) => "boolean",
            Value::Null => "null",
            Value::List(_) => "array",
            Value::Map(_) => "object",
        }
    }
}

/// One tool invocation: a name and its keyword arguments in source order.
#[derive(Clone, Debug)]
pub struct ToolCall {
    pub name: String,
    pub args: IndexMap<String, Value>,
}

impl ToolCall {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            args: IndexMap::new(),
        }
    }

    pub fn arg(mut self, name: impl Into<String>, value: Value) -> Self {
        self.args.insert(name.into(), value);
        self
    }
}

impl PartialEq for ToolCall {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.args.len() == other.args.len()
            && self.args.iter().all(|(k, v)| other.args.get(k) == Some(v))
    }
}

/// A model's (or the ground truth's) answer for one turn.
///
/// Either a list of calls, a direct textual response, or neither ("no
/// action"). Calls and a direct response never coexist.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AnswerSet {
    pub calls: Vec<ToolCall>,
    pub direct_response: Option<String>,
}

impl AnswerSet {
    pub fn from_calls(calls: Vec<ToolCall>) -> Self {
        Self {
            calls,
            direct_response: None,
        }
    }

    pub fn direct(text: impl Into<String>) -> Self {
        Self {
            calls: Vec::new(),
            direct_response: Some(text.into()),
        }
    }

    pub fn is_direct(&self) -> bool {
        self.direct_response.is_some()
    }

    /// Checks the calls/direct-response exclusion and identifier rules.
    pub fn validate(&self) -> Result<(), String> {
        if self.direct_response.is_some() && !self.calls.is_empty() {
            return Err("answer has both calls and a direct response".into());
        }
        for call in &self.calls {
            if !is_identifier(&call.name) {
                return Err(format!("invalid function name {:?}", call.name));
            }
            for key in call.args.keys() {
                if !is_identifier(key) {
                    return Err(format!("invalid parameter name {key:?}"));
                }
            }
        }
        Ok(())
    }
}

/// `[A-Za-z_][A-Za-z0-9_.]*`
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identifiers() {
        assert!(is_identifier("get_weather"));
        assert!(is_identifier("_x.y1"));
        assert!(!is_identifier("1abc"));
        assert!(!is_identifier(""));
        assert!(!is_identifier("a-b"));
    }

    #[test]
    fn map_equality_is_order_free() {
        let mut a = IndexMap::new();
        a.insert("x".to_string(), Value::int(1));
        a.insert("y".to_string(), Value::Null);
        let mut b = IndexMap::new();
        b.insert("y".to_string(), Value::Null);
        b.insert("x".to_string(), Value::int(1));
        assert_eq!(Value::Map(a.clone()), Value::Map(b.clone()));
        assert_eq!(Value::Map(a).canonical_key(), Value::Map(b).canonical_key());
    }

    #[test]
    fn lists_are_ordered() {
        let a = Value::List(vec![Value::int(1), Value::int(2)]);
        let b = Value::List(vec![Value::int(2), Value::int(1)]);
        assert_ne!(a, b);
    }

    #[test]
    fn validate_rejects_mixed_answer() {
        let mut a = AnswerSet::from_calls(vec![ToolCall::new("f")]);
        assert!(a.validate().is_ok());
        a.direct_response = Some("hi".into());
        assert!(a.validate().is_err());
    }
}
