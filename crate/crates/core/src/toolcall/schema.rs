use indexmap::IndexMap;

use super::grammar::parse_json_value;
use super::print::write_string;
use super::value::{is_identifier, Value};

pub const TYPE_TAGS: [&str; 7] = ["string", "integer", "float", "boolean", "array", "object", "any"];

#[derive(Clone, Debug, PartialEq)]
pub struct ParamSpec {
    pub type_tag: String,
    pub description: String,
    pub required: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ToolSchema {
    pub name: String,
    pub description: String,
    pub parameters: IndexMap<String, ParamSpec>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SchemaError {
    #[error("schema list is not valid JSON: {0}")]
    Json(String),
    #[error("schema list must be a JSON array")]
    NotArray,
    #[error("schema #{index}: {message}")]
    Invalid { index: usize, message: String },
}

/// Maps free-form type names (`str`, `List[int]`, `dict, optional`, …) onto
/// the fixed tag set.
fn normalize_type(raw: &str) -> &'static str {
    let t = raw.trim().to_ascii_lowercase();
    if let Some(tag) = TYPE_TAGS.iter().find(|tag| **tag == t) {
        return tag;
    }
    let t = t.as_str();
    if t.starts_with("str") || t.starts_with("enum") {
        "string"
    } else if t.starts_with("int") || t.starts_with("long") {
        "integer"
    } else if t.starts_with("float") || t.starts_with("number") || t.starts_with("double") || t.starts_with("decimal") {
        "float"
    } else if t.starts_with("bool") {
        "boolean"
    } else if t.starts_with("list") || t.starts_with("array") || t.starts_with("tuple") || t.starts_with("set") {
        "array"
    } else if t.starts_with("dict") || t.starts_with("object") || t.starts_with("map") {
        "object"
    } else {
        "any"
    }
}

fn as_str(v: Option<&Value>) -> Option<&str> {
    match v {
        Some(Value::String(s)) => Some(s),
        _ => None,
    }
}

fn param_spec(spec: &Value, required_override: Option<bool>) -> Result<ParamSpec, String> {
    let Value::Map(spec) = spec else {
        return Err("parameter spec must be an object".into());
    };
    let raw_type = match spec.get("type") {
        Some(Value::String(s)) => s.clone(),
        // JSON-schema unions such as ["string", "null"]
        Some(Value::List(items)) => items
            .iter()
            .find_map(|v| match v {
                Value::String(s) if s != "null" => Some(s.clone()),
                _ => None,
            })
            .unwrap_or_default(),
        _ => String::new(),
    };
    let required = match (required_override, spec.get("required")) {
        (Some(r), _) => r,
        (None, Some(Value::Bool(b))) => *b,
        (None, _) => !raw_type.to_ascii_lowercase().contains("optional"),
    };
    Ok(ParamSpec {
        type_tag: normalize_type(&raw_type).to_string(),
        description: as_str(spec.get("description")).unwrap_or_default().to_string(),
        required,
    })
}

fn parameters(value: &Value) -> Result<IndexMap<String, ParamSpec>, String> {
    let Value::Map(map) = value else {
        return Err("\"parameters\" must be an object".into());
    };
    let mut out = IndexMap::new();
    // JSON-schema style: {"type": "object", "properties": {...}, "required": [...]}
    if let Some(Value::Map(props)) = map.get("properties") {
        let required: Vec<&str> = match map.get("required") {
            Some(Value::List(items)) => items.iter().filter_map(|v| as_str(Some(v))).collect(),
            _ => Vec::new(),
        };
        for (name, spec) in props {
            if !is_identifier(name) {
                return Err(format!("invalid parameter name {name:?}"));
            }
            let spec = param_spec(spec, Some(required.contains(&name.as_str())))?;
            out.insert(name.clone(), spec);
        }
        return Ok(out);
    }
    for (name, spec) in map {
        if !is_identifier(name) {
            return Err(format!("invalid parameter name {name:?}"));
        }
        out.insert(name.clone(), param_spec(spec, None)?);
    }
    Ok(out)
}

/// Parses a JSON array of tool schemas. Unknown fields are ignored; duplicate
/// JSON keys anywhere in the document are an error.
pub fn parse_tool_schemas(text: &str) -> Result<Vec<ToolSchema>, SchemaError> {
    let root = parse_json_value(text).map_err(|e| SchemaError::Json(e.to_string()))?;
    let Value::List(items) = root else {
        return Err(SchemaError::NotArray);
    };
    let mut schemas = Vec::with_capacity(items.len());
    for (index, item) in items.iter().enumerate() {
        let invalid = |message: String| SchemaError::Invalid { index, message };
        let Value::Map(obj) = item else {
            return Err(invalid("schema must be an object".into()));
        };
        let name = match obj.get("name") {
            Some(Value::String(s)) if is_identifier(s) => s.clone(),
            Some(_) => return Err(invalid("\"name\" must be an identifier string".into())),
            None => return Err(invalid("missing \"name\"".into())),
        };
        let params = match obj.get("parameters") {
            Some(p) => parameters(p).map_err(invalid)?,
            None => IndexMap::new(),
        };
        schemas.push(ToolSchema {
            name,
            description: as_str(obj.get("description")).unwrap_or_default().to_string(),
            parameters: params,
        });
    }
    Ok(schemas)
}

/// Serializes schemas in the flat shape accepted by [`parse_tool_schemas`].
pub fn schemas_to_json(schemas: &[ToolSchema]) -> String {
    let mut out = String::from("[");
    for (i, s) in schemas.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str("{\"name\": ");
        write_string(&mut out, &s.name, '"', true);
        out.push_str(", \"description\": ");
        write_string(&mut out, &s.description, '"', true);
        out.push_str(", \"parameters\": {");
        for (j, (name, p)) in s.parameters.iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            write_string(&mut out, name, '"', true);
            out.push_str(": {\"type\": ");
            write_string(&mut out, &p.type_tag, '"', true);
            out.push_str(", \"description\": ");
            write_string(&mut out, &p.description, '"', true);
            out.push_str(if p.required { ", \"required\": true}" } else { ", \"required\": false}" });
        }
        out.push_str("}}");
    }
    out.push(']');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_shape() {
        let s = parse_tool_schemas(r#"[{"name":"f","description":"d","parameters":{"a":{"type":"string","required":true}}}]"#)
            .unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].name, "f");
        assert_eq!(s[0].description, "d");
        assert_eq!(
            s[0].parameters["a"],
            ParamSpec {
                type_tag: "string".into(),
                description: String::new(),
                required: true
            }
        );
    }

    #[test]
    fn empty_list() {
        assert!(parse_tool_schemas("[]").unwrap().is_empty());
    }

    #[test]
    fn duplicate_parameter_keys() {
        let err = parse_tool_schemas(r#"[{"name":"f","parameters":{"a":{"type":"string"},"a":{"type":"integer"}}}]"#)
            .unwrap_err();
        assert!(matches!(err, SchemaError::Json(_)));
    }

    #[test]
    fn json_schema_shape_and_type_normalization() {
        let s = parse_tool_schemas(
            r#"[{"name":"g","extra":1,"parameters":{"type":"object","properties":{
                "x":{"type":"List[int]"},"y":{"type":"number","description":"why"}},"required":["x"]}}]"#,
        )
        .unwrap();
        let p = &s[0].parameters;
        assert_eq!(p["x"].type_tag, "array");
        assert!(p["x"].required);
        assert_eq!(p["y"].type_tag, "float");
        assert!(!p["y"].required);
        assert_eq!(p["y"].description, "why");
    }

    #[test]
    fn xlam_optional_marker() {
        let s = parse_tool_schemas(r#"[{"name":"h","parameters":{"q":{"type":"str, optional"},"n":{"type":"int"}}}]"#)
            .unwrap();
        assert!(!s[0].parameters["q"].required);
        assert!(s[0].parameters["n"].required);
        assert_eq!(s[0].parameters["q"].type_tag, "string");
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_tool_schemas(r#"[{"description":"x"}]"#), Err(SchemaError::Invalid { index: 0, .. })));
        assert!(matches!(
            parse_tool_schemas(r#"[{"name":"f"},{"name":"g","parameters":[]}]"#),
            Err(SchemaError::Invalid { index: 1, .. })
        ));
        assert_eq!(parse_tool_schemas("{}"), Err(SchemaError::NotArray));
        assert!(matches!(parse_tool_schemas("[1"), Err(SchemaError::Json(_))));
    }

    #[test]
    fn serialization_round_trips() {
        let src = r#"[{"name":"f","description":"say \"hi\"","parameters":{"a":{"type":"int","description":"n"},"b":{"type":"str, optional"}}},{"name":"g"}]"#;
        let s = parse_tool_schemas(src).unwrap();
        assert_eq!(parse_tool_schemas(&schemas_to_json(&s)).unwrap(), s);
    }
}
