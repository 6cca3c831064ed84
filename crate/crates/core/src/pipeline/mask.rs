use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::toolcall::{parse_call_expression, print_call_expression, print_json_calls, AnswerSet, ToolCall, ToolSchema};

use super::Sample;

/// Original → masked names. Function indices are dense from 1 over the whole
/// sample; parameter indices restart at 1 for every function.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskMapping {
    pub functions: IndexMap<String, String>,
    /// Keyed by original function name, then original parameter name.
    pub parameters: IndexMap<String, IndexMap<String, String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MaskError {
    #[error("name {0:?} already has the masked form")]
    MaskCollision(String),
    #[error("sample {0:?} has no schemas to mask")]
    NoSchemas(String),
}

/// `func_<digits>` or `param_<digits>`.
pub fn is_masked_name(name: &str) -> bool {
    ["func_", "param_"].iter().any(|prefix| {
        name.strip_prefix(prefix)
            .is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
    })
}

impl MaskMapping {
    fn add_function(&mut self, name: &str) {
        if !self.functions.contains_key(name) {
            let masked = format!("func_{}", self.functions.len() + 1);
            self.functions.insert(name.to_string(), masked);
        }
    }

    fn add_parameter(&mut self, function: &str, param: &str) {
        let params = self.parameters.entry(function.to_string()).or_default();
        if !params.contains_key(param) {
            let masked = format!("param_{}", params.len() + 1);
            params.insert(param.to_string(), masked);
        }
    }

    fn add_calls(&mut self, answer: &AnswerSet) {
        for call in &answer.calls {
            self.add_function(&call.name);
            for arg in call.args.keys() {
                self.add_parameter(&call.name, arg);
            }
        }
    }

    /// The mapping with every entry reversed.
    pub fn inverse(&self) -> MaskMapping {
        let mut inv = MaskMapping::default();
        for (orig, masked) in &self.functions {
            inv.functions.insert(masked.clone(), orig.clone());
            if let Some(params) = self.parameters.get(orig) {
                let rev = params.iter().map(|(p, m)| (m.clone(), p.clone())).collect();
                inv.parameters.insert(masked.clone(), rev);
            }
        }
        inv
    }

    fn function(&self, name: &str) -> String {
        self.functions.get(name).cloned().unwrap_or_else(|| name.to_string())
    }

    fn parameter(&self, function: &str, param: &str) -> String {
        self.parameters
            .get(function)
            .and_then(|p| p.get(param))
            .cloned()
            .unwrap_or_else(|| param.to_string())
    }

    fn schema(&self, s: &ToolSchema) -> ToolSchema {
        ToolSchema {
            name: self.function(&s.name),
            description: s.description.clone(),
            parameters: s
                .parameters
                .iter()
                .map(|(p, spec)| (self.parameter(&s.name, p), spec.clone()))
                .collect(),
        }
    }
}

/// Renames the calls of an answer. Names absent from the mapping are kept.
pub fn mask_answer(answer: &AnswerSet, mapping: &MaskMapping) -> AnswerSet {
    AnswerSet {
        calls: answer
            .calls
            .iter()
            .map(|c| ToolCall {
                name: mapping.function(&c.name),
                args: c
                    .args
                    .iter()
                    .map(|(k, v)| (mapping.parameter(&c.name, k), v.clone()))
                    .collect(),
            })
            .collect(),
        direct_response: answer.direct_response.clone(),
    }
}

fn apply(s: &Sample, mapping: &MaskMapping) -> Sample {
    let gt = mask_answer(&s.gt, mapping);
    let gt_text = if gt.is_direct() {
        s.gt_text.clone()
    } else if parse_call_expression(&s.gt_text).is_ok() {
        print_call_expression(&gt)
    } else {
        print_json_calls(&gt)
    };
    let mut out = s.clone();
    out.schemas = s.schemas.iter().map(|x| mapping.schema(x)).collect();
    for turn in &mut out.turns {
        if let Some(calls) = &turn.calls {
            turn.calls = Some(mask_answer(calls, mapping));
        }
    }
    out.gt = gt;
    out.gt_text = gt_text;
    out
}

/// Replaces function and parameter names with `func_<k>` / `param_<j>`.
///
/// Indices follow schema order; names that only occur in calls (gt first,
/// then dialogue turns) are numbered after the schema names. `gt_text` is
/// re-serialized in its original syntax. Free text and descriptions are left
/// alone. Any name already of the masked form is a [`MaskError::MaskCollision`].
pub fn mask_sample(s: &Sample) -> Result<(Sample, MaskMapping), MaskError> {
    if s.schemas.is_empty() {
        return Err(MaskError::NoSchemas(s.id.clone()));
    }
    let call_sets = std::iter::once(&s.gt).chain(s.turns.iter().filter_map(|t| t.calls.as_ref()));
    let mut names: Vec<&str> = Vec::new();
    for schema in &s.schemas {
        names.push(&schema.name);
        names.extend(schema.parameters.keys().map(String::as_str));
    }
    for a in call_sets.clone() {
        for c in &a.calls {
            names.push(&c.name);
            names.extend(c.args.keys().map(String::as_str));
        }
    }
    if let Some(bad) = names.into_iter().find(|n| is_masked_name(n)) {
        return Err(MaskError::MaskCollision(bad.to_string()));
    }
    let mut mapping = MaskMapping::default();
    for schema in &s.schemas {
        mapping.add_function(&schema.name);
        for p in schema.parameters.keys() {
            mapping.add_parameter(&schema.name, p);
        }
    }
    for a in call_sets {
        mapping.add_calls(a);
    }
    Ok((apply(s, &mapping), mapping))
}

/// Applies the inverse of `mapping`, restoring the original names.
pub fn unmask_sample(s: &Sample, mapping: &MaskMapping) -> Sample {
    apply(s, &mapping.inverse())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{Source, Turn};
    use crate::toolcall::{parse_answer, parse_tool_schemas};

    fn sample(schemas: &str, gt_text: &str) -> Sample {
        Sample {
            id: "s".into(),
            schemas: parse_tool_schemas(schemas).unwrap(),
            turns: vec![Turn::user("sum 1 and 2")],
            gt: parse_answer(gt_text).unwrap(),
            gt_text: gt_text.into(),
            source: Source::Xlam,
            multi_turn: false,
            provenance: None,
        }
    }

    const SUM: &str = r#"[{"name": "calculate_sum", "description": "Adds numbers", "parameters": {"input_list": {"type": "list"}}}]"#;

    #[test]
    fn renames_schema_and_gt() {
        let s = sample(SUM, "[calculate_sum(input_list=[1,2])]");
        let (m, map) = mask_sample(&s).unwrap();
        assert_eq!(m.schemas[0].name, "func_1");
        assert_eq!(m.schemas[0].parameters.keys().collect::<Vec<_>>(), ["param_1"]);
        assert_eq!(m.schemas[0].description, "Adds numbers");
        assert_eq!(m.gt_text, "[func_1(param_1=[1, 2])]");
        assert_eq!(m.turns, s.turns);
        assert_eq!(map.functions["calculate_sum"], "func_1");
        assert_eq!(map.parameters["calculate_sum"]["input_list"], "param_1");
    }

    #[test]
    fn direct_response_keeps_gt() {
        let mut s = sample(SUM, "[calculate_sum(input_list=[1])]");
        s.gt = AnswerSet::direct("I cannot help.");
        s.gt_text = "I cannot help.".into();
        let (m, _) = mask_sample(&s).unwrap();
        assert_eq!(m.gt, s.gt);
        assert_eq!(m.gt_text, s.gt_text);
        assert_eq!(m.schemas[0].name, "func_1");
    }

    #[test]
    fn double_masking_is_an_error() {
        let s = sample(SUM, "[calculate_sum(input_list=[1,2])]");
        let (m, _) = mask_sample(&s).unwrap();
        assert_eq!(mask_sample(&m), Err(MaskError::MaskCollision("func_1".into())));
    }

    #[test]
    fn names_outside_schemas_are_appended() {
        let s = sample(SUM, r#"[{"name": "other", "arguments": {"k": 1}}, {"name": "calculate_sum", "arguments": {"extra": 2}}]"#);
        let (m, map) = mask_sample(&s).unwrap();
        assert_eq!(map.functions["other"], "func_2");
        assert_eq!(map.parameters["calculate_sum"]["extra"], "param_2");
        assert!(m.gt_text.starts_with("[{\"name\""), "{}", m.gt_text);
        assert_eq!(unmask_sample(&m, &map).gt, s.gt);
    }

    #[test]
    fn pattern() {
        assert!(is_masked_name("func_12"));
        assert!(is_masked_name("param_1"));
        assert!(!is_masked_name("func_"));
        assert!(!is_masked_name("func_a"));
        assert!(!is_masked_name("my_func_1"));
    }
}
