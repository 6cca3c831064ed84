//! System prompt with an embedded tool list.

use std::path::Path;

use crate::toolcall::{parse_tool_schemas, schemas_to_json, SchemaError, ToolSchema};

pub const PLACEHOLDER: &str = "{{Tool List}}";

const DEFAULT_LINES: [&str; 15] = [
    "A conversation between User and Assistant, the user asks a question, and the Assistant solves it.",
    "The assistant first thinks about the reasoning process in the mind and then provides the user with the answer.",
    "The reasoning process and answer are enclosed within <think> </think> and <answer> </answer> tags, respectively,",
    "i.e., <think> reasoning process here </think><answer> answer here </answer>.",
    "",
    "You are an expert in composing functions, given a question and a set of possible functions.",
    "Based on the question, you will need to make one or more function/tool calls to achieve the purpose.",
    "1. If none of the function can be used, point it out.",
    "2. If the given question lacks the parameters required by the function, also point it out.",
    "3. You should only return the function call in tools call sections.",
    "",
    "If you decide to invoke any function(s), MUST use the format:",
    "[func_name1(params_name1=params_value1, ...), func_name2(params)]",
    "",
    "Here is a list of functions in JSON format that you can invoke: {{Tool List}}",
];

#[derive(Debug, thiserror::Error)]
pub enum PromptError {
    #[error("template must contain {PLACEHOLDER} exactly once, found {0}")]
    Placeholder(usize),
    #[error("cannot read template: {0}")]
    Io(#[from] std::io::Error),
    #[error("text was not rendered from this template")]
    NotRendered,
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PromptTemplate {
    body: String,
}

impl Default for PromptTemplate {
    fn default() -> Self {
        Self {
            body: DEFAULT_LINES.join("\n"),
        }
    }
}

impl PromptTemplate {
    pub fn new(body: impl Into<String>) -> Result<Self, PromptError> {
        let body = body.into();
        match body.matches(PLACEHOLDER).count() {
            1 => Ok(Self { body }),
            n => Err(PromptError::Placeholder(n)),
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, PromptError> {
        Self::new(std::fs::read_to_string(path)?)
    }

    pub fn body(&self) -> &str {
        &self.body
    }

    fn halves(&self) -> (&str, &str) {
        self.body.split_once(PLACEHOLDER).expect("placeholder checked on construction")
    }

    pub fn render(&self, schemas: &[ToolSchema]) -> String {
        let (before, after) = self.halves();
        format!("{before}{}{after}", schemas_to_json(schemas))
    }

    /// The text substituted for the placeholder in `rendered`.
    pub fn extract_tool_list<'a>(&self, rendered: &'a str) -> Option<&'a str> {
        let (before, after) = self.halves();
        rendered.strip_prefix(before)?.strip_suffix(after)
    }

    pub fn extract_schemas(&self, rendered: &str) -> Result<Vec<ToolSchema>, PromptError> {
        let list = self.extract_tool_list(rendered).ok_or(PromptError::NotRendered)?;
        Ok(parse_tool_schemas(list)?)
    }
}

/// Renders the default template.
pub fn render_system_prompt(schemas: &[ToolSchema]) -> String {
    PromptTemplate::default().render(schemas)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_list() {
        let p = render_system_prompt(&[]);
        assert!(p.ends_with("that you can invoke: []"));
        assert!(p.starts_with("A conversation between User and Assistant"));
        assert_eq!(p.lines().count(), 15);
    }

    #[test]
    fn round_trip() {
        let schemas = parse_tool_schemas(r#"[{"name": "f", "description": "d", "parameters": {"x": {"type": "int", "required": false}}}]"#).unwrap();
        let t = PromptTemplate::default();
        let p = t.render(&schemas);
        assert!(p.contains("\"name\": \"f\""));
        assert_eq!(t.extract_schemas(&p).unwrap(), schemas);
        assert!(matches!(t.extract_schemas("other"), Err(PromptError::NotRendered)));
    }

    #[test]
    fn placeholder_count_checked() {
        assert!(matches!(PromptTemplate::new("no tools"), Err(PromptError::Placeholder(0))));
        assert!(matches!(PromptTemplate::new("{{Tool List}} {{Tool List}}"), Err(PromptError::Placeholder(2))));
        let t = PromptTemplate::new("Tools:\n{{Tool List}}\nEnd").unwrap();
        assert_eq!(t.render(&[]), "Tools:\n[]\nEnd");
    }
}
