use super::{parse_answer, AnswerSet};

pub const THINK_OPEN: &str = "<think>";
pub const THINK_CLOSE: &str = "</think>";
pub const ANSWER_OPEN: &str = "<answer>";
pub const ANSWER_CLOSE: &str = "</answer>";

/// A model completion split into its reasoning and answer segments.
#[derive(Clone, Debug, Default)]
pub struct StructuredResponse {
    pub raw: String,
    pub think: Option<String>,
    pub answer: Option<String>,
    pub parsed: Option<AnswerSet>,
}

impl StructuredResponse {
    /// Treats the whole text as an answer segment. Used for untagged
    /// predictions in offline evaluation.
    pub fn bare(raw: &str) -> Self {
        Self {
            raw: raw.to_string(),
            think: None,
            answer: Some(raw.to_string()),
            parsed: parse_answer(raw.trim()).ok(),
        }
    }

    pub fn is_well_formed(&self) -> bool {
        self.think.is_some() && self.answer.is_some()
    }
}

fn single_occurrence(haystack: &str, tag: &str) -> Option<usize> {
    let first = haystack.find(tag)?;
    match haystack[first + tag.len()..].find(tag) {
        Some(_) => None,
        None => Some(first),
    }
}

/// Extracts `<think>` and `<answer>` segments.
///
/// Segments are set only when each of the four tags occurs exactly once and
/// they appear in the order think-open, think-close, answer-open,
/// answer-close. The answer segment is then parsed as a call list; a parse
/// failure leaves `parsed` unset.
pub fn parse_structured_response(raw: &str) -> StructuredResponse {
    let mut out = StructuredResponse {
        raw: raw.to_string(),
        ..Default::default()
    };
    let positions = [THINK_OPEN, THINK_CLOSE, ANSWER_OPEN, ANSWER_CLOSE].map(|t| single_occurrence(raw, t));
    let [Some(to), Some(tc), Some(ao), Some(ac)] = positions else {
        return out;
    };
    if !(to + THINK_OPEN.len() <= tc && tc + THINK_CLOSE.len() <= ao && ao + ANSWER_OPEN.len() <= ac) {
        return out;
    }
    let answer = &raw[ao + ANSWER_OPEN.len()..ac];
    out.think = Some(raw[to + THINK_OPEN.len()..tc].to_string());
    out.answer = Some(answer.to_string());
    out.parsed = parse_answer(answer.trim()).ok();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_formed() {
        let r = parse_structured_response("<think>t</think><answer>[f(a=1)]</answer>");
        assert_eq!(r.think.as_deref(), Some("t"));
        assert_eq!(r.answer.as_deref(), Some("[f(a=1)]"));
        assert_eq!(r.parsed.unwrap().calls.len(), 1);
    }

    #[test]
    fn wrong_order() {
        let r = parse_structured_response("<answer>x</answer><think>t</think>");
        assert!(r.think.is_none() && r.answer.is_none() && r.parsed.is_none());
    }

    #[test]
    fn unparseable_answer() {
        let r = parse_structured_response("<think>t</think><answer>not a call</answer>");
        assert_eq!(r.answer.as_deref(), Some("not a call"));
        assert!(r.parsed.is_none());
    }

    #[test]
    fn duplicated_or_missing_tags() {
        assert!(!parse_structured_response("<think>t</think><think></think><answer>x</answer>").is_well_formed());
        assert!(!parse_structured_response("<think>t<answer>x</answer>").is_well_formed());
        assert!(!parse_structured_response("").is_well_formed());
    }

    #[test]
    fn segments_are_verbatim() {
        let r = parse_structured_response("pre <think> a\nb </think> mid <answer> [g()] </answer> post");
        assert_eq!(r.think.as_deref(), Some(" a\nb "));
        assert_eq!(r.answer.as_deref(), Some(" [g()] "));
        assert!(r.parsed.is_some());
    }

    #[test]
    fn interleaved_tags_rejected() {
        // answer opens before think closes
        let r = parse_structured_response("<think><answer></think>x</answer>");
        assert!(!r.is_well_formed());
    }
}
