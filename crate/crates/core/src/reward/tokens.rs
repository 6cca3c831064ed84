use std::collections::BTreeSet;

use super::{RewardConfig, RewardError};

/// Set of delimiter-free tokens extracted from a response.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TokenBag {
    pub tokens: BTreeSet<String>,
}

impl TokenBag {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn intersection_len(&self, other: &TokenBag) -> usize {
        self.tokens.intersection(&other.tokens).count()
    }
}

/// Splits on any delimiter character or whitespace, dropping empty pieces.
pub fn tokenize(text: &str, cfg: &RewardConfig) -> TokenBag {
    TokenBag {
        tokens: text
            .split(|c: char| cfg.is_delimiter(c))
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .collect(),
    }
}

/// `floor + |Y ∩ Y*| / |Y*|` where `Y*` are the ground-truth tokens.
pub fn general_reward(y: &str, y_star: &str, cfg: &RewardConfig) -> Result<f64, RewardError> {
    let truth = tokenize(y_star, cfg);
    if truth.is_empty() {
        return Err(RewardError::DegenerateGroundTruth);
    }
    let hits = tokenize(y, cfg).intersection_len(&truth) as f64;
    let total = truth.len() as f64;
    // (hits + floor·total) / total rounds once, so 4 of 5 tokens gives exactly 0.3
    Ok((hits + cfg.general_floor * total) / total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bag(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tokenize_call() {
        let cfg = RewardConfig::default();
        let t = tokenize(r#"[get_weather(city="Paris", unit="C")]"#, &cfg);
        assert_eq!(t.tokens, bag(&["get_weather", "city", "Paris", "unit", "C"]));
        assert!(tokenize("", &cfg).is_empty());
        assert_eq!(tokenize("a=a,a", &cfg).tokens, bag(&["a"]));
        assert_eq!(tokenize("x.y: 'z'\n\tw", &cfg).tokens, bag(&["x", "y", "z", "w"]));
    }

    #[test]
    fn general_examples() {
        let cfg = RewardConfig::default();
        let paris = r#"[get_weather(city="Paris", unit="C")]"#;
        let london = r#"[get_weather(city="London", unit="C")]"#;
        assert_eq!(general_reward(paris, paris, &cfg).unwrap(), 0.5);
        assert_eq!(general_reward("nothing shared", paris, &cfg).unwrap(), -0.5);
        assert_eq!(general_reward(london, paris, &cfg).unwrap(), 0.3);
        assert_eq!(general_reward(paris, "[()]", &cfg), Err(RewardError::DegenerateGroundTruth));
    }
}
