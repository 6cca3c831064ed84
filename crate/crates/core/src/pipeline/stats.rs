use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Sample, Source};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsRow {
    pub source: Source,
    pub multi_turn: bool,
    /// One count per stage.
    pub counts: Vec<usize>,
}

/// Sample counts per (source, single/multi-turn) row and pipeline stage.
/// Every source appears in both turn kinds, so an empty corpus gives a grid
/// of zeros.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsTable {
    pub stages: Vec<String>,
    pub rows: Vec<StatsRow>,
}

impl Default for StatsTable {
    fn default() -> Self {
        let rows = Source::ALL
            .iter()
            .flat_map(|&source| {
                [false, true].map(|multi_turn| StatsRow {
                    source,
                    multi_turn,
                    counts: Vec::new(),
                })
            })
            .collect();
        Self { stages: Vec::new(), rows }
    }
}

impl StatsTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a column counting `corpus`.
    pub fn add_stage(&mut self, name: impl Into<String>, corpus: &[Sample]) {
        self.stages.push(name.into());
        for row in &mut self.rows {
            let n = corpus
                .iter()
                .filter(|s| s.source == row.source && s.multi_turn == row.multi_turn)
                .count();
            row.counts.push(n);
        }
    }

    pub fn count(&self, source: Source, multi_turn: bool, stage: usize) -> usize {
        self.rows
            .iter()
            .find(|r| r.source == source && r.multi_turn == multi_turn)
            .map_or(0, |r| r.counts[stage])
    }

    pub fn total(&self, stage: usize) -> usize {
        self.rows.iter().map(|r| r.counts[stage]).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("table serializes")
    }

    /// Aligned text grid with a total line.
    pub fn to_text(&self) -> String {
        let width = self.stages.iter().map(String::len).max().unwrap_or(0).max(8) + 2;
        let mut out = format!("{:<12}{:<8}", "source", "turns");
        for s in &self.stages {
            let _ = write!(out, "{s:>width$}");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{:<12}{:<8}", r.source.as_str(), if r.multi_turn { "multi" } else { "single" });
            for c in &r.counts {
                let _ = write!(out, "{c:>width$}");
            }
            out.push('\n');
        }
        let _ = write!(out, "{:<20}", "total");
        for i in 0..self.stages.len() {
            let _ = write!(out, "{:>width$}", self.total(i));
        }
        out.push('\n');
        out
    }
}

/// Single-stage table of `corpus`.
pub fn corpus_stats(corpus: &[Sample]) -> StatsTable {
    let mut t = StatsTable::new();
    t.add_stage("samples", corpus);
    t
}
