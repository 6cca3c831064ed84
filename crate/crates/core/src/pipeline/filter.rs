use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::parallel::{map_slice, Execution};

use super::{RecordError, Sample};

/// Counts from one filtering pass. `input` counts non-blank lines;
/// `dropped_malformed` covers lines that are not a record of the expected
/// shape at all.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub input: usize,
    pub kept: usize,
    pub dropped_bad_call: usize,
    pub dropped_bad_schema: usize,
    pub dropped_malformed: usize,
}

impl FilterReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

impl fmt::Display for FilterReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows = [
            ("input", self.input),
            ("kept", self.kept),
            ("dropped_bad_call", self.dropped_bad_call),
            ("dropped_bad_schema", self.dropped_bad_schema),
            ("dropped_malformed", self.dropped_malformed),
        ];
        for (name, n) in rows {
            writeln!(f, "{name:<20}{n:>10}")?;
        }
        Ok(())
    }
}

/// Keeps the records whose ground truth parses and whose schemas parse.
/// Output order follows input order.
pub fn filter_records<S: AsRef<str> + Sync>(lines: &[S], exec: Execution) -> (Vec<Sample>, FilterReport) {
    let results = map_slice(exec, lines, |line| {
        let line = line.as_ref();
        if line.trim().is_empty() {
            None
        } else {
            Some(Sample::from_json(line))
        }
    });
    let mut report = FilterReport::default();
    let mut kept = Vec::new();
    for r in results.into_iter().flatten() {
        report.input += 1;
        match r {
            Ok(s) => {
                report.kept += 1;
                kept.push(s);
            }
            Err(RecordError::BadCall(_)) => report.dropped_bad_call += 1,
            Err(RecordError::BadSchema(_)) => report.dropped_bad_schema += 1,
            Err(RecordError::Malformed(_)) => report.dropped_malformed += 1,
        }
    }
    (kept, report)
}

/// [`filter_records`] over a reader. Only I/O failures are errors.
pub fn filter_corpus(reader: impl BufRead, exec: Execution) -> std::io::Result<(Vec<Sample>, FilterReport)> {
    let lines = reader.lines().collect::<Result<Vec<_>, _>>()?;
    Ok(filter_records(&lines, exec))
}
