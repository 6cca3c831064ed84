//! Rule-based rewards and GRPO tooling for tool-calling policies.
//!
//! * [`toolcall`] parses and prints tool invocations.
//! * [`reward`] scores completions with a progressive general→strict reward.
//! * [`grpo`] holds the group-relative advantage and clipped-surrogate math.
//! * [`sim`] trains a tabular policy end to end at desk scale.
//! * [`pipeline`] filters, masks and augments JSONL corpora.
//! * [`eval`] computes AST accuracy, F1 and toolset overlap.
//! * [`prompt`] renders the tool-use system prompt.

pub mod eval;
pub mod grpo;
pub mod parallel;
pub mod pipeline;
pub mod policy;
pub mod prompt;
pub mod reward;
pub mod sim;
pub mod toolcall;
