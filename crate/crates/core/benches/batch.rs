use std::io::BufReader;

use callreward::parallel::Execution;
use callreward::pipeline::read_samples;
use callreward::reward::{score_batch, RewardConfig, ScoreItem};
use callreward::sim::{bundled, schedule_ablation, SimConfig};
use callreward::toolcall::print_call_expression;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

// Pairs every fixture sample with itself and with its neighbour, repeated to
// a batch large enough for the pool to matter.
fn items() -> Vec<ScoreItem> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/xlam100.jsonl");
    let file = std::fs::File::open(path).expect("fixture");
    let samples = read_samples(BufReader::new(file)).expect("fixture parses");
    let mut out = Vec::new();
    for _ in 0..20 {
        for (i, s) in samples.iter().enumerate() {
            let other = &samples[(i + 1) % samples.len()];
            for pred in [&s.gt, &other.gt] {
                out.push(ScoreItem {
                    pred_raw: format!("<think>plan</think><answer>{}</answer>", print_call_expression(pred)),
                    gt: s.gt.clone(),
                    gt_text: s.gt_text.clone(),
                });
            }
        }
    }
    out
}

fn scoring(c: &mut Criterion) {
    let items = items();
    let cfg = RewardConfig::default();
    let mut group = c.benchmark_group("score_batch");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, exec| {
            b.iter(|| score_batch(&items, 40, &cfg, *exec))
        });
    }
    group.finish();
}

fn ablation(c: &mut Criterion) {
    let task = bundled("default").unwrap();
    let mut group = c.benchmark_group("schedule_ablation");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = SimConfig { steps: 60, execution: exec, ..Default::default() };
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| schedule_ablation(&task, &[10, 25], &[0.1, 0.2], cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, scoring, ablation);
criterion_main!(benches);
