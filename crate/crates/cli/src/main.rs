mod config;
mod io;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use callreward::eval::{evaluate, overlap_matrix, read_eval_records};
use callreward::parallel::Execution;
use callreward::pipeline::{
    augment_multi_turn, filter_records, mask_sample, read_samples, samples_to_jsonl, unmask_sample, MaskMapping,
    PipelineError, StatsTable, Strategy,
};
use callreward::reward::compute_reward;
use callreward::sim::{bundled, schedule_ablation, train, Schedule, ToyTask};
use callreward::toolcall::parse_answer;
use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};
use indexmap::IndexMap;

use config::FileConfig;

const NAMES: [&str; 9] = ["filter", "mask", "augment", "reward", "train-sim", "ablate", "eval", "overlap", "stats"];

#[derive(Debug)]
pub enum CliError {
    /// Bad input data or flag values. Exit code 1.
    Invalid(String),
    /// Unreadable or unwritable files. Exit code 2.
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(e.to_string())
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Io(_) => CliError::Io(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

/// Tool-call reward, GRPO simulation and corpus tooling.
#[derive(Debug, Parser)]
#[command(name = "callreward", version, args_override_self = true)]
struct Cli {
    /// JSON file supplying config sections and flag defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for randomized subcommands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress all non-error output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Drop records whose calls or schemas do not parse.
    #[command(args_override_self = true)]
    Filter {
        #[arg(long = "in")]
        input: String,
        #[arg(long)]
        out: String,
        /// Where to write the drop counts as JSON.
        #[arg(long)]
        report: Option<String>,
    },
    /// Replace tool and parameter names with func_N / param_N.
    #[command(args_override_self = true)]
    Mask {
        #[arg(long = "in")]
        input: String,
        #[arg(long)]
        out: String,
        /// Per-sample name mappings, keyed by sample id.
        #[arg(long)]
        mapping: String,
        /// Read masked samples and restore the original names from --mapping.
        #[arg(long)]
        reverse: bool,
    },
    /// Append multi-turn samples derived from the single-turn ones.
    #[command(args_override_self = true)]
    Augment {
        #[arg(long = "in")]
        input: String,
        #[arg(long)]
        out: String,
        #[arg(long, value_delimiter = ',', default_value = "combine,tool_removal,param_clarification,result_validation")]
        strategies: Vec<Strategy>,
        /// Where to write per-strategy counts as JSON.
        #[arg(long)]
        report: Option<String>,
    },
    /// Score one completion against a ground-truth call list.
    #[command(args_override_self = true)]
    Reward {
        #[arg(long)]
        pred: String,
        #[arg(long)]
        gt: String,
        #[arg(long)]
        step: u64,
        /// Print every reward component, not just the final value.
        #[arg(long)]
        breakdown: bool,
    },
    /// Train the tabular policy and write the per-step log.
    #[command(name = "train-sim", args_override_self = true)]
    TrainSim {
        /// Task JSON file, or bundled:default / bundled:sparse / bundled:single.
        #[arg(long)]
        task: String,
        #[arg(long)]
        out_log: String,
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long, value_parser = parse_schedule)]
        schedule: Option<Schedule>,
    },
    /// Train once per (midpoint, kappa) pair and tabulate the outcomes.
    #[command(args_override_self = true)]
    Ablate {
        #[arg(long)]
        task: String,
        #[arg(long, value_delimiter = ',', required = true)]
        midpoints: Vec<u64>,
        #[arg(long, value_delimiter = ',', required = true)]
        kappas: Vec<f64>,
        #[arg(long)]
        out: String,
        #[arg(long)]
        steps: Option<u64>,
    },
    /// AST accuracy and function / parameter F1 over prediction records.
    #[command(args_override_self = true)]
    Eval {
        #[arg(long)]
        pred: String,
        #[arg(long)]
        out: String,
        /// Count parameters by name only when computing parameter F1.
        #[arg(long)]
        names_only: bool,
    },
    /// Pairwise toolset overlap between named inventories.
    #[command(args_override_self = true)]
    Overlap {
        /// JSON object mapping dataset name to a list of tool names.
        #[arg(long)]
        inventories: String,
        #[arg(long)]
        out: String,
    },
    /// Sample counts by source and turn kind; one column per --in.
    #[command(args_override_self = true)]
    Stats {
        #[arg(long = "in", required = true)]
        input: Vec<String>,
        #[arg(long)]
        json: bool,
    },
}

fn parse_schedule(s: &str) -> Result<Schedule, String> {
    match s {
        "sigmoid" => Ok(Schedule::Sigmoid),
        "strict_only" => Ok(Schedule::StrictOnly),
        "general_only" => Ok(Schedule::GeneralOnly),
        _ => Err(format!("unknown schedule {s:?}; expected sigmoid, strict_only or general_only")),
    }
}

/// Finds `--config` before clap runs so its flag defaults can be spliced in.
fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(v));
        }
    }
    None
}

/// Inserts config defaults right after the subcommand name, so anything the
/// user typed later overrides them.
fn splice_defaults(args: Vec<OsString>, cfg: &FileConfig) -> Result<Vec<OsString>, CliError> {
    let Some(pos) = args.iter().skip(1).position(|a| NAMES.contains(&a.to_string_lossy().as_ref())) else {
        return Ok(args);
    };
    let pos = pos + 1;
    let name = args[pos].to_string_lossy().into_owned();
    let extra = cfg.default_args(&name)?;
    let mut out = args[..=pos].to_vec();
    out.extend(extra.into_iter().map(OsString::from));
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os().collect()))
}

/// Runs one invocation and returns the process exit code.
fn run(args: Vec<OsString>) -> u8 {
    let cfg = match config_path(&args) {
        Some(p) => match FileConfig::load(&p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return e.code();
            }
        },
        None => FileConfig::default(),
    };
    let args = match splice_defaults(args, &cfg) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.code();
        }
    };
    let cli = match Cli::command().try_get_matches_from(args).and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(&cli, &cfg) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

/// Writes a human-readable summary to stderr unless `--quiet`.
fn note(cli: &Cli, text: &str) {
    if !cli.quiet {
        eprint!("{text}");
    }
}

fn require_seed(cli: &Cli, command: &str) -> Result<u64, CliError> {
    cli.seed
        .ok_or_else(|| CliError::Invalid(format!("{command} is randomized and needs an explicit --seed")))
}

fn load_task(spec: &str) -> Result<ToyTask, CliError> {
    if let Some(name) = spec.strip_prefix("bundled:") {
        return bundled(name).ok_or_else(|| CliError::Invalid(format!("no bundled task named {name:?}")));
    }
    ToyTask::from_json(&io::read_text(spec)?).map_err(invalid)
}

fn read_corpus(path: &str) -> Result<Vec<callreward::pipeline::Sample>, CliError> {
    let text = io::read_text(path)?;
    Ok(read_samples(text.as_bytes())?)
}

fn dispatch(cli: &Cli, cfg: &FileConfig) -> Result<(), CliError> {
    match &cli.command {
        Command::Filter { input, out, report } => {
            let text = io::read_text(input)?;
            let lines: Vec<&str> = text.lines().collect();
            let (kept, rep) = filter_records(&lines, Execution::Parallel);
            io::write_text(out, &samples_to_jsonl(&kept))?;
            if let Some(path) = report {
                io::write_text(path, &format!("{}\n", rep.to_json()))?;
            }
            note(cli, &rep.to_string());
        }
        Command::Mask {
            input,
            out,
            mapping,
            reverse,
        } => {
            let corpus = read_corpus(input)?;
            if *reverse {
                let mappings: IndexMap<String, MaskMapping> =
                    serde_json::from_str(&io::read_text(mapping)?).map_err(|e| invalid(format!("{mapping}: {e}")))?;
                let mut restored = Vec::with_capacity(corpus.len());
                for s in &corpus {
                    let m = mappings
                        .get(&s.id)
                        .ok_or_else(|| CliError::Invalid(format!("no mapping for sample {:?}", s.id)))?;
                    restored.push(unmask_sample(s, m));
                }
                io::write_text(out, &samples_to_jsonl(&restored))?;
                note(cli, &format!("unmasked {} samples\n", restored.len()));
            } else {
                let mut masked = Vec::with_capacity(corpus.len());
                let mut mappings = IndexMap::new();
                for s in &corpus {
                    let (m, map) = mask_sample(s).map_err(invalid)?;
                    if mappings.insert(s.id.clone(), map).is_some() {
                        return Err(CliError::Invalid(format!("duplicate sample id {:?}", s.id)));
                    }
                    masked.push(m);
                }
                io::write_text(out, &samples_to_jsonl(&masked))?;
                let text = serde_json::to_string_pretty(&mappings).map_err(invalid)?;
                io::write_text(mapping, &format!("{text}\n"))?;
                note(cli, &format!("masked {} samples\n", masked.len()));
            }
        }
        Command::Augment {
            input,
            out,
            strategies,
            report,
        } => {
            let seed = require_seed(cli, "augment")?;
            let corpus = read_corpus(input)?;
            let mut all = corpus.clone();
            let mut reports = Vec::new();
            let mut seen = BTreeSet::new();
            for s in strategies {
                if !seen.insert(*s) {
                    continue;
                }
                let (made, rep) = augment_multi_turn(&corpus, *s, seed);
                all.extend(made);
                reports.push(rep);
            }
            io::write_text(out, &samples_to_jsonl(&all))?;
            if let Some(path) = report {
                let text = serde_json::to_string(&reports).map_err(invalid)?;
                io::write_text(path, &format!("{text}\n"))?;
            }
            let mut summary = String::new();
            for r in &reports {
                let _ = writeln!(
                    summary,
                    "{:<20} produced {:>6}  skipped {:>6}",
                    r.strategy.as_str(),
                    r.produced,
                    r.skipped
                );
            }
            note(cli, &summary);
        }
        Command::Reward { pred, gt, step, breakdown } => {
            let pred_raw = io::read_text(pred)?;
            let gt_raw = io::read_text(gt)?;
            let gt_text = gt_raw.trim();
            let gt_calls = parse_answer(gt_text).map_err(|e| invalid(format!("{gt}: {e}")))?;
            let b = compute_reward(&pred_raw, &gt_calls, gt_text, *step, &cfg.reward()).map_err(invalid)?;
            let text = if *breakdown {
                serde_json::to_string(&b).map_err(invalid)?
            } else {
                serde_json::to_string(&serde_json::json!({ "final": b.final_reward })).map_err(invalid)?
            };
            if !cli.quiet {
                println!("{text}");
            }
        }
        Command::TrainSim {
            task,
            out_log,
            steps,
            schedule,
        } => {
            let seed = require_seed(cli, "train-sim")?;
            let task = load_task(task)?;
            let mut sim = cfg.sim();
            sim.seed = seed;
            if let Some(n) = steps {
                sim.steps = *n;
            }
            if let Some(s) = schedule {
                sim.schedule = *s;
            }
            let log = train(&task, &sim).map_err(invalid)?;
            io::write_text(out_log, &log.to_jsonl())?;
            if let Some(last) = log.last() {
                note(
                    cli,
                    &format!(
                        "step {}: mean reward {:.4}, exact match {:.4}\n",
                        last.step, last.mean_reward, last.exact_match_rate
                    ),
                );
            }
        }
        Command::Ablate {
            task,
            midpoints,
            kappas,
            out,
            steps,
        } => {
            let seed = require_seed(cli, "ablate")?;
            let task = load_task(task)?;
            let mut sim = cfg.sim();
            sim.seed = seed;
            if let Some(n) = steps {
                sim.steps = *n;
            }
            let report = schedule_ablation(&task, midpoints, kappas, &sim).map_err(invalid)?;
            io::write_text(out, &report.to_csv())?;
            note(cli, &format!("{} runs\n", report.cells.len()));
        }
        Command::Eval { pred, out, names_only } => {
            let text = io::read_text(pred)?;
            let records = read_eval_records(text.as_bytes()).map_err(invalid)?;
            let mut ecfg = cfg.eval();
            ecfg.param_f1_names_only |= *names_only;
            let report = evaluate(&records, &ecfg).map_err(invalid)?;
            io::write_text(out, &format!("{}\n", report.to_json()))?;
            note(cli, &report.to_text());
        }
        Command::Overlap { inventories, out } => {
            let inv: IndexMap<String, BTreeSet<String>> = serde_json::from_str(&io::read_text(inventories)?)
                .map_err(|e| invalid(format!("{inventories}: {e}")))?;
            let m = overlap_matrix(&inv).map_err(invalid)?;
            io::write_text(out, &m.to_csv())?;
        }
        Command::Stats { input, json } => {
            let mut table = StatsTable::new();
            for path in input {
                let corpus = read_corpus(path)?;
                let name = Path::new(path)
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .filter(|_| path != "-")
                    .unwrap_or_else(|| "stdin".to_string());
                table.add_stage(name, &corpus);
            }
            if !cli.quiet {
                if *json {
                    println!("{}", table.to_json());
                } else {
                    print!("{}", table.to_text());
                }
            }
        }
    }
    Ok(())
}
