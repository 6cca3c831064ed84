use std::fmt::Write as _;

use crate::parallel::map_slice;

use super::{train, SimConfig, SimError, ToyTask};

#[derive(Clone, Debug, PartialEq)]
pub struct AblationCell {
    pub midpoint: u64,
    pub kappa: f64,
    /// Exact-match rate at the last step.
    pub final_exact_match: f64,
    /// Mean of the per-step mean reward (area under the reward curve with
    /// unit step width, divided by the number of steps).
    pub auc_reward: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AblationReport {
    pub cells: Vec<AblationCell>,
}

impl AblationReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("midpoint,kappa,final_exact_match,auc_reward\n");
        for c in &self.cells {
            let _ = writeln!(out, "{},{},{},{}", c.midpoint, c.kappa, c.final_exact_match, c.auc_reward);
        }
        out
    }
}

/// Trains once per (midpoint, kappa) pair, midpoint-major, all with the same
/// seed and otherwise identical configuration.
pub fn schedule_ablation(
    task: &ToyTask,
    midpoints: &[u64],
    kappas: &[f64],
    cfg: &SimConfig,
) -> Result<AblationReport, SimError> {
    let grid: Vec<(u64, f64)> = midpoints
        .iter()
        .flat_map(|m| kappas.iter().map(move |k| (*m, *k)))
        .collect();
    let runs = map_slice(cfg.execution, &grid, |(m, k)| {
        let mut run = cfg.clone();
        run.reward.midpoint = *m;
        run.reward.kappa = *k;
        let log = train(task, &run)?;
        let final_exact_match = log.last().map(|r| r.exact_match_rate).unwrap_or(0.0);
        let auc_reward = if log.records.is_empty() {
            0.0
        } else {
            log.records.iter().map(|r| r.mean_reward).sum::<f64>() / log.records.len() as f64
        };
        Ok(AblationCell {
            midpoint: *m,
            kappa: *k,
            final_exact_match,
            auc_reward,
        })
    });
    Ok(AblationReport {
        cells: runs.into_iter().collect::<Result<_, SimError>>()?,
    })
}
