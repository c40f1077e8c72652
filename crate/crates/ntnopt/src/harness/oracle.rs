//! Full-information sweeps and regret accounting.
//!
//! The sweep evaluates every arm on every snapshot of the training stream,
//! yielding per-step loss/violation vectors. The replay then reruns the
//! learner over the same stream with identical seeding (so the trajectory
//! matches a real training run) while also tracking its exact expected loss
//! and the uniform policy's, both measured against the per-step oracle.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use crate::bandit::{self, OracleStep, PolicyState};
use crate::harness::normalizer::CostNormalizerSet;
use crate::harness::run::{EvalSetting, Experiment, SnapshotEvaluator, SnapshotSource};
use crate::seeds::{self, Stream};
use crate::{Error, Result};

/// Loss/violation matrices for one hour's training stream.
#[derive(Debug, Clone)]
pub struct HourSweep {
    pub hour: u8,
    /// Snapshot indices in stream order (the training shuffle).
    pub order: Vec<u32>,
    /// Normalized cost per [step][arm].
    pub costs: Vec<Vec<f64>>,
    /// Violation per [step][arm].
    pub violations: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct OracleSweep {
    pub hours: Vec<HourSweep>,
}

impl OracleSweep {
    pub fn total_steps(&self) -> usize {
        self.hours.iter().map(|h| h.order.len()).sum()
    }
}

/// Evaluate every arm on every training-stream snapshot. Warns on stderr
/// when the extrapolated runtime exceeds `budget_s`.
pub fn oracle_sweep(
    exp: &Experiment,
    source: &dyn SnapshotSource,
    normalizers: &CostNormalizerSet,
    budget_s: Option<f64>,
) -> Result<OracleSweep> {
    let n_arms = exp.arms.len();
    let settings: Vec<EvalSetting> = (0..n_arms)
        .map(|arm| EvalSetting::policy(exp, exp.arms.theta(arm)))
        .collect();

    let mut hours = Vec::with_capacity(24);
    let mut timed_first = false;
    for hour in 0..24u8 {
        let snapshots = source.load_hour(hour)?;
        let order = exp.train_order(hour);
        if !timed_first && !order.is_empty() {
            timed_first = true;
            if let Some(budget) = budget_s {
                let started = Instant::now();
                let evaluator = SnapshotEvaluator::new(exp, &snapshots[order[0] as usize]);
                for setting in &settings {
                    evaluator.outcome(setting, normalizers.hour(hour))?;
                }
                let per_step = started.elapsed().as_secs_f64();
                let estimate = per_step * (exp.train_count() as f64) * 24.0;
                if estimate > budget {
                    eprintln!(
                        "oracle sweep: estimated {estimate:.0}s exceeds the {budget:.0}s budget"
                    );
                }
            }
        }
        let rows: Result<Vec<(Vec<f64>, Vec<f64>)>> = order
            .par_iter()
            .map(|&index| {
                let evaluator = SnapshotEvaluator::new(exp, &snapshots[index as usize]);
                let mut costs = Vec::with_capacity(n_arms);
                let mut violations = Vec::with_capacity(n_arms);
                for setting in &settings {
                    let outcome = evaluator.outcome(setting, normalizers.hour(hour))?;
                    costs.push(outcome.cost);
                    violations.push(outcome.violation);
                }
                Ok((costs, violations))
            })
            .collect();
        let (costs, violations) = rows?.into_iter().unzip();
        hours.push(HourSweep {
            hour,
            order,
            costs,
            violations,
        });
    }
    Ok(OracleSweep { hours })
}

/// One pooled step of the replay (hour-major stream order).
#[derive(Debug, Clone, Copy)]
pub struct ReplayStep {
    pub hour: u8,
    pub oracle_loss: f64,
    pub oracle_feasible: bool,
    /// Cost of the arm the learner actually sampled.
    pub realized_cost: f64,
    pub realized_violation: f64,
    /// Exact expected cost of the learner's distribution, `x_t . f_t`.
    pub expected_cost: f64,
    /// Expected cost of the uniform distribution, `mean(f_t)`.
    pub uniform_cost: f64,
}

/// Regret accounting of the replayed learner against the per-step oracle.
#[derive(Debug, Clone)]
pub struct RegretReport {
    pub steps: Vec<ReplayStep>,
    /// Cumulative expected regret of the learner.
    pub policy_regret: Vec<f64>,
    /// Cumulative expected regret of the uniform policy.
    pub uniform_regret: Vec<f64>,
    /// Cumulative realized regret of the learner (sampled arms).
    pub realized_regret: Vec<f64>,
    /// Cumulative realized violation of the learner.
    pub violation: Vec<f64>,
    /// Steps where no zero-violation arm existed (oracle fell back to the
    /// minimum-violation arms).
    pub infeasible_steps: usize,
}

/// Replay the learner over the sweep with training-identical seeding.
pub fn replay_with_sweep(exp: &Experiment, sweep: &OracleSweep) -> Result<RegretReport> {
    let per_hour = exp.cfg.bandit.per_hour_contexts;
    let horizon = if per_hour {
        exp.train_count() as usize
    } else {
        exp.train_count() as usize * 24
    };
    let hyper = exp.hyperparams(horizon);
    let n_arms = exp.arms.len();

    let mut states: Vec<PolicyState> = if per_hour {
        (0..24)
            .map(|_| PolicyState::new_uniform(n_arms, hyper))
            .collect::<Result<_>>()?
    } else {
        vec![PolicyState::new_uniform(n_arms, hyper)?]
    };
    let mut sequential_rng =
        seeds::rng_from(seeds::stream_seed(exp.cfg.run.seed, Stream::ArmSampling));

    let mut steps = Vec::with_capacity(sweep.total_steps());
    for hour_sweep in &sweep.hours {
        let hour = hour_sweep.hour;
        let oracle: Vec<OracleStep> =
            bandit::oracle_policy(&hour_sweep.costs, &hour_sweep.violations);
        let mut hour_rng = seeds::rng_from(seeds::mix(
            seeds::stream_seed(exp.cfg.run.seed, Stream::ArmSampling),
            u64::from(hour),
        ));
        let state_idx = if per_hour { hour as usize } else { 0 };
        for (t, oracle_step) in oracle.iter().enumerate() {
            let costs = &hour_sweep.costs[t];
            let violations = &hour_sweep.violations[t];
            let state = &mut states[state_idx];
            let arm = if per_hour {
                state.sample_action(&mut hour_rng)
            } else {
                state.sample_action(&mut sequential_rng)
            };
            let expected_cost: f64 =
                state.x.iter().zip(costs).map(|(&p, &c)| p * c).sum();
            let uniform_cost: f64 = costs.iter().sum::<f64>() / n_arms as f64;
            steps.push(ReplayStep {
                hour,
                oracle_loss: oracle_step.loss,
                oracle_feasible: oracle_step.feasible,
                realized_cost: costs[arm],
                realized_violation: violations[arm],
                expected_cost,
                uniform_cost,
            });
            state.update(arm, costs[arm], violations[arm]);
        }
    }

    let oracle_losses: Vec<f64> = steps.iter().map(|s| s.oracle_loss).collect();
    let realized: Vec<f64> = steps.iter().map(|s| s.realized_cost).collect();
    let violations: Vec<f64> = steps.iter().map(|s| s.realized_violation).collect();
    let expected: Vec<f64> = steps.iter().map(|s| s.expected_cost).collect();
    let uniform: Vec<f64> = steps.iter().map(|s| s.uniform_cost).collect();

    let (realized_regret, violation) =
        bandit::regret_and_violation(&realized, &violations, &oracle_losses);
    let (policy_regret, _) =
        bandit::regret_and_violation(&expected, &violations, &oracle_losses);
    let (uniform_regret, _) =
        bandit::regret_and_violation(&uniform, &violations, &oracle_losses);
    let infeasible_steps = steps.iter().filter(|s| !s.oracle_feasible).count();

    Ok(RegretReport {
        steps,
        policy_regret,
        uniform_regret,
        realized_regret,
        violation,
        infeasible_steps,
    })
}

/// Replay a uniform-random policy over the sweep (for realized-cost
/// comparisons; its expected curve is already in the report).
pub fn uniform_realized_costs(exp: &Experiment, sweep: &OracleSweep) -> Vec<f64> {
    let n_arms = exp.arms.len();
    let mut rng = seeds::rng_from(seeds::mix(
        seeds::stream_seed(exp.cfg.run.seed, Stream::ArmSampling),
        0x554E_4946,
    ));
    let mut costs = Vec::with_capacity(sweep.total_steps());
    for hour_sweep in &sweep.hours {
        for step_costs in &hour_sweep.costs {
            let arm = rng.gen_range(0..n_arms);
            costs.push(step_costs[arm]);
        }
    }
    costs
}

/// Write the replay as CSV: one row per step with the cumulative curves.
pub fn write_regret_csv(path: &std::path::Path, report: &RegretReport) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| Error::format(path, e.to_string()))?;
    writer
        .write_record([
            "step",
            "hour",
            "oracle_loss",
            "oracle_feasible",
            "realized_cost",
            "expected_cost",
            "uniform_cost",
            "cum_regret_expected",
            "cum_regret_uniform",
            "cum_regret_realized",
            "cum_violation",
        ])
        .map_err(|e| Error::format(path, e.to_string()))?;
    for (t, step) in report.steps.iter().enumerate() {
        writer
            .write_record([
                t.to_string(),
                step.hour.to_string(),
                step.oracle_loss.to_string(),
                (step.oracle_feasible as u8).to_string(),
                step.realized_cost.to_string(),
                step.expected_cost.to_string(),
                step.uniform_cost.to_string(),
                report.policy_regret[t].to_string(),
                report.uniform_regret[t].to_string(),
                report.realized_regret[t].to_string(),
                report.violation[t].to_string(),
            ])
            .map_err(|e| Error::format(path, e.to_string()))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
