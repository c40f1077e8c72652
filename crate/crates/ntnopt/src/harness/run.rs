//! Experiment wiring: corpus access, cost calibration, training, policy
//! evaluation, and benchmark replay.

use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::bandit::{ArmSpace, Hyperparams, PolicyState};
use crate::config::ExperimentConfig;
use crate::harness::checkpoint::{PolicyCheckpoint, CHECKPOINT_VERSION};
use crate::harness::metrics::{HourlyMetrics, Setting};
use crate::harness::normalizer::CostNormalizerSet;
use crate::harness::store::SnapshotStore;
use crate::heuristic::{self, CostNormalizer, EvalEnv, NetworkOutcome, ThetaConfig};
use crate::scenario::{self, DeploymentGeometry};
use crate::seeds::{self, Stream};
use crate::snapshot::{LinkTables, Snapshot};
use crate::{Error, Result};

/// Band allocated to the terrestrial-only baseline (the legacy carrier).
pub const TN_BENCHMARK_BANDWIDTH_HZ: f64 = 10.0e6;

/// A validated experiment: config plus the derived topology and arm space.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub cfg: ExperimentConfig,
    pub topology: DeploymentGeometry,
    pub arms: ArmSpace,
}

impl Experiment {
    pub fn new(cfg: ExperimentConfig) -> Result<Experiment> {
        cfg.validate()?;
        let topology = scenario::build_topology(&cfg.scenario.geometry)?;
        let arms = ArmSpace::from_config(&cfg.arms)?;
        Ok(Experiment {
            cfg,
            topology,
            arms,
        })
    }

    /// Snapshot `index` of `hour`, generated from the corpus seed tree.
    pub fn snapshot(&self, hour: u8, index: u32) -> Snapshot {
        let seed = seeds::snapshot_seed(self.cfg.run.seed, hour, u64::from(index));
        Snapshot::generate(&self.cfg.scenario, &self.topology, hour, seed)
    }

    /// All snapshots of one hour, in index order.
    pub fn generate_hour(&self, hour: u8) -> Vec<Snapshot> {
        (0..self.cfg.run.snapshots_per_hour)
            .into_par_iter()
            .map(|index| self.snapshot(hour, index))
            .collect()
    }

    /// Snapshots per hour held out for evaluation.
    pub fn holdout_count(&self) -> u32 {
        let n = self.cfg.run.snapshots_per_hour;
        let holdout = (f64::from(n) * self.cfg.run.holdout_fraction).round() as u32;
        holdout.min(n.saturating_sub(1))
    }

    /// Snapshots per hour streamed into training.
    pub fn train_count(&self) -> u32 {
        self.cfg.run.snapshots_per_hour - self.holdout_count()
    }

    /// Resolved learner hyperparameters for the given horizon.
    pub fn hyperparams(&self, horizon: usize) -> Hyperparams {
        Hyperparams::resolve(&self.cfg.bandit, self.arms.len(), horizon)
    }

    /// Training stream order for one hour: the train-split indices shuffled
    /// by the hour's shuffle seed.
    pub fn train_order(&self, hour: u8) -> Vec<u32> {
        let mut order: Vec<u32> = (0..self.train_count()).collect();
        let shuffle_seed = seeds::mix(
            seeds::stream_seed(self.cfg.run.seed, Stream::TrainShuffle),
            u64::from(hour),
        );
        order.shuffle(&mut seeds::rng_from(shuffle_seed));
        order
    }
}

/// Uniform access to a corpus, whether materialized on disk or regenerated
/// on the fly (generation is pure, so both yield identical snapshots).
pub trait SnapshotSource {
    fn load_hour(&self, hour: u8) -> Result<Vec<Snapshot>>;
    fn snapshots_per_hour(&self) -> u32;
}

impl SnapshotSource for SnapshotStore {
    fn load_hour(&self, hour: u8) -> Result<Vec<Snapshot>> {
        SnapshotStore::load_hour(self, hour)
    }

    fn snapshots_per_hour(&self) -> u32 {
        self.index.snapshots_per_hour
    }
}

/// Lazily generated corpus backed by the experiment seed tree.
pub struct GeneratedCorpus<'a>(pub &'a Experiment);

impl SnapshotSource for GeneratedCorpus<'_> {
    fn load_hour(&self, hour: u8) -> Result<Vec<Snapshot>> {
        Ok(self.0.generate_hour(hour))
    }

    fn snapshots_per_hour(&self) -> u32 {
        self.0.cfg.run.snapshots_per_hour
    }
}

/// Materialize the corpus under `dir` (24 hour files plus the index).
pub fn generate_corpus(exp: &Experiment, dir: &Path) -> Result<SnapshotStore> {
    SnapshotStore::create(
        dir,
        exp.cfg.corpus_digest(),
        exp.cfg.run.seed,
        exp.cfg.run.snapshots_per_hour,
        |hour| exp.generate_hour(hour),
    )
}

/// What to evaluate on a snapshot: an arm plus the band/tier overrides that
/// distinguish the policy path from the two benchmark paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalSetting {
    pub theta: ThetaConfig,
    pub total_bandwidth_hz: f64,
    pub satellite_enabled: bool,
}

impl EvalSetting {
    /// The learned-policy path: full band, satellite present.
    pub fn policy(exp: &Experiment, theta: ThetaConfig) -> EvalSetting {
        EvalSetting {
            theta,
            total_bandwidth_hz: exp.cfg.scenario.radio.total_bandwidth_hz,
            satellite_enabled: true,
        }
    }

    /// Terrestrial-only baseline: satellite removed, legacy 10 MHz band,
    /// max-RSRP association, empty-station shutdown only.
    pub fn benchmark_tn() -> EvalSetting {
        EvalSetting {
            theta: heuristic::benchmark_theta_tn(),
            total_bandwidth_hz: TN_BENCHMARK_BANDWIDTH_HZ,
            satellite_enabled: false,
        }
    }

    /// Fixed-split baseline: 30 of 40 MHz to the satellite tier, max-RSRP
    /// association, empty-station shutdown only.
    pub fn benchmark_ntn(exp: &Experiment) -> EvalSetting {
        EvalSetting {
            theta: heuristic::benchmark_theta_ntn(),
            total_bandwidth_hz: exp.cfg.scenario.radio.total_bandwidth_hz,
            satellite_enabled: true,
        }
    }
}

/// One snapshot with its link tables built, ready to evaluate arms cheaply.
pub struct SnapshotEvaluator<'a> {
    exp: &'a Experiment,
    pub snapshot: &'a Snapshot,
    tables: LinkTables,
}

impl<'a> SnapshotEvaluator<'a> {
    pub fn new(exp: &'a Experiment, snapshot: &'a Snapshot) -> SnapshotEvaluator<'a> {
        let tables = LinkTables::build(
            snapshot,
            &exp.topology,
            &exp.cfg.scenario.radio,
            exp.cfg.scenario.channel.noise_density_dbm_hz,
        );
        SnapshotEvaluator {
            exp,
            snapshot,
            tables,
        }
    }

    pub fn outcome(
        &self,
        setting: &EvalSetting,
        normalizer: &CostNormalizer,
    ) -> Result<NetworkOutcome> {
        let mut env = EvalEnv::new(
            self.snapshot,
            &self.tables,
            &self.exp.topology,
            &self.exp.cfg.scenario.radio,
            &self.exp.cfg.scenario.power,
            self.exp.cfg.run.cost_weight_c,
        );
        env.total_bandwidth_hz = setting.total_bandwidth_hz;
        env.satellite_enabled = setting.satellite_enabled && env.satellite_enabled;
        heuristic::evaluate_arm(&env, &setting.theta, normalizer)
    }
}

/// Evaluate one setting on one snapshot (tables built on the spot).
pub fn evaluate_setting_on_snapshot(
    exp: &Experiment,
    snapshot: &Snapshot,
    setting: &EvalSetting,
    normalizer: &CostNormalizer,
) -> Result<NetworkOutcome> {
    SnapshotEvaluator::new(exp, snapshot).outcome(setting, normalizer)
}

/// Calibrate the per-hour cost normalizers: sweep every arm over an evenly
/// spaced sample of each hour's training snapshots and record the raw-cost
/// envelope.
pub fn calibrate(exp: &Experiment, source: &dyn SnapshotSource) -> Result<CostNormalizerSet> {
    let identity = CostNormalizer::identity();
    let mut per_hour = Vec::with_capacity(24);
    for hour in 0..24u8 {
        let snapshots = source.load_hour(hour)?;
        let train_n = exp.train_count().min(snapshots.len() as u32).max(1);
        let k = exp.cfg.run.calibration_snapshots_per_hour.min(train_n);
        let picks: Vec<u32> = (0..k).map(|i| i * train_n / k).collect();

        let envelopes: Vec<(f64, f64)> = picks
            .par_iter()
            .map(|&idx| {
                let evaluator = SnapshotEvaluator::new(exp, &snapshots[idx as usize]);
                let mut min = f64::INFINITY;
                let mut max = f64::NEG_INFINITY;
                for arm in 0..exp.arms.len() {
                    let setting = EvalSetting::policy(exp, exp.arms.theta(arm));
                    let outcome = evaluator.outcome(&setting, &identity)?;
                    min = min.min(outcome.raw_cost);
                    max = max.max(outcome.raw_cost);
                }
                Ok((min, max))
            })
            .collect::<Result<_>>()?;
        let min = envelopes.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
        let max = envelopes
            .iter()
            .map(|e| e.1)
            .fold(f64::NEG_INFINITY, f64::max);
        per_hour.push(if min.is_finite() && max.is_finite() && max > min {
            CostNormalizer { min, max }
        } else {
            CostNormalizer::identity()
        });
    }
    CostNormalizerSet::new(exp.cfg.corpus_digest(), per_hour)
}

/// One training step's log line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainRecord {
    pub global_step: u64,
    pub hour: u8,
    pub step_in_hour: u32,
    pub snapshot_index: u32,
    pub arm: usize,
    pub cost: f64,
    pub violation: f64,
    pub x_at: f64,
    pub lambda_after: f64,
}

pub struct TrainOutput {
    pub checkpoint: PolicyCheckpoint,
    pub records: Vec<TrainRecord>,
}

/// Train the learner over the corpus: snapshots stream in randomized order
/// within each hour, one update per snapshot. Per-hour mode keeps 24
/// independent learners; sequential mode threads a single learner through
/// the whole day. Passing a previous checkpoint resumes at the first
/// incomplete hour.
pub fn train(
    exp: &Experiment,
    source: &dyn SnapshotSource,
    normalizers: &CostNormalizerSet,
    resume: Option<PolicyCheckpoint>,
) -> Result<TrainOutput> {
    let per_hour = exp.cfg.bandit.per_hour_contexts;
    let horizon = if per_hour {
        exp.train_count() as usize
    } else {
        exp.train_count() as usize * 24
    };
    let hyper = exp.hyperparams(horizon);
    let n_arms = exp.arms.len();

    let mut checkpoint = match resume {
        Some(ckpt) => {
            if ckpt.per_hour_contexts != per_hour || ckpt.hyper != hyper {
                return Err(Error::config(
                    "resume checkpoint does not match the configured learner",
                ));
            }
            ckpt
        }
        None => PolicyCheckpoint {
            version: CHECKPOINT_VERSION,
            per_hour_contexts: per_hour,
            hyper,
            arms: exp.cfg.arms.clone(),
            states: {
                let count = if per_hour { 24 } else { 1 };
                (0..count)
                    .map(|_| PolicyState::new_uniform(n_arms, hyper))
                    .collect::<Result<_>>()?
            },
            completed_hours: vec![false; 24],
        },
    };

    let mut records = Vec::new();
    let mut global_step: u64 = checkpoint
        .completed_hours
        .iter()
        .filter(|&&done| done)
        .count() as u64
        * exp.train_count() as u64;

    for hour in 0..24u8 {
        if checkpoint.completed_hours[hour as usize] {
            continue;
        }
        let snapshots = source.load_hour(hour)?;
        let order = exp.train_order(hour);
        let mut arm_rng = seeds::rng_from(if per_hour {
            seeds::mix(
                seeds::stream_seed(exp.cfg.run.seed, Stream::ArmSampling),
                u64::from(hour),
            )
        } else {
            seeds::stream_seed(exp.cfg.run.seed, Stream::ArmSampling)
        });

        let state_idx = if per_hour { hour as usize } else { 0 };
        for (step_in_hour, &snapshot_index) in order.iter().enumerate() {
            let snapshot = &snapshots[snapshot_index as usize];
            let evaluator = SnapshotEvaluator::new(exp, snapshot);
            let state = &mut checkpoint.states[state_idx];
            let arm = state.sample_action(&mut arm_rng);
            let setting = EvalSetting::policy(exp, exp.arms.theta(arm));
            let outcome = evaluator.outcome(&setting, normalizers.hour(hour))?;
            let record = state.update(arm, outcome.cost, outcome.violation);
            records.push(TrainRecord {
                global_step,
                hour,
                step_in_hour: step_in_hour as u32,
                snapshot_index,
                arm,
                cost: record.cost,
                violation: record.violation,
                x_at: record.x_at,
                lambda_after: checkpoint.states[state_idx].lambda,
            });
            global_step += 1;
        }
        checkpoint.completed_hours[hour as usize] = true;
    }

    Ok(TrainOutput {
        checkpoint,
        records,
    })
}

/// How the evaluation stage picks the hour's arm from the learned
/// distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArmSelection {
    /// The most probable arm.
    Argmax,
    /// One draw from the learned distribution per hour.
    SampleOncePerHour,
    /// A fresh draw for every evaluated snapshot.
    SamplePerSnapshot,
}

/// Evaluate the trained policy over the held-out snapshots of every hour.
pub fn evaluate(
    exp: &Experiment,
    source: &dyn SnapshotSource,
    checkpoint: &PolicyCheckpoint,
    selection: ArmSelection,
) -> Result<Vec<HourlyMetrics>> {
    let mut rows = Vec::with_capacity(24);
    for hour in 0..24u8 {
        let snapshots = source.load_hour(hour)?;
        let holdout = holdout_slice(exp, &snapshots);
        let state = checkpoint.state_for_hour(hour);
        let mut eval_rng = seeds::rng_from(seeds::mix(
            seeds::stream_seed(exp.cfg.run.seed, Stream::EvalSampling),
            u64::from(hour),
        ));
        let hour_arm = match selection {
            ArmSelection::Argmax => state.argmax(),
            _ => state.sample_action(&mut eval_rng),
        };
        let outcomes: Result<Vec<(NetworkOutcome, usize)>> = holdout
            .iter()
            .map(|snapshot| {
                let arm = if selection == ArmSelection::SamplePerSnapshot {
                    state.sample_action(&mut eval_rng)
                } else {
                    hour_arm
                };
                let setting = EvalSetting::policy(exp, exp.arms.theta(arm));
                let outcome =
                    evaluate_setting_on_snapshot(exp, snapshot, &setting, normalizer_stub())?;
                Ok((outcome, arm))
            })
            .collect();
        let outcomes = outcomes?;
        let chosen = match selection {
            ArmSelection::SamplePerSnapshot => None,
            _ => Some(hour_arm),
        };
        rows.push(metrics_from_outcomes(
            exp,
            hour,
            Setting::Comd,
            chosen,
            &outcomes.iter().map(|(o, _)| o.clone()).collect::<Vec<_>>(),
        ));
    }
    Ok(rows)
}

/// Replay one benchmark over the held-out snapshots of every hour.
pub fn run_benchmark(
    exp: &Experiment,
    source: &dyn SnapshotSource,
    setting_kind: Setting,
) -> Result<Vec<HourlyMetrics>> {
    let (setting, label) = match setting_kind {
        Setting::TnBenchmark => (EvalSetting::benchmark_tn(), Setting::TnBenchmark),
        Setting::NtnBenchmark => (EvalSetting::benchmark_ntn(exp), Setting::NtnBenchmark),
        Setting::Comd => {
            return Err(Error::config("use `evaluate` for the learned policy"));
        }
    };
    let mut rows = Vec::with_capacity(24);
    for hour in 0..24u8 {
        let snapshots = source.load_hour(hour)?;
        let holdout = holdout_slice(exp, &snapshots);
        let outcomes: Result<Vec<NetworkOutcome>> = holdout
            .par_iter()
            .map(|snapshot| {
                evaluate_setting_on_snapshot(exp, snapshot, &setting, normalizer_stub())
            })
            .collect();
        rows.push(metrics_from_outcomes(exp, hour, label, None, &outcomes?));
    }
    Ok(rows)
}

fn normalizer_stub() -> &'static CostNormalizer {
    static IDENTITY: CostNormalizer = CostNormalizer { min: 0.0, max: 1.0 };
    &IDENTITY
}

fn holdout_slice<'s>(exp: &Experiment, snapshots: &'s [Snapshot]) -> &'s [Snapshot] {
    let train = exp.train_count() as usize;
    if train >= snapshots.len() {
        snapshots
    } else {
        &snapshots[train..]
    }
}

fn metrics_from_outcomes(
    exp: &Experiment,
    hour: u8,
    setting: Setting,
    chosen_arm: Option<usize>,
    outcomes: &[NetworkOutcome],
) -> HourlyMetrics {
    let n = outcomes.len().max(1) as f64;
    let mean = |f: &dyn Fn(&NetworkOutcome) -> f64| outcomes.iter().map(f).sum::<f64>() / n;
    HourlyMetrics {
        hour,
        setting,
        seed: exp.cfg.run.seed,
        unsatisfied_fraction: mean(&|o| o.violation),
        sum_throughput_bps: mean(&|o| o.sum_throughput_bps()),
        tn_energy_wh: mean(&|o| crate::energy::tn_energy_wh(&[o.tn_power_w], 3_600.0)),
        active_mbs: mean(&|o| o.active_terrestrial as f64),
        chosen_arm_index: chosen_arm,
    }
}
