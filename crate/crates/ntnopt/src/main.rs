//! Thin subcommand CLI over the library pipeline. Exit codes: 0 success,
//! 2 config error, 3 IO error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ntnopt::config::{self, ExperimentConfig};
use ntnopt::harness::{
    self, ArmSelection, Experiment, GeneratedCorpus, PolicyCheckpoint, Setting, SnapshotSource,
};
use ntnopt::{Error, Result};

#[derive(Parser)]
#[command(
    name = "ntnopt",
    about = "Integrated terrestrial/satellite network simulator with an online configuration optimizer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Experiment config file (TOML). Defaults to the desk-scale preset
    /// when --desk-scale is given.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Use the built-in desk-scale preset instead of a config file.
    #[arg(long)]
    desk_scale: bool,

    /// Override the experiment seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Hours to process, e.g. "0-23", "19,20,21", "0-5,22".
    #[arg(long)]
    hours: Option<String>,

    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Snapshot store directory (defaults to <out>/corpus). Commands fall
    /// back to on-the-fly snapshot generation when the store is absent.
    #[arg(long)]
    corpus: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate and persist the snapshot corpus.
    Generate(CommonArgs),
    /// Calibrate the per-hour cost normalizers.
    Calibrate(CommonArgs),
    /// Train the learner and write the policy checkpoint.
    Train {
        #[command(flatten)]
        common: CommonArgs,
        /// Resume from an existing checkpoint file.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Evaluate the trained policy on the held-out snapshots.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        /// Arm selection: "argmax" or "sample".
        #[arg(long, default_value = "sample")]
        mode: String,
        /// Resample an arm for every snapshot instead of once per hour.
        #[arg(long)]
        resample_per_snapshot: bool,
        /// Checkpoint file (defaults to <out>/policy.json).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Replay the 3GPP baseline settings on the held-out snapshots.
    Benchmark {
        #[command(flatten)]
        common: CommonArgs,
        /// Which baseline: "tn", "ntn", or "both".
        #[arg(long, default_value = "both")]
        which: String,
    },
    /// Full-information sweep and regret accounting over the training
    /// stream.
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
        /// Runtime budget in seconds for the sweep warning.
        #[arg(long, default_value_t = 1800.0)]
        budget_s: f64,
    },
    /// Render the daily-profile SVG charts from the metric CSV files.
    Plot(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_experiment(common: &CommonArgs) -> Result<Experiment> {
    let mut cfg: ExperimentConfig = match (&common.config, common.desk_scale) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, true) => config::desk_scale(),
        (None, false) => {
            return Err(Error::config(
                "pass --config <path> or --desk-scale to pick a scenario",
            ));
        }
    };
    if let Some(seed) = common.seed {
        cfg.run.seed = seed;
    }
    Experiment::new(cfg)
}

fn parse_hours(spec: &Option<String>) -> Result<Vec<u8>> {
    let Some(spec) = spec else {
        return Ok((0..24).collect());
    };
    let mut hours = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        if let Some((a, b)) = part.split_once('-') {
            let (a, b): (u8, u8) = (
                a.trim().parse().map_err(|_| bad_hours(spec))?,
                b.trim().parse().map_err(|_| bad_hours(spec))?,
            );
            if a > b || b > 23 {
                return Err(bad_hours(spec));
            }
            hours.extend(a..=b);
        } else {
            let h: u8 = part.parse().map_err(|_| bad_hours(spec))?;
            if h > 23 {
                return Err(bad_hours(spec));
            }
            hours.push(h);
        }
    }
    hours.sort_unstable();
    hours.dedup();
    Ok(hours)
}

fn bad_hours(spec: &str) -> Error {
    Error::config(format!("cannot parse --hours \"{spec}\""))
}

/// Open the store if present, otherwise generate snapshots on the fly.
fn open_source<'a>(exp: &'a Experiment, common: &CommonArgs) -> Result<Box<dyn SnapshotSource + 'a>> {
    let corpus_dir = common
        .corpus
        .clone()
        .unwrap_or_else(|| common.out.join("corpus"));
    if corpus_dir.join("index.json").exists() {
        let store = harness::SnapshotStore::open(&corpus_dir)?;
        if store.index.config_digest != exp.cfg.corpus_digest() {
            return Err(Error::config(format!(
                "store at {} was generated from a different config",
                corpus_dir.display()
            )));
        }
        Ok(Box::new(store))
    } else {
        eprintln!(
            "note: no snapshot store at {}; generating snapshots on the fly",
            corpus_dir.display()
        );
        Ok(Box::new(GeneratedCorpus(exp)))
    }
}

fn load_normalizers(exp: &Experiment, source: &dyn SnapshotSource, out: &Path) -> Result<harness::CostNormalizerSet> {
    let path = out.join("normalizer.json");
    if path.exists() {
        let set = harness::CostNormalizerSet::load(&path)?;
        if set.corpus_digest == exp.cfg.corpus_digest() {
            return Ok(set);
        }
        eprintln!("note: normalizer at {} is stale; recalibrating", path.display());
    } else {
        eprintln!("note: no normalizer at {}; calibrating now", path.display());
    }
    let set = harness::calibrate(exp, source)?;
    set.save(&path)?;
    Ok(set)
}

fn ensure_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(common) => {
            let exp = load_experiment(&common)?;
            ensure_out(&common.out)?;
            let corpus_dir = common
                .corpus
                .clone()
                .unwrap_or_else(|| common.out.join("corpus"));
            let store = harness::generate_corpus(&exp, &corpus_dir)?;
            println!(
                "generated {} snapshots into {} (digest {})",
                u64::from(exp.cfg.run.snapshots_per_hour) * 24,
                corpus_dir.display(),
                store.digest()
            );
            Ok(())
        }
        Command::Calibrate(common) => {
            let exp = load_experiment(&common)?;
            ensure_out(&common.out)?;
            let source = open_source(&exp, &common)?;
            let set = harness::calibrate(&exp, source.as_ref())?;
            let path = common.out.join("normalizer.json");
            set.save(&path)?;
            println!("calibrated cost normalizers -> {}", path.display());
            Ok(())
        }
        Command::Train { common, resume } => {
            let exp = load_experiment(&common)?;
            ensure_out(&common.out)?;
            let source = open_source(&exp, &common)?;
            let normalizers = load_normalizers(&exp, source.as_ref(), &common.out)?;
            let resume_ckpt = resume.as_deref().map(PolicyCheckpoint::load).transpose()?;
            let horizon = if exp.cfg.bandit.per_hour_contexts {
                exp.train_count() as usize
            } else {
                exp.train_count() as usize * 24
            };
            let hyper = exp.hyperparams(horizon);
            println!(
                "training: n={} arms, T={horizon} steps/context, eta={:.5}, gamma={:.6}, omega={:.5}, mu={:.5}",
                exp.arms.len(),
                hyper.eta,
                hyper.gamma_floor,
                hyper.omega,
                hyper.mu
            );
            let output = harness::train(&exp, source.as_ref(), &normalizers, resume_ckpt)?;
            let ckpt_path = common.out.join("policy.json");
            output.checkpoint.save(&ckpt_path)?;
            harness::write_train_records_csv(
                &common.out.join("train_records.csv"),
                &output.records,
            )?;
            println!(
                "trained {} steps -> {}",
                output.records.len(),
                ckpt_path.display()
            );
            Ok(())
        }
        Command::Evaluate {
            common,
            mode,
            resample_per_snapshot,
            checkpoint,
        } => {
            let exp = load_experiment(&common)?;
            ensure_out(&common.out)?;
            let source = open_source(&exp, &common)?;
            let ckpt_path = checkpoint.unwrap_or_else(|| common.out.join("policy.json"));
            let ckpt = PolicyCheckpoint::load(&ckpt_path)?;
            let selection = match (mode.as_str(), resample_per_snapshot) {
                (_, true) => ArmSelection::SamplePerSnapshot,
                ("argmax", _) => ArmSelection::Argmax,
                ("sample", _) => ArmSelection::SampleOncePerHour,
                (other, _) => {
                    return Err(Error::config(format!(
                        "--mode must be argmax or sample, got {other}"
                    )));
                }
            };
            let hours = parse_hours(&common.hours)?;
            let rows: Vec<_> = harness::evaluate(&exp, source.as_ref(), &ckpt, selection)?
                .into_iter()
                .filter(|r| hours.contains(&r.hour))
                .collect();
            let path = common.out.join("metrics_comd.csv");
            harness::write_metrics_csv(&path, &rows)?;
            println!("evaluated policy -> {}", path.display());
            Ok(())
        }
        Command::Benchmark { common, which } => {
            let exp = load_experiment(&common)?;
            ensure_out(&common.out)?;
            let source = open_source(&exp, &common)?;
            let hours = parse_hours(&common.hours)?;
            let kinds: Vec<Setting> = match which.as_str() {
                "tn" => vec![Setting::TnBenchmark],
                "ntn" => vec![Setting::NtnBenchmark],
                "both" => vec![Setting::TnBenchmark, Setting::NtnBenchmark],
                other => {
                    return Err(Error::config(format!(
                        "--which must be tn, ntn or both, got {other}"
                    )));
                }
            };
            for kind in kinds {
                let rows: Vec<_> = harness::run_benchmark(&exp, source.as_ref(), kind)?
                    .into_iter()
                    .filter(|r| hours.contains(&r.hour))
                    .collect();
                let path = common.out.join(format!("metrics_{}.csv", kind.label()));
                harness::write_metrics_csv(&path, &rows)?;
                println!("replayed {kind} -> {}", path.display());
            }
            Ok(())
        }
        Command::Oracle { common, budget_s } => {
            let exp = load_experiment(&common)?;
            ensure_out(&common.out)?;
            let source = open_source(&exp, &common)?;
            let normalizers = load_normalizers(&exp, source.as_ref(), &common.out)?;
            let sweep = harness::oracle_sweep(&exp, source.as_ref(), &normalizers, Some(budget_s))?;
            let report = harness::replay_with_sweep(&exp, &sweep)?;
            let path = common.out.join("regret.csv");
            harness::write_regret_csv(&path, &report)?;
            let last = report.steps.len().saturating_sub(1);
            println!(
                "oracle sweep over {} steps ({} infeasible): policy regret {:.2}, uniform regret {:.2} -> {}",
                report.steps.len(),
                report.infeasible_steps,
                report.policy_regret.get(last).copied().unwrap_or(0.0),
                report.uniform_regret.get(last).copied().unwrap_or(0.0),
                path.display()
            );
            Ok(())
        }
        Command::Plot(common) => {
            let mut rows = Vec::new();
            for name in ["metrics_comd.csv", "metrics_3gpp-tn.csv", "metrics_3gpp-ntn.csv"] {
                let path = common.out.join(name);
                if path.exists() {
                    rows.extend(harness::read_metrics_csv(&path)?);
                }
            }
            if rows.is_empty() {
                return Err(Error::config(format!(
                    "no metrics CSV files under {}; run evaluate/benchmark first",
                    common.out.display()
                )));
            }
            harness::write_daily_profile_plots(&common.out, &rows)?;
            println!("wrote daily profile charts under {}", common.out.display());
            Ok(())
        }
    }
}
