//! Experiment harness: corpus generation and storage, cost calibration,
//! training, benchmark replay, policy evaluation, oracle sweeps, and
//! CSV/SVG export.

pub mod checkpoint;
pub mod metrics;
pub mod normalizer;
pub mod oracle;
pub mod plot;
pub mod run;
pub mod store;

pub use checkpoint::PolicyCheckpoint;
pub use metrics::{aggregate, read_metrics_csv, write_metrics_csv, HourlyMetrics, Setting};
pub use normalizer::CostNormalizerSet;
pub use oracle::{oracle_sweep, replay_with_sweep, write_regret_csv, OracleSweep, RegretReport};
pub use run::{
    calibrate, evaluate, evaluate_setting_on_snapshot, generate_corpus, run_benchmark, train,
    ArmSelection, EvalSetting, Experiment, GeneratedCorpus, SnapshotEvaluator, SnapshotSource,
    TrainOutput, TrainRecord, TN_BENCHMARK_BANDWIDTH_HZ,
};
pub use store::SnapshotStore;

use std::path::Path;

use crate::Result;

/// Write the three daily-profile charts (unsatisfied fraction, sum
/// throughput, terrestrial energy) from metric rows, one series per setting.
pub fn write_daily_profile_plots(out_dir: &Path, rows: &[HourlyMetrics]) -> Result<()> {
    let summaries = aggregate(rows);
    let settings: Vec<Setting> = {
        let mut seen = Vec::new();
        for row in rows {
            if !seen.contains(&row.setting) {
                seen.push(row.setting);
            }
        }
        seen
    };
    let series_for = |value: &dyn Fn(&metrics::HourlySummary) -> f64| -> Vec<plot::Series> {
        settings
            .iter()
            .map(|&setting| plot::Series {
                name: setting.label().to_string(),
                points: summaries
                    .iter()
                    .filter(|s| s.setting == setting)
                    .map(|s| (f64::from(s.hour), value(s)))
                    .collect(),
            })
            .collect()
    };

    plot::write_line_chart(
        &out_dir.join("daily_unsatisfied.svg"),
        "Daily unsatisfied UE proportion",
        "hour of day",
        "unsatisfied fraction",
        &series_for(&|s| s.unsatisfied_fraction.mean),
    )?;
    plot::write_line_chart(
        &out_dir.join("daily_sum_throughput.svg"),
        "Daily network sum throughput",
        "hour of day",
        "sum throughput (bit/s)",
        &series_for(&|s| s.sum_throughput_bps.mean),
    )?;
    plot::write_line_chart(
        &out_dir.join("daily_tn_energy.svg"),
        "Daily terrestrial energy consumption",
        "hour of day",
        "TN energy (Wh)",
        &series_for(&|s| s.tn_energy_wh.mean),
    )?;
    Ok(())
}

/// Write the per-step training log CSV.
pub fn write_train_records_csv(path: &Path, records: &[TrainRecord]) -> Result<()> {
    let mut writer =
        csv::Writer::from_path(path).map_err(|e| crate::Error::format(path, e.to_string()))?;
    writer
        .write_record([
            "global_step",
            "hour",
            "step_in_hour",
            "snapshot_index",
            "arm",
            "cost",
            "violation",
            "x_at",
            "lambda_after",
        ])
        .map_err(|e| crate::Error::format(path, e.to_string()))?;
    for r in records {
        writer
            .write_record([
                r.global_step.to_string(),
                r.hour.to_string(),
                r.step_in_hour.to_string(),
                r.snapshot_index.to_string(),
                r.arm.to_string(),
                r.cost.to_string(),
                r.violation.to_string(),
                r.x_at.to_string(),
                r.lambda_after.to_string(),
            ])
            .map_err(|e| crate::Error::format(path, e.to_string()))?;
    }
    writer.flush().map_err(|e| crate::Error::io(path, e))?;
    Ok(())
}
