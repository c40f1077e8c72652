//! Per-hour metric rows, cross-seed aggregation, and CSV export.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Label of the pipeline that produced a metric row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Setting {
    /// The learned policy.
    Comd,
    /// Terrestrial-only baseline on a 10 MHz band.
    TnBenchmark,
    /// Fixed 30/10 MHz split baseline.
    NtnBenchmark,
}

impl Setting {
    pub fn label(self) -> &'static str {
        match self {
            Setting::Comd => "comd",
            Setting::TnBenchmark => "3gpp-tn",
            Setting::NtnBenchmark => "3gpp-ntn",
        }
    }
}

impl std::fmt::Display for Setting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// One hour's averaged outcomes for one (setting, seed) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlyMetrics {
    pub hour: u8,
    pub setting: Setting,
    pub seed: u64,
    /// Mean fraction of unsatisfied UEs over the evaluated snapshots.
    pub unsatisfied_fraction: f64,
    /// Mean network sum throughput (bit/s).
    pub sum_throughput_bps: f64,
    /// Mean terrestrial energy over the hour-long slot (Wh).
    pub tn_energy_wh: f64,
    /// Mean count of active terrestrial stations.
    pub active_mbs: f64,
    /// Arm the policy played this hour; absent for benchmarks.
    pub chosen_arm_index: Option<usize>,
}

/// Mean and 95% confidence half-width over seeds for one (setting, hour).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HourlySummary {
    pub hour: u8,
    pub setting: Setting,
    pub seeds: usize,
    pub unsatisfied_fraction: MeanCi,
    pub sum_throughput_bps: MeanCi,
    pub tn_energy_wh: MeanCi,
    pub active_mbs: MeanCi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanCi {
    pub mean: f64,
    pub ci_half_width: f64,
}

fn mean_ci(values: &[f64]) -> MeanCi {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return MeanCi {
            mean,
            ci_half_width: 0.0,
        };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    MeanCi {
        mean,
        ci_half_width: 1.96 * (var / n).sqrt(),
    }
}

/// Group rows by (setting, hour) and aggregate across seeds.
pub fn aggregate(rows: &[HourlyMetrics]) -> Vec<HourlySummary> {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<(u8, &'static str), Vec<&HourlyMetrics>> = BTreeMap::new();
    for row in rows {
        groups
            .entry((row.hour, row.setting.label()))
            .or_default()
            .push(row);
    }
    groups
        .into_values()
        .map(|group| {
            let collect = |f: fn(&HourlyMetrics) -> f64| {
                group.iter().map(|r| f(r)).collect::<Vec<_>>()
            };
            HourlySummary {
                hour: group[0].hour,
                setting: group[0].setting,
                seeds: group.len(),
                unsatisfied_fraction: mean_ci(&collect(|r| r.unsatisfied_fraction)),
                sum_throughput_bps: mean_ci(&collect(|r| r.sum_throughput_bps)),
                tn_energy_wh: mean_ci(&collect(|r| r.tn_energy_wh)),
                active_mbs: mean_ci(&collect(|r| r.active_mbs)),
            }
        })
        .collect()
}

/// Write metric rows with the fixed column schema:
/// `hour, setting, seed, unsatisfied_fraction, sum_throughput_bps,
/// tn_energy_wh, active_mbs, chosen_arm_index`.
pub fn write_metrics_csv(path: &Path, rows: &[HourlyMetrics]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    writer
        .write_record([
            "hour",
            "setting",
            "seed",
            "unsatisfied_fraction",
            "sum_throughput_bps",
            "tn_energy_wh",
            "active_mbs",
            "chosen_arm_index",
        ])
        .map_err(|e| csv_error(path, e))?;
    for row in rows {
        writer
            .write_record([
                row.hour.to_string(),
                row.setting.label().to_string(),
                row.seed.to_string(),
                row.unsatisfied_fraction.to_string(),
                row.sum_throughput_bps.to_string(),
                row.tn_energy_wh.to_string(),
                row.active_mbs.to_string(),
                row.chosen_arm_index.map_or(String::new(), |a| a.to_string()),
            ])
            .map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Read rows back from the CSV schema above (used by the plot subcommand).
pub fn read_metrics_csv(path: &Path) -> Result<Vec<HourlyMetrics>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let field = |i: usize| -> Result<&str> {
            record
                .get(i)
                .ok_or_else(|| Error::format(path, format!("missing column {i}")))
        };
        let parse = |i: usize| -> Result<f64> {
            field(i)?
                .parse::<f64>()
                .map_err(|e| Error::format(path, format!("column {i}: {e}")))
        };
        let setting = match field(1)? {
            "comd" => Setting::Comd,
            "3gpp-tn" => Setting::TnBenchmark,
            "3gpp-ntn" => Setting::NtnBenchmark,
            other => {
                return Err(Error::format(path, format!("unknown setting {other}")));
            }
        };
        rows.push(HourlyMetrics {
            hour: parse(0)? as u8,
            setting,
            seed: parse(2)? as u64,
            unsatisfied_fraction: parse(3)?,
            sum_throughput_bps: parse(4)?,
            tn_energy_wh: parse(5)?,
            active_mbs: parse(6)?,
            chosen_arm_index: {
                let raw = field(7)?;
                if raw.is_empty() {
                    None
                } else {
                    Some(raw.parse::<usize>().map_err(|e| {
                        Error::format(path, format!("chosen_arm_index: {e}"))
                    })?)
                }
            },
        });
    }
    Ok(rows)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::format(path, format!("{other:?}")),
    }
}
