//! Experiment configuration: scenario, channel, radio, power, arm grids and
//! learner hyperparameters, loadable from a TOML file with nested sections.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Geometry of the study area: a disc with an urban core and a rural ring.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeometryConfig {
    /// Radius of the circular study area (m).
    pub area_radius_m: f64,
    /// Radius of the urban core; terrestrial sites inside use the urban ISD.
    pub urban_radius_m: f64,
    /// Center of the urban core relative to the beam center.
    #[serde(default)]
    pub urban_center_m: (f64, f64),
    /// Inter-site distance of the urban lattice (m).
    pub urban_isd_m: f64,
    /// Inter-site distance of the rural lattice (m).
    pub rural_isd_m: f64,
    /// Rural sites are placed out to this radius; UEs beyond it are covered
    /// only by the satellite beam.
    pub rural_extent_m: f64,
    /// Satellite altitude above the beam center (m).
    pub satellite_altitude_m: f64,
    /// Terrestrial base-station antenna height (m).
    pub bs_height_m: f64,
    /// UE antenna height (m).
    pub ue_height_m: f64,
}

/// Hourly traffic shape and per-UE demand statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrafficConfig {
    /// Number of UEs deployed in each hour of the day.
    pub ue_count_per_hour: Vec<u32>,
    /// Fraction of UEs placed in the urban core.
    pub urban_fraction: f64,
    /// Rate parameter of the exponential demand distribution (1/(bit/s));
    /// mean demand is `1 / demand_rate_param`.
    pub demand_rate_param: f64,
    /// Probability that an urban UE is indoors.
    pub indoor_prob_urban: f64,
    /// Probability that a rural UE is indoors.
    pub indoor_prob_rural: f64,
}

impl TrafficConfig {
    /// Diurnal profile rising from `trough` at 04:00 to `peak` at 20:00 and
    /// falling back overnight (piecewise half-cosine ramps).
    pub fn diurnal_counts(trough: u32, peak: u32) -> Vec<u32> {
        let (trough, peak) = (f64::from(trough), f64::from(peak));
        (0..24u32)
            .map(|h| {
                let h = f64::from(h);
                // Hours since the 04:00 trough, wrapped to [0, 24).
                let s = (h - 4.0).rem_euclid(24.0);
                let frac = if s <= 16.0 {
                    // Rising half-cosine over the 16 h from trough to peak.
                    (1.0 - (std::f64::consts::PI * s / 16.0).cos()) / 2.0
                } else {
                    // Falling half-cosine over the 8 h back down.
                    (1.0 + (std::f64::consts::PI * (s - 16.0) / 8.0).cos()) / 2.0
                };
                (trough + (peak - trough) * frac).round() as u32
            })
            .collect()
    }
}

/// Log-distance path-loss coefficients: `PL = offset + slope*log10(d_3d_m)
/// + 20*log10(f_GHz)` dB.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PathLossCoeffs {
    pub offset_db: f64,
    pub slope: f64,
}

/// Terrestrial channel coefficients for one tier (urban or rural).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TierChannelConfig {
    pub los: PathLossCoeffs,
    pub nlos: PathLossCoeffs,
    pub sf_sigma_los_db: f64,
    pub sf_sigma_nlos_db: f64,
    /// Distance-scale parameters of the LoS probability curve.
    pub los_model: LosModel,
}

/// Closed-form LoS probability models for terrestrial links.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LosModel {
    /// Urban-macro style: `min(d0/d, 1)*(1 - exp(-d/d1)) + exp(-d/d1)`.
    UrbanMacro { d0_m: f64, d1_m: f64 },
    /// Rural-macro style: `1` below `d0`, `exp(-(d - d0)/scale)` beyond.
    RuralMacro { d0_m: f64, scale_m: f64 },
}

/// Satellite channel behaviour per elevation bucket.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ElevationBucket {
    /// Bucket applies to elevations at or above this angle (deg).
    pub min_elevation_deg: f64,
    pub los_probability: f64,
    pub sf_sigma_los_db: f64,
    pub sf_sigma_nlos_db: f64,
    /// Clutter loss applied on NLoS satellite links (dB).
    pub clutter_loss_nlos_db: f64,
}

/// Channel model constants (antenna gains, losses, noise).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub carrier_hz: f64,
    pub g_tx_terrestrial_dbi: f64,
    pub g_tx_satellite_dbi: f64,
    pub g_ue_dbi: f64,
    pub urban: TierChannelConfig,
    pub rural: TierChannelConfig,
    /// Satellite elevation buckets, ascending in `min_elevation_deg`.
    pub satellite_buckets: Vec<ElevationBucket>,
    /// Scintillation loss on every satellite link (dB).
    pub scintillation_loss_db: f64,
    /// Building entry loss on satellite links to indoor UEs (dB).
    pub entry_loss_db: f64,
    /// Through-wall penetration loss on terrestrial links to indoor UEs (dB).
    pub penetration_tw_db: f64,
    /// Mean indoor distance loss on terrestrial links to indoor UEs (dB).
    pub penetration_in_db: f64,
    /// Std-dev of the random penetration term (dB).
    pub penetration_sigma_db: f64,
    pub noise_density_dbm_hz: f64,
}

/// Bandwidth, power and coverage constants of the radio layer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadioConfig {
    /// Total system bandwidth W shared by the two tiers (Hz).
    pub total_bandwidth_hz: f64,
    /// Bandwidth of one PRB (Hz).
    pub prb_hz: f64,
    /// Subcarriers per PRB; an RE occupies `prb_hz / subcarriers_per_prb`.
    pub subcarriers_per_prb: u32,
    pub tx_power_per_re_terrestrial_dbm: f64,
    pub tx_power_per_re_satellite_dbm: f64,
    /// Coverage threshold: a UE below this RSRP on every link is unsatisfied.
    pub rsrp_min_dbm: f64,
}

impl RadioConfig {
    /// Bandwidth of a single resource element (Hz).
    pub fn re_bandwidth_hz(&self) -> f64 {
        self.prb_hz / f64::from(self.subcarriers_per_prb)
    }

    /// Noise power per RE (linear W) for the given noise density.
    pub fn noise_per_re_w(&self, noise_density_dbm_hz: f64) -> f64 {
        crate::units::dbm_to_watts(noise_density_dbm_hz) * self.re_bandwidth_hz()
    }
}

/// Terrestrial base-station power model constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerConfig {
    /// Baseline consumption, also drawn while shut down (W).
    pub p0_w: f64,
    /// Static component of an active station (W).
    pub psi_w: f64,
}

/// The whole network scenario: geometry, traffic, channel, radio, power.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub geometry: GeometryConfig,
    pub traffic: TrafficConfig,
    pub channel: ChannelConfig,
    pub radio: RadioConfig,
    pub power: PowerConfig,
}

/// Value grids of the four tunables; the arm space is their product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmGridConfig {
    pub epsilon: Vec<f64>,
    pub tau_nu: Vec<f64>,
    pub tau_rsrp_dbm: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl ArmGridConfig {
    pub fn arm_count(&self) -> usize {
        self.epsilon.len() * self.tau_nu.len() * self.tau_rsrp_dbm.len() * self.alpha.len()
    }
}

/// Learner hyperparameters. Unset fields fall back to horizon-scaled
/// defaults; every run logs the resolved values.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BanditConfig {
    /// Learning rate; default `sqrt(ln n / (n T))`.
    pub eta: Option<f64>,
    /// Exploration floor; default `min(1/(2n), 1/sqrt(T))`.
    pub gamma_floor: Option<f64>,
    /// Bias weight; default `1/sqrt(T)`.
    pub omega: Option<f64>,
    /// Dual step size; default `T^(-1/4)`.
    pub mu: Option<f64>,
    /// Maintain one learner per hour of day (default) instead of a single
    /// sequential learner over the whole stream.
    #[serde(default = "default_true")]
    pub per_hour_contexts: bool,
}

fn default_true() -> bool {
    true
}

/// Experiment-level settings: corpus size, split, cost weight, seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub snapshots_per_hour: u32,
    /// Fraction of each hour's snapshots held out for evaluation.
    pub holdout_fraction: f64,
    /// Cost weight constant c; the trade-off factor is `c / K`.
    pub cost_weight_c: f64,
    /// Snapshots per hour fed to the cost-normalizer calibration sweep.
    pub calibration_snapshots_per_hour: u32,
    pub seed: u64,
}

/// Top-level config file contents.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub arms: ArmGridConfig,
    #[serde(default)]
    pub bandit: BanditConfig,
    pub run: RunConfig,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| Error::format(path, e.to_string()))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Digest of the scenario + run sections; identifies a corpus.
    pub fn corpus_digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        let scenario = toml::to_string(&self.scenario).expect("scenario serializes");
        hasher.update(scenario.as_bytes());
        hasher.update(self.run.snapshots_per_hour.to_le_bytes());
        hasher.update(self.run.seed.to_le_bytes());
        hex_string(&hasher.finalize())
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.scenario.geometry;
        ensure(g.area_radius_m > 0.0, "area_radius_m must be > 0")?;
        ensure(g.urban_isd_m > 0.0, "urban_isd_m must be > 0")?;
        ensure(g.rural_isd_m > 0.0, "rural_isd_m must be > 0")?;
        ensure(
            g.urban_isd_m < g.rural_isd_m,
            "urban ISD must be smaller than rural ISD",
        )?;
        ensure(
            g.urban_center_m.0.hypot(g.urban_center_m.1) + g.urban_radius_m
                <= g.area_radius_m + 1e-9,
            "urban core must lie inside the study area",
        )?;
        ensure(
            g.rural_extent_m <= g.area_radius_m,
            "rural extent cannot exceed the area radius",
        )?;
        ensure(g.satellite_altitude_m > 0.0, "satellite altitude must be > 0")?;

        let t = &self.scenario.traffic;
        ensure(
            t.ue_count_per_hour.len() == 24,
            "ue_count_per_hour must list exactly 24 hours",
        )?;
        ensure(
            (0.0..=1.0).contains(&t.urban_fraction),
            "urban_fraction must lie in [0, 1]",
        )?;
        ensure(t.demand_rate_param > 0.0, "demand_rate_param must be > 0")?;
        ensure(
            t.urban_fraction == 1.0 || g.urban_radius_m < g.area_radius_m,
            "rural region is empty but urban_fraction < 1",
        )?;
        for (name, p) in [
            ("indoor_prob_urban", t.indoor_prob_urban),
            ("indoor_prob_rural", t.indoor_prob_rural),
        ] {
            ensure((0.0..=1.0).contains(&p), &format!("{name} must lie in [0, 1]"))?;
        }

        let c = &self.scenario.channel;
        ensure(c.carrier_hz > 0.0, "carrier_hz must be > 0")?;
        ensure(
            !c.satellite_buckets.is_empty(),
            "satellite_buckets must not be empty",
        )?;
        ensure(
            c.satellite_buckets
                .windows(2)
                .all(|w| w[0].min_elevation_deg < w[1].min_elevation_deg),
            "satellite buckets must ascend in min_elevation_deg",
        )?;
        ensure(
            c.satellite_buckets
                .windows(2)
                .all(|w| w[0].los_probability <= w[1].los_probability),
            "satellite LoS probability must be non-decreasing in elevation",
        )?;
        for b in &c.satellite_buckets {
            ensure(
                (0.0..=1.0).contains(&b.los_probability),
                "satellite LoS probability must lie in [0, 1]",
            )?;
            ensure(
                b.sf_sigma_los_db >= 0.0 && b.sf_sigma_nlos_db >= 0.0,
                "satellite shadow-fading sigmas must be >= 0",
            )?;
        }
        for tier in [&c.urban, &c.rural] {
            ensure(
                tier.sf_sigma_los_db >= 0.0 && tier.sf_sigma_nlos_db >= 0.0,
                "terrestrial shadow-fading sigmas must be >= 0",
            )?;
        }
        ensure(
            c.penetration_sigma_db >= 0.0,
            "penetration_sigma_db must be >= 0",
        )?;

        let r = &self.scenario.radio;
        ensure(r.total_bandwidth_hz > 0.0, "total_bandwidth_hz must be > 0")?;
        ensure(r.prb_hz > 0.0, "prb_hz must be > 0")?;
        ensure(r.subcarriers_per_prb > 0, "subcarriers_per_prb must be > 0")?;

        let p = &self.scenario.power;
        ensure(p.p0_w >= 0.0 && p.psi_w >= 0.0, "power components must be >= 0")?;

        let a = &self.arms;
        ensure(a.arm_count() > 0, "arm grids must be non-empty")?;
        for eps in &a.epsilon {
            ensure((0.0..=1.0).contains(eps), "epsilon grid values must lie in [0, 1]")?;
        }
        for tau in &a.tau_nu {
            ensure(
                *tau > 0.0 && *tau <= 1.0,
                "tau_nu grid values must lie in (0, 1]",
            )?;
        }

        let run = &self.run;
        ensure(run.snapshots_per_hour >= 1, "snapshots_per_hour must be >= 1")?;
        ensure(
            (0.0..1.0).contains(&run.holdout_fraction),
            "holdout_fraction must lie in [0, 1)",
        )?;
        ensure(run.cost_weight_c >= 0.0, "cost_weight_c must be >= 0")?;
        ensure(
            run.calibration_snapshots_per_hour >= 1,
            "calibration_snapshots_per_hour must be >= 1",
        )?;
        if let Some(gamma) = self.bandit.gamma_floor {
            let n = a.arm_count() as f64;
            ensure(
                gamma >= 0.0 && gamma <= 1.0 / n,
                "gamma_floor must lie in [0, 1/n]",
            )?;
        }
        Ok(())
    }
}

fn ensure(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::config(msg))
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn default_channel() -> ChannelConfig {
    ChannelConfig {
        carrier_hz: 2.0e9,
        g_tx_terrestrial_dbi: 14.0,
        g_tx_satellite_dbi: 30.0,
        g_ue_dbi: 0.0,
        urban: TierChannelConfig {
            los: PathLossCoeffs {
                offset_db: 28.0,
                slope: 22.0,
            },
            nlos: PathLossCoeffs {
                offset_db: 13.54,
                slope: 39.08,
            },
            sf_sigma_los_db: 4.0,
            sf_sigma_nlos_db: 8.0,
            los_model: LosModel::UrbanMacro {
                d0_m: 18.0,
                d1_m: 63.0,
            },
        },
        rural: TierChannelConfig {
            los: PathLossCoeffs {
                offset_db: 32.45,
                slope: 20.0,
            },
            nlos: PathLossCoeffs {
                offset_db: 13.54,
                slope: 35.0,
            },
            sf_sigma_los_db: 4.0,
            sf_sigma_nlos_db: 8.0,
            los_model: LosModel::RuralMacro {
                d0_m: 10.0,
                scale_m: 1000.0,
            },
        },
        satellite_buckets: vec![
            ElevationBucket {
                min_elevation_deg: 0.0,
                los_probability: 0.30,
                sf_sigma_los_db: 2.0,
                sf_sigma_nlos_db: 12.0,
                clutter_loss_nlos_db: 34.3,
            },
            ElevationBucket {
                min_elevation_deg: 30.0,
                los_probability: 0.60,
                sf_sigma_los_db: 1.5,
                sf_sigma_nlos_db: 10.0,
                clutter_loss_nlos_db: 34.3,
            },
            ElevationBucket {
                min_elevation_deg: 60.0,
                los_probability: 0.90,
                sf_sigma_los_db: 1.0,
                sf_sigma_nlos_db: 9.0,
                clutter_loss_nlos_db: 34.3,
            },
            ElevationBucket {
                min_elevation_deg: 80.0,
                los_probability: 0.98,
                sf_sigma_los_db: 0.8,
                sf_sigma_nlos_db: 8.0,
                clutter_loss_nlos_db: 34.3,
            },
        ],
        scintillation_loss_db: 2.2,
        entry_loss_db: 15.0,
        penetration_tw_db: 20.0,
        penetration_in_db: 10.0,
        penetration_sigma_db: 4.4,
        noise_density_dbm_hz: -174.0,
    }
}

fn default_radio() -> RadioConfig {
    RadioConfig {
        total_bandwidth_hz: 40.0e6,
        prb_hz: 180.0e3,
        subcarriers_per_prb: 12,
        tx_power_per_re_terrestrial_dbm: 17.7,
        tx_power_per_re_satellite_dbm: 15.8,
        rsrp_min_dbm: -120.0,
    }
}

fn default_power() -> PowerConfig {
    PowerConfig {
        p0_w: 100.0,
        psi_w: 200.0,
    }
}

/// Paper-scale arm grids: 5 x 5 x 5 x 7 = 875 arms.
pub fn full_scale_arm_grid() -> ArmGridConfig {
    ArmGridConfig {
        epsilon: vec![0.25, 0.50, 0.75, 0.85, 0.90],
        tau_nu: vec![0.25, 0.50, 0.75, 0.85, 0.90],
        tau_rsrp_dbm: vec![-80.0, -90.0, -100.0, -110.0, -120.0],
        alpha: vec![-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0],
    }
}

/// Reduced desk-scale grids: 3 x 3 x 3 x 5 = 135 arms.
pub fn desk_scale_arm_grid() -> ArmGridConfig {
    ArmGridConfig {
        epsilon: vec![0.25, 0.50, 0.75],
        tau_nu: vec![0.25, 0.50, 0.90],
        tau_rsrp_dbm: vec![-100.0, -110.0, -120.0],
        alpha: vec![-3.0, -1.0, 0.0, 1.0, 3.0],
    }
}

/// Full-scale scenario: ~2500 km^2 beam footprint, 1776 terrestrial sites.
pub fn full_scale() -> ExperimentConfig {
    ExperimentConfig {
        scenario: ScenarioConfig {
            geometry: GeometryConfig {
                area_radius_m: 28_209.5,
                urban_radius_m: 7_955.0,
                urban_center_m: (2_500.0, 0.0),
                urban_isd_m: 500.0,
                rural_isd_m: 1_732.0,
                rural_extent_m: 28_209.5,
                satellite_altitude_m: 600_000.0,
                bs_height_m: 25.0,
                ue_height_m: 1.5,
            },
            traffic: TrafficConfig {
                ue_count_per_hour: TrafficConfig::diurnal_counts(2_000, 20_000),
                urban_fraction: 0.4,
                demand_rate_param: 2.0e-7,
                indoor_prob_urban: 0.8,
                indoor_prob_rural: 0.5,
            },
            channel: default_channel(),
            radio: default_radio(),
            power: default_power(),
        },
        arms: full_scale_arm_grid(),
        bandit: BanditConfig::default(),
        run: RunConfig {
            snapshots_per_hour: 7_000,
            holdout_fraction: 0.1,
            cost_weight_c: 1.0,
            calibration_snapshots_per_hour: 16,
            seed: 1,
        },
    }
}

/// Desk-scale scenario: 37 terrestrial sites, 50-500 UEs over the day,
/// 500 snapshots per hour. Runs end-to-end in minutes on one machine.
pub fn desk_scale() -> ExperimentConfig {
    ExperimentConfig {
        scenario: ScenarioConfig {
            geometry: GeometryConfig {
                area_radius_m: 5_000.0,
                urban_radius_m: 1_150.0,
                urban_center_m: (0.0, 0.0),
                urban_isd_m: 500.0,
                rural_isd_m: 1_732.0,
                rural_extent_m: 3_600.0,
                satellite_altitude_m: 600_000.0,
                bs_height_m: 25.0,
                ue_height_m: 1.5,
            },
            traffic: TrafficConfig {
                ue_count_per_hour: TrafficConfig::diurnal_counts(50, 500),
                urban_fraction: 0.4,
                demand_rate_param: 5.0e-7,
                indoor_prob_urban: 0.8,
                indoor_prob_rural: 0.35,
            },
            channel: default_channel(),
            radio: default_radio(),
            power: default_power(),
        },
        arms: desk_scale_arm_grid(),
        bandit: BanditConfig {
            // Horizon-scaled defaults are too conservative for the short
            // 450-step-per-hour desk corpus; these are logged with each run.
            eta: Some(0.05),
            gamma_floor: Some(0.1 / 135.0),
            omega: Some(0.01),
            mu: None,
            per_hour_contexts: true,
        },
        run: RunConfig {
            snapshots_per_hour: 500,
            holdout_fraction: 0.1,
            cost_weight_c: 1.0,
            calibration_snapshots_per_hour: 12,
            seed: 1,
        },
    }
}
