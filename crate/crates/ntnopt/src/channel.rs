//! Large-scale link gains, RSRP and SINR.
//!
//! Terrestrial links use log-distance path loss with LoS/NLoS coefficient
//! sets, lognormal shadow fading and O2I penetration for indoor UEs.
//! Satellite links use free-space path loss over the slant range plus
//! elevation-bucketed shadowing, clutter, scintillation and entry losses.
//! All randomness is frozen per link through the caller-provided seed.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::{ChannelConfig, ElevationBucket, LosModel, TierChannelConfig};
use crate::scenario::Region;
use crate::seeds;
use crate::units::db_to_linear;

/// Speed of light (m/s).
const C_M_S: f64 = 299_792_458.0;

/// Frozen state of one (station, UE) link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkState {
    /// Linear channel gain beta (dimensionless, > 0).
    pub gain_linear: f64,
    pub los: bool,
}

impl LinkState {
    /// Received power per RE in dBm for per-RE transmit power `p_re_w`.
    pub fn rsrp_dbm(&self, p_re_w: f64) -> f64 {
        rsrp_dbm(self.gain_linear, p_re_w)
    }
}

/// Received power per RE in dBm: `10*log10(beta * p * 1000)` with p in W.
/// Zero power maps to the -inf sentinel.
pub fn rsrp_dbm(gain_linear: f64, p_re_w: f64) -> f64 {
    10.0 * (gain_linear * p_re_w * 1_000.0).log10()
}

/// LoS probability of a terrestrial link at the given 2-D distance.
pub fn terrestrial_los_probability(model: &LosModel, distance_2d_m: f64) -> f64 {
    debug_assert!(distance_2d_m >= 0.0);
    match *model {
        LosModel::UrbanMacro { d0_m, d1_m } => {
            if distance_2d_m <= d0_m {
                1.0
            } else {
                let decay = (-distance_2d_m / d1_m).exp();
                (d0_m / distance_2d_m) * (1.0 - decay) + decay
            }
        }
        LosModel::RuralMacro { d0_m, scale_m } => {
            if distance_2d_m <= d0_m {
                1.0
            } else {
                (-(distance_2d_m - d0_m) / scale_m).exp()
            }
        }
    }
}

/// LoS probability of the satellite link at the given elevation angle.
pub fn satellite_los_probability(buckets: &[ElevationBucket], elevation_deg: f64) -> f64 {
    elevation_bucket(buckets, elevation_deg).los_probability
}

/// The bucket covering `elevation_deg`: the last one at or below it.
pub fn elevation_bucket(buckets: &[ElevationBucket], elevation_deg: f64) -> &ElevationBucket {
    buckets
        .iter()
        .rev()
        .find(|b| elevation_deg >= b.min_elevation_deg)
        .unwrap_or(&buckets[0])
}

/// Log-distance path loss in dB (positive): `offset + slope*log10(d_3d)
/// + 20*log10(f_GHz)`. Distances below 1 m are clamped to 1 m.
pub fn log_distance_path_loss_db(
    coeffs: &crate::config::PathLossCoeffs,
    distance_3d_m: f64,
    carrier_hz: f64,
) -> f64 {
    let d = distance_3d_m.max(1.0);
    coeffs.offset_db + coeffs.slope * d.log10() + 20.0 * (carrier_hz / 1e9).log10()
}

/// Free-space path loss in dB (positive) over `distance_m`.
pub fn free_space_path_loss_db(distance_m: f64, carrier_hz: f64) -> f64 {
    let d = distance_m.max(1.0);
    20.0 * (4.0 * std::f64::consts::PI * d * carrier_hz / C_M_S).log10()
}

/// Channel model bound to its constants and antenna heights.
#[derive(Debug, Clone)]
pub struct ChannelModel<'a> {
    pub cfg: &'a ChannelConfig,
    pub bs_height_m: f64,
    pub ue_height_m: f64,
}

impl<'a> ChannelModel<'a> {
    pub fn new(cfg: &'a ChannelConfig, bs_height_m: f64, ue_height_m: f64) -> Self {
        Self {
            cfg,
            bs_height_m,
            ue_height_m,
        }
    }

    fn tier_cfg(&self, tier: Region) -> &TierChannelConfig {
        match tier {
            Region::Urban => &self.cfg.urban,
            Region::Rural => &self.cfg.rural,
        }
    }

    /// Terrestrial link gain: `beta_dB = G_TX + G_UE - PL_b - (PL_tw + PL_in
    /// + N(0, sigma_p^2))_indoor + SF`, mapped to linear. Deterministic for a
    /// given (positions, indoor flag, seed).
    pub fn terrestrial_gain(
        &self,
        station_pos: (f64, f64),
        tier: Region,
        ue_pos: (f64, f64),
        ue_indoor: bool,
        link_seed: u64,
    ) -> LinkState {
        let d2d = (station_pos.0 - ue_pos.0).hypot(station_pos.1 - ue_pos.1);
        let dh = self.bs_height_m - self.ue_height_m;
        let d3d = d2d.hypot(dh);
        let tier_cfg = self.tier_cfg(tier);

        let mut rng = seeds::rng_from(link_seed);
        let los = rng.gen::<f64>() < terrestrial_los_probability(&tier_cfg.los_model, d2d);
        let (coeffs, sf_sigma) = if los {
            (&tier_cfg.los, tier_cfg.sf_sigma_los_db)
        } else {
            (&tier_cfg.nlos, tier_cfg.sf_sigma_nlos_db)
        };
        let path_loss = log_distance_path_loss_db(coeffs, d3d, self.cfg.carrier_hz);
        let sf = sample_normal(&mut rng, sf_sigma);
        let penetration = if ue_indoor {
            self.cfg.penetration_tw_db
                + self.cfg.penetration_in_db
                + sample_normal(&mut rng, self.cfg.penetration_sigma_db)
        } else {
            0.0
        };
        let beta_db = self.cfg.g_tx_terrestrial_dbi + self.cfg.g_ue_dbi - path_loss - penetration
            + sf;
        LinkState {
            gain_linear: db_to_linear(beta_db),
            los,
        }
    }

    /// Satellite link gain: free-space loss over the slant range plus
    /// elevation-bucketed shadowing/clutter, scintillation, and entry loss
    /// for indoor UEs.
    pub fn satellite_gain(
        &self,
        altitude_m: f64,
        beam_center: (f64, f64),
        ue_pos: (f64, f64),
        ue_indoor: bool,
        link_seed: u64,
    ) -> LinkState {
        let d2d = (beam_center.0 - ue_pos.0).hypot(beam_center.1 - ue_pos.1);
        let slant = d2d.hypot(altitude_m);
        let elevation_deg = altitude_m.atan2(d2d).to_degrees();
        let bucket = elevation_bucket(&self.cfg.satellite_buckets, elevation_deg);

        let mut rng = seeds::rng_from(link_seed);
        let los = rng.gen::<f64>() < bucket.los_probability;
        let sf_sigma = if los {
            bucket.sf_sigma_los_db
        } else {
            bucket.sf_sigma_nlos_db
        };
        let sf = sample_normal(&mut rng, sf_sigma);
        let clutter = if los { 0.0 } else { bucket.clutter_loss_nlos_db };
        let entry = if ue_indoor { self.cfg.entry_loss_db } else { 0.0 };
        let path_loss = free_space_path_loss_db(slant, self.cfg.carrier_hz);
        let beta_db = self.cfg.g_tx_satellite_dbi + self.cfg.g_ue_dbi - path_loss + sf
            - clutter
            - self.cfg.scintillation_loss_db
            - entry;
        LinkState {
            gain_linear: db_to_linear(beta_db),
            los,
        }
    }
}

fn sample_normal(rng: &mut impl Rng, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, sigma).expect("sigma >= 0").sample(rng)
}

/// Large-scale SINR: `beta*p / (sum beta'*p' + noise)`. The interferer list
/// must already be restricted to the serving tier (the two tiers occupy
/// orthogonal bands).
pub fn sinr(
    serving_gain: f64,
    p_serving_w: f64,
    interferers: &[(f64, f64)],
    noise_w: f64,
) -> f64 {
    debug_assert!(noise_w > 0.0);
    let interference: f64 = interferers.iter().map(|(g, p)| g * p).sum();
    serving_gain * p_serving_w / (interference + noise_w)
}
