//! Terrestrial base-station power model and network energy aggregation.

use serde::{Deserialize, Serialize};

/// Power model constants of one terrestrial station.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PowerModel {
    /// Baseline draw, present even while shut down (W).
    pub p0_w: f64,
    /// Static component of an active station (W).
    pub psi_w: f64,
}

/// Instantaneous consumption of one station: `Q = P0 + p + psi*1{active}`.
///
/// An active station always radiates its reference signals, so the on/off
/// indicator tracks the activity state; the dynamic term `p` scales with the
/// PRBs actually granted. A shut-down station draws exactly `P0`.
pub fn mbs_power(model: &PowerModel, active: bool, tx_power_w: f64) -> f64 {
    debug_assert!(tx_power_w >= 0.0);
    debug_assert!(active || tx_power_w == 0.0, "inactive stations do not transmit");
    if active {
        model.p0_w + model.psi_w + tx_power_w
    } else {
        model.p0_w
    }
}

/// Energy drawn by the terrestrial tier over a slot, reported in Wh.
/// The satellite runs on solar power and never contributes.
pub fn tn_energy_wh(per_mbs_powers_w: &[f64], slot_duration_s: f64) -> f64 {
    debug_assert!(slot_duration_s > 0.0);
    per_mbs_powers_w.iter().sum::<f64>() * slot_duration_s / 3_600.0
}
