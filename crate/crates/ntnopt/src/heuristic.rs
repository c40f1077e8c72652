//! Arm evaluation: max-RSRP initialization, pricing-based association,
//! satellite-offload shutdown, and cost/constraint computation.
//!
//! The passes run in a fixed order. Pricing always scores against the loads
//! of the max-RSRP pass; the shutdown sweep always starts from post-pricing
//! loads and re-checks the satellite load after every handover. Interference
//! is frozen at snapshot time with every terrestrial station transmitting,
//! so an evaluation is a deterministic function of (snapshot, theta).

use serde::{Deserialize, Serialize};

use crate::config::{PowerConfig, RadioConfig};
use crate::energy::{self, PowerModel};
use crate::radio::{self, BandwidthSplit};
use crate::scenario::DeploymentGeometry;
use crate::snapshot::{LinkTables, Snapshot};
use crate::units::dbm_to_watts;
use crate::Result;

/// One configuration tuple: bandwidth share, shutdown thresholds, and the
/// load weight of the pricing function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaConfig {
    pub epsilon: f64,
    pub tau_nu: f64,
    pub tau_rsrp_dbm: f64,
    pub alpha: f64,
}

/// Where a UE ended up after the passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Assignment {
    Served { station: usize },
    OutOfCoverage,
}

/// Result of evaluating one arm on one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkOutcome {
    pub association: Vec<Assignment>,
    /// Activity flag per station (satellite always active).
    pub active: Vec<bool>,
    pub per_ue_throughput_bps: Vec<f64>,
    pub per_ue_satisfied: Vec<bool>,
    /// Total draw of the terrestrial tier (W).
    pub tn_power_w: f64,
    /// Count of active terrestrial stations.
    pub active_terrestrial: usize,
    /// Raw cost before normalization.
    pub raw_cost: f64,
    /// Cost mapped through the affine normalizer and clipped to [0, 1].
    pub cost: f64,
    /// Fraction of unsatisfied UEs, an exact multiple of 1/K.
    pub violation: f64,
}

impl NetworkOutcome {
    pub fn sum_throughput_bps(&self) -> f64 {
        self.per_ue_throughput_bps.iter().sum()
    }
}

/// Everything an arm evaluation needs besides theta itself.
#[derive(Debug, Clone)]
pub struct EvalEnv<'a> {
    pub snapshot: &'a Snapshot,
    pub tables: &'a LinkTables,
    pub topology: &'a DeploymentGeometry,
    pub radio: &'a RadioConfig,
    pub power: &'a PowerConfig,
    /// Cost weight constant c; the trade-off factor is c / K.
    pub cost_weight_c: f64,
    /// System bandwidth to split; benchmarks override the scenario value.
    pub total_bandwidth_hz: f64,
    /// When false, the satellite is absent: it never serves and never
    /// receives handovers (terrestrial-only baseline).
    pub satellite_enabled: bool,
}

impl<'a> EvalEnv<'a> {
    pub fn new(
        snapshot: &'a Snapshot,
        tables: &'a LinkTables,
        topology: &'a DeploymentGeometry,
        radio: &'a RadioConfig,
        power: &'a PowerConfig,
        cost_weight_c: f64,
    ) -> Self {
        EvalEnv {
            snapshot,
            tables,
            topology,
            radio,
            power,
            cost_weight_c,
            total_bandwidth_hz: radio.total_bandwidth_hz,
            satellite_enabled: tables.satellite_idx.is_some(),
        }
    }

    fn satellite(&self) -> Option<usize> {
        if self.satellite_enabled {
            self.tables.satellite_idx
        } else {
            None
        }
    }

    fn station_budget(&self, station: usize, split: &BandwidthSplit) -> u32 {
        if Some(station) == self.tables.satellite_idx {
            split.satellite_prbs
        } else {
            split.terrestrial_prbs
        }
    }

    /// Candidate stations a UE may associate with: RSRP at or above the
    /// coverage threshold, satellite only when enabled.
    fn candidates(&self, ue: usize) -> impl Iterator<Item = usize> + '_ {
        let sat_idx = self.tables.satellite_idx;
        let sat_enabled = self.satellite_enabled;
        (0..self.tables.station_count).filter(move |&j| {
            if Some(j) == sat_idx && !sat_enabled {
                return false;
            }
            self.tables.rsrp(ue, j) >= self.radio.rsrp_min_dbm
        })
    }
}

/// Pricing score of a candidate station: RSRP in dBm minus `alpha` times the
/// station load. A negative alpha makes loaded stations more attractive.
pub fn price(rsrp_dbm: f64, alpha: f64, load: f64) -> f64 {
    rsrp_dbm - alpha * load
}

/// Raw (uncapped) load per station for a given association.
fn loads_for(env: &EvalEnv, association: &[Assignment], split: &BandwidthSplit) -> Vec<f64> {
    let n_sta = env.tables.station_count;
    let mut used = vec![0u64; n_sta];
    for (ue, assignment) in association.iter().enumerate() {
        if let Assignment::Served { station } = *assignment {
            used[station] += u64::from(env.tables.need(ue, station).unwrap_or(0));
        }
    }
    (0..n_sta)
        .map(|j| {
            let budget = env.station_budget(j, split);
            if budget == 0 {
                if used[j] == 0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                used[j] as f64 / f64::from(budget)
            }
        })
        .collect()
}

/// Max-RSRP initialization: each UE attaches to its strongest covering
/// station (ties break to the lowest index); loads follow.
pub fn init_max_rsrp(env: &EvalEnv, split: &BandwidthSplit) -> (Vec<Assignment>, Vec<f64>) {
    let association: Vec<Assignment> = (0..env.tables.ue_count)
        .map(|ue| {
            let best = env
                .candidates(ue)
                .map(|j| (j, env.tables.rsrp(ue, j)))
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(b.0.cmp(&a.0)));
            match best {
                Some((station, _)) => Assignment::Served { station },
                None => Assignment::OutOfCoverage,
            }
        })
        .collect();
    let loads = loads_for(env, &association, split);
    (association, loads)
}

/// Pricing pass: every UE re-attaches to the candidate maximizing the
/// pricing score computed against the initialization loads; loads are then
/// recomputed from the new association.
pub fn associate_pricing(
    env: &EvalEnv,
    theta: &ThetaConfig,
    init_loads: &[f64],
    split: &BandwidthSplit,
) -> (Vec<Assignment>, Vec<f64>) {
    let association: Vec<Assignment> = (0..env.tables.ue_count)
        .map(|ue| {
            let best = env
                .candidates(ue)
                .map(|j| (j, price(env.tables.rsrp(ue, j), theta.alpha, init_loads[j])))
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(b.0.cmp(&a.0)));
            match best {
                Some((station, _)) => Assignment::Served { station },
                None => Assignment::OutOfCoverage,
            }
        })
        .collect();
    let loads = loads_for(env, &association, split);
    (association, loads)
}

/// Shutdown sweep over active terrestrial stations in ascending-load order.
/// A station shuts down when its load plus the current satellite load stays
/// within `tau_nu` and every UE it serves sees the satellite at or above
/// `tau_rsrp`; its UEs hand over to the satellite and the satellite load is
/// updated before the next candidate is tested.
pub fn shutdown_pass(
    env: &EvalEnv,
    theta: &ThetaConfig,
    association: &mut [Assignment],
    loads: &[f64],
    split: &BandwidthSplit,
) -> Vec<bool> {
    let n_sta = env.tables.station_count;
    let mut active = vec![true; n_sta];
    let satellite = env.satellite();

    let mut served: Vec<Vec<usize>> = vec![Vec::new(); n_sta];
    for (ue, assignment) in association.iter().enumerate() {
        if let Assignment::Served { station } = *assignment {
            served[station].push(ue);
        }
    }

    let mut sat_used: u64 = satellite.map_or(0, |s| {
        served[s]
            .iter()
            .map(|&ue| u64::from(env.tables.need(ue, s).unwrap_or(0)))
            .sum()
    });
    let sat_budget = satellite.map_or(0, |s| env.station_budget(s, split));
    let sat_load = |used: u64| -> f64 {
        if sat_budget == 0 {
            if used == 0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            used as f64 / f64::from(sat_budget)
        }
    };

    let mut order: Vec<usize> = (0..n_sta)
        .filter(|&j| Some(j) != env.tables.satellite_idx)
        .collect();
    order.sort_by(|&a, &b| loads[a].partial_cmp(&loads[b]).unwrap().then(a.cmp(&b)));

    for j in order {
        let nu_sat = satellite.map_or(0.0, |_| sat_load(sat_used));
        if !(loads[j] + nu_sat <= theta.tau_nu) {
            continue;
        }
        let coverable = match satellite {
            Some(s) => served[j]
                .iter()
                .all(|&ue| env.tables.rsrp(ue, s) >= theta.tau_rsrp_dbm),
            // No satellite: only an empty station can go down.
            None => served[j].is_empty(),
        };
        if !coverable {
            continue;
        }
        if let Some(s) = satellite {
            for &ue in &served[j] {
                association[ue] = Assignment::Served { station: s };
                sat_used += u64::from(env.tables.need(ue, s).unwrap_or(0));
            }
            let handed = std::mem::take(&mut served[j]);
            served[s].extend(handed);
        }
        active[j] = false;
    }
    active
}

/// PRBs granted per UE on one station: full allocations in descending-RSRP
/// order while they fit, then the leftover spread proportionally over the
/// deferred UEs (floored, remainder one-by-one in the same order).
fn ration_station(
    env: &EvalEnv,
    station: usize,
    served: &[usize],
    budget: u32,
) -> Vec<(usize, u32)> {
    let mut order: Vec<usize> = served.to_vec();
    order.sort_by(|&a, &b| {
        env.tables
            .rsrp(b, station)
            .partial_cmp(&env.tables.rsrp(a, station))
            .unwrap()
            .then(a.cmp(&b))
    });

    let mut grants = Vec::with_capacity(order.len());
    let mut remaining = u64::from(budget);
    let mut deferred: Vec<(usize, u64)> = Vec::new();
    for &ue in &order {
        let need = u64::from(env.tables.need(ue, station).unwrap_or(0));
        if need <= remaining {
            grants.push((ue, need as u32));
            remaining -= need;
        } else {
            deferred.push((ue, need));
        }
    }
    if !deferred.is_empty() && remaining > 0 {
        let total_need: u64 = deferred.iter().map(|(_, n)| n).sum();
        let mut shares: Vec<u64> = deferred
            .iter()
            .map(|(_, need)| remaining * need / total_need)
            .collect();
        let mut leftover = remaining - shares.iter().sum::<u64>();
        for share in shares.iter_mut() {
            if leftover == 0 {
                break;
            }
            *share += 1;
            leftover -= 1;
        }
        for ((ue, _), share) in deferred.iter().zip(shares) {
            grants.push((*ue, share as u32));
        }
    } else {
        for (ue, _) in deferred {
            grants.push((ue, 0));
        }
    }
    grants
}

/// Affine cost normalizer: maps raw cost through `(raw - min)/(max - min)`
/// and clips into [0, 1]. Calibrated per hour by a full arm sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostNormalizer {
    pub min: f64,
    pub max: f64,
}

impl CostNormalizer {
    /// Pass-through normalizer; `cost` equals `raw_cost` clipped to [0, 1].
    pub fn identity() -> Self {
        CostNormalizer { min: 0.0, max: 1.0 }
    }

    pub fn apply(&self, raw: f64) -> f64 {
        let span = self.max - self.min;
        if span <= f64::EPSILON {
            return 0.0;
        }
        ((raw - self.min) / span).clamp(0.0, 1.0)
    }
}

/// Run the full four-step evaluation of one arm on one snapshot.
pub fn evaluate_arm(
    env: &EvalEnv,
    theta: &ThetaConfig,
    normalizer: &CostNormalizer,
) -> Result<NetworkOutcome> {
    let split = radio::split_bandwidth(
        env.total_bandwidth_hz,
        if env.satellite_enabled { theta.epsilon } else { 0.0 },
        env.radio.prb_hz,
    )?;

    // Step 1: max-RSRP initialization.
    let (_, init_loads) = init_max_rsrp(env, &split);
    // Step 2: pricing association against the initialization loads.
    let (mut association, loads) = associate_pricing(env, theta, &init_loads, &split);
    // Step 3: satellite-offload shutdown sweep.
    let active = shutdown_pass(env, theta, &mut association, &loads, &split);

    // Step 4: ration PRBs, then cost and constraint.
    let n_sta = env.tables.station_count;
    let n_ue = env.tables.ue_count;
    let mut served: Vec<Vec<usize>> = vec![Vec::new(); n_sta];
    for (ue, assignment) in association.iter().enumerate() {
        if let Assignment::Served { station } = *assignment {
            served[station].push(ue);
        }
    }

    let mut throughput = vec![0.0f64; n_ue];
    let mut granted_prbs = vec![0u64; n_sta];
    for j in 0..n_sta {
        if !active[j] || served[j].is_empty() {
            continue;
        }
        let budget = env.station_budget(j, &split);
        for (ue, grant) in ration_station(env, j, &served[j], budget) {
            granted_prbs[j] += u64::from(grant);
            throughput[ue] = radio::throughput(grant, env.tables.sinr(ue, j), env.radio.prb_hz);
        }
    }

    let mut satisfied = vec![false; n_ue];
    for ue in 0..n_ue {
        satisfied[ue] = match association[ue] {
            Assignment::OutOfCoverage => false,
            Assignment::Served { .. } => {
                // The ceiling in the allocation makes R >= rho exact in real
                // arithmetic; tolerate float rounding at the boundary.
                throughput[ue] >= env.snapshot.ues[ue].demand_bps * (1.0 - 1e-12)
            }
        };
    }

    let model = PowerModel {
        p0_w: env.power.p0_w,
        psi_w: env.power.psi_w,
    };
    let p_re_terr = dbm_to_watts(env.radio.tx_power_per_re_terrestrial_dbm);
    let subcarriers = f64::from(env.radio.subcarriers_per_prb);
    let mut per_station_power = Vec::with_capacity(n_sta);
    let mut active_terrestrial = 0;
    for j in 0..n_sta {
        if Some(j) == env.tables.satellite_idx {
            continue;
        }
        let tx_w = if active[j] {
            p_re_terr * subcarriers * granted_prbs[j] as f64
        } else {
            0.0
        };
        if active[j] {
            active_terrestrial += 1;
        }
        per_station_power.push(energy::mbs_power(&model, active[j], tx_w));
    }
    let tn_power_w: f64 = per_station_power.iter().sum();

    let k = n_ue.max(1) as f64;
    let zeta = env.cost_weight_c / k;
    let sum_log_throughput: f64 = throughput.iter().map(|&r| r.max(1.0).ln()).sum();
    let raw_cost = zeta * tn_power_w - sum_log_throughput;
    let unsatisfied = satisfied.iter().filter(|&&s| !s).count();
    let violation = if n_ue == 0 {
        0.0
    } else {
        unsatisfied as f64 / n_ue as f64
    };

    Ok(NetworkOutcome {
        association,
        active,
        per_ue_throughput_bps: throughput,
        per_ue_satisfied: satisfied,
        tn_power_w,
        active_terrestrial,
        raw_cost,
        cost: normalizer.apply(raw_cost),
        violation,
    })
}

/// The arm the terrestrial-only baseline replays: max-RSRP association and
/// shutdown of empty stations only (both thresholds at infinity).
pub fn benchmark_theta_tn() -> ThetaConfig {
    ThetaConfig {
        epsilon: 0.0,
        tau_nu: f64::INFINITY,
        tau_rsrp_dbm: f64::INFINITY,
        alpha: 0.0,
    }
}

/// The arm the fixed-split integrated baseline replays: 30 of 40 MHz to the
/// satellite tier, max-RSRP association, empty-station shutdown only.
pub fn benchmark_theta_ntn() -> ThetaConfig {
    ThetaConfig {
        epsilon: 0.75,
        tau_nu: f64::INFINITY,
        tau_rsrp_dbm: f64::INFINITY,
        alpha: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{self, ScenarioConfig};
    use crate::scenario::{self, DeploymentGeometry};
    use crate::snapshot::{LinkTables, Snapshot};
    use approx::assert_relative_eq;

    struct Fixture {
        scenario: ScenarioConfig,
        topology: DeploymentGeometry,
        snapshot: Snapshot,
        tables: LinkTables,
    }

    impl Fixture {
        fn desk(hour: u8, seed: u64) -> Fixture {
            let scenario_cfg = config::desk_scale().scenario;
            let topology = scenario::build_topology(&scenario_cfg.geometry).unwrap();
            let snapshot = Snapshot::generate(&scenario_cfg, &topology, hour, seed);
            let tables = LinkTables::build(
                &snapshot,
                &topology,
                &scenario_cfg.radio,
                scenario_cfg.channel.noise_density_dbm_hz,
            );
            Fixture {
                scenario: scenario_cfg,
                topology,
                snapshot,
                tables,
            }
        }

        fn env(&self) -> EvalEnv<'_> {
            EvalEnv::new(
                &self.snapshot,
                &self.tables,
                &self.topology,
                &self.scenario.radio,
                &self.scenario.power,
                1.0,
            )
        }
    }

    fn grid_theta() -> ThetaConfig {
        ThetaConfig {
            epsilon: 0.5,
            tau_nu: 0.9,
            tau_rsrp_dbm: -120.0,
            alpha: 1.0,
        }
    }

    #[test]
    fn pricing_score_arithmetic() {
        assert_relative_eq!(price(-90.0, 2.0, 0.5), -91.0, epsilon = 1e-12);
        assert_relative_eq!(price(-90.0, -3.0, 1.0), -87.0, epsilon = 1e-12);
        // alpha = 0 reduces to the RSRP itself.
        assert_relative_eq!(price(-87.3, 0.0, 0.77), -87.3, epsilon = 1e-12);
    }

    #[test]
    fn max_rsrp_attaches_to_argmax() {
        let fx = Fixture::desk(12, 7);
        let env = fx.env();
        let split = radio::split_bandwidth(40e6, 0.5, 180e3).unwrap();
        let (association, _) = init_max_rsrp(&env, &split);
        for (ue, assignment) in association.iter().enumerate() {
            match *assignment {
                Assignment::Served { station } => {
                    let rsrp = env.tables.rsrp(ue, station);
                    assert!(rsrp >= env.radio.rsrp_min_dbm);
                    for j in 0..env.tables.station_count {
                        assert!(env.tables.rsrp(ue, j) <= rsrp);
                    }
                }
                Assignment::OutOfCoverage => {
                    for j in 0..env.tables.station_count {
                        assert!(env.tables.rsrp(ue, j) < env.radio.rsrp_min_dbm);
                    }
                }
            }
        }
    }

    #[test]
    fn zero_alpha_pricing_equals_max_rsrp() {
        let fx = Fixture::desk(20, 3);
        let env = fx.env();
        let split = radio::split_bandwidth(40e6, 0.5, 180e3).unwrap();
        let (init, loads) = init_max_rsrp(&env, &split);
        let theta = ThetaConfig {
            alpha: 0.0,
            ..grid_theta()
        };
        let (priced, _) = associate_pricing(&env, &theta, &loads, &split);
        assert_eq!(init, priced);
    }

    #[test]
    fn pricing_prefers_lightly_loaded_cell_in_two_cell_toy() {
        // Cell A: RSRP -80, load 1.0. Cell B: RSRP -82, load 0.0. At
        // alpha = 3 the scores are -83 vs -82, so B wins.
        let a = price(-80.0, 3.0, 1.0);
        let b = price(-82.0, 3.0, 0.0);
        assert!(b > a);
        assert_relative_eq!(a, -83.0, epsilon = 1e-12);
        assert_relative_eq!(b, -82.0, epsilon = 1e-12);
    }

    #[test]
    fn empty_snapshot_evaluates_cleanly() {
        let mut scenario_cfg = config::desk_scale().scenario;
        scenario_cfg.traffic.ue_count_per_hour = vec![0; 24];
        let topology = scenario::build_topology(&scenario_cfg.geometry).unwrap();
        let snapshot = Snapshot::generate(&scenario_cfg, &topology, 0, 1);
        let tables = LinkTables::build(
            &snapshot,
            &topology,
            &scenario_cfg.radio,
            scenario_cfg.channel.noise_density_dbm_hz,
        );
        let env = EvalEnv::new(
            &snapshot,
            &tables,
            &topology,
            &scenario_cfg.radio,
            &scenario_cfg.power,
            1.0,
        );
        let outcome = evaluate_arm(&env, &grid_theta(), &CostNormalizer::identity()).unwrap();
        assert_eq!(outcome.violation, 0.0);
        assert!(outcome.association.is_empty());
        // Every empty station passes the vacuous handover check and the load
        // test at tau_nu = 0.9, so the whole terrestrial tier shuts down.
        assert_eq!(outcome.active_terrestrial, 0);
        let m = topology.terrestrial_count() as f64;
        assert_relative_eq!(outcome.tn_power_w, m * 100.0, epsilon = 1e-9);
    }

    #[test]
    fn zero_tau_nu_shuts_nothing_with_traffic_on_every_cell() {
        let fx = Fixture::desk(20, 9);
        let env = fx.env();
        let theta = ThetaConfig {
            tau_nu: 1e-12,
            ..grid_theta()
        };
        let outcome = evaluate_arm(&env, &theta, &CostNormalizer::identity()).unwrap();
        // Only stations with exactly zero load can pass a ~zero threshold
        // (and only while the satellite load is still zero).
        let split = radio::split_bandwidth(40e6, theta.epsilon, 180e3).unwrap();
        let (_, init_loads) = init_max_rsrp(&env, &split);
        let (_, loads) = associate_pricing(&env, &theta, &init_loads, &split);
        for (j, active) in outcome.active.iter().enumerate() {
            if Some(j) == env.tables.satellite_idx {
                continue;
            }
            if !active {
                assert_eq!(loads[j], 0.0, "station {j} had load but shut down");
            }
        }
    }

    #[test]
    fn shutdown_respects_sequential_satellite_load_update() {
        // Construct a toy where offloading the first (lighter) cell pushes
        // the satellite load past tau_nu, so the second cell must stay up.
        let fx = Fixture::desk(20, 21);
        let env = fx.env();
        let theta = ThetaConfig {
            epsilon: 0.25,
            tau_nu: 0.9,
            tau_rsrp_dbm: -130.0,
            alpha: 0.0,
        };
        let split = radio::split_bandwidth(40e6, theta.epsilon, 180e3).unwrap();
        let (_, init_loads) = init_max_rsrp(&env, &split);
        let (mut association, loads) = associate_pricing(&env, &theta, &init_loads, &split);
        let active = shutdown_pass(&env, &theta, &mut association, &loads, &split);

        // Replay the sweep independently and verify each decision.
        let sat = env.tables.satellite_idx.unwrap();
        let (mut association2, _) = associate_pricing(&env, &theta, &init_loads, &split);
        let mut served: Vec<Vec<usize>> = vec![Vec::new(); env.tables.station_count];
        for (ue, a) in association2.iter().enumerate() {
            if let Assignment::Served { station } = *a {
                served[station].push(ue);
            }
        }
        let sat_budget = f64::from(split.satellite_prbs);
        let mut sat_used: f64 = served[sat]
            .iter()
            .map(|&ue| f64::from(env.tables.need(ue, sat).unwrap_or(0)))
            .sum();
        let mut order: Vec<usize> = (0..env.tables.station_count)
            .filter(|&j| j != sat)
            .collect();
        order.sort_by(|&a, &b| loads[a].partial_cmp(&loads[b]).unwrap().then(a.cmp(&b)));
        for j in order {
            let nu_sat = sat_used / sat_budget;
            let can = loads[j] + nu_sat <= theta.tau_nu
                && served[j]
                    .iter()
                    .all(|&ue| env.tables.rsrp(ue, sat) >= theta.tau_rsrp_dbm);
            assert_eq!(!active[j], can, "station {j}");
            if can {
                for &ue in &served[j] {
                    sat_used += f64::from(env.tables.need(ue, sat).unwrap_or(0));
                    association2[ue] = Assignment::Served { station: sat };
                }
                served[j].clear();
            }
        }
        assert_eq!(association, association2);
    }

    #[test]
    fn constructed_toy_verifies_sequential_satellite_recheck() {
        // Two loaded cells plus one empty cell and a small satellite budget.
        // Offloading the first loaded cell pushes the satellite load to
        // exactly tau_nu, so the second loaded cell must stay active.
        use crate::channel::LinkState;
        use crate::scenario::{Region, Station, Ue};

        let geometry = config::desk_scale().scenario.geometry;
        let topology = DeploymentGeometry {
            stations: vec![
                Station::Terrestrial {
                    position: (0.0, 0.0),
                    tier: Region::Urban,
                },
                Station::Terrestrial {
                    position: (1_000.0, 0.0),
                    tier: Region::Urban,
                },
                Station::Terrestrial {
                    position: (2_000.0, 0.0),
                    tier: Region::Urban,
                },
                Station::Satellite {
                    altitude_m: 600_000.0,
                    beam_center: (0.0, 0.0),
                },
            ],
            geometry,
        };
        let radio = config::desk_scale().scenario.radio;
        let power = config::desk_scale().scenario.power;
        let noise_dbm_hz = config::desk_scale().scenario.channel.noise_density_dbm_hz;
        let noise_w = radio.noise_per_re_w(noise_dbm_hz);
        let p_terr = dbm_to_watts(radio.tx_power_per_re_terrestrial_dbm);
        let p_sat = dbm_to_watts(radio.tx_power_per_re_satellite_dbm);

        // Each UE sees its own cell far above the coverage floor, the other
        // cells at a negligible level, and the satellite at SNR ~1 (below
        // the coverage floor but above the handover threshold used here).
        let strong = 1e6 * noise_w / p_terr;
        let weak = 1e-30;
        let sat_gain = noise_w / p_sat;
        let demand = 1.25e6; // 1 PRB at its own cell, 7 on the satellite
        let ue = |id, x| Ue {
            id,
            position: (x, 0.0),
            indoor: false,
            region: Region::Urban,
            demand_bps: demand,
        };
        let link = |gain| LinkState {
            gain_linear: gain,
            los: true,
        };
        let snapshot = Snapshot {
            hour: 0,
            seed: 0,
            ues: vec![ue(0, 0.0), ue(1, 1_000.0)],
            links: vec![
                // ue0: strong to T0.
                link(strong),
                link(weak),
                link(weak),
                link(sat_gain),
                // ue1: strong to T1.
                link(weak),
                link(strong),
                link(weak),
                link(sat_gain),
            ],
            station_count: 4,
        };
        let tables = LinkTables::build(&snapshot, &topology, &radio, noise_dbm_hz);
        let env = EvalEnv::new(&snapshot, &tables, &topology, &radio, &power, 1.0);
        // eps = 0.046 gives the satellite exactly 10 PRBs of the 40 MHz band.
        let theta = ThetaConfig {
            epsilon: 0.046,
            tau_nu: 0.7,
            tau_rsrp_dbm: -140.0,
            alpha: 0.0,
        };
        let split = radio::split_bandwidth(40e6, theta.epsilon, radio.prb_hz).unwrap();
        assert_eq!(split.satellite_prbs, 10);
        assert_eq!(env.tables.need(0, 3), Some(7));
        assert_eq!(env.tables.need(0, 0), Some(1));

        let (_, init_loads) = init_max_rsrp(&env, &split);
        let (mut association, loads) = associate_pricing(&env, &theta, &init_loads, &split);
        assert_eq!(association[0], Assignment::Served { station: 0 });
        assert_eq!(association[1], Assignment::Served { station: 1 });

        let active = shutdown_pass(&env, &theta, &mut association, &loads, &split);
        // The empty cell and the first loaded cell go down; the handover
        // drives the satellite load to 7/10 = 0.7, blocking the second.
        assert!(!active[2], "empty cell passes the vacuous check");
        assert!(!active[0], "first loaded cell offloads");
        assert!(active[1], "second loaded cell is blocked by the recheck");
        assert_eq!(association[0], Assignment::Served { station: 3 });
        assert_eq!(association[1], Assignment::Served { station: 1 });
    }

    #[test]
    fn handover_never_strands_a_ue() {
        let fx = Fixture::desk(10, 4);
        let env = fx.env();
        let theta = ThetaConfig {
            epsilon: 0.75,
            tau_nu: 0.9,
            tau_rsrp_dbm: -110.0,
            alpha: 0.0,
        };
        let split = radio::split_bandwidth(40e6, theta.epsilon, 180e3).unwrap();
        let (_, init_loads) = init_max_rsrp(&env, &split);
        let (before, loads) = associate_pricing(&env, &theta, &init_loads, &split);
        let mut after = before.clone();
        shutdown_pass(&env, &theta, &mut after, &loads, &split);
        let sat = env.tables.satellite_idx.unwrap();
        for ue in 0..env.tables.ue_count {
            if after[ue] != before[ue] {
                assert_eq!(after[ue], Assignment::Served { station: sat });
                assert!(env.tables.rsrp(ue, sat) >= theta.tau_rsrp_dbm);
            }
        }
    }

    #[test]
    fn violation_is_exact_multiple_of_one_over_k() {
        let fx = Fixture::desk(20, 2);
        let env = fx.env();
        let outcome = evaluate_arm(&env, &grid_theta(), &CostNormalizer::identity()).unwrap();
        let k = env.tables.ue_count as f64;
        let scaled = outcome.violation * k;
        assert_relative_eq!(scaled, scaled.round(), epsilon = 1e-9);
        let unsatisfied = outcome.per_ue_satisfied.iter().filter(|&&s| !s).count();
        assert_relative_eq!(
            outcome.violation,
            unsatisfied as f64 / k,
            epsilon = 1e-12
        );
    }

    #[test]
    fn cost_matches_direct_formula_with_zero_weight() {
        // With c = 0 the raw cost is minus the sum of log throughputs.
        let fx = Fixture::desk(12, 13);
        let mut env = fx.env();
        env.cost_weight_c = 0.0;
        let outcome = evaluate_arm(&env, &grid_theta(), &CostNormalizer::identity()).unwrap();
        let expected: f64 = outcome
            .per_ue_throughput_bps
            .iter()
            .map(|&r| r.max(1.0).ln())
            .sum();
        assert_relative_eq!(outcome.raw_cost, -expected, max_relative = 1e-12);
    }

    #[test]
    fn evaluation_is_deterministic() {
        let fx = Fixture::desk(17, 31);
        let env = fx.env();
        let a = evaluate_arm(&env, &grid_theta(), &CostNormalizer::identity()).unwrap();
        let b = evaluate_arm(&env, &grid_theta(), &CostNormalizer::identity()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn granted_prbs_never_exceed_budget() {
        let fx = Fixture::desk(20, 5);
        let env = fx.env();
        for theta in [
            grid_theta(),
            ThetaConfig {
                epsilon: 0.25,
                tau_nu: 0.25,
                tau_rsrp_dbm: -100.0,
                alpha: -3.0,
            },
        ] {
            let outcome = evaluate_arm(&env, &theta, &CostNormalizer::identity()).unwrap();
            let split = radio::split_bandwidth(40e6, theta.epsilon, 180e3).unwrap();
            let mut granted = vec![0u64; env.tables.station_count];
            for ue in 0..env.tables.ue_count {
                if let Assignment::Served { station } = outcome.association[ue] {
                    let r = outcome.per_ue_throughput_bps[ue];
                    let sinr = env.tables.sinr(ue, station);
                    if sinr > 0.0 {
                        let prbs =
                            (r / (env.radio.prb_hz * (1.0 + sinr).log2())).round() as u64;
                        granted[station] += prbs;
                    }
                }
            }
            for (j, &g) in granted.iter().enumerate() {
                let budget = u64::from(env.station_budget(j, &split));
                assert!(g <= budget, "station {j}: granted {g} > budget {budget}");
            }
        }
    }

    #[test]
    fn normalizer_clamps_and_degenerates() {
        let n = CostNormalizer { min: -10.0, max: 10.0 };
        assert_relative_eq!(n.apply(0.0), 0.5, epsilon = 1e-12);
        assert_eq!(n.apply(-20.0), 0.0);
        assert_eq!(n.apply(20.0), 1.0);
        let degenerate = CostNormalizer { min: 3.0, max: 3.0 };
        assert_eq!(degenerate.apply(3.0), 0.0);
    }

    #[test]
    fn unsatisfied_count_reacts_to_impossible_demand() {
        // Force two specific UEs to demand more than the whole band carries;
        // they must be unsatisfied and violation reflects exactly that delta.
        let fx = Fixture::desk(4, 8);
        let mut snapshot = fx.snapshot.clone();
        let base_env = EvalEnv::new(
            &fx.snapshot,
            &fx.tables,
            &fx.topology,
            &fx.scenario.radio,
            &fx.scenario.power,
            1.0,
        );
        let base = evaluate_arm(&base_env, &grid_theta(), &CostNormalizer::identity()).unwrap();

        snapshot.ues[0].demand_bps = 1e12;
        snapshot.ues[1].demand_bps = 1e12;
        let tables = LinkTables::build(
            &snapshot,
            &fx.topology,
            &fx.scenario.radio,
            fx.scenario.channel.noise_density_dbm_hz,
        );
        let env = EvalEnv::new(
            &snapshot,
            &tables,
            &fx.topology,
            &fx.scenario.radio,
            &fx.scenario.power,
            1.0,
        );
        let outcome = evaluate_arm(&env, &grid_theta(), &CostNormalizer::identity()).unwrap();
        assert!(!outcome.per_ue_satisfied[0]);
        assert!(!outcome.per_ue_satisfied[1]);
        assert!(outcome.violation >= base.violation);
    }
}
