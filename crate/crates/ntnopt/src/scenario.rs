//! Deployment geometry and UE placement.
//!
//! Terrestrial sites sit on hexagonal lattices: a dense lattice inside the
//! urban core and a sparse one across the rural ring. One satellite station
//! hovers at fixed altitude above the beam center and covers the whole area.

use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::config::{GeometryConfig, TrafficConfig};
use crate::seeds::{self, Stream};
use crate::{Error, Result};

/// Deployment tier of a station or UE position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    Urban,
    Rural,
}

/// One macro base station. Terrestrial stations carry a lattice position;
/// the satellite is identified by its altitude above the beam center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Station {
    Terrestrial { position: (f64, f64), tier: Region },
    Satellite { altitude_m: f64, beam_center: (f64, f64) },
}

impl Station {
    pub fn is_satellite(&self) -> bool {
        matches!(self, Station::Satellite { .. })
    }
}

/// The frozen deployment: all stations, terrestrial first, satellite last.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeploymentGeometry {
    pub stations: Vec<Station>,
    pub geometry: GeometryConfig,
}

impl DeploymentGeometry {
    pub fn terrestrial_count(&self) -> usize {
        self.stations.iter().filter(|s| !s.is_satellite()).count()
    }

    /// Index of the satellite station, if deployed.
    pub fn satellite_index(&self) -> Option<usize> {
        self.stations.iter().position(Station::is_satellite)
    }

    /// Geometry with the satellite removed (terrestrial-only baseline).
    pub fn without_satellite(&self) -> DeploymentGeometry {
        DeploymentGeometry {
            stations: self
                .stations
                .iter()
                .copied()
                .filter(|s| !s.is_satellite())
                .collect(),
            geometry: self.geometry.clone(),
        }
    }
}

/// One user terminal with its frozen position and demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ue {
    pub id: u32,
    pub position: (f64, f64),
    pub indoor: bool,
    pub region: Region,
    /// Data-rate demand (bit/s).
    pub demand_bps: f64,
}

/// Points of a hexagonal lattice with the given pitch inside `max_radius`
/// of the origin, sorted by (radius, angle) for a stable station order.
pub fn hex_lattice(isd_m: f64, max_radius_m: f64) -> Vec<(f64, f64)> {
    let mut points = Vec::new();
    if max_radius_m < 0.0 {
        return points;
    }
    let (ax, ay) = (isd_m, 0.0);
    let (bx, by) = (isd_m / 2.0, isd_m * 3f64.sqrt() / 2.0);
    let span = (max_radius_m / isd_m).ceil() as i64 + 1;
    for i in -span..=span {
        for j in -span..=span {
            let x = i as f64 * ax + j as f64 * bx;
            let y = i as f64 * ay + j as f64 * by;
            if (x * x + y * y).sqrt() <= max_radius_m + 1e-9 {
                points.push((x, y));
            }
        }
    }
    points.sort_by(|a, b| {
        let (ra, rb) = (a.0.hypot(a.1), b.0.hypot(b.1));
        let (ta, tb) = (a.1.atan2(a.0), b.1.atan2(b.0));
        ra.partial_cmp(&rb)
            .unwrap()
            .then(ta.partial_cmp(&tb).unwrap())
    });
    points
}

/// Build the deployment: urban lattice inside the urban core, rural lattice
/// across the ring out to the rural extent, one satellite over the center.
pub fn build_topology(geometry: &GeometryConfig) -> Result<DeploymentGeometry> {
    if geometry.area_radius_m <= 0.0 || geometry.urban_isd_m <= 0.0 || geometry.rural_isd_m <= 0.0
    {
        return Err(Error::config("area and ISDs must be positive"));
    }

    let mut stations = Vec::new();
    let (ucx, ucy) = geometry.urban_center_m;
    if geometry.urban_radius_m > 0.0 {
        for (x, y) in hex_lattice(geometry.urban_isd_m, geometry.urban_radius_m) {
            stations.push(Station::Terrestrial {
                position: (x + ucx, y + ucy),
                tier: Region::Urban,
            });
        }
    }
    for position in hex_lattice(geometry.rural_isd_m, geometry.rural_extent_m) {
        let from_urban_center = (position.0 - ucx).hypot(position.1 - ucy);
        if from_urban_center > geometry.urban_radius_m + 1e-9 {
            stations.push(Station::Terrestrial {
                position,
                tier: Region::Rural,
            });
        }
    }
    if stations.is_empty() {
        return Err(Error::config(
            "study area too small to hold a single terrestrial site",
        ));
    }
    stations.push(Station::Satellite {
        altitude_m: geometry.satellite_altitude_m,
        beam_center: (0.0, 0.0),
    });
    Ok(DeploymentGeometry {
        stations,
        geometry: geometry.clone(),
    })
}

/// Uniform point in the disc of radius `radius_m` around `center`.
fn uniform_in_disc(rng: &mut impl Rng, center: (f64, f64), radius_m: f64) -> (f64, f64) {
    let r = radius_m * rng.gen::<f64>().sqrt();
    let theta: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
    (center.0 + r * theta.cos(), center.1 + r * theta.sin())
}

/// Place the hour's UEs. Each UE is urban with probability `urban_fraction`
/// and lands uniformly in its region (the urban disc, or the study area
/// minus the urban disc); indoor flags are Bernoulli draws per region.
/// Demands are left at zero for [`sample_demands`] to fill in.
pub fn deploy_ues(
    geometry: &GeometryConfig,
    profile: &TrafficConfig,
    hour: u8,
    seed: u64,
) -> Vec<Ue> {
    assert!(hour < 24, "hour must lie in 0..24");
    let count = profile.ue_count_per_hour[hour as usize];
    let mut rng = seeds::rng_from(seeds::stream_seed(seed, Stream::UePlacement));
    let urban = Bernoulli::new(profile.urban_fraction).expect("validated fraction");
    let indoor_urban = Bernoulli::new(profile.indoor_prob_urban).expect("validated probability");
    let indoor_rural = Bernoulli::new(profile.indoor_prob_rural).expect("validated probability");
    let urban_center = geometry.urban_center_m;

    (0..count)
        .map(|id| {
            let is_urban = urban.sample(&mut rng);
            let (region, position, indoor) = if is_urban {
                (
                    Region::Urban,
                    uniform_in_disc(&mut rng, urban_center, geometry.urban_radius_m),
                    indoor_urban.sample(&mut rng),
                )
            } else {
                // Rejection-sample the study area minus the urban disc.
                let position = loop {
                    let p = uniform_in_disc(&mut rng, (0.0, 0.0), geometry.area_radius_m);
                    if (p.0 - urban_center.0).hypot(p.1 - urban_center.1)
                        > geometry.urban_radius_m
                    {
                        break p;
                    }
                };
                (Region::Rural, position, indoor_rural.sample(&mut rng))
            };
            Ue {
                id,
                position,
                indoor,
                region,
                demand_bps: 0.0,
            }
        })
        .collect()
}

/// Draw each UE's demand i.i.d. exponential with mean `1/rate`.
pub fn sample_demands(ues: &mut [Ue], rate: f64, seed: u64) -> Result<()> {
    if rate <= 0.0 {
        return Err(Error::config("demand rate parameter must be > 0"));
    }
    let mut rng = seeds::rng_from(seeds::stream_seed(seed, Stream::UeDemand));
    let exp = Exp::new(rate).expect("positive rate");
    for ue in ues.iter_mut() {
        ue.demand_bps = exp.sample(&mut rng);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config;

    fn desk_geometry() -> GeometryConfig {
        config::desk_scale().scenario.geometry
    }

    /// Brute-force lattice point enumeration, independent of `hex_lattice`'s
    /// basis arithmetic: walks axial coordinates and filters by distance.
    fn lattice_count_oracle(isd: f64, radius: f64) -> usize {
        let mut count = 0;
        let span = (radius / isd).ceil() as i64 + 2;
        for q in -span..=span {
            for r in -span..=span {
                let x = isd * (q as f64 + r as f64 / 2.0);
                let y = isd * r as f64 * 3f64.sqrt() / 2.0;
                if x.hypot(y) <= radius + 1e-9 {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn seven_cell_urban_disc() {
        // ISD 500 m, radius that admits the center and the first ring only.
        let points = hex_lattice(500.0, 600.0);
        assert_eq!(points.len(), 7);
        assert_eq!(points.len(), lattice_count_oracle(500.0, 600.0));
        assert_eq!(points[0], (0.0, 0.0));
        for p in &points[1..] {
            approx::assert_relative_eq!(p.0.hypot(p.1), 500.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn nineteen_cell_urban_disc() {
        let points = hex_lattice(500.0, 1_150.0);
        assert_eq!(points.len(), 19);
        assert_eq!(points.len(), lattice_count_oracle(500.0, 1_150.0));
    }

    #[test]
    fn interior_sites_have_six_neighbors_at_isd() {
        let isd = 500.0;
        let radius = 2_600.0;
        let points = hex_lattice(isd, radius);
        let mut interior = 0;
        for &(x, y) in &points {
            if x.hypot(y) > radius - isd - 1e-6 {
                continue;
            }
            interior += 1;
            let neighbors = points
                .iter()
                .filter(|&&(px, py)| {
                    let d = (px - x).hypot(py - y);
                    (d - isd).abs() <= 1e-6
                })
                .count();
            assert_eq!(neighbors, 6, "site at ({x}, {y})");
        }
        assert!(interior > 10, "test must cover interior sites");
    }

    #[test]
    fn degenerate_urban_disc_gives_rural_only_lattice() {
        let mut g = desk_geometry();
        g.urban_radius_m = 0.0;
        let topo = build_topology(&g).unwrap();
        assert!(topo
            .stations
            .iter()
            .all(|s| !matches!(s, Station::Terrestrial { tier: Region::Urban, .. })));
        assert!(topo.terrestrial_count() > 0);
        assert!(topo.satellite_index().is_some());
    }

    #[test]
    fn tiny_area_is_rejected() {
        let mut g = desk_geometry();
        g.urban_radius_m = 0.0;
        g.rural_extent_m = 0.0;
        // Rural lattice keeps only sites outside the urban radius; with both
        // radii at zero no terrestrial site fits.
        g.urban_isd_m = 1.0;
        g.rural_isd_m = 2.0;
        let err = build_topology(&g);
        assert!(err.is_err());
    }

    #[test]
    fn stations_lie_inside_study_area_and_satellite_is_last() {
        let topo = build_topology(&desk_geometry()).unwrap();
        let area = desk_geometry().area_radius_m;
        for s in &topo.stations {
            if let Station::Terrestrial { position, .. } = s {
                assert!(position.0.hypot(position.1) <= area + 1e-9);
            }
        }
        assert_eq!(topo.satellite_index(), Some(topo.stations.len() - 1));
        assert_eq!(topo.terrestrial_count(), topo.stations.len() - 1);
    }

    #[test]
    fn desk_topology_station_count_is_in_range() {
        let topo = build_topology(&desk_geometry()).unwrap();
        let m = topo.terrestrial_count();
        assert!((19..=37).contains(&m), "terrestrial count {m}");
    }

    #[test]
    fn full_scale_topology_has_1776_terrestrial_stations() {
        let g = config::full_scale().scenario.geometry;
        let topo = build_topology(&g).unwrap();
        assert_eq!(topo.terrestrial_count(), 1776);
    }

    #[test]
    fn deploy_is_deterministic_and_sized() {
        let g = desk_geometry();
        let profile = config::desk_scale().scenario.traffic;
        let a = deploy_ues(&g, &profile, 20, 77);
        let b = deploy_ues(&g, &profile, 20, 77);
        assert_eq!(a, b);
        assert_eq!(a.len(), profile.ue_count_per_hour[20] as usize);
        for ue in &a {
            let r = ue.position.0.hypot(ue.position.1);
            assert!(r <= g.area_radius_m + 1e-9);
            match ue.region {
                Region::Urban => assert!(r <= g.urban_radius_m + 1e-9),
                Region::Rural => assert!(r >= g.urban_radius_m - 1e-9),
            }
        }
    }

    #[test]
    fn zero_count_hour_gives_empty_list() {
        let g = desk_geometry();
        let mut profile = config::desk_scale().scenario.traffic;
        profile.ue_count_per_hour[3] = 0;
        assert!(deploy_ues(&g, &profile, 3, 1).is_empty());
    }

    #[test]
    fn urban_share_matches_configured_fraction() {
        let g = desk_geometry();
        let mut profile = config::desk_scale().scenario.traffic;
        profile.ue_count_per_hour = vec![1_000; 24];
        let mut urban_total = 0usize;
        let mut total = 0usize;
        for seed in 0..20u64 {
            let ues = deploy_ues(&g, &profile, 12, seed);
            urban_total += ues.iter().filter(|u| u.region == Region::Urban).count();
            total += ues.len();
        }
        let share = urban_total as f64 / total as f64;
        assert!((share - 0.4).abs() < 0.05, "urban share {share}");
    }

    #[test]
    fn urban_rural_split_passes_chi_square() {
        // Chi-square goodness of fit on the aggregated urban/rural counts;
        // one degree of freedom, 1% critical value 6.635.
        let g = desk_geometry();
        let mut profile = config::desk_scale().scenario.traffic;
        profile.ue_count_per_hour = vec![500; 24];
        let mut urban = 0f64;
        let mut rural = 0f64;
        for seed in 100..140u64 {
            for ue in deploy_ues(&g, &profile, 0, seed) {
                match ue.region {
                    Region::Urban => urban += 1.0,
                    Region::Rural => rural += 1.0,
                }
            }
        }
        let total = urban + rural;
        let (eu, er) = (total * 0.4, total * 0.6);
        let chi2 = (urban - eu).powi(2) / eu + (rural - er).powi(2) / er;
        assert!(chi2 < 6.635, "chi2 = {chi2}");
    }

    #[test]
    fn demand_sampling_matches_mean_and_is_deterministic() {
        let g = desk_geometry();
        let mut profile = config::desk_scale().scenario.traffic;
        profile.ue_count_per_hour = vec![100_000; 24];
        let mut ues = deploy_ues(&g, &profile, 0, 5);
        sample_demands(&mut ues, 1e-6, 5).unwrap();
        let mean = ues.iter().map(|u| u.demand_bps).sum::<f64>() / ues.len() as f64;
        assert!(
            (mean - 1e6).abs() / 1e6 < 0.02,
            "law-of-large-numbers check failed: mean {mean}"
        );

        let mut again = deploy_ues(&g, &profile, 0, 5);
        sample_demands(&mut again, 1e-6, 5).unwrap();
        assert_eq!(ues, again);
    }

    #[test]
    fn demand_rate_must_be_positive() {
        let mut ues = Vec::new();
        assert!(sample_demands(&mut ues, 0.0, 1).is_err());
        // Zero UEs with a valid rate is a no-op.
        assert!(sample_demands(&mut ues, 1.0, 1).is_ok());
    }
}
