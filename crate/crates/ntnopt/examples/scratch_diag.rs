use ntnopt::config;
use ntnopt::harness::{EvalSetting, Experiment, SnapshotEvaluator};
use ntnopt::heuristic::{CostNormalizer, ThetaConfig};

fn main() {
    let exp = Experiment::new(config::desk_scale()).unwrap();
    let id = CostNormalizer::identity();
    println!("terrestrial stations: {}", exp.topology.terrestrial_count());
    for hour in [4u8, 12, 20] {
        let snap = exp.snapshot(hour, 0);
        let ev = SnapshotEvaluator::new(&exp, &snap);
        let k = snap.ue_count();
        println!("== hour {hour}: K={k} mean demand {:.2} Mbps", snap.ues.iter().map(|u| u.demand_bps).sum::<f64>() / 1e6 / k as f64);
        let tn = ev.outcome(&EvalSetting::benchmark_tn(), &id).unwrap();
        let ntn = ev.outcome(&EvalSetting::benchmark_ntn(&exp), &id).unwrap();
        println!("  tn : unsat {:.3} st {:.1} Mbps energy {:.0} W active {}", tn.violation, tn.sum_throughput_bps()/1e6, tn.tn_power_w, tn.active_terrestrial);
        println!("  ntn: unsat {:.3} st {:.1} Mbps energy {:.0} W active {}", ntn.violation, ntn.sum_throughput_bps()/1e6, ntn.tn_power_w, ntn.active_terrestrial);
        // a few representative arms
        for (name, th) in [
            ("eps.25 a1 tau.5 r-120", ThetaConfig{epsilon:0.25, tau_nu:0.5, tau_rsrp_dbm:-120.0, alpha:1.0}),
            ("eps.75 a0 tau.9 r-120", ThetaConfig{epsilon:0.75, tau_nu:0.9, tau_rsrp_dbm:-120.0, alpha:0.0}),
            ("eps.75 a-3 tau.9 r-110", ThetaConfig{epsilon:0.75, tau_nu:0.9, tau_rsrp_dbm:-110.0, alpha:-3.0}),
            ("eps.25 a3 tau.25 r-100", ThetaConfig{epsilon:0.25, tau_nu:0.25, tau_rsrp_dbm:-100.0, alpha:3.0}),
        ] {
            let o = ev.outcome(&EvalSetting::policy(&exp, th), &id).unwrap();
            println!("  {name}: unsat {:.3} st {:.1} energy {:.0} active {} raw_cost {:.1}", o.violation, o.sum_throughput_bps()/1e6, o.tn_power_w, o.active_terrestrial, o.raw_cost);
        }
        // coverage + satellite association stats under ntn benchmark
        let sat = exp.topology.satellite_index().unwrap();
        let ooc = ntn.association.iter().filter(|a| matches!(a, ntnopt::heuristic::Assignment::OutOfCoverage)).count();
        let on_sat = ntn.association.iter().filter(|a| matches!(a, ntnopt::heuristic::Assignment::Served{station} if *station == sat)).count();
        println!("  ntn coverage: ooc {ooc}/{k}, on satellite {on_sat}");
        // raw cost spread over all arms
        let mut costs: Vec<f64> = (0..exp.arms.len()).map(|i| ev.outcome(&EvalSetting::policy(&exp, exp.arms.theta(i)), &id).unwrap().raw_cost).collect();
        costs.sort_by(|a,b| a.partial_cmp(b).unwrap());
        println!("  cost over {} arms: min {:.1} med {:.1} max {:.1}", costs.len(), costs[0], costs[costs.len()/2], costs[costs.len()-1]);
    }
}
