use ntnopt::config;
use ntnopt::harness::Experiment;
use ntnopt::snapshot::LinkTables;

fn main() {
    let exp = Experiment::new(config::desk_scale()).unwrap();
    let snap = exp.snapshot(12, 0);
    let tables = LinkTables::build(&snap, &exp.topology, &exp.cfg.scenario.radio, exp.cfg.scenario.channel.noise_density_dbm_hz);
    let sat = tables.satellite_idx.unwrap();
    println!("{:>6} {:>7} {:>7} {:>9} {:>9} {:>7}", "ue", "r_m", "indoor", "best_terr", "sat_rsrp", "sat_los");
    let mut sat_wins = 0; let mut shown = 0;
    for (i, ue) in snap.ues.iter().enumerate() {
        let r = ue.position.0.hypot(ue.position.1);
        let best_terr = (0..sat).map(|j| tables.rsrp(i, j)).fold(f64::NEG_INFINITY, f64::max);
        let s = tables.rsrp(i, sat);
        if s > best_terr { sat_wins += 1; }
        if r > 4500.0 && shown < 15 {
            shown += 1;
            println!("{:>6} {:>7.0} {:>7} {:>9.1} {:>9.1} {:>7}", i, r, ue.indoor, best_terr, s, snap.link(i, sat).los);
        }
    }
    println!("sat wins for {}/{} UEs", sat_wins, snap.ue_count());
}
