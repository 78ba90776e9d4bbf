use channelflow::harness::*;

fn main() {
    for (msf, safety) in [(64.0_f64, 6.0_f64), (96.0, 8.0)] {
        let nu = 2.5e-3;
        let mut cfg = RunConfig::default();
        cfg.background.u = 2.0;
        cfg.initial.collar = 0.15;
        cfg.grid.n1 = 16;
        cfg.grid.layer_safety = safety;
        cfg.grid.max_spacing_fraction = msf;
        cfg.snapshots = 40;
        let t0 = std::time::Instant::now();
        let g = cfg.grid_for(nu).unwrap();
        let base = execute_run_on_grid(&cfg, nu, &g, false).unwrap();
        let fine = g.refined().unwrap();
        let refined = execute_run_on_grid(&cfg, nu, &fine, false).unwrap();
        let rel = (base.sup_error - refined.sup_error).abs() / base.sup_error;
        println!("msf={msf} safety={safety}: n2={} sup={:.5e} refined={:.5e} rel={:.4} elapsed={:?}",
            base.n2, base.sup_error, refined.sup_error, rel, t0.elapsed());
    }
    // slope with the gate-quality settings
    let mut cfg = RunConfig::default();
    cfg.background.u = 2.0;
    cfg.initial.collar = 0.15;
    cfg.grid.n1 = 16;
    cfg.grid.layer_safety = 6.0;
    cfg.grid.max_spacing_fraction = 64.0;
    cfg.snapshots = 40;
    cfg.gate.enabled = false;
    let t0 = std::time::Instant::now();
    let (summary, _) = execute_sweep(&cfg).unwrap();
    println!("sweep n1=16: slope={:.4} r2={:.5} pw={:?} {:?}",
        summary.rate.slope, summary.rate.r_squared,
        summary.rate.pairwise_slopes.iter().map(|s| (s*100.0).round()/100.0).collect::<Vec<_>>(), t0.elapsed());
}
