//! Variance exponents of global and localized counts, normality of the
//! localized count and moments of the global fluctuations.

use geoflux::stats::{global_fluctuation_report, localized_clt, run_ensemble, scaling_exponents, ExperimentConfig};

fn main() -> geoflux::Result<()> {
    let cfg = ExperimentConfig {
        t_grid: vec![50.0, 100.0, 200.0, 400.0],
        replicas: 200,
        f_radius: 1.2,
        master_seed: 5,
        ..ExperimentConfig::default()
    };
    let records = run_ensemble(&cfg)?;

    let sc = scaling_exponents(&records, &cfg)?;
    println!("Var N_phi   ~ t^{:.2}  (95% CI {:.2}..{:.2})", sc.global.slope, sc.global.ci_low, sc.global.ci_high);
    println!("Var N_phi;f ~ t^{:.2}  (95% CI {:.2}..{:.2})", sc.local.slope, sc.local.ci_low, sc.local.ci_high);

    let clt = localized_clt(&records, &cfg, 400.0)?;
    println!("localized count at t=400: KS p = {:.3}, skewness {:.3}", clt.p_value, clt.skewness);

    let fl = global_fluctuation_report(&records, &cfg, 400.0)?;
    println!("centering c = {:.5}", fl.centering);
    for m in &fl.by_time {
        println!("  t={:<4} var {:.4} third {:+.4} fourth {:.4}", m.t, m.variance, m.third, m.fourth);
    }
    if let Some(g) = fl.gqf {
        println!("two-term quadratic form fit: theta = ({:.4}, {:.4})", g.theta1, g.theta2);
    }
    Ok(())
}
