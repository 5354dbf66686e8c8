//! Seeded ensemble of random geodesics and the quadratic growth of counts.

use geoflux::stats::{run_ensemble, slln_report, summarize, summary_csv, ExperimentConfig};

fn main() -> geoflux::Result<()> {
    let cfg = ExperimentConfig {
        t_grid: vec![50.0, 100.0, 200.0],
        replicas: 32,
        master_seed: 42,
        ..ExperimentConfig::default()
    };
    let records = run_ensemble(&cfg)?;
    print!("{}", summary_csv(&summarize(&records)));

    let rep = slln_report(&records, &cfg)?;
    for row in &rep.rows {
        println!(
            "t={:<5} N/t^2 = {:.5} ± {:.5}   N_phi/t^2 = {:.5}",
            row.t, row.n_over_t2.estimate, row.n_over_t2.std_error, row.n_phi_over_t2.estimate
        );
    }
    println!("kappa_M/2 = {:.5}, 2 kappa_M = {:.5}, kappa_phi/2 = {:.5}", rep.kappa_m_half, rep.two_kappa_m, rep.kappa_phi_half);
    println!("measured N/t^2 = {:.3} kappa_M", rep.measured_n_over_kappa_m);
    Ok(())
}
