//! The intersection kernel: constant row mean and the U-statistic form of
//! the smoothed count.

use std::sync::Arc;

use geoflux::intersections::{self_intersections, weighted_counts};
use geoflux::kernels::{build_phi, kappa_phi, u_statistic, KernelConfig};
use geoflux::stats::{random_trace, row_sum_check};
use geoflux::surface::build_bolza;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> geoflux::Result<()> {
    let s = Arc::new(build_bolza());
    let cfg = KernelConfig::new(0.1, build_phi(0.3)?, 0.5, s.clone())?;
    println!("kappa_phi = {:.6e}", kappa_phi(&cfg.phi, &s));

    let rep = row_sum_check(&cfg, 3, 200_000, 1)?;
    println!("target delta^2 kappa_phi = {:.5e}", rep.target);
    for r in &rep.rows {
        println!("  row mean {:.5e} ± {:.1e}  z = {:+.2}", r.estimate.estimate, r.estimate.std_error, r.z);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let tr = random_trace(&mut rng, 40.0, &s, 0)?;
    let direct = weighted_counts(&self_intersections(&tr), &cfg.phi, None).n_phi;
    println!("N_phi direct {direct:.12}, as U-statistic {:.12}", u_statistic(&tr, &cfg)?);
    Ok(())
}
