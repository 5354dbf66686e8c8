//! Raw, smoothed and localized self-intersection counts of one random
//! geodesic, checked against the exhaustive enumeration.

use std::sync::Arc;

use geoflux::intersections::{self_intersections, self_intersections_naive, weighted_counts};
use geoflux::hyperbolic::DiskPoint;
use geoflux::kernels::{build_phi, LocalizerFn};
use geoflux::stats::random_trace;
use geoflux::surface::build_bolza;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> geoflux::Result<()> {
    let s = Arc::new(build_bolza());
    let phi = build_phi(0.3)?;
    let f = LocalizerFn::bump(DiskPoint::ORIGIN, 0.2, &s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let tr = random_trace(&mut rng, 200.0, &s, 0)?;
    let all = self_intersections(&tr);
    assert_eq!(all, self_intersections_naive(&tr));

    println!("{:>6} {:>8} {:>10} {:>10} {:>8}", "t", "N", "N_phi", "N_phi_f", "N/t^2");
    for t in [25.0, 50.0, 100.0, 200.0] {
        let c = weighted_counts(&all.restricted(t), &phi, Some(&f));
        println!("{t:>6} {:>8} {:>10.3} {:>10.4} {:>8.5}", c.n, c.n_phi, c.n_phi_f, c.n as f64 / (t * t));
    }
    println!("2 kappa_M = {:.5}", 2.0 * s.kappa_m());
    Ok(())
}
