//! Smoothed kernel integrals bracketing the smoothed count.

use std::sync::Arc;

use geoflux::kernels::{build_phi, KernelConfig, SANDWICH_STEPS_PER_DELTA};
use geoflux::stats::sandwich_check;
use geoflux::surface::build_bolza;

fn main() -> geoflux::Result<()> {
    let s = Arc::new(build_bolza());
    for delta in [0.2, 0.1] {
        let cfg = KernelConfig::new(delta, build_phi(0.3)?, 0.5, s.clone())?;
        let rep = sandwich_check(&cfg, 8, 40.0, delta / SANDWICH_STEPS_PER_DELTA, 3)?;
        println!("delta {delta}: {} violations, mean gap/T {:.4}", rep.violations(), rep.mean_gap_over_t());
        for r in &rep.rows {
            println!(
                "  {:>9.4} <= {:>9.4} <= {:>9.4}   edge crossings within 2 delta: {:.3}",
                r.bounds.lower, r.n_phi, r.bounds.upper, r.edge_count_two_delta
            );
        }
    }
    Ok(())
}
