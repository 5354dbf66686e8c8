//! Decay of correlations of the geodesic flow and double ergodic averages.

use geoflux::hyperbolic::DiskPoint;
use geoflux::stats::{bump_observable, correlation_decay, double_average_check, ExperimentConfig, PairKernel};

fn main() -> geoflux::Result<()> {
    let cfg = ExperimentConfig {
        replicas: 4000,
        master_seed: 9,
        ..ExperimentConfig::default()
    };
    let s = cfg.surface_spec()?;
    let g = bump_observable(&s, DiskPoint::ORIGIN, 1.0)?;
    let lags = [0.0, 0.5, 1.0, 2.0, 3.0, 5.0];
    let rep = correlation_decay(&g, &lags, &cfg)?;
    for (p, q) in rep.points.iter().zip(&rep.shuffled) {
        println!("lag {:>3}: corr {:+.4} ± {:.4}   shuffled {:+.4}", p.lag, p.corr, p.std_error, q.corr);
    }

    let avg = double_average_check(&PairKernel::Smoothed, 100.0, &cfg, 100_000)?;
    println!(
        "smoothed kernel: double average {:.5} vs {:.5} ± {:.5} (kappa_phi {:.5})",
        avg.empirical,
        avg.target.estimate,
        avg.target.std_error,
        avg.kappa_phi.unwrap_or(f64::NAN)
    );
    let prod = double_average_check(&PairKernel::Product(&g), 200.0, &cfg, 100_000)?;
    println!("product kernel: double average {:.2e}", prod.empirical);
    Ok(())
}
