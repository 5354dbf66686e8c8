//! A mixing system whose double ergodic averages of a non-smooth kernel
//! miss the product integral.

use geoflux::stats::remark_counterexample;

fn main() -> geoflux::Result<()> {
    for n in [10, 100, 1000, 10_000] {
        let r = remark_counterexample(n, 1)?;
        println!(
            "n={n:<6} orbit average {}  product integral {}  smooth control {:+.2e}",
            r.orbit_average, r.product_integral, r.continuous_control
        );
    }
    Ok(())
}
