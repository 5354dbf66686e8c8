//! Trace a geodesic across the octagon and print its arcs as CSV.

use geoflux::hyperbolic::{DiskPoint, UnitTangent};
use geoflux::surface::build_bolza;
use geoflux::tracer::trace;

fn main() -> geoflux::Result<()> {
    let s = build_bolza();
    let u0 = UnitTangent::new(DiskPoint::new(0.1, -0.2)?, 0.7);
    let tr = trace(&u0, 12.0, &s)?;
    println!("{} arcs over time {}", tr.arcs.len(), tr.total_time);
    print!("{}", tr.to_csv());

    let mid = tr.tangent_at(6.0)?;
    println!("tangent at t=6: base ({:.5}, {:.5}), direction {:.5}", mid.base.re(), mid.base.im(), mid.dir());
    Ok(())
}
