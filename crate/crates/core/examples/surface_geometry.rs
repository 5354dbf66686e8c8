//! Constants of the Bolza surface and point reduction into the octagon.

use geoflux::hyperbolic::{hyperbolic_distance, DiskPoint};
use geoflux::surface::{build_bolza, reduce};

fn main() -> geoflux::Result<()> {
    let s = build_bolza();
    println!("area                 {:.6}", s.area);
    println!("inradius             {:.6}", s.inradius);
    println!("circumradius         {:.6}", s.circumradius);
    println!("systole lower bound  {:.6}", s.systole_lower_bound);
    println!("shortest translation {:.6}", s.shortest_translation);
    println!("kappa_M              {:.7}", s.kappa_m());
    println!("relation word        {:?}", s.relation);

    let far = DiskPoint::from_polar(6.0, 1.0);
    let (p, word) = reduce(far, &s)?;
    println!(
        "reduced ({:.6}, {:.6}) to ({:.4}, {:.4}) with {} letters; distance to origin {:.4}",
        far.re(),
        far.im(),
        p.re(),
        p.im(),
        word.letters.len(),
        hyperbolic_distance(DiskPoint::ORIGIN, p)?
    );
    Ok(())
}
