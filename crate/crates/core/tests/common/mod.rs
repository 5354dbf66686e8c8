//! Invariant checks shared by the property and acceptance suites.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::{Arc, OnceLock};

use geoflux::hyperbolic::{
    apply_isometry, chord_intersection, flow, hyperbolic_distance, Chord, DiskPoint, MobiusMap, UnitTangent,
};
use geoflux::intersections::{self_intersections, CrossingSet};
use geoflux::kernels::{build_phi, eval_h, eval_k, KernelConfig};
use geoflux::surface::{build_bolza, liouville_sample, SurfaceSpec};
use geoflux::tracer::trace;
use proptest::prelude::*;
use proptest::test_runner::TestCaseResult;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const CASES: u32 = 128;

pub fn bolza() -> Arc<SurfaceSpec> {
    static S: OnceLock<Arc<SurfaceSpec>> = OnceLock::new();
    S.get_or_init(|| Arc::new(build_bolza())).clone()
}

fn cfg(delta: f64) -> KernelConfig {
    KernelConfig::new(delta, build_phi(0.3).unwrap(), 0.5, bolza()).unwrap()
}

fn sample(seed: u64) -> UnitTangent {
    liouville_sample(&mut ChaCha8Rng::seed_from_u64(seed), &bolza())
}

/// A tangent whose geodesic crosses that of `u` at time `s` along `u` and
/// time `t` along itself, at angle `theta`.
fn crossing_partner(u: &UnitTangent, s: f64, t: f64, theta: f64) -> UnitTangent {
    let at = flow(u, s);
    flow(&UnitTangent::new(at.base, at.dir() + theta), -t)
}

pub fn disk_point() -> impl Strategy<Value = DiskPoint> {
    (0.0..0.95f64, 0.0..2.0 * PI).prop_map(|(r, a)| DiskPoint::from_polar(r, a))
}

pub fn mobius() -> impl Strategy<Value = MobiusMap> {
    (0.0..2.0 * PI, 0.0..3.0f64, 0.0..2.0 * PI)
        .prop_map(|(d, l, r)| MobiusMap::translation(d, l).compose(&MobiusMap::rotation(r)))
}

fn crossing_keys(set: &CrossingSet) -> Vec<(f64, f64, f64)> {
    set.crossings.iter().map(|c| (c.s, c.t, c.theta)).collect()
}

pub fn kernels_are_symmetric(seed: u64, s: f64, t: f64, theta: f64) -> TestCaseResult {
    let c = cfg(0.1);
    let u = sample(seed);
    let v = crossing_partner(&u, s, t, theta);
    prop_assert_eq!(eval_h(&u, &v, &c), eval_h(&v, &u, &c));
    prop_assert_eq!(eval_k(&u, &v, &c), eval_k(&v, &u, &c));
    Ok(())
}

pub fn kernels_are_invariant(seed: u64, s: f64, t: f64, theta: f64, g: usize, k: i32) -> TestCaseResult {
    let c = cfg(0.1);
    let u = sample(seed);
    let v = crossing_partner(&u, s, t, theta);
    let k0 = eval_k(&u, &v, &c);
    prop_assert!(k0 > 0.0);
    let gv = apply_isometry(&bolza().generators[g], &v).unwrap();
    prop_assert!((eval_k(&u, &gv, &c) - k0).abs() <= 1e-8 * k0.max(1.0));
    let rot = MobiusMap::rotation(k as f64 * FRAC_PI_4);
    let (ru, rv) = (apply_isometry(&rot, &u).unwrap(), apply_isometry(&rot, &v).unwrap());
    prop_assert!((eval_k(&ru, &rv, &c) - k0).abs() <= 1e-8 * k0.max(1.0));
    prop_assert!((eval_h(&ru, &rv, &c) - eval_h(&u, &v, &c)).abs() <= 1e-8);
    Ok(())
}

pub fn flow_is_additive(p: DiskPoint, dir: f64, a: f64, b: f64) -> TestCaseResult {
    let u = UnitTangent::new(p, dir);
    let two = flow(&flow(&u, a), b);
    let one = flow(&u, a + b);
    prop_assert!((two.base.z() - one.base.z()).norm() < 1e-9);
    prop_assert!((two.dir() - one.dir()).sin().abs() < 1e-8);
    Ok(())
}

pub fn flow_has_unit_speed(p: DiskPoint, dir: f64, s: f64) -> TestCaseResult {
    let u = UnitTangent::new(p, dir);
    let d = hyperbolic_distance(u.base, flow(&u, s).base).unwrap();
    prop_assert!((d - s.abs()).abs() < 1e-7 * (1.0 + s.abs()));
    Ok(())
}

pub fn distance_is_invariant(p: DiskPoint, q: DiskPoint, m: MobiusMap) -> TestCaseResult {
    let d = hyperbolic_distance(p, q).unwrap();
    let e = hyperbolic_distance(m.apply(p), m.apply(q)).unwrap();
    prop_assert!((d - e).abs() < 1e-8 * (1.0 + d));
    Ok(())
}

pub fn chord_intersection_is_symmetric(a: DiskPoint, b: DiskPoint, c: DiskPoint, d: DiskPoint) -> TestCaseResult {
    prop_assume!(hyperbolic_distance(a, b).unwrap() > 1e-3 && hyperbolic_distance(c, d).unwrap() > 1e-3);
    let (x, y) = (Chord::new(a, b).unwrap(), Chord::new(c, d).unwrap());
    let xy = chord_intersection(&x, &y).unwrap();
    let yx = chord_intersection(&y, &x).unwrap();
    prop_assert_eq!(xy.is_some(), yx.is_some());
    if let (Some(p), Some(q)) = (xy, yx) {
        prop_assert_eq!(p.point, q.point);
        prop_assert_eq!(p.theta, q.theta);
        prop_assert_eq!((p.frac1, p.frac2), (q.frac2, q.frac1));
    }
    Ok(())
}

pub fn crossing_sets_restrict(seed: u64, short: f64, extra: f64) -> TestCaseResult {
    let s = bolza();
    let u = sample(seed);
    let long = self_intersections(&trace(&u, short + extra, &s).unwrap());
    let direct = self_intersections(&trace(&u, short, &s).unwrap());
    let (a, b) = (crossing_keys(&long.restricted(short)), crossing_keys(&direct));
    prop_assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        prop_assert!((x.0 - y.0).abs() < 1e-9 && (x.1 - y.1).abs() < 1e-9 && (x.2 - y.2).abs() < 1e-9);
    }
    Ok(())
}

pub fn crossing_sets_reverse(seed: u64, total: f64) -> TestCaseResult {
    let s = bolza();
    let tr = trace(&sample(seed), total, &s).unwrap();
    let fwd = self_intersections(&tr);
    let back = self_intersections(&tr.reversed(&s).unwrap());
    prop_assert_eq!(fwd.len(), back.len());
    let mut mirrored: Vec<(f64, f64, f64)> = fwd.crossings.iter().map(|c| (total - c.t, total - c.s, c.theta)).collect();
    mirrored.sort_by(|x, y| x.0.total_cmp(&y.0));
    for (m, b) in mirrored.iter().zip(&back.crossings) {
        prop_assert!((m.0 - b.s).abs() < 1e-6 && (m.1 - b.t).abs() < 1e-6, "{:?} vs {:?}", m, b);
        prop_assert!((m.2 - b.theta).abs() < 1e-6);
    }
    Ok(())
}
