//! Geodesic segments on the surface as chains of arcs inside the polygon.

use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};
use crate::hyperbolic::{flow, Chord, UnitTangent};
use crate::surface::{DeckWord, SurfaceSpec};

/// Two side crossings closer than this in time are a vertex hit.
pub const VERTEX_TOL: f64 = 1e-10;
/// Membership slack for the starting point.
pub const START_TOL: f64 = 1e-9;
/// Final pieces shorter than this are absorbed into the previous arc's end.
const SLIVER: f64 = 1e-12;

/// One maximal piece of the geodesic inside the fundamental polygon,
/// covering the half-open time interval `[t_begin, t_end)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolygonArc {
    pub entry: UnitTangent,
    pub chord: Chord,
    pub t_begin: f64,
    pub t_end: f64,
    /// Side the arc leaves through; `None` for the final arc.
    pub exit_side: Option<usize>,
    /// Generator carrying the exit point back into the polygon.
    pub exit_word: DeckWord,
}

impl PolygonArc {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_begin
    }

    pub fn exit_tangent(&self) -> UnitTangent {
        flow(&self.entry, self.duration())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicTrace {
    pub u0: UnitTangent,
    pub total_time: f64,
    pub arcs: Vec<PolygonArc>,
}

/// Trace the geodesic from `u0` (base inside the polygon) for time `total`.
///
/// Each step intersects the current geodesic with every side line in
/// closed form and leaves through the earliest one.
pub fn trace(u0: &UnitTangent, total: f64, spec: &SurfaceSpec) -> Result<GeodesicTrace> {
    if !(total > 0.0 && total.is_finite()) {
        return Err(invalid("T", format!("must be positive, got {total}")));
    }
    if !spec.contains(u0.base, START_TOL) {
        return Err(Error::OutsidePolygon);
    }
    let mut arcs = Vec::new();
    let mut cur = *u0;
    let mut t = 0.0;
    let mut entry_side: Option<usize> = None;
    loop {
        let remaining = total - t;
        let (mut first, mut second) = ((f64::INFINITY, usize::MAX), f64::INFINITY);
        for (k, side) in spec.sides.iter().enumerate() {
            if Some(k) == entry_side {
                continue;
            }
            if let Some(s) = side.crossing_time(&cur) {
                if s < first.0 {
                    second = first.0;
                    first = (s, k);
                } else if s < second {
                    second = s;
                }
            }
        }
        let (s1, k1) = first;
        if s1 >= remaining - SLIVER {
            let end = flow(&cur, remaining);
            arcs.push(PolygonArc {
                entry: cur,
                chord: Chord::new(cur.base, end.base)?,
                t_begin: t,
                t_end: total,
                exit_side: None,
                exit_word: DeckWord::identity(),
            });
            break;
        }
        if second - s1 < VERTEX_TOL {
            return Err(Error::VertexHit { time: t + s1 });
        }
        let exit = flow(&cur, s1);
        let g = spec.generators[k1];
        arcs.push(PolygonArc {
            entry: cur,
            chord: Chord::new(cur.base, exit.base)?,
            t_begin: t,
            t_end: t + s1,
            exit_side: Some(k1),
            exit_word: DeckWord {
                map: g,
                letters: vec![k1],
            },
        });
        t += s1;
        cur = g.apply_tangent_unchecked(&exit);
        entry_side = Some(spec.pairing[k1]);
    }
    Ok(GeodesicTrace {
        u0: *u0,
        total_time: total,
        arcs,
    })
}

/// Trace the window `[offset, offset + total]` of the geodesic through `u0`,
/// re-timed to start at zero.
pub fn trace_from(u0: &UnitTangent, offset: f64, total: f64, spec: &SurfaceSpec) -> Result<GeodesicTrace> {
    let (start, _) = spec.reduce_tangent(&flow(u0, offset))?;
    trace(&start, total, spec)
}

impl GeodesicTrace {
    /// Index of the arc holding time `s` under the half-open convention.
    pub fn arc_index(&self, s: f64) -> Result<usize> {
        if !(0.0..=self.total_time).contains(&s) {
            return Err(Error::TimeOutOfRange {
                time: s,
                total: self.total_time,
            });
        }
        let idx = self.arcs.partition_point(|a| a.t_end <= s);
        Ok(idx.min(self.arcs.len() - 1))
    }

    /// Unit tangent at time `s`, based inside the polygon.
    pub fn tangent_at(&self, s: f64) -> Result<UnitTangent> {
        let arc = &self.arcs[self.arc_index(s)?];
        Ok(flow(&arc.entry, s - arc.t_begin))
    }

    /// Tangent at the final time.
    pub fn final_tangent(&self) -> UnitTangent {
        self.arcs.last().expect("trace has arcs").exit_tangent()
    }

    /// The same segment run backwards, re-timed to `[0, T]`.
    pub fn reversed(&self, spec: &SurfaceSpec) -> Result<GeodesicTrace> {
        let (start, _) = spec.reduce_tangent(&self.final_tangent().reversed())?;
        trace(&start, self.total_time, spec)
    }

    /// The same arcs with `pad` more time traced at each end, re-timed so the
    /// original segment occupies `[pad, pad + T]`.
    ///
    /// Retracing a long segment from a shifted start does not reproduce it:
    /// rounding errors grow like `e^t`. Padding keeps the computed orbit.
    pub fn padded(&self, pad: f64, spec: &SurfaceSpec) -> Result<GeodesicTrace> {
        if !(pad > 0.0 && pad.is_finite()) {
            return Err(invalid("pad", format!("must be positive, got {pad}")));
        }
        let head = trace_from(&self.u0, -pad, pad, spec)?;
        let (tail_start, _) = spec.reduce_tangent(&self.final_tangent())?;
        let tail = trace(&tail_start, pad, spec)?;
        let shift = |arcs: &[PolygonArc], by: f64| -> Vec<PolygonArc> {
            arcs.iter()
                .map(|a| PolygonArc {
                    t_begin: a.t_begin + by,
                    t_end: a.t_end + by,
                    ..a.clone()
                })
                .collect()
        };
        let mut arcs = shift(&head.arcs, 0.0);
        arcs.extend(shift(&self.arcs, pad));
        arcs.extend(shift(&tail.arcs, pad + self.total_time));
        // junctions between the pieces are ordinary arc boundaries
        let n_head = head.arcs.len();
        let n_body = self.arcs.len();
        arcs[n_head - 1].t_end = pad;
        arcs[n_head + n_body - 1].t_end = pad + self.total_time;
        Ok(GeodesicTrace {
            u0: head.u0,
            total_time: self.total_time + 2.0 * pad,
            arcs,
        })
    }

    /// Arc table as CSV: `t_begin,t_end,entry_re,entry_im,entry_dir,exit_side`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_begin,t_end,entry_re,entry_im,entry_dir,exit_side\n");
        for a in &self.arcs {
            let side = a.exit_side.map(|k| k.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                a.t_begin,
                a.t_end,
                a.entry.base.re(),
                a.entry.base.im(),
                a.entry.dir(),
                side
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::{dist, DiskPoint};
    use crate::surface::{build_bolza, liouville_sample};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn short_trace_from_origin_is_one_arc() {
        let s = build_bolza();
        let u = UnitTangent::new(DiskPoint::ORIGIN, 0.0);
        let tr = trace(&u, 0.5, &s).unwrap();
        assert_eq!(tr.arcs.len(), 1);
        assert_abs_diff_eq!(tr.arcs[0].chord.p1.re(), 0.25f64.tanh(), epsilon = 1e-14);
        assert_abs_diff_eq!(tr.arcs[0].chord.p1.im(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn invariants_hold_on_random_traces() {
        let s = build_bolza();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let u = liouville_sample(&mut rng, &s);
            let tr = trace(&u, 60.0, &s).unwrap();
            let total: f64 = tr.arcs.iter().map(|a| a.duration()).sum();
            assert_abs_diff_eq!(total, 60.0, epsilon = 1e-8);
            assert_eq!(tr.arcs[0].t_begin, 0.0);
            for w in tr.arcs.windows(2) {
                assert_eq!(w[0].t_end, w[1].t_begin);
                let img = w[0].exit_word.map.apply_tangent_unchecked(&w[0].exit_tangent());
                assert!((img.base.z() - w[1].entry.base.z()).norm() < 1e-8);
                assert_abs_diff_eq!(img.dir(), w[1].entry.dir(), epsilon = 1e-8);
            }
            for a in &tr.arcs {
                assert_abs_diff_eq!(a.chord.length(), a.duration(), epsilon = 1e-9);
                for p in [a.chord.p0, a.chord.p1, a.chord.point_at(0.5)] {
                    assert!(s.contains(p, 1e-9));
                }
            }
        }
    }

    #[test]
    fn start_outside_polygon_is_rejected() {
        let s = build_bolza();
        let u = UnitTangent::new(DiskPoint::new(0.8, 0.0).unwrap(), 0.0);
        assert_eq!(trace(&u, 1.0, &s), Err(Error::OutsidePolygon));
        assert!(trace(&UnitTangent::new(DiskPoint::ORIGIN, 0.0), 0.0, &s).is_err());
    }

    #[test]
    fn ray_through_vertex_is_an_error() {
        let s = build_bolza();
        let u = UnitTangent::new(DiskPoint::ORIGIN, std::f64::consts::FRAC_PI_8);
        assert!(matches!(trace(&u, 5.0, &s), Err(Error::VertexHit { .. })));
    }

    #[test]
    fn restriction_reuses_the_same_arcs() {
        let s = build_bolza();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = liouville_sample(&mut rng, &s);
        let short = trace(&u, 20.0, &s).unwrap();
        let long = trace(&u, 35.0, &s).unwrap();
        let n = short.arcs.len();
        assert_eq!(short.arcs[..n - 1], long.arcs[..n - 1]);
        assert_eq!(short.arcs[n - 1].entry, long.arcs[n - 1].entry);
        assert_eq!(short.arcs[n - 1].t_begin, long.arcs[n - 1].t_begin);
    }

    #[test]
    fn tangent_at_follows_the_arcs() {
        let s = build_bolza();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u = liouville_sample(&mut rng, &s);
        let tr = trace(&u, 30.0, &s).unwrap();
        assert_eq!(tr.tangent_at(0.0).unwrap(), u);
        let b = tr.arcs[2].t_begin;
        assert_eq!(tr.tangent_at(b).unwrap(), tr.arcs[2].entry);
        assert!(matches!(tr.tangent_at(30.5), Err(Error::TimeOutOfRange { .. })));
        assert!(tr.tangent_at(-0.1).is_err());
        assert!(tr.tangent_at(30.0).is_ok());
        for k in 0..200 {
            let t = 29.9 * k as f64 / 200.0;
            let (i, j) = (tr.arc_index(t).unwrap(), tr.arc_index(t + 0.01).unwrap());
            if i == j {
                let d = dist(tr.tangent_at(t).unwrap().base, tr.tangent_at(t + 0.01).unwrap().base);
                assert_abs_diff_eq!(d, 0.01, epsilon = 1e-6);
                let here = tr.tangent_at(t).unwrap();
                let (moved, _) = s.reduce_tangent(&flow(&here, 0.01)).unwrap();
                let there = tr.tangent_at(t + 0.01).unwrap();
                assert!((moved.base.z() - there.base.z()).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn mean_arc_count_is_between_geometric_bounds() {
        let s = build_bolza();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = 100.0;
        let reps = 40;
        let mean = (0..reps)
            .map(|_| trace(&liouville_sample(&mut rng, &s), t, &s).unwrap().arcs.len() as f64)
            .sum::<f64>()
            / reps as f64;
        assert!(mean > t / (2.0 * s.circumradius) && mean < t / s.inradius, "{mean}");
    }

    #[test]
    fn padding_keeps_the_original_arcs() {
        let s = build_bolza();
        let u = UnitTangent::new(DiskPoint::new(0.2, -0.1).unwrap(), 1.3);
        let tr = trace(&u, 50.0, &s).unwrap();
        let p = tr.padded(0.5, &s).unwrap();
        assert_abs_diff_eq!(p.total_time, 51.0, epsilon = 1e-12);
        let total: f64 = p.arcs.iter().map(|a| a.duration()).sum();
        assert_abs_diff_eq!(total, 51.0, epsilon = 1e-9);
        for k in 0..100 {
            let t = 0.5 * k as f64;
            let (a, b) = (tr.tangent_at(t).unwrap(), p.tangent_at(t + 0.5).unwrap());
            assert!((a.base.z() - b.base.z()).norm() < 1e-9);
        }
        assert!((p.tangent_at(0.5).unwrap().base.z() - u.base.z()).norm() < 1e-9);
    }

    #[test]
    fn csv_has_one_row_per_arc() {
        let s = build_bolza();
        let u = UnitTangent::new(DiskPoint::new(0.1, 0.05).unwrap(), 0.4);
        let tr = trace(&u, 10.0, &s).unwrap();
        let csv = tr.to_csv();
        assert_eq!(csv.lines().count(), tr.arcs.len() + 1);
        assert!(csv.starts_with("t_begin,t_end,entry_re,entry_im,entry_dir,exit_side\n"));
    }
}
