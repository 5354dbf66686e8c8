//! Transversal self-intersections and mutual intersections of traced
//! geodesic segments.
//!
//! Both enumerations compare polygon arcs pairwise with
//! [`chord_intersection`]. The accelerated path bins arcs by Euclidean
//! bounding box on a uniform grid; the naive all-pairs scan stays as the
//! reference it is tested against.

use std::fmt::Write as _;

use crate::hyperbolic::{chord_intersection, DiskPoint};
use crate::kernels::{LocalizerFn, SmoothingFn};
use crate::tracer::{GeodesicTrace, PolygonArc};

/// Crossings with `t − s` below this are junction artifacts.
pub const JUNCTION_EPS: f64 = 1e-6;
/// `(s, t)` keys closer than this are the same crossing.
pub const DEDUP_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Crossing {
    pub s: f64,
    pub t: f64,
    /// Unsigned angle between the tangents at `s` and `t`, in (0, π).
    pub theta: f64,
    pub location: DiskPoint,
}

/// Crossings of a trace, sorted by `(s, t)`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct CrossingSet {
    pub total_time: f64,
    pub crossings: Vec<Crossing>,
}

impl CrossingSet {
    pub fn len(&self) -> usize {
        self.crossings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.crossings.is_empty()
    }

    /// Crossings of the initial segment `γ[0, t_max]`.
    pub fn restricted(&self, t_max: f64) -> CrossingSet {
        CrossingSet {
            total_time: t_max.min(self.total_time),
            crossings: self.crossings.iter().filter(|c| c.t <= t_max).copied().collect(),
        }
    }

    /// Crossings with both times inside `[lo, hi]`.
    pub fn window(&self, lo: f64, hi: f64) -> CrossingSet {
        CrossingSet {
            total_time: hi - lo,
            crossings: self
                .crossings
                .iter()
                .filter(|c| c.s >= lo && c.t <= hi)
                .copied()
                .collect(),
        }
    }

    /// CSV with columns `s,t,theta,loc_re,loc_im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,t,theta,loc_re,loc_im\n");
        for c in &self.crossings {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                c.s,
                c.t,
                c.theta,
                c.location.re(),
                c.location.im()
            );
        }
        out
    }
}

/// Raw, smoothed and localized counts.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Counts {
    pub n: usize,
    pub n_phi: f64,
    pub n_phi_f: f64,
}

fn pair_crossing(a: &PolygonArc, b: &PolygonArc) -> Option<Crossing> {
    // overlapping arcs only occur on periodic geodesics: not transversal
    let c = chord_intersection(&a.chord, &b.chord).ok()??;
    let s = a.t_begin + c.frac1 * a.duration();
    let t = b.t_begin + c.frac2 * b.duration();
    let (s, t) = if s <= t { (s, t) } else { (t, s) };
    (t - s >= JUNCTION_EPS).then_some(Crossing {
        s,
        t,
        theta: c.theta,
        location: c.point,
    })
}

fn finish(total_time: f64, mut crossings: Vec<Crossing>) -> CrossingSet {
    crossings.sort_by(|x, y| x.s.total_cmp(&y.s).then(x.t.total_cmp(&y.t)));
    crossings.dedup_by(|later, kept| {
        (later.s - kept.s).abs() < DEDUP_TOL && (later.t - kept.t).abs() < DEDUP_TOL
    });
    CrossingSet {
        total_time,
        crossings,
    }
}

/// Self-intersections by exhaustive scan of all arc pairs.
pub fn self_intersections_naive(trace: &GeodesicTrace) -> CrossingSet {
    let arcs = &trace.arcs;
    let mut found = Vec::new();
    for i in 0..arcs.len() {
        for j in i + 1..arcs.len() {
            if let Some(c) = pair_crossing(&arcs[i], &arcs[j]) {
                found.push(c);
            }
        }
    }
    finish(trace.total_time, found)
}

/// Self-intersections using the spatial hash.
pub fn self_intersections(trace: &GeodesicTrace) -> CrossingSet {
    let arcs = &trace.arcs;
    let boxes: Vec<[f64; 4]> = arcs.iter().map(|a| a.chord.euclidean_bounds()).collect();
    let grid = Grid::covering(&boxes);
    let found = grid
        .candidate_pairs(&boxes)
        .into_iter()
        .filter_map(|(i, j)| pair_crossing(&arcs[i], &arcs[j]))
        .collect();
    finish(trace.total_time, found)
}

/// Transversal crossings between two traces, as `(theta, location)` pairs
/// in a canonical order.
pub fn mutual_crossings(a: &GeodesicTrace, b: &GeodesicTrace) -> Vec<(f64, DiskPoint)> {
    let mut out: Vec<(f64, DiskPoint)> = Vec::new();
    for x in &a.arcs {
        let bx = x.chord.euclidean_bounds();
        for y in &b.arcs {
            if !overlaps(&bx, &y.chord.euclidean_bounds()) {
                continue;
            }
            if let Ok(Some(c)) = chord_intersection(&x.chord, &y.chord) {
                out.push((c.theta, c.point));
            }
        }
    }
    out.sort_by(|p, q| {
        p.0.total_cmp(&q.0)
            .then(p.1.re().total_cmp(&q.1.re()))
            .then(p.1.im().total_cmp(&q.1.im()))
    });
    out
}

/// `M_φ(A, B)`: the φ-weighted number of transversal crossings between the
/// projections of two segments. Exactly symmetric in its arguments.
pub fn mutual_intersections(a: &GeodesicTrace, b: &GeodesicTrace, phi: &SmoothingFn) -> f64 {
    mutual_crossings(a, b).iter().map(|(theta, _)| phi.evaluate(*theta)).sum()
}

/// `N`, `N_φ = Σ φ(θ_i)` and `N_{φ;f} = Σ f(x_i) φ(θ_i)`.
pub fn weighted_counts(set: &CrossingSet, phi: &SmoothingFn, f: Option<&LocalizerFn>) -> Counts {
    let mut counts = Counts {
        n: set.len(),
        ..Counts::default()
    };
    for c in &set.crossings {
        let w = phi.evaluate(c.theta);
        counts.n_phi += w;
        counts.n_phi_f += match f {
            Some(f) => f.evaluate(c.location) * w,
            None => w,
        };
    }
    counts
}

fn overlaps(a: &[f64; 4], b: &[f64; 4]) -> bool {
    a[0] <= b[2] && b[0] <= a[2] && a[1] <= b[3] && b[1] <= a[3]
}

/// Uniform grid over the union of a set of boxes.
struct Grid {
    x0: f64,
    y0: f64,
    cell: f64,
    nx: usize,
    ny: usize,
}

impl Grid {
    fn covering(boxes: &[[f64; 4]]) -> Grid {
        let mut bb = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        let mut extent = 0.0;
        for b in boxes {
            bb[0] = bb[0].min(b[0]);
            bb[1] = bb[1].min(b[1]);
            bb[2] = bb[2].max(b[2]);
            bb[3] = bb[3].max(b[3]);
            extent += (b[2] - b[0]).max(b[3] - b[1]);
        }
        let span = (bb[2] - bb[0]).max(bb[3] - bb[1]).max(1e-9);
        let mean = extent / boxes.len().max(1) as f64;
        // about one mean arc per cell, at most 64 cells a side
        let cell = (mean / 2.0).max(span / 64.0).max(1e-9);
        let nx = ((bb[2] - bb[0]) / cell).floor() as usize + 1;
        let ny = ((bb[3] - bb[1]) / cell).floor() as usize + 1;
        Grid {
            x0: bb[0],
            y0: bb[1],
            cell,
            nx,
            ny,
        }
    }

    fn ix(&self, x: f64) -> usize {
        (((x - self.x0) / self.cell).floor().max(0.0) as usize).min(self.nx - 1)
    }

    fn iy(&self, y: f64) -> usize {
        (((y - self.y0) / self.cell).floor().max(0.0) as usize).min(self.ny - 1)
    }

    /// Index pairs `(i, j)`, `i < j`, whose boxes overlap; each pair once,
    /// emitted from the cell holding the lower-left corner of the overlap.
    fn candidate_pairs(&self, boxes: &[[f64; 4]]) -> Vec<(usize, usize)> {
        let mut cells: Vec<Vec<usize>> = vec![Vec::new(); self.nx * self.ny];
        for (k, b) in boxes.iter().enumerate() {
            for gy in self.iy(b[1])..=self.iy(b[3]) {
                for gx in self.ix(b[0])..=self.ix(b[2]) {
                    cells[gy * self.nx + gx].push(k);
                }
            }
        }
        let mut pairs = Vec::new();
        for (c, members) in cells.iter().enumerate() {
            for (p, &i) in members.iter().enumerate() {
                for &j in &members[p + 1..] {
                    let (bi, bj) = (&boxes[i], &boxes[j]);
                    if !overlaps(bi, bj) {
                        continue;
                    }
                    let owner = self.iy(bi[1].max(bj[1])) * self.nx + self.ix(bi[0].max(bj[0]));
                    if owner == c {
                        pairs.push((i.min(j), i.max(j)));
                    }
                }
            }
        }
        pairs
    }
}
