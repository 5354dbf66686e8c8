//! Constant curvature −1 geometry in the Poincaré disk.
//!
//! Points are complex numbers of modulus < 1, orientation-preserving
//! isometries are Möbius maps `z ↦ (az + b)/(b̄z + ā)` with
//! `|a|² − |b|² = 1`, and geodesic arcs are stored by their two endpoints.
//! Everything here is closed form; nothing integrates an ODE.

use std::cmp::Ordering;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Complex = Complex64;

/// Unimodularity tolerance for [`MobiusMap`].
pub const UNIMODULAR_TOL: f64 = 1e-10;

/// Normalize an angle into `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Unsigned angle in `[0, π]` between two oriented directions.
pub fn unsigned_angle_between(dir1: f64, dir2: f64) -> f64 {
    let d = (dir2 - dir1).rem_euclid(TAU);
    if d > PI {
        TAU - d
    } else {
        d
    }
}

/// A point of the open unit disk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskPoint(Complex);

impl DiskPoint {
    pub const ORIGIN: DiskPoint = DiskPoint(Complex::new(0.0, 0.0));

    pub fn new(re: f64, im: f64) -> Result<Self> {
        Self::from_complex(Complex::new(re, im))
    }

    pub fn from_complex(z: Complex) -> Result<Self> {
        if z.norm_sqr() < 1.0 && z.re.is_finite() && z.im.is_finite() {
            Ok(DiskPoint(z))
        } else {
            Err(Error::OutsideDisk { re: z.re, im: z.im })
        }
    }

    /// Point at hyperbolic distance `r` from the origin in direction `angle`.
    pub fn from_polar(r: f64, angle: f64) -> Self {
        DiskPoint(Complex::from_polar((r / 2.0).tanh(), angle))
    }

    pub(crate) fn from_complex_unchecked(z: Complex) -> Self {
        debug_assert!(z.norm_sqr() < 1.0, "{z} escaped the disk");
        DiskPoint(z)
    }

    pub fn z(self) -> Complex {
        self.0
    }

    pub fn re(self) -> f64 {
        self.0.re
    }

    pub fn im(self) -> f64 {
        self.0.im
    }

    /// Hyperbolic distance to the origin.
    pub fn radius(self) -> f64 {
        2.0 * self.0.norm().atanh()
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        self.0
            .re
            .total_cmp(&other.0.re)
            .then(self.0.im.total_cmp(&other.0.im))
    }
}

/// A point of the unit tangent bundle: base point plus direction angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitTangent {
    pub base: DiskPoint,
    dir: f64,
}

impl UnitTangent {
    pub fn new(base: DiskPoint, dir: f64) -> Self {
        UnitTangent {
            base,
            dir: normalize_angle(dir),
        }
    }

    /// Direction in `[0, 2π)`.
    pub fn dir(&self) -> f64 {
        self.dir
    }

    /// Same base point, direction turned by π.
    pub fn reversed(&self) -> Self {
        UnitTangent::new(self.base, self.dir + PI)
    }

    pub(crate) fn total_cmp(&self, other: &Self) -> Ordering {
        self.base
            .total_cmp(&other.base)
            .then(self.dir.total_cmp(&other.dir))
    }
}

/// Orientation-preserving disk isometry `z ↦ (az + b)/(b̄z + ā)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobiusMap {
    pub a: Complex,
    pub b: Complex,
}

impl MobiusMap {
    pub fn identity() -> Self {
        MobiusMap {
            a: Complex::new(1.0, 0.0),
            b: Complex::new(0.0, 0.0),
        }
    }

    /// Rotation about the origin by `angle`.
    pub fn rotation(angle: f64) -> Self {
        MobiusMap {
            a: Complex::from_polar(1.0, angle / 2.0),
            b: Complex::new(0.0, 0.0),
        }
    }

    /// Hyperbolic translation of length `length` along the diameter pointing
    /// toward `direction`.
    pub fn translation(direction: f64, length: f64) -> Self {
        let h = length / 2.0;
        MobiusMap {
            a: Complex::new(h.cosh(), 0.0),
            b: Complex::from_polar(h.sinh(), direction),
        }
    }

    /// The isometry carrying the origin to `u.base` and the positive real
    /// direction to `u.dir`.
    pub fn frame(u: &UnitTangent) -> Self {
        let z = u.base.z();
        let s = (1.0 - z.norm_sqr()).sqrt().recip();
        let half = Complex::from_polar(1.0, u.dir / 2.0);
        MobiusMap {
            a: half * s,
            b: z * half.conj() * s,
        }
    }

    pub fn det(&self) -> f64 {
        self.a.norm_sqr() - self.b.norm_sqr()
    }

    pub fn is_unimodular(&self) -> bool {
        (self.det() - 1.0).abs() <= UNIMODULAR_TOL
    }

    fn renormalized(self) -> Self {
        let s = self.det().sqrt().recip();
        MobiusMap {
            a: self.a * s,
            b: self.b * s,
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MobiusMap) -> MobiusMap {
        MobiusMap {
            a: self.a * other.a + self.b * other.b.conj(),
            b: self.a * other.b + self.b * other.a.conj(),
        }
        .renormalized()
    }

    pub fn inverse(&self) -> MobiusMap {
        MobiusMap {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    /// Image of an arbitrary complex number (the map extends to the sphere).
    pub fn apply_complex(&self, z: Complex) -> Complex {
        (self.a * z + self.b) / (self.b.conj() * z + self.a.conj())
    }

    pub fn apply(&self, p: DiskPoint) -> DiskPoint {
        DiskPoint::from_complex_unchecked(self.apply_complex(p.z()))
    }

    /// Argument of the derivative at `z`, i.e. the rotation applied to
    /// tangent directions there.
    pub fn derivative_arg(&self, z: Complex) -> f64 {
        -2.0 * (self.b.conj() * z + self.a.conj()).arg()
    }

    pub(crate) fn apply_tangent_unchecked(&self, u: &UnitTangent) -> UnitTangent {
        let z = u.base.z();
        UnitTangent::new(self.apply(u.base), u.dir + self.derivative_arg(z))
    }

    /// Equality as isometries: `(a, b)` and `(−a, −b)` are the same map.
    pub fn approx_eq(&self, other: &MobiusMap, tol: f64) -> bool {
        let same = (self.a - other.a).norm() <= tol && (self.b - other.b).norm() <= tol;
        let flipped = (self.a + other.a).norm() <= tol && (self.b + other.b).norm() <= tol;
        same || flipped
    }

    /// Hyperbolic displacement of the origin, `d(0, m·0)`.
    pub fn origin_displacement(&self) -> f64 {
        2.0 * (self.b.norm() / self.a.norm()).atanh()
    }
}

/// Move a unit tangent by an isometry; the direction is rotated by the
/// argument of the map's derivative at the base point.
pub fn apply_isometry(m: &MobiusMap, u: &UnitTangent) -> Result<UnitTangent> {
    if !m.is_unimodular() {
        return Err(Error::InvalidIsometry { det: m.det() });
    }
    Ok(m.apply_tangent_unchecked(u))
}

fn distance_unchecked(p: Complex, q: Complex) -> f64 {
    let num = (p - q).norm();
    let den = (Complex::new(1.0, 0.0) - p.conj() * q).norm();
    2.0 * (num / den).min(1.0).atanh()
}

/// Hyperbolic distance `2·artanh |(p − q)/(1 − p̄q)|`.
pub fn hyperbolic_distance(p: DiskPoint, q: DiskPoint) -> Result<f64> {
    for x in [p, q] {
        if x.z().norm_sqr() >= 1.0 {
            return Err(Error::OutsideDisk {
                re: x.re(),
                im: x.im(),
            });
        }
    }
    Ok(distance_unchecked(p.z(), q.z()))
}

pub(crate) fn dist(p: DiskPoint, q: DiskPoint) -> f64 {
    distance_unchecked(p.z(), q.z())
}

/// Geodesic flow in the universal cover: the unit tangent reached after
/// travelling signed hyperbolic length `s` from `u`.
pub fn flow(u: &UnitTangent, s: f64) -> UnitTangent {
    if s == 0.0 {
        return *u;
    }
    let frame = MobiusMap::frame(u);
    let x = Complex::new((s / 2.0).tanh(), 0.0);
    UnitTangent::new(
        DiskPoint::from_complex_unchecked(frame.apply_complex(x)),
        frame.derivative_arg(x),
    )
}

/// Direction at `p` of the geodesic running from `p` toward `q`.
pub fn direction_toward(p: DiskPoint, q: DiskPoint) -> f64 {
    let w = (q.z() - p.z()) / (Complex::new(1.0, 0.0) - p.z().conj() * q.z());
    normalize_angle(w.arg())
}

/// A geodesic arc given by its endpoints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chord {
    pub p0: DiskPoint,
    pub p1: DiskPoint,
    length: f64,
}

impl Chord {
    pub fn new(p0: DiskPoint, p1: DiskPoint) -> Result<Self> {
        let length = hyperbolic_distance(p0, p1)?;
        if length <= 0.0 {
            return Err(Error::DegenerateChord);
        }
        Ok(Chord { p0, p1, length })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Unit tangent at `p0` pointing along the arc.
    pub fn start_tangent(&self) -> UnitTangent {
        UnitTangent::new(self.p0, direction_toward(self.p0, self.p1))
    }

    /// Point at fraction `frac` of the hyperbolic length.
    pub fn point_at(&self, frac: f64) -> DiskPoint {
        flow(&self.start_tangent(), frac * self.length).base
    }

    /// Euclidean bounding box `[xmin, ymin, xmax, ymax]` of the arc.
    pub fn euclidean_bounds(&self) -> [f64; 4] {
        let (a, b) = (self.p0.z(), self.p1.z());
        let mut bx = [a.re.min(b.re), a.im.min(b.im), a.re.max(b.re), a.im.max(b.im)];
        let det = a.re * b.im - a.im * b.re;
        let scale = a.norm() * b.norm();
        if det.abs() > 1e-14 * scale.max(1e-300) {
            // circle orthogonal to the unit circle: Re(c̄p) = (|p|² + 1)/2
            let ra = (a.norm_sqr() + 1.0) / 2.0;
            let rb = (b.norm_sqr() + 1.0) / 2.0;
            let c = Complex::new((ra * b.im - rb * a.im) / det, (a.re * rb - b.re * ra) / det);
            let rho = (c.norm_sqr() - 1.0).max(0.0).sqrt();
            let mid = self.point_at(0.5).z();
            let side = |q: Complex| (b.re - a.re) * (q.im - a.im) - (b.im - a.im) * (q.re - a.re);
            let mid_side = side(mid);
            for q in [
                c + Complex::new(rho, 0.0),
                c - Complex::new(rho, 0.0),
                c + Complex::new(0.0, rho),
                c - Complex::new(0.0, rho),
            ] {
                if side(q) * mid_side > 0.0 {
                    bx[0] = bx[0].min(q.re);
                    bx[1] = bx[1].min(q.im);
                    bx[2] = bx[2].max(q.re);
                    bx[3] = bx[3].max(q.im);
                }
            }
        }
        const PAD: f64 = 1e-12;
        [bx[0] - PAD, bx[1] - PAD, bx[2] + PAD, bx[3] + PAD]
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        self.p0
            .total_cmp(&other.p0)
            .then(self.p1.total_cmp(&other.p1))
    }
}

/// Tolerances for [`chord_intersection_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChordTolerance {
    /// Crossings closer than this (as a length fraction) to an arc endpoint
    /// are not reported.
    pub end_eps: f64,
    /// Endpoints this close to the other chord's geodesic count as lying on it.
    pub collinear_eps: f64,
    /// Crossing angles within this of 0 or π are tangential.
    pub angle_eps: f64,
}

impl Default for ChordTolerance {
    fn default() -> Self {
        ChordTolerance {
            end_eps: 1e-9,
            collinear_eps: 1e-11,
            angle_eps: 1e-12,
        }
    }
}

/// A transversal crossing of two arcs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChordCrossing {
    pub point: DiskPoint,
    /// Unsigned angle between the two oriented arcs, strictly inside (0, π).
    pub theta: f64,
    pub frac1: f64,
    pub frac2: f64,
}

pub fn chord_intersection(c1: &Chord, c2: &Chord) -> Result<Option<ChordCrossing>> {
    chord_intersection_with(c1, c2, &ChordTolerance::default())
}

/// Transversal crossing of two geodesic arcs strictly inside both.
///
/// The computation always runs with the chords in a canonical order, so the
/// result is exactly symmetric under swapping the arguments.
pub fn chord_intersection_with(
    c1: &Chord,
    c2: &Chord,
    tol: &ChordTolerance,
) -> Result<Option<ChordCrossing>> {
    match c1.total_cmp(c2) {
        Ordering::Equal => Err(Error::NonTransversalOverlap),
        Ordering::Less => crossing_ordered(c1, c2, tol),
        Ordering::Greater => Ok(crossing_ordered(c2, c1, tol)?.map(|c| ChordCrossing {
            frac1: c.frac2,
            frac2: c.frac1,
            ..c
        })),
    }
}

fn crossing_ordered(c1: &Chord, c2: &Chord, tol: &ChordTolerance) -> Result<Option<ChordCrossing>> {
    // put c1 on the real segment [0, x1]
    let f1 = MobiusMap::frame(&c1.start_tangent());
    let f1_inv = f1.inverse();
    let x1 = (c1.length / 2.0).tanh();
    let w0 = f1_inv.apply_complex(c2.p0.z());
    let w1 = f1_inv.apply_complex(c2.p1.z());

    if w0.im.abs() <= tol.collinear_eps && w1.im.abs() <= tol.collinear_eps {
        let (lo, hi) = (w0.re.min(w1.re), w0.re.max(w1.re));
        let overlap = hi.min(x1) - lo.max(0.0);
        return if overlap > tol.collinear_eps {
            Err(Error::NonTransversalOverlap)
        } else {
            Ok(None)
        };
    }
    if (w0.im > 0.0) == (w1.im > 0.0) && w0.im != 0.0 && w1.im != 0.0 {
        return Ok(None);
    }

    // c2 in the same frame, as y ↦ N(y) on [0, y1]; solve Im N(y) = 0
    let w0p = DiskPoint::from_complex_unchecked(w0);
    let w1p = DiskPoint::from_complex_unchecked(w1);
    let n = MobiusMap::frame(&UnitTangent::new(w0p, direction_toward(w0p, w1p)));
    let y1 = (c2.length / 2.0).tanh();
    let qa = (n.a * n.b).im;
    let qc = (n.a * n.a + n.b * n.b).im;
    // qa (y² + 1) + qc y = 0, take the root inside (−1, 1)
    let disc = qc * qc - 4.0 * qa * qa;
    if disc <= 0.0 {
        return Ok(None);
    }
    let y = -2.0 * qa / (qc + qc.signum() * disc.sqrt());
    if !(0.0..=y1).contains(&y) {
        return Ok(None);
    }
    let yc = Complex::new(y, 0.0);
    let x = n.apply_complex(yc).re;
    if !(0.0..=x1).contains(&x) {
        return Ok(None);
    }
    let frac1 = x.atanh() / x1.atanh();
    let frac2 = y.atanh() / y1.atanh();
    let inside = |f: f64| f > tol.end_eps && f < 1.0 - tol.end_eps;
    if !inside(frac1) || !inside(frac2) {
        return Ok(None);
    }
    let theta = unsigned_angle_between(0.0, n.derivative_arg(yc));
    if theta <= tol.angle_eps || theta >= PI - tol.angle_eps {
        return Ok(None);
    }
    let point = DiskPoint::from_complex_unchecked(f1.apply_complex(Complex::new(x, 0.0)));
    Ok(Some(ChordCrossing {
        point,
        theta,
        frac1,
        frac2,
    }))
}
