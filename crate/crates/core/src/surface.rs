//! Compact hyperbolic surfaces as a fundamental polygon plus side pairings.
//!
//! The only concrete surface is the Bolza surface: the regular octagon with
//! interior angles π/4, centered at the origin, opposite sides paired by
//! hyperbolic translations.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI, TAU};
use std::sync::OnceLock;

use rand::Rng;

use crate::error::{Error, Result};
use crate::hyperbolic::{
    direction_toward, dist, unsigned_angle_between, Complex, DiskPoint, MobiusMap, UnitTangent,
};

/// Default iteration cap for [`reduce`].
pub const REDUCTION_CAP: usize = 10_000;
/// Side test tolerance used by [`reduce`].
pub const SIDE_TOL: f64 = 1e-12;
/// Lifts kept around the base polygon: every group element moving the
/// origin at most this far.
const LIFT_RADIUS: f64 = 6.6;

/// A polygon side as the geodesic `|w|² − 2 Re(c̄w) + 1 = 0`, normalized so
/// that the value at the origin is positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SideLine {
    pub center: Complex,
    scale: f64,
}

impl SideLine {
    /// Geodesic through two points not on a common diameter.
    pub fn through(p: DiskPoint, q: DiskPoint) -> Result<Self> {
        let (a, b) = (p.z(), q.z());
        let det = a.re * b.im - a.im * b.re;
        if det.abs() < 1e-14 {
            return Err(Error::InvalidPolygon("side lies on a diameter".into()));
        }
        let ra = (a.norm_sqr() + 1.0) / 2.0;
        let rb = (b.norm_sqr() + 1.0) / 2.0;
        let center = Complex::new((ra * b.im - rb * a.im) / det, (a.re * rb - b.re * ra) / det);
        Ok(SideLine {
            center,
            scale: center.norm().recip(),
        })
    }

    /// Signed side value: positive on the origin's side.
    pub fn value(&self, w: Complex) -> f64 {
        (w.norm_sqr() - 2.0 * (self.center.conj() * w).re + 1.0) * self.scale
    }

    /// First positive time at which the geodesic from `u` meets this line.
    pub fn crossing_time(&self, u: &UnitTangent) -> Option<f64> {
        let MobiusMap { a, b } = MobiusMap::frame(u);
        let c = self.center;
        let ap = a.norm_sqr() + b.norm_sqr() - 2.0 * (c.conj() * a * b).re;
        let cp = (c.conj() * (a * a + b * b)).re - 2.0 * (a * b.conj()).re;
        let disc = cp * cp - ap * ap;
        if disc <= 0.0 {
            return None;
        }
        let x = ap / (cp + cp.signum() * disc.sqrt());
        if x > 0.0 && x < 1.0 {
            Some(2.0 * x.atanh())
        } else {
            None
        }
    }
}

/// A group element with the generator letters that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct DeckWord {
    pub map: MobiusMap,
    pub letters: Vec<usize>,
}

impl DeckWord {
    pub fn identity() -> Self {
        DeckWord {
            map: MobiusMap::identity(),
            letters: Vec::new(),
        }
    }

    /// Product of generators, applied right to left: `letters[0]` acts last.
    pub fn from_letters(spec: &SurfaceSpec, letters: &[usize]) -> Self {
        let map = letters
            .iter()
            .fold(MobiusMap::identity(), |m, &k| m.compose(&spec.generators[k]));
        DeckWord {
            map,
            letters: letters.to_vec(),
        }
    }
}

/// A group element near the identity with its origin displacement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lift {
    pub map: MobiusMap,
    pub displacement: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceSpec {
    pub name: String,
    /// `generators[k]` maps side `k` onto side `pairing[k]`.
    pub generators: Vec<MobiusMap>,
    pub pairing: Vec<usize>,
    /// Vertices in counterclockwise order; side `k` joins vertex `k−1` to `k`.
    pub polygon: Vec<DiskPoint>,
    pub sides: Vec<SideLine>,
    pub area: f64,
    pub systole_lower_bound: f64,
    /// Distance from the origin to a side.
    pub inradius: f64,
    /// Distance from the origin to a vertex.
    pub circumradius: f64,
    /// Word in the generators that evaluates to the identity.
    pub relation: Vec<usize>,
    /// Shortest translation length among the lifts, from a brute-force scan.
    pub shortest_translation: f64,
    lifts: Vec<Lift>,
}

/// The Bolza surface.
pub fn build_bolza() -> SurfaceSpec {
    static BOLZA: OnceLock<SurfaceSpec> = OnceLock::new();
    BOLZA.get_or_init(construct_bolza).clone()
}

/// Look up a surface by name.
pub fn surface_by_name(name: &str) -> Result<SurfaceSpec> {
    match name {
        "bolza" => Ok(build_bolza()),
        other => Err(Error::UnknownSurface(other.to_string())),
    }
}

fn construct_bolza() -> SurfaceSpec {
    const N: usize = 8;
    let half_angle = FRAC_PI_8;
    // right triangle center / side midpoint / vertex
    let inradius = ((PI / N as f64).cos() / half_angle.sin()).acosh();
    let circumradius = (1.0 / ((PI / N as f64).tan() * half_angle.tan())).acosh();
    let polygon: Vec<DiskPoint> = (0..N)
        .map(|k| DiskPoint::from_polar(circumradius, FRAC_PI_8 + k as f64 * FRAC_PI_4))
        .collect();
    let sides: Vec<SideLine> = (0..N)
        .map(|k| SideLine::through(polygon[(k + N - 1) % N], polygon[k]).expect("octagon side"))
        .collect();
    let pairing: Vec<usize> = (0..N).map(|k| (k + N / 2) % N).collect();
    // translate across the polygon toward the paired side
    let generators: Vec<MobiusMap> = (0..N)
        .map(|k| MobiusMap::translation(pairing[k] as f64 * FRAC_PI_4, 2.0 * inradius))
        .collect();
    let area = polygon_area(&polygon).expect("regular octagon is hyperbolic");

    let mut spec = SurfaceSpec {
        name: "bolza".to_string(),
        generators,
        pairing,
        polygon,
        sides,
        area,
        systole_lower_bound: 2.0 * (1.0 + 2f64.sqrt()).acosh(),
        inradius,
        circumradius,
        relation: vec![0, 3, 6, 1, 4, 7, 2, 5],
        shortest_translation: f64::INFINITY,
        lifts: Vec::new(),
    };
    spec.lifts = enumerate_lifts(&spec, LIFT_RADIUS);
    spec.shortest_translation = spec
        .lifts
        .iter()
        .filter(|l| l.displacement > 1e-9)
        .map(|l| translation_length(&l.map))
        .fold(f64::INFINITY, f64::min);
    spec
}

/// Translation length of a hyperbolic element, from `cosh(ℓ/2) = |Re a|`.
pub fn translation_length(m: &MobiusMap) -> f64 {
    2.0 * m.a.re.abs().max(1.0).acosh()
}

fn enumerate_lifts(spec: &SurfaceSpec, keep: f64) -> Vec<Lift> {
    let explore = keep + spec.circumradius;
    let key = |m: &MobiusMap| {
        let z = m.apply_complex(Complex::new(0.0, 0.0));
        ((z.re * 1e8).round() as i64, (z.im * 1e8).round() as i64)
    };
    let mut seen: HashMap<(i64, i64), ()> = HashMap::new();
    let mut frontier = vec![MobiusMap::identity()];
    let mut found = Vec::new();
    seen.insert(key(&frontier[0]), ());
    while let Some(h) = frontier.pop() {
        let d = h.origin_displacement();
        if d <= keep {
            found.push(Lift {
                map: h,
                displacement: d,
            });
        }
        for g in &spec.generators {
            let next = h.compose(g);
            if next.origin_displacement() <= explore && seen.insert(key(&next), ()).is_none() {
                frontier.push(next);
            }
        }
    }
    found.sort_by(|a, b| a.displacement.total_cmp(&b.displacement));
    found
}

impl SurfaceSpec {
    /// Group elements `g` with `d(0, g·0) ≤ radius`, nearest first.
    ///
    /// Complete for any `radius` up to the enumeration radius; larger
    /// requests are clamped.
    pub fn lifts_within(&self, radius: f64) -> impl Iterator<Item = &Lift> {
        self.lifts.iter().take_while(move |l| l.displacement <= radius)
    }

    pub fn lift_radius(&self) -> f64 {
        LIFT_RADIUS
    }

    pub fn relation_map(&self) -> MobiusMap {
        DeckWord::from_letters(self, &self.relation).map
    }

    /// Membership in the closed polygon with slack `tol` on every side.
    pub fn contains(&self, p: DiskPoint, tol: f64) -> bool {
        self.sides.iter().all(|s| s.value(p.z()) >= -tol)
    }

    /// `κ_M = 1/(2π|M|)`.
    pub fn kappa_m(&self) -> f64 {
        1.0 / (TAU * self.area)
    }

    /// Hyperbolic distance from the origin to the polygon boundary along
    /// direction `angle`.
    pub fn boundary_radius(&self, angle: f64) -> f64 {
        let u = UnitTangent::new(DiskPoint::ORIGIN, angle);
        self.sides
            .iter()
            .filter_map(|s| s.crossing_time(&u))
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance on the surface between two points of the polygon.
    pub fn surface_distance(&self, p: DiskPoint, q: DiskPoint) -> f64 {
        // d(p, g·q) ≤ d(p, q) forces d(0, g·0) ≤ |p| + |q| + d(p, q)
        let reach = p.radius() + q.radius() + dist(p, q);
        self.lifts_within(reach)
            .map(|l| dist(p, l.map.apply(q)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Reduce a tangent vector into the polygon.
    pub fn reduce_tangent(&self, u: &UnitTangent) -> Result<(UnitTangent, DeckWord)> {
        let (_, word) = reduce(u.base, self)?;
        Ok((word.map.apply_tangent_unchecked(u), word))
    }
}

/// Move `z` into the closed fundamental polygon.
///
/// Greedy Dirichlet reduction: while some side separates `z` from the
/// origin, apply that side's generator (first side index wins). The
/// returned word satisfies `word.map · z = point`.
pub fn reduce(z: DiskPoint, spec: &SurfaceSpec) -> Result<(DiskPoint, DeckWord)> {
    reduce_with_cap(z, spec, REDUCTION_CAP)
}

pub fn reduce_with_cap(z: DiskPoint, spec: &SurfaceSpec, cap: usize) -> Result<(DiskPoint, DeckWord)> {
    if z.z().norm_sqr() >= 1.0 {
        return Err(Error::OutsideDisk { re: z.re(), im: z.im() });
    }
    let mut p = z;
    let mut word = DeckWord::identity();
    for _ in 0..cap {
        match spec.sides.iter().position(|s| s.value(p.z()) < -SIDE_TOL) {
            None => return Ok((p, word)),
            Some(k) => {
                let g = &spec.generators[k];
                p = g.apply(p);
                word.map = g.compose(&word.map);
                word.letters.push(k);
            }
        }
    }
    if spec.sides.iter().all(|s| s.value(p.z()) >= -SIDE_TOL) {
        return Ok((p, word));
    }
    Err(Error::ReductionDivergence(cap))
}

/// Draw a unit tangent from the normalized Liouville measure on the polygon.
///
/// The base point is rejection-sampled from the hyperbolic-area-uniform
/// disk of radius `circumradius`; the direction is uniform and independent.
pub fn liouville_sample<R: Rng + ?Sized>(rng: &mut R, spec: &SurfaceSpec) -> UnitTangent {
    let base = area_uniform_point(rng, spec);
    UnitTangent::new(base, rng.random::<f64>() * TAU)
}

pub(crate) fn area_uniform_point<R: Rng + ?Sized>(rng: &mut R, spec: &SurfaceSpec) -> DiskPoint {
    loop {
        let p = disk_proposal(rng, spec.circumradius);
        if spec.contains(p, 0.0) {
            return p;
        }
    }
}

/// Uniform point (hyperbolic area) on the disk of radius `radius` about 0.
pub(crate) fn disk_proposal<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> DiskPoint {
    let u: f64 = rng.random();
    let r = (1.0 + u * (radius.cosh() - 1.0)).acosh();
    DiskPoint::from_polar(r, rng.random::<f64>() * TAU)
}

/// Hyperbolic area of the disk of radius `r`.
pub fn disk_area(r: f64) -> f64 {
    TAU * (r.cosh() - 1.0)
}

/// Gauss–Bonnet area of the surface's polygon.
pub fn surface_area(spec: &SurfaceSpec) -> Result<f64> {
    polygon_area(&spec.polygon)
}

/// Gauss–Bonnet area `(n − 2)π − Σ interior angles` of a convex polygon.
pub fn polygon_area(vertices: &[DiskPoint]) -> Result<f64> {
    let n = vertices.len();
    if n < 3 {
        return Err(Error::InvalidPolygon(format!("{n} vertices")));
    }
    let angle_sum: f64 = (0..n)
        .map(|k| {
            let v = vertices[k];
            let prev = vertices[(k + n - 1) % n];
            let next = vertices[(k + 1) % n];
            unsigned_angle_between(direction_toward(v, prev), direction_toward(v, next))
        })
        .sum();
    let euclidean = (n as f64 - 2.0) * PI;
    if angle_sum >= euclidean - 1e-12 {
        return Err(Error::InvalidPolygon(format!(
            "angle sum {angle_sum} is not below {euclidean}"
        )));
    }
    Ok(euclidean - angle_sum)
}
