//! Intersection kernels on the unit tangent bundle.
//!
//! `H_δ(u, v)` is `φ(θ)` when the length-δ segments from `u` and `v` cross
//! transversally at angle `θ`. `K_δ` smooths it with a mollifier in the
//! signed crossing offsets along the two-sided geodesics, and `k_δ` further
//! weights by a localizer at the crossing point. Kernels are evaluated in
//! the universal cover: the second argument is tried at every deck image
//! that can reach the first.

use std::collections::HashSet;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::hyperbolic::{chord_intersection, dist, flow, Chord, ChordCrossing, DiskPoint, UnitTangent};
use crate::intersections::self_intersections;
use crate::numeric::{simpson, trapezoid_grid, Estimate, Moments};
use crate::surface::{liouville_sample, reduce, SurfaceSpec};
use crate::tracer::GeodesicTrace;

pub const DEFAULT_ALPHA: f64 = 0.3;
pub const DEFAULT_DELTA: f64 = 0.1;
pub const DEFAULT_RHO: f64 = 0.5;

const QUAD_INTERVALS: usize = 8192;

#[derive(Clone, Copy, Debug, PartialEq)]
enum PhiShape {
    /// `exp(−1/((θ − α)(π − α − θ)))` on `(α, π − α)`.
    Bump { alpha: f64 },
    Constant,
}

/// An even, π-periodic, nonnegative angle weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothingFn {
    shape: PhiShape,
    scale: f64,
}

/// The standard bump smoothing function vanishing on `[−α, α]`.
pub fn build_phi(alpha: f64) -> Result<SmoothingFn> {
    SmoothingFn::bump(alpha)
}

impl SmoothingFn {
    pub fn bump(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < FRAC_PI_2) {
            return Err(invalid("alpha", format!("must lie in (0, π/2), got {alpha}")));
        }
        Ok(SmoothingFn {
            shape: PhiShape::Bump { alpha },
            scale: 1.0,
        })
    }

    /// `φ ≡ c`. Not admissible for `K_δ`, but fine for counting.
    pub fn constant(c: f64) -> Self {
        SmoothingFn {
            shape: PhiShape::Constant,
            scale: c.max(0.0),
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        SmoothingFn {
            scale: self.scale * k.max(0.0),
            ..*self
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self.shape {
            PhiShape::Bump { alpha } => Some(alpha),
            PhiShape::Constant => None,
        }
    }

    pub fn evaluate(&self, theta: f64) -> f64 {
        match self.shape {
            PhiShape::Constant => self.scale,
            PhiShape::Bump { alpha } => {
                let t = theta.rem_euclid(PI);
                let (lo, hi) = (alpha, PI - alpha);
                if t <= lo || t >= hi {
                    0.0
                } else {
                    self.scale * (-1.0 / ((t - lo) * (hi - t))).exp()
                }
            }
        }
    }

    /// `‖φ‖∞`, attained at π/2 for the bump.
    pub fn sup_norm(&self) -> f64 {
        self.evaluate(FRAC_PI_2)
    }
}

/// Even bump density `p(s) = c·exp(−1/(1 − s²))` on `(−1, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mollifier {
    norm: f64,
}

fn raw_bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

impl Mollifier {
    pub fn standard() -> Self {
        static NORM: OnceLock<f64> = OnceLock::new();
        let norm = *NORM.get_or_init(|| simpson(raw_bump, -1.0, 1.0, 1 << 16).recip());
        Mollifier { norm }
    }

    pub fn evaluate(&self, s: f64) -> f64 {
        self.norm * raw_bump(s)
    }
}

impl Default for Mollifier {
    fn default() -> Self {
        Mollifier::standard()
    }
}

/// A function on the surface: a smooth bump in the surface distance to a
/// center point, or a constant.
#[derive(Clone, Debug, PartialEq)]
pub enum LocalizerFn {
    Bump {
        center: DiskPoint,
        radius: f64,
        scale: f64,
        /// Deck images of the center that can come within `radius` of the
        /// polygon.
        images: Vec<DiskPoint>,
    },
    Constant(f64),
}

impl LocalizerFn {
    /// `exp(1 − 1/(1 − (d/r)²))` for surface distance `d < r`, peak 1.
    pub fn bump(center: DiskPoint, radius: f64, spec: &SurfaceSpec) -> Result<Self> {
        if !(radius > 0.0 && radius < spec.inradius) {
            return Err(invalid("f_radius", format!("must lie in (0, {}), got {radius}", spec.inradius)));
        }
        let (center, _) = reduce(center, spec)?;
        let reach = center.radius() + spec.circumradius + radius + 1e-9;
        let images = spec.lifts_within(reach).map(|l| l.map.apply(center)).collect();
        Ok(LocalizerFn::Bump {
            center,
            radius,
            scale: 1.0,
            images,
        })
    }

    pub fn constant(c: f64) -> Self {
        LocalizerFn::Constant(c)
    }

    pub fn scaled(&self, k: f64) -> Self {
        match self {
            LocalizerFn::Constant(c) => LocalizerFn::Constant(c * k),
            LocalizerFn::Bump {
                center,
                radius,
                scale,
                images,
            } => LocalizerFn::Bump {
                center: *center,
                radius: *radius,
                scale: scale * k,
                images: images.clone(),
            },
        }
    }

    /// Value at a point of the fundamental polygon.
    pub fn evaluate(&self, x: DiskPoint) -> f64 {
        match self {
            LocalizerFn::Constant(c) => *c,
            LocalizerFn::Bump {
                radius,
                scale,
                images,
                ..
            } => {
                let d = images.iter().map(|&c| dist(x, c)).fold(f64::INFINITY, f64::min);
                if d >= *radius {
                    0.0
                } else {
                    let q = d / radius;
                    scale * (1.0 - 1.0 / (1.0 - q * q)).exp()
                }
            }
        }
    }

    /// `∫_M f dA` (hyperbolic area, not normalized) by quadrature in polar
    /// coordinates over the polygon.
    pub fn integral(&self, spec: &SurfaceSpec) -> f64 {
        if let LocalizerFn::Constant(c) = self {
            return c * spec.area;
        }
        let n_angle = 1024;
        let dpsi = TAU / n_angle as f64;
        (0..n_angle)
            .into_par_iter()
            .map(|k| {
                let psi = (k as f64 + 0.5) * dpsi;
                let rmax = spec.boundary_radius(psi);
                simpson(|r| self.evaluate(DiskPoint::from_polar(r, psi)) * r.sinh(), 0.0, rmax, 400) * dpsi
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum()
    }
}

/// Everything a kernel evaluation needs.
#[derive(Clone, Debug)]
pub struct KernelConfig {
    pub delta: f64,
    pub phi: SmoothingFn,
    pub p: Mollifier,
    pub f: Option<LocalizerFn>,
    pub rho: f64,
    pub surface: Arc<SurfaceSpec>,
}

impl KernelConfig {
    /// Checks `δ ≤ ϱ/2` and `ϱ ≤ systole/2`, which keep any two relevant
    /// segments crossing at most once.
    pub fn new(delta: f64, phi: SmoothingFn, rho: f64, surface: Arc<SurfaceSpec>) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(invalid("delta", format!("must be positive, got {delta}")));
        }
        if !(rho > 0.0 && rho <= surface.systole_lower_bound / 2.0) {
            return Err(invalid(
                "rho",
                format!("must lie in (0, {}], got {rho}", surface.systole_lower_bound / 2.0),
            ));
        }
        if delta > rho / 2.0 + 1e-12 {
            return Err(invalid("delta", format!("must not exceed rho/2 = {}, got {delta}", rho / 2.0)));
        }
        Ok(KernelConfig {
            delta,
            phi,
            p: Mollifier::standard(),
            f: None,
            rho,
            surface,
        })
    }

    /// `α = 0.3`, `δ = 0.1`, `ϱ = 0.5`.
    pub fn defaults(surface: Arc<SurfaceSpec>) -> Self {
        let phi = SmoothingFn::bump(DEFAULT_ALPHA).expect("default alpha");
        KernelConfig::new(DEFAULT_DELTA, phi, DEFAULT_RHO, surface).expect("default kernel parameters")
    }

    pub fn with_localizer(mut self, f: LocalizerFn) -> Self {
        self.f = Some(f);
        self
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        let mut cfg = KernelConfig::new(delta, self.phi, self.rho, self.surface.clone())?;
        cfg.f = self.f.clone();
        cfg.p = self.p;
        Ok(cfg)
    }

    fn reduced(&self, u: &UnitTangent) -> UnitTangent {
        self.surface.reduce_tangent(u).map(|(r, _)| r).unwrap_or(*u)
    }
}

/// `κ_φ = (2π|M|)⁻¹ ∫₀^{2π} φ(θ)|sin θ| dθ`, by Simpson on each half period.
pub fn kappa_phi(phi: &SmoothingFn, spec: &SurfaceSpec) -> f64 {
    let g = |t: f64| phi.evaluate(t) * t.sin().abs();
    let integral = simpson(g, 0.0, PI, QUAD_INTERVALS) + simpson(g, PI, TAU, QUAD_INTERVALS);
    integral / (TAU * spec.area)
}

struct Hit {
    crossing: ChordCrossing,
    s: f64,
    t: f64,
}

fn segment(u: &UnitTangent, lo: f64, hi: f64) -> Option<Chord> {
    Chord::new(flow(u, lo).base, flow(u, hi).base).ok()
}

/// Transversal crossing of the segments `[lo, hi]` along `u` and along some
/// deck image of `v`, with signed offsets from the respective base points.
/// Arguments are put in a canonical order first, so the result does not
/// depend on which one came first.
fn find_crossing(u: &UnitTangent, v: &UnitTangent, lo: f64, hi: f64, cfg: &KernelConfig) -> Option<Hit> {
    let (a, b) = (cfg.reduced(u), cfg.reduced(v));
    let (a, b) = match a.total_cmp(&b) {
        std::cmp::Ordering::Greater => (b, a),
        _ => (a, b),
    };
    let reach = lo.abs().max(hi.abs());
    let seg_a = segment(&a, lo, hi)?;
    let radius = a.base.radius() + b.base.radius() + 2.0 * reach + 1e-9;
    for lift in cfg.surface.lifts_within(radius) {
        let gb = lift.map.apply_tangent_unchecked(&b);
        if dist(a.base, gb.base) > 2.0 * reach + 1e-12 {
            continue;
        }
        let Some(seg_b) = segment(&gb, lo, hi) else { continue };
        // a shared geodesic (including u = v) is not a transversal crossing
        if let Ok(Some(c)) = chord_intersection(&seg_a, &seg_b) {
            let len = hi - lo;
            return Some(Hit {
                s: lo + c.frac1 * len,
                t: lo + c.frac2 * len,
                crossing: c,
            });
        }
    }
    None
}

/// `H_δ(u, v)`.
pub fn eval_h(u: &UnitTangent, v: &UnitTangent, cfg: &KernelConfig) -> f64 {
    find_crossing(u, v, 0.0, cfg.delta, cfg).map_or(0.0, |h| cfg.phi.evaluate(h.crossing.theta))
}

fn smoothed(hit: &Hit, cfg: &KernelConfig) -> f64 {
    let d = cfg.delta;
    cfg.p.evaluate(hit.s / d) * cfg.p.evaluate(hit.t / d) * cfg.phi.evaluate(hit.crossing.theta) / (d * d)
}

/// `K_δ(u, v) = δ⁻² p(s/δ) p(t/δ) φ(θ)` for the crossing of the two-sided
/// geodesics within distance δ of both base points, 0 if there is none.
pub fn eval_k(u: &UnitTangent, v: &UnitTangent, cfg: &KernelConfig) -> f64 {
    find_crossing(u, v, -cfg.delta, cfg.delta, cfg).map_or(0.0, |h| smoothed(&h, cfg))
}

/// `k_δ(u, v)`: `K_δ` weighted by the localizer at the crossing point.
pub fn eval_k_local(u: &UnitTangent, v: &UnitTangent, cfg: &KernelConfig) -> Result<f64> {
    let f = cfg
        .f
        .as_ref()
        .ok_or_else(|| Error::Configuration("localized kernel needs a localizer".into()))?;
    Ok(match find_crossing(u, v, -cfg.delta, cfg.delta, cfg) {
        None => 0.0,
        Some(hit) => {
            let (x, _) = reduce(hit.crossing.point, &cfg.surface)?;
            smoothed(&hit, cfg) * f.evaluate(x)
        }
    })
}

const MC_CHUNK: usize = 4096;

/// Mean of `sample(rng)` over `n` draws, split into fixed-size chunks with
/// independent ChaCha streams; the result does not depend on thread count.
pub(crate) fn parallel_moments<F>(n: usize, seed: u64, sample: F) -> Moments
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let chunks = n.div_ceil(MC_CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = MC_CHUNK.min(n - c * MC_CHUNK);
            (0..len).map(|_| sample(&mut rng)).collect()
        })
        .collect();
    parts.iter().fold(Moments::default(), |acc, m| acc.merge(m))
}

/// Monte Carlo estimate of `H_δ1(u) = ∫ H_δ(u, v) dν_L(v)`.
pub fn row_mean<R: Rng + ?Sized>(u: &UnitTangent, cfg: &KernelConfig, n: usize, rng: &mut R) -> Result<Estimate> {
    if n < 100 {
        return Err(Error::Precondition(format!("row_mean needs n >= 100, got {n}")));
    }
    let seed = rng.random::<u64>();
    let u = cfg.reduced(u);
    let m = parallel_moments(n, seed, |r| eval_h(&u, &liouville_sample(r, &cfg.surface), cfg));
    Ok(m.into())
}

/// Monte Carlo estimate of `f_δ(u) = κ_φ⁻¹ ∫ k_δ(u, v) dν_L(v)`.
pub fn f_delta<R: Rng + ?Sized>(u: &UnitTangent, cfg: &KernelConfig, n: usize, rng: &mut R) -> Result<Estimate> {
    if n < 100 {
        return Err(Error::Precondition(format!("f_delta needs n >= 100, got {n}")));
    }
    if cfg.f.is_none() {
        return Err(Error::Configuration("f_delta needs a localizer".into()));
    }
    let kappa = kappa_phi(&cfg.phi, &cfg.surface);
    let seed = rng.random::<u64>();
    let u = cfg.reduced(u);
    let m = parallel_moments(n, seed, |r| {
        let v = liouville_sample(r, &cfg.surface);
        eval_k_local(&u, &v, cfg).unwrap_or(0.0) / kappa
    });
    Ok(m.into())
}

/// `½ Σᵢ Σⱼ H_δ(γ(iδ), γ(jδ))` over the `n = T/δ` consecutive δ-segments.
pub fn u_statistic(trace: &GeodesicTrace, cfg: &KernelConfig) -> Result<f64> {
    let ratio = trace.total_time / cfg.delta;
    let n = ratio.round();
    if (ratio - n).abs() > 1e-9 * ratio.max(1.0) || n < 1.0 {
        return Err(Error::Precondition(format!(
            "T / delta = {ratio} is not a positive integer"
        )));
    }
    let n = n as usize;
    let tangents: Vec<UnitTangent> = (0..n)
        .map(|i| trace.tangent_at(i as f64 * cfg.delta))
        .collect::<Result<_>>()?;
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| (i + 1..n).map(|j| eval_h(&tangents[i], &tangents[j], cfg)).sum())
        .collect();
    // the symmetric double sum halves to the upper triangle
    Ok(rows.iter().sum())
}

/// Default trapezoid step for [`sandwich`], as a fraction of δ.
///
/// With step δ/4 the discrete mass of the mollifier is off by up to 0.6%,
/// more than the room between the bounds when no crossing sits near an end
/// of the segment. At δ/16 it is off by at most 4e-6.
pub const SANDWICH_STEPS_PER_DELTA: f64 = 16.0;

/// Relative slack allowed for quadrature error when checking the bounds.
pub const SANDWICH_SLACK: f64 = 1e-5;

/// Lower and upper double integrals bracketing `N_φ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sandwich {
    pub lower: f64,
    pub upper: f64,
}

impl Sandwich {
    /// Whether `lower ≤ value ≤ upper` up to [`SANDWICH_SLACK`].
    pub fn brackets(&self, value: f64) -> bool {
        let tol = SANDWICH_SLACK * value.abs().max(1.0);
        self.lower <= value + tol && value <= self.upper + tol
    }

    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

/// `½ ∬_{[lo, hi]²} K_δ(γ(r), γ(s)) dr ds` by the trapezoid rule with step
/// at most `h`, times measured along `trace`.
///
/// `K_δ(γ(r), γ(s))` vanishes unless γ crosses itself within δ of both `r`
/// and `s`, so only grid pairs near self-intersections of the trace padded
/// by δ are evaluated.
pub fn kernel_double_integral(trace: &GeodesicTrace, cfg: &KernelConfig, lo: f64, hi: f64, h: f64) -> Result<f64> {
    if !(lo >= 0.0 && hi <= trace.total_time + 1e-12 && hi > lo) {
        return Err(Error::Precondition(format!(
            "window [{lo}, {hi}] not inside [0, {}]",
            trace.total_time
        )));
    }
    let d = cfg.delta;
    let ext = trace.padded(d, &cfg.surface)?;
    let crossings = self_intersections(&ext);
    let (nodes, weights) = trapezoid_grid(lo, hi, h);
    let near = |c: f64| {
        let a = nodes.partition_point(|&x| x <= c - d);
        let b = nodes.partition_point(|&x| x < c + d);
        a..b
    };
    let mut pairs = HashSet::new();
    for c in &crossings.crossings {
        for i in near(c.s - d) {
            for j in near(c.t - d) {
                if i < j {
                    pairs.insert((i, j));
                }
            }
        }
    }
    let mut pairs: Vec<(usize, usize)> = pairs.into_iter().collect();
    pairs.sort_unstable();
    let at = |k: usize| trace.tangent_at(nodes[k].min(trace.total_time));
    let mut total = 0.0;
    for (i, j) in pairs {
        let k = eval_k(&at(i)?, &at(j)?, cfg);
        total += weights[i] * weights[j] * k;
    }
    Ok(total)
}

/// The bracketing integrals for `N_φ(γ[0, T])`.
///
/// `trace` must cover `γ[−δ, T + δ]`, i.e. start at `flow(u0, −δ)` and run
/// for `T + 2δ`; the lower window is `[δ, T − δ]` and the upper one
/// `[−δ, T + δ]` in the original time.
pub fn sandwich(trace: &GeodesicTrace, cfg: &KernelConfig, h: f64) -> Result<Sandwich> {
    let d = cfg.delta;
    let t = trace.total_time - 2.0 * d;
    if t <= 2.0 * d {
        return Err(Error::Precondition(format!(
            "trace of length {} too short for delta = {d}",
            trace.total_time
        )));
    }
    if !(h > 0.0 && h <= d / 4.0 + 1e-15) {
        return Err(invalid("h", format!("must lie in (0, delta/4], got {h}")));
    }
    Ok(Sandwich {
        lower: kernel_double_integral(trace, cfg, 2.0 * d, t, h)?,
        upper: kernel_double_integral(trace, cfg, 0.0, t + 2.0 * d, h)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::apply_isometry;
    use crate::intersections::weighted_counts;
    use crate::surface::build_bolza;
    use crate::tracer::{trace, trace_from};
    use approx::assert_abs_diff_eq;

    fn bolza() -> Arc<SurfaceSpec> {
        Arc::new(build_bolza())
    }

    #[test]
    fn phi_shape() {
        let alpha = 0.3;
        let phi = build_phi(alpha).unwrap();
        assert_eq!(phi.evaluate(0.0), 0.0);
        assert_eq!(phi.evaluate(alpha), 0.0);
        let mid = (-1.0 / (FRAC_PI_2 - alpha).powi(2)).exp();
        assert_abs_diff_eq!(phi.evaluate(FRAC_PI_2), mid, epsilon = 1e-15);
        assert_abs_diff_eq!(phi.sup_norm(), mid, epsilon = 1e-15);
        for k in 0..64 {
            let t = -7.0 + 0.219 * k as f64;
            assert_abs_diff_eq!(phi.evaluate(t), phi.evaluate(-t), epsilon = 1e-12);
            assert_abs_diff_eq!(phi.evaluate(t + PI), phi.evaluate(t), epsilon = 1e-12);
            let f = t.rem_euclid(PI);
            if f.min(PI - f) <= alpha {
                assert_eq!(phi.evaluate(t), 0.0);
            } else {
                assert!(phi.evaluate(t) > 0.0);
            }
        }
        assert!(build_phi(0.0).is_err());
        assert!(build_phi(FRAC_PI_2).is_err());
    }

    #[test]
    fn mollifier_is_a_monotone_density() {
        let p = Mollifier::standard();
        assert_abs_diff_eq!(simpson(|s| p.evaluate(s), -1.0, 1.0, 1 << 14), 1.0, epsilon = 1e-8);
        for k in 0..100 {
            let s = k as f64 / 100.0;
            assert_eq!(p.evaluate(s), p.evaluate(-s));
            assert!(p.evaluate(s + 0.01) <= p.evaluate(s));
        }
        assert_eq!(p.evaluate(1.0), 0.0);
    }

    #[test]
    fn kappa_phi_closed_forms() {
        let s = build_bolza();
        assert_abs_diff_eq!(kappa_phi(&SmoothingFn::constant(1.0), &s), 1.0 / (2.0 * PI * PI), epsilon = 1e-12);
        assert_abs_diff_eq!(kappa_phi(&SmoothingFn::constant(1.0), &s), 0.0506606, epsilon = 1e-7);
        assert_eq!(kappa_phi(&SmoothingFn::constant(0.0), &s), 0.0);
        let phi = build_phi(0.3).unwrap();
        assert_abs_diff_eq!(
            kappa_phi(&phi.scaled(2.0), &s),
            2.0 * kappa_phi(&phi, &s),
            epsilon = 1e-15
        );
    }

    #[test]
    fn config_invariants_are_enforced() {
        let s = bolza();
        let phi = build_phi(0.3).unwrap();
        assert!(KernelConfig::new(0.3, phi, 0.5, s.clone()).is_err());
        assert!(KernelConfig::new(0.1, phi, 2.0, s.clone()).is_err());
        assert!(KernelConfig::new(-0.1, phi, 0.5, s.clone()).is_err());
        assert!(KernelConfig::new(0.25, phi, 0.5, s).is_ok());
    }

    #[test]
    fn h_vanishes_on_diagonal_and_far_pairs() {
        let cfg = KernelConfig::defaults(bolza());
        let u = UnitTangent::new(DiskPoint::new(0.1, 0.2).unwrap(), 1.0);
        assert_eq!(eval_h(&u, &u, &cfg), 0.0);
        let v = UnitTangent::new(DiskPoint::new(0.5, -0.2).unwrap(), 2.0);
        assert!(dist(u.base, v.base) > 2.0 * cfg.delta);
        assert_eq!(eval_h(&u, &v, &cfg), 0.0);
        assert_eq!(eval_k(&u, &v, &cfg), 0.0);
    }

    #[test]
    fn perpendicular_midpoint_crossing() {
        let cfg = KernelConfig::defaults(bolza());
        let d = cfg.delta;
        let x = UnitTangent::new(DiskPoint::new(0.2, -0.1).unwrap(), 0.4);
        let y = UnitTangent::new(x.base, 0.4 + FRAC_PI_2);
        let (u, v) = (flow(&x, -d / 2.0), flow(&y, -d / 2.0));
        assert_abs_diff_eq!(eval_h(&u, &v, &cfg), cfg.phi.evaluate(FRAC_PI_2), epsilon = 1e-12);
        // crossing at both base points: s = t = 0
        let p0 = cfg.p.evaluate(0.0);
        let expected = p0 * p0 * cfg.phi.evaluate(FRAC_PI_2) / (d * d);
        assert_abs_diff_eq!(eval_k(&x, &y, &cfg), expected, epsilon = 1e-9);
    }

    #[test]
    fn crossing_across_a_side_is_found() {
        let cfg = KernelConfig::defaults(bolza());
        let s = &cfg.surface;
        // cross just inside side 0, then push one tangent through the pairing
        let x = UnitTangent::new(DiskPoint::from_polar(s.inradius - 0.01, 0.0), 0.7);
        let y = UnitTangent::new(x.base, -0.7);
        let v = flow(&y, 0.05);
        let (v_red, word) = s.reduce_tangent(&v).unwrap();
        assert!(!word.letters.is_empty());
        let direct = eval_k(&x, &v, &cfg);
        assert!(direct > 0.0);
        assert_abs_diff_eq!(eval_k(&x, &v_red, &cfg), direct, epsilon = 1e-9);
    }

    #[test]
    fn localized_kernel_linearity_and_support() {
        let s = bolza();
        let cfg = KernelConfig::defaults(s.clone());
        assert!(matches!(
            eval_k_local(&UnitTangent::new(DiskPoint::ORIGIN, 0.0), &UnitTangent::new(DiskPoint::ORIGIN, 1.0), &cfg),
            Err(Error::Configuration(_))
        ));
        let x = UnitTangent::new(DiskPoint::new(0.05, 0.02).unwrap(), 0.2);
        let y = UnitTangent::new(x.base, 1.9);
        let (u, v) = (flow(&x, 0.02), flow(&y, -0.03));
        let k = eval_k(&u, &v, &cfg);
        assert!(k > 0.0);
        let one = cfg.clone().with_localizer(LocalizerFn::constant(1.0));
        assert_eq!(eval_k_local(&u, &v, &one).unwrap(), k);
        let f = LocalizerFn::bump(DiskPoint::ORIGIN, 0.3, &s).unwrap();
        let c1 = cfg.clone().with_localizer(f.clone());
        let c2 = cfg.clone().with_localizer(f.scaled(2.0));
        let a = eval_k_local(&u, &v, &c1).unwrap();
        assert!(a > 0.0);
        assert_abs_diff_eq!(eval_k_local(&u, &v, &c2).unwrap(), 2.0 * a, epsilon = 1e-15);
        let far = LocalizerFn::bump(DiskPoint::from_polar(1.2, 2.0), 0.2, &s).unwrap();
        let c3 = cfg.with_localizer(far);
        assert_eq!(eval_k_local(&u, &v, &c3).unwrap(), 0.0);
    }

    #[test]
    fn localizer_peaks_at_center_and_has_compact_support() {
        let s = build_bolza();
        let c = DiskPoint::from_polar(1.4, 0.1);
        let f = LocalizerFn::bump(c, 0.3, &s).unwrap();
        assert_abs_diff_eq!(f.evaluate(c), 1.0, epsilon = 1e-12);
        // support wraps through the side pairing
        let across = s.generators[0].apply(DiskPoint::from_polar(1.6, 0.1));
        let (across, _) = reduce(across, &s).unwrap();
        assert!(f.evaluate(across) > 0.0);
        assert_eq!(f.evaluate(DiskPoint::from_polar(0.5, 2.0)), 0.0);
    }

    #[test]
    fn localizer_integral_matches_radial_formula() {
        let s = build_bolza();
        let r = 0.4;
        let f = LocalizerFn::bump(DiskPoint::ORIGIN, r, &s).unwrap();
        let radial = TAU
            * simpson(
                |x| {
                    let q = x / r;
                    if q >= 1.0 { 0.0 } else { (1.0 - 1.0 / (1.0 - q * q)).exp() * x.sinh() }
                },
                0.0,
                r,
                4000,
            );
        assert_abs_diff_eq!(f.integral(&s), radial, epsilon = 1e-6);
        assert_abs_diff_eq!(LocalizerFn::constant(1.0).integral(&s), s.area, epsilon = 1e-12);
    }

    #[test]
    fn kernels_are_symmetric_and_deck_invariant() {
        let s = bolza();
        let cfg = KernelConfig::new(0.25, build_phi(0.3).unwrap(), 0.5, s.clone()).unwrap();
        let tr = trace(&UnitTangent::new(DiskPoint::new(0.1, -0.3).unwrap(), 0.9), 40.0, &s).unwrap();
        let mut hits = 0;
        for i in 0..160 {
            for j in (i + 12..160).step_by(3) {
                let u = tr.tangent_at(i as f64 * 0.25).unwrap();
                let v = tr.tangent_at(j as f64 * 0.25).unwrap();
                let h = eval_h(&u, &v, &cfg);
                let k = eval_k(&u, &v, &cfg);
                assert_eq!(h, eval_h(&v, &u, &cfg));
                assert_eq!(k, eval_k(&v, &u, &cfg));
                if k > 0.0 {
                    hits += 1;
                    let g = s.generators[(i + j) % 8];
                    let (gu, gv) = (apply_isometry(&g, &u).unwrap(), apply_isometry(&g, &v).unwrap());
                    assert_abs_diff_eq!(eval_k(&gu, &gv, &cfg), k, epsilon = 1e-9 * k.max(1.0));
                }
            }
        }
        assert!(hits > 0);
    }

    #[test]
    fn u_statistic_matches_direct_count() {
        let s = bolza();
        let cfg = KernelConfig::new(0.25, build_phi(0.3).unwrap(), 0.5, s.clone()).unwrap();
        let tr = trace(&UnitTangent::new(DiskPoint::new(-0.2, 0.1).unwrap(), 2.2), 30.0, &s).unwrap();
        let direct = weighted_counts(&self_intersections(&tr), &cfg.phi, None).n_phi;
        assert!(direct > 0.0);
        let u = u_statistic(&tr, &cfg).unwrap();
        assert_abs_diff_eq!(u, direct, epsilon = 1e-9);
        let half = cfg.with_delta(0.125).unwrap();
        assert_abs_diff_eq!(u_statistic(&tr, &half).unwrap(), direct, epsilon = 1e-9);
        let one = trace(&UnitTangent::new(DiskPoint::ORIGIN, 0.3), 0.25, &s).unwrap();
        assert_eq!(u_statistic(&one, &cfg).unwrap(), 0.0);
        let odd = trace(&UnitTangent::new(DiskPoint::ORIGIN, 0.3), 1.1, &s).unwrap();
        assert!(matches!(u_statistic(&odd, &cfg), Err(Error::Precondition(_))));
    }

    #[test]
    fn sandwich_brackets_smoothed_count() {
        let s = bolza();
        let cfg = KernelConfig::defaults(s.clone());
        let d = cfg.delta;
        let u0 = UnitTangent::new(DiskPoint::new(0.3, 0.1).unwrap(), 5.0);
        let t = 40.0;
        let ext = trace_from(&u0, -d, t + 2.0 * d, &s).unwrap();
        let bounds = sandwich(&ext, &cfg, d / SANDWICH_STEPS_PER_DELTA).unwrap();
        let inner = self_intersections(&ext).window(d, t + d);
        let n_phi = weighted_counts(&inner, &cfg.phi, None).n_phi;
        assert!(n_phi > 0.0);
        assert!(bounds.brackets(n_phi), "{bounds:?} vs {n_phi}");
        assert!(bounds.gap() >= -SANDWICH_SLACK * bounds.upper);
        assert!(matches!(sandwich(&ext, &cfg, d), Err(Error::InvalidParameter { .. })));
        let short = trace(&u0, 0.3, &s).unwrap();
        assert!(matches!(sandwich(&short, &cfg, d / 4.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn row_mean_of_zero_smoothing_is_zero() {
        let s = bolza();
        let cfg = KernelConfig::new(0.05, SmoothingFn::constant(0.0), 0.5, s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = UnitTangent::new(DiskPoint::ORIGIN, 0.0);
        let e = row_mean(&u, &cfg, 1000, &mut rng).unwrap();
        assert_eq!(e.estimate, 0.0);
        assert!(row_mean(&u, &cfg, 10, &mut rng).is_err());
    }

    #[test]
    fn f_delta_support_and_configuration() {
        let s = bolza();
        let cfg = KernelConfig::defaults(s.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = UnitTangent::new(DiskPoint::ORIGIN, 0.0);
        assert!(matches!(f_delta(&u, &cfg, 1000, &mut rng), Err(Error::Configuration(_))));
        let far = LocalizerFn::bump(DiskPoint::from_polar(1.2, 1.0), 0.2, &s).unwrap();
        let e = f_delta(&u, &cfg.with_localizer(far), 5000, &mut rng).unwrap();
        assert_eq!(e.estimate, 0.0);
    }
}
