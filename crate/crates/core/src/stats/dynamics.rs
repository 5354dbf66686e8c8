//! Mixing and ergodic-average diagnostics of the geodesic flow, and the
//! skew-product example where double ergodic averages of a discontinuous
//! kernel fail to converge to the product integral.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::hyperbolic::{DiskPoint, UnitTangent};
use crate::kernels::{kappa_phi, kernel_double_integral, parallel_moments, eval_k, LocalizerFn};
use crate::numeric::{trapezoid_grid, Estimate, Moments};
use crate::surface::{liouville_sample, SurfaceSpec};

use super::ensemble::{derive_seed, random_trace, ExperimentConfig};

/// A bump in the position of the base point, peak 1.
pub fn bump_observable(spec: &SurfaceSpec, center: DiskPoint, radius: f64) -> Result<impl Fn(&UnitTangent) -> f64 + Sync> {
    let f = LocalizerFn::bump(center, radius, spec)?;
    Ok(move |u: &UnitTangent| f.evaluate(u.base))
}

/// `ν_L`-mean of an observable by Monte Carlo.
pub fn liouville_mean<G>(g: &G, spec: &SurfaceSpec, n: usize, seed: u64) -> Estimate
where
    G: Fn(&UnitTangent) -> f64 + Sync,
{
    parallel_moments(n, seed, |r| g(&liouville_sample(r, spec))).into()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrPoint {
    pub lag: f64,
    /// Covariance over the pooled variance.
    pub corr: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    pub points: Vec<CorrPoint>,
    /// Same estimator with the lagged values drawn from a shuffled replica;
    /// the independence control.
    pub shuffled: Vec<CorrPoint>,
    pub variance: f64,
}

/// `E[g(γ(0)) g(γ(t))]` at each lag over `cfg.replicas` Liouville starts,
/// after subtracting the pooled mean of `g`.
pub fn correlation_decay<G>(g: &G, lags: &[f64], cfg: &ExperimentConfig) -> Result<DecayReport>
where
    G: Fn(&UnitTangent) -> f64 + Sync,
{
    if lags.is_empty() || lags.iter().any(|&l| !(l >= 0.0 && l.is_finite())) {
        return Err(invalid("lags", "must be a nonempty list of nonnegative times"));
    }
    if cfg.replicas < 2 {
        return Err(invalid("replicas", format!("must be at least 2, got {}", cfg.replicas)));
    }
    let spec = cfg.surface_spec()?;
    let horizon = lags.iter().copied().fold(0.0, f64::max).max(1e-3);
    let values: Vec<(f64, Vec<f64>)> = (0..cfg.replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.master_seed, i as u64));
            let tr = random_trace(&mut rng, horizon, &spec, i)?;
            let at = lags
                .iter()
                .map(|&l| tr.tangent_at(l).map(|u| g(&u)))
                .collect::<Result<Vec<f64>>>()?;
            Ok((g(&tr.u0), at))
        })
        .collect::<Result<_>>()?;
    let pooled: Moments = values.iter().flat_map(|(a, b)| std::iter::once(*a).chain(b.iter().copied())).collect();
    let (mu, var) = (pooled.mean, pooled.variance());
    let norm = if var > 0.0 { var } else { 1.0 };
    let point = |k: usize, partner: &dyn Fn(usize) -> usize| -> CorrPoint {
        let m: Moments = (0..values.len())
            .map(|i| (values[i].0 - mu) * (values[partner(i)].1[k] - mu) / norm)
            .collect();
        CorrPoint {
            lag: lags[k],
            corr: if var > 0.0 { m.mean } else { 0.0 },
            std_error: if var > 0.0 { m.std_error() } else { 0.0 },
        }
    };
    let mut perm: Vec<usize> = (0..values.len()).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(cfg.master_seed, u64::MAX - 2)));
    Ok(DecayReport {
        points: (0..lags.len()).map(|k| point(k, &|i| i)).collect(),
        shuffled: (0..lags.len()).map(|k| point(k, &|i| perm[i])).collect(),
        variance: var,
    })
}

/// Kernels for the double ergodic average.
pub enum PairKernel<'a> {
    /// `g(u)g(v)` with `g` centered by a Monte Carlo estimate of its mean.
    Product(&'a (dyn Fn(&UnitTangent) -> f64 + Sync)),
    /// The smoothed intersection kernel `K_δ` of the configuration.
    Smoothed,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DoubleAverage {
    pub t: f64,
    /// `t⁻² ∬_{[0,t]²} K(γ(s₁), γ(s₂)) ds₁ ds₂` along one trace.
    pub empirical: f64,
    /// `∬ K dν_L dν_L` by Monte Carlo over independent pairs.
    pub target: Estimate,
    /// `|empirical − target|`.
    pub gap: f64,
    /// `κ_φ` by quadrature, for the smoothed kernel.
    pub kappa_phi: Option<f64>,
}

/// Quadrature step for the smoothed double integral, as a fraction of δ.
const DOUBLE_AVERAGE_STEPS_PER_DELTA: f64 = 4.0;

/// Double ergodic average along one Liouville-random trace of length `t`,
/// against the product-measure integral from `mc_samples` random pairs.
pub fn double_average_check(
    kernel: &PairKernel<'_>,
    t: f64,
    cfg: &ExperimentConfig,
    mc_samples: usize,
) -> Result<DoubleAverage> {
    if !(t > 0.0) {
        return Err(invalid("t", format!("must be positive, got {t}")));
    }
    if mc_samples < 100 {
        return Err(Error::Precondition(format!("need at least 100 Monte Carlo samples, got {mc_samples}")));
    }
    let kcfg = cfg.kernel_config()?;
    let spec = &kcfg.surface;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.master_seed, t.to_bits()));
    let tr = random_trace(&mut rng, t, spec, 0)?;
    let mc_seed = rng.random::<u64>();
    let (empirical, target, kp) = match kernel {
        PairKernel::Product(g) => {
            let mean = liouville_mean(g, spec, mc_samples, mc_seed).estimate;
            let (nodes, weights) = trapezoid_grid(0.0, t, 0.05);
            let mut integral = 0.0;
            for (s, w) in nodes.iter().zip(&weights) {
                integral += w * (g(&tr.tangent_at(s.min(t))?) - mean);
            }
            let avg = integral / t;
            // the centered product integrates to zero
            (avg * avg, Estimate { estimate: 0.0, std_error: 0.0 }, None)
        }
        PairKernel::Smoothed => {
            let h = kcfg.delta / DOUBLE_AVERAGE_STEPS_PER_DELTA;
            let half = kernel_double_integral(&tr, &kcfg, 0.0, t, h)?;
            let target: Estimate = parallel_moments(mc_samples, mc_seed, |r| {
                let u = liouville_sample(r, spec);
                let v = liouville_sample(r, spec);
                eval_k(&u, &v, &kcfg)
            })
            .into();
            (2.0 * half / (t * t), target, Some(kappa_phi(&kcfg.phi, spec)))
        }
    };
    Ok(DoubleAverage {
        t,
        empirical,
        gap: (empirical - target.estimate).abs(),
        target,
        kappa_phi: kp,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CounterexampleReport {
    pub n_steps: usize,
    /// `n⁻² Σᵢ Σⱼ K(Tⁱx, Tʲx)` for the subgroup-indicator kernel.
    pub orbit_average: f64,
    /// `∬ K dλ dλ`, estimated from independent pairs.
    pub product_integral: f64,
    /// `n⁻² Σᵢ Σⱼ g(xᵢ)g(xⱼ)` for `g(x) = cos 2πx`, whose product integral
    /// is 0, at the same orbit.
    pub continuous_control: f64,
}

/// A point of the circle kept symbolically as `x₀ + kθ` with `x₀` one of
/// a countable family of independent uniform draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct CirclePoint {
    draw: u64,
    rotations: i64,
}

impl CirclePoint {
    fn value(&self, x0: &[f64], theta: f64) -> f64 {
        (x0[self.draw as usize] + self.rotations as f64 * theta).rem_euclid(1.0)
    }
}

/// `1` if the points differ by an element of the subgroup generated by θ.
/// Independent uniform draws differ by such an element with probability 0.
fn subgroup_indicator(a: &CirclePoint, b: &CirclePoint) -> u64 {
    (a.draw == b.draw) as u64
}

/// Skew product `T(x, ω) = (R^{ω₁}x, σω)` over a golden-ratio rotation
/// and fair ±1 coin flips.
pub fn remark_counterexample(n_steps: usize, seed: u64) -> Result<CounterexampleReport> {
    if n_steps == 0 {
        return Err(invalid("n_steps", "must be at least 1"));
    }
    let theta = (5f64.sqrt() - 1.0) / 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0: Vec<f64> = (0..=2 * n_steps).map(|_| rng.random::<f64>()).collect();
    let mut p = CirclePoint { draw: 0, rotations: 0 };
    let orbit: Vec<CirclePoint> = (0..n_steps)
        .map(|_| {
            p.rotations += if rng.random::<bool>() { 1 } else { -1 };
            p
        })
        .collect();
    let hits: u64 = orbit
        .iter()
        .map(|a| orbit.iter().map(|b| subgroup_indicator(a, b)).sum::<u64>())
        .sum();
    let pairs = (n_steps * n_steps) as u64;
    // independent pairs from λ × λ use fresh draws
    let independent: u64 = (0..n_steps as u64)
        .map(|k| {
            let a = CirclePoint { draw: 1 + 2 * k, rotations: 0 };
            let b = CirclePoint { draw: 2 + 2 * k, rotations: 0 };
            subgroup_indicator(&a, &b)
        })
        .sum();
    let g = |q: &CirclePoint| (std::f64::consts::TAU * q.value(&x0, theta)).cos();
    let mean_g = orbit.iter().map(g).sum::<f64>() / n_steps as f64;
    Ok(CounterexampleReport {
        n_steps,
        orbit_average: hits as f64 / pairs as f64,
        product_integral: independent as f64 / n_steps as f64,
        continuous_control: mean_g * mean_g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(replicas: usize) -> ExperimentConfig {
        ExperimentConfig {
            replicas,
            master_seed: 17,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn counterexample_is_exact() {
        for n in [1, 7, 1000] {
            let r = remark_counterexample(n, 3).unwrap();
            assert_eq!(r.orbit_average, 1.0);
            assert_eq!(r.product_integral, 0.0);
        }
        assert!(remark_counterexample(0, 1).is_err());
    }

    #[test]
    fn continuous_control_converges() {
        let small = remark_counterexample(100, 5).unwrap().continuous_control;
        let large = remark_counterexample(20_000, 5).unwrap().continuous_control;
        assert!(large < 0.02, "{large}");
        assert!(large <= small.max(0.02));
    }

    #[test]
    fn constant_observable_has_zero_correlation() {
        let rep = correlation_decay(&|_: &UnitTangent| 3.0, &[0.0, 1.0, 5.0], &cfg(50)).unwrap();
        assert!(rep.points.iter().all(|p| p.corr == 0.0));
        assert!(correlation_decay(&|_: &UnitTangent| 1.0, &[], &cfg(50)).is_err());
    }

    #[test]
    fn bump_correlations_decay() {
        let c = cfg(2000);
        let spec = c.surface_spec().unwrap();
        let g = bump_observable(&spec, DiskPoint::ORIGIN, 1.0).unwrap();
        let rep = correlation_decay(&g, &[0.0, 0.5, 5.0], &c).unwrap();
        let (c0, c5) = (rep.points[0].corr, rep.points[2].corr);
        assert!((c0 - 1.0).abs() < 0.1, "{c0}");
        assert!(rep.points[1].corr > 0.3);
        assert!(c5.abs() < 0.2 * c0, "{c5}");
        for p in &rep.shuffled {
            assert!(p.corr.abs() < 3.0 * p.std_error + 1e-12, "{p:?}");
        }
    }

    #[test]
    fn product_kernel_average_is_small() {
        let c = cfg(2);
        let spec = c.surface_spec().unwrap();
        let g = bump_observable(&spec, DiskPoint::ORIGIN, 1.0).unwrap();
        let r = double_average_check(&PairKernel::Product(&g), 400.0, &c, 100_000).unwrap();
        assert_eq!(r.target.estimate, 0.0);
        assert!(r.gap < 0.01, "{r:?}");
    }
}
