//! Limit-theorem checks on ensemble records: law of large numbers
//! constants, variance growth exponents, the localized central limit
//! theorem, and Gaussian quadratic forms.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Error, Result};
use crate::kernels::kappa_phi;
use crate::numeric::{Estimate, Moments};

use super::ensemble::{derive_seed, summarize, ExperimentConfig, ReplicaRecord};

/// Normalized counts at one grid time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SllnRow {
    pub t: f64,
    pub n_over_t2: Estimate,
    pub n_phi_over_t2: Estimate,
    pub n_phi_f_over_t2: Estimate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SllnReport {
    pub rows: Vec<SllnRow>,
    pub kappa_m: f64,
    /// `κ_M/2`, the constant written for `N/t²`.
    pub kappa_m_half: f64,
    /// `2κ_M`, the kinematic-formula value of `lim N/t²`.
    pub two_kappa_m: f64,
    pub kappa_phi: f64,
    /// `κ_φ/2`, the constant written for `N_φ/t²`.
    pub kappa_phi_half: f64,
    /// `(κ_φ/2)·∫f dA/|M|`.
    pub a_phi_f: f64,
    /// Measured `lim N/t²` in units of `κ_M` (largest grid time).
    pub measured_n_over_kappa_m: f64,
    /// z-score between `N/t²` at the two largest grid times.
    pub consistency_z: f64,
}

fn scaled(m: &Moments, k: f64) -> Estimate {
    Estimate {
        estimate: m.mean * k,
        std_error: m.std_error() * k,
    }
}

pub fn slln_report(records: &[ReplicaRecord], cfg: &ExperimentConfig) -> Result<SllnReport> {
    if records.is_empty() {
        return Err(Error::DegenerateData("no records".into()));
    }
    let kernel = cfg.kernel_config()?;
    let spec = &kernel.surface;
    let rows: Vec<SllnRow> = summarize(records)
        .iter()
        .map(|s| {
            let k = 1.0 / (s.t * s.t);
            SllnRow {
                t: s.t,
                n_over_t2: scaled(&s.n, k),
                n_phi_over_t2: scaled(&s.n_phi, k),
                n_phi_f_over_t2: scaled(&s.n_phi_f, k),
            }
        })
        .collect();
    let kappa_m = spec.kappa_m();
    let kp = kappa_phi(&kernel.phi, spec);
    let f_integral = kernel.f.as_ref().map_or(spec.area, |f| f.integral(spec));
    let last = rows.last().expect("nonempty");
    let consistency_z = match rows.len() {
        0 | 1 => 0.0,
        n => {
            let (a, b) = (rows[n - 2].n_over_t2, rows[n - 1].n_over_t2);
            let se = a.std_error.hypot(b.std_error);
            if se > 0.0 {
                (a.estimate - b.estimate) / se
            } else {
                0.0
            }
        }
    };
    Ok(SllnReport {
        kappa_m,
        kappa_m_half: kappa_m / 2.0,
        two_kappa_m: 2.0 * kappa_m,
        kappa_phi: kp,
        kappa_phi_half: kp / 2.0,
        a_phi_f: kp / 2.0 * f_integral / spec.area,
        measured_n_over_kappa_m: last.n_over_t2.estimate / kappa_m,
        consistency_z,
        rows,
    })
}

/// Least-squares line through `(x, y)` with bootstrap percentile interval.
#[derive(Clone, Debug, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub residuals: Vec<f64>,
    pub r_squared: f64,
}

/// Ordinary least squares `y = a + b x`, returning `(b, a)`.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let b = sxy / sxx;
    (b, my - b * mx)
}

fn log_variances(samples: &[Vec<f64>], rows: &[usize]) -> Result<Vec<f64>> {
    let n_t = samples[0].len();
    (0..n_t)
        .map(|k| {
            let m: Moments = rows.iter().map(|&r| samples[r][k]).collect();
            let v = m.variance();
            if v > 0.0 {
                Ok(v.ln())
            } else {
                Err(Error::DegenerateData(format!("zero variance at grid index {k}")))
            }
        })
        .collect()
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Slope of `log Var` against `log t`. `samples[r][k]` is replica `r` at
/// time `ts[k]`; the interval comes from resampling replicas.
pub fn fit_log_variance(ts: &[f64], samples: &[Vec<f64>], n_boot: usize, seed: u64) -> Result<SlopeFit> {
    if ts.len() < 2 || samples.len() < 2 {
        return Err(Error::Precondition("need at least two times and two replicas".into()));
    }
    let x: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let all: Vec<usize> = (0..samples.len()).collect();
    let y = log_variances(samples, &all)?;
    let (slope, intercept) = ols(&x, &y);
    let residuals: Vec<f64> = x.iter().zip(&y).map(|(a, b)| b - intercept - slope * a).collect();
    let my = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut boots = Vec::with_capacity(n_boot);
    for _ in 0..n_boot {
        let rows: Vec<usize> = (0..samples.len()).map(|_| *all.choose(&mut rng).expect("nonempty")).collect();
        // a resample can repeat one replica everywhere; skip it
        if let Ok(yb) = log_variances(samples, &rows) {
            boots.push(ols(&x, &yb).0);
        }
    }
    boots.sort_by(f64::total_cmp);
    let (ci_low, ci_high) = if boots.is_empty() {
        (slope, slope)
    } else {
        (percentile(&boots, 0.025), percentile(&boots, 0.975))
    };
    Ok(SlopeFit {
        slope,
        intercept,
        ci_low,
        ci_high,
        residuals,
        r_squared: if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 },
    })
}

pub const BOOTSTRAP_RESAMPLES: usize = 200;

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingReport {
    /// Variance exponent of `N_φ(t)`.
    pub global: SlopeFit,
    /// Variance exponent of `N_{φ;f}(t)`.
    pub local: SlopeFit,
}

pub fn scaling_exponents(records: &[ReplicaRecord], cfg: &ExperimentConfig) -> Result<ScalingReport> {
    if cfg.t_grid.len() < 4 {
        return Err(Error::Precondition("scaling fit needs at least 4 grid times".into()));
    }
    if records.len() < 100 {
        return Err(Error::Precondition(format!(
            "scaling fit needs at least 100 replicas, got {}",
            records.len()
        )));
    }
    let ts: Vec<f64> = records[0].counts.iter().map(|c| c.t).collect();
    let global: Vec<Vec<f64>> = records.iter().map(|r| r.counts.iter().map(|c| c.n_phi).collect()).collect();
    let local: Vec<Vec<f64>> = records.iter().map(|r| r.counts.iter().map(|c| c.n_phi_f).collect()).collect();
    let seed = derive_seed(cfg.master_seed, u64::MAX);
    Ok(ScalingReport {
        global: fit_log_variance(&ts, &global, BOOTSTRAP_RESAMPLES, seed)?,
        local: fit_log_variance(&ts, &local, BOOTSTRAP_RESAMPLES, seed ^ 1)?,
    })
}

/// Sample skewness and excess kurtosis (plug-in moments).
pub fn shape_moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let c = |k: i32| xs.iter().map(|x| (x - m).powi(k)).sum::<f64>() / n;
    let m2 = c(2);
    (c(3) / m2.powf(1.5), c(4) / (m2 * m2) - 3.0)
}

/// Kolmogorov–Smirnov distance between the empirical law of `xs` and the
/// standard Gaussian.
pub fn ks_statistic(xs: &[f64]) -> f64 {
    let phi = Normal::standard();
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = phi.cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

fn standardized(xs: &[f64]) -> Result<Vec<f64>> {
    let m: Moments = xs.iter().copied().collect();
    let sd = m.variance().sqrt();
    if !(sd > 0.0) {
        return Err(Error::DegenerateData("zero standard deviation".into()));
    }
    Ok(xs.iter().map(|x| (x - m.mean) / sd).collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalityReport {
    pub n: usize,
    pub ks_stat: f64,
    pub p_value: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

/// Simulated null draws for the estimated-parameter KS p-value.
pub const LILLIEFORS_DRAWS: usize = 2000;

/// KS test of normality with mean and variance estimated from the data.
/// The p-value is the fraction of simulated Gaussian samples of the same
/// size, standardized the same way, whose statistic is at least as large.
pub fn normality_test(xs: &[f64], seed: u64) -> Result<NormalityReport> {
    if xs.len() < 3 {
        return Err(Error::Precondition("normality test needs at least 3 values".into()));
    }
    let z = standardized(xs)?;
    let d = ks_statistic(&z);
    let n = xs.len();
    let exceed = (0..LILLIEFORS_DRAWS)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, k as u64));
            let sim: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            ks_statistic(&standardized(&sim).expect("continuous draws")) >= d
        })
        .filter(|&b| b)
        .count();
    let (skewness, excess_kurtosis) = shape_moments(&z);
    Ok(NormalityReport {
        n,
        ks_stat: d,
        p_value: (exceed + 1) as f64 / (LILLIEFORS_DRAWS + 1) as f64,
        skewness,
        excess_kurtosis,
    })
}

fn grid_index(records: &[ReplicaRecord], t_star: f64) -> Result<usize> {
    records
        .first()
        .and_then(|r| r.counts.iter().position(|c| (c.t - t_star).abs() < 1e-9))
        .ok_or_else(|| invalid("t_star", format!("{t_star} is not on the time grid")))
}

/// Normality of the standardized localized counts at `t_star`.
pub fn localized_clt(records: &[ReplicaRecord], cfg: &ExperimentConfig, t_star: f64) -> Result<NormalityReport> {
    if records.len() < 200 {
        return Err(Error::Precondition(format!(
            "localized CLT needs at least 200 replicas, got {}",
            records.len()
        )));
    }
    let k = grid_index(records, t_star)?;
    let xs: Vec<f64> = records.iter().map(|r| r.counts[k].n_phi_f).collect();
    normality_test(&xs, derive_seed(cfg.master_seed, u64::MAX - 1))
}

/// `n` independent draws of `Σ θ_j Z_j²`.
pub fn gqf_sample<R: Rng + ?Sized>(thetas: &[f64], n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if thetas.is_empty() {
        return Err(invalid("thetas", "must not be empty"));
    }
    Ok((0..n)
        .map(|_| {
            thetas
                .iter()
                .map(|th| {
                    let z: f64 = rng.sample(StandardNormal);
                    th * z * z
                })
                .sum()
        })
        .collect())
}

/// Two-coefficient quadratic form `θ1 Z1² + θ2 Z2²` matched to a sample's
/// mean and variance: `θ1 + θ2 = mean`, `2(θ1² + θ2²) = Var`.
///
/// Matching the second and third cumulants instead is ill-conditioned at
/// the chi-square law, where the defining cubic has a double root.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GqfFit {
    pub theta1: f64,
    pub theta2: f64,
    /// Sample third cumulant minus the fitted `8(θ1³ + θ2³)`.
    pub third_cumulant_mismatch: f64,
}

/// `None` when the variance is below `mean²`, which no two-term form with
/// real coefficients can produce.
pub fn gqf_moment_fit(xs: &[f64]) -> Option<GqfFit> {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let c2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let c3 = xs.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    // roots of x² − mean·x + (mean² − c2/2)/2
    let disc = c2 - mean * mean;
    if disc < 0.0 {
        return None;
    }
    let r = disc.sqrt();
    let (t1, t2) = ((mean + r) / 2.0, (mean - r) / 2.0);
    let (theta1, theta2) = if t1.abs() >= t2.abs() { (t1, t2) } else { (t2, t1) };
    Some(GqfFit {
        theta1,
        theta2,
        third_cumulant_mismatch: c3 - 8.0 * (theta1.powi(3) + theta2.powi(3)),
    })
}

/// Moments of the normalized statistic `(N_φ(t) − c·t²)/t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluctuationMoments {
    pub t: f64,
    pub mean: f64,
    pub variance: f64,
    pub third: f64,
    pub fourth: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FluctuationReport {
    /// Fitted `c` in `E N_φ(t) ≈ c·t²`.
    pub centering: f64,
    pub at_t_star: FluctuationMoments,
    /// The same moments at every grid time.
    pub by_time: Vec<FluctuationMoments>,
    pub gqf: Option<GqfFit>,
}

fn fluctuation_moments(t: f64, xs: &[f64]) -> FluctuationMoments {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let c = |k: i32| xs.iter().map(|x| (x - mean).powi(k)).sum::<f64>() / n;
    FluctuationMoments {
        t,
        mean,
        variance: c(2),
        third: c(3),
        fourth: c(4),
    }
}

/// Descriptive summary of the global fluctuations. The centering constant
/// is the least-squares `c` of mean `N_φ(t)` against `t²` over the grid.
pub fn global_fluctuation_report(
    records: &[ReplicaRecord],
    _cfg: &ExperimentConfig,
    t_star: f64,
) -> Result<FluctuationReport> {
    if records.len() < 200 {
        return Err(Error::Precondition(format!(
            "fluctuation report needs at least 200 replicas, got {}",
            records.len()
        )));
    }
    let k_star = grid_index(records, t_star)?;
    let summary = summarize(records);
    let centering = summary.iter().map(|s| s.n_phi.mean * s.t * s.t).sum::<f64>()
        / summary.iter().map(|s| s.t.powi(4)).sum::<f64>();
    let normalized = |k: usize| -> Vec<f64> {
        records
            .iter()
            .map(|r| {
                let c = r.counts[k];
                (c.n_phi - centering * c.t * c.t) / c.t
            })
            .collect()
    };
    let by_time: Vec<FluctuationMoments> = (0..summary.len())
        .map(|k| fluctuation_moments(summary[k].t, &normalized(k)))
        .collect();
    Ok(FluctuationReport {
        centering,
        at_t_star: by_time[k_star],
        gqf: gqf_moment_fit(&normalized(k_star)),
        by_time,
    })
}
