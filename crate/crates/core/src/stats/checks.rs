//! Kernel-level checks over random inputs: the constant row mean of `H_δ`
//! and the sandwich bounds on smoothed self-intersection counts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hyperbolic::UnitTangent;
use crate::intersections::{self_intersections, weighted_counts};
use crate::kernels::{kappa_phi, row_mean, sandwich, KernelConfig, Sandwich};
use crate::numeric::Estimate;
use crate::surface::liouville_sample;

use super::ensemble::{derive_seed, random_trace};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RowSumRow {
    pub u: UnitTangent,
    pub estimate: Estimate,
    /// `(estimate − δ²κ_φ) / std_error`.
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RowSumReport {
    pub delta: f64,
    pub kappa_phi: f64,
    /// `δ²κ_φ`.
    pub target: f64,
    pub rows: Vec<RowSumRow>,
    /// Largest `|zᵢ − zⱼ|`-type statistic between two estimates.
    pub max_pairwise_z: f64,
}

impl RowSumReport {
    pub fn max_abs_z(&self) -> f64 {
        self.rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max)
    }
}

/// Monte Carlo row means `∫ H_δ(u, v) dν_L(v)` at `points` random `u`,
/// each from `samples` draws, against `δ²κ_φ`.
pub fn row_sum_check(cfg: &KernelConfig, points: usize, samples: usize, seed: u64) -> Result<RowSumReport> {
    if points == 0 {
        return Err(Error::Precondition("need at least one point".into()));
    }
    let kp = kappa_phi(&cfg.phi, &cfg.surface);
    let target = cfg.delta * cfg.delta * kp;
    let rows = (0..points)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
            let u = liouville_sample(&mut rng, &cfg.surface);
            let estimate = row_mean(&u, cfg, samples, &mut rng)?;
            let z = if estimate.std_error > 0.0 {
                (estimate.estimate - target) / estimate.std_error
            } else {
                0.0
            };
            Ok(RowSumRow { u, estimate, z })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut max_pairwise_z: f64 = 0.0;
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[i + 1..] {
            let se = a.estimate.std_error.hypot(b.estimate.std_error);
            if se > 0.0 {
                max_pairwise_z = max_pairwise_z.max((a.estimate.estimate - b.estimate.estimate).abs() / se);
            }
        }
    }
    Ok(RowSumReport {
        delta: cfg.delta,
        kappa_phi: kp,
        target,
        rows,
        max_pairwise_z,
    })
}

/// One random segment `γ[0, T]` and the integrals bracketing its count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SandwichRow {
    pub trace: usize,
    pub seed: u64,
    pub bounds: Sandwich,
    /// `N_φ(γ[0, T])`.
    pub n_phi: f64,
    /// `N_φ(γ[−δ, T+δ]) − N_φ(γ[δ, T−δ])`.
    pub edge_count_delta: f64,
    /// `N_φ(γ[−2δ, T+2δ]) − N_φ(γ[2δ, T−2δ])`.
    pub edge_count_two_delta: f64,
}

impl SandwichRow {
    pub fn brackets(&self) -> bool {
        self.bounds.brackets(self.n_phi)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SandwichReport {
    pub delta: f64,
    pub t: f64,
    pub step: f64,
    pub rows: Vec<SandwichRow>,
}

impl SandwichReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| !r.brackets()).count()
    }

    pub fn mean_gap_over_t(&self) -> f64 {
        self.rows.iter().map(|r| r.bounds.gap()).sum::<f64>() / (self.rows.len() as f64 * self.t)
    }

    /// Rows whose gap exceeds the count of crossings with a time within δ
    /// of an end.
    pub fn gap_exceeds_delta_edges(&self) -> usize {
        let tol = |r: &SandwichRow| crate::kernels::SANDWICH_SLACK * r.bounds.upper.max(1.0);
        self.rows.iter().filter(|r| r.bounds.gap() > r.edge_count_delta + tol(r)).count()
    }

    /// Rows whose gap exceeds the count of crossings with a time within 2δ
    /// of an end.
    pub fn gap_exceeds_two_delta_edges(&self) -> usize {
        let tol = |r: &SandwichRow| crate::kernels::SANDWICH_SLACK * r.bounds.upper.max(1.0);
        self.rows.iter().filter(|r| r.bounds.gap() > r.edge_count_two_delta + tol(r)).count()
    }
}

/// Sandwich integrals for `traces` Liouville-random segments of length `t`.
pub fn sandwich_check(cfg: &KernelConfig, traces: usize, t: f64, step: f64, seed: u64) -> Result<SandwichReport> {
    let d = cfg.delta;
    let rows = (0..traces)
        .into_par_iter()
        .map(|i| {
            let s = derive_seed(seed, i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            // Liouville measure is flow invariant: the start is γ(−δ)
            let ext = random_trace(&mut rng, t + 2.0 * d, &cfg.surface, i)?;
            let bounds = sandwich(&ext, cfg, step)?;
            // padded time = original time + 2δ
            let padded = ext.padded(d, &cfg.surface)?;
            let all = self_intersections(&padded);
            let count = |lo: f64, hi: f64| weighted_counts(&all.window(lo + 2.0 * d, hi + 2.0 * d), &cfg.phi, None).n_phi;
            Ok(SandwichRow {
                trace: i,
                seed: s,
                bounds,
                n_phi: count(0.0, t),
                edge_count_delta: count(-d, t + d) - count(d, t - d),
                edge_count_two_delta: count(-2.0 * d, t + 2.0 * d) - count(2.0 * d, t - 2.0 * d),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SandwichReport {
        delta: d,
        t,
        step,
        rows,
    })
}
