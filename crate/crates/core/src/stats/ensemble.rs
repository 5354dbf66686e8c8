//! Seeded ensembles of random geodesic segments and their per-time counts.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::hyperbolic::{DiskPoint, UnitTangent};
use crate::intersections::{self_intersections, weighted_counts, Counts};
use crate::kernels::{build_phi, KernelConfig, LocalizerFn};
use crate::numeric::Moments;
use crate::surface::{liouville_sample, surface_by_name, SurfaceSpec};
use crate::tracer::{trace, GeodesicTrace};

/// Vertex hits tolerated per replica before giving up.
pub const MAX_RETRIES: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub surface: String,
    pub t_grid: Vec<f64>,
    pub replicas: usize,
    pub delta: f64,
    pub alpha: f64,
    pub rho: f64,
    pub f_center: (f64, f64),
    /// Localizer radius; 0 gives the zero function.
    pub f_radius: f64,
    pub master_seed: u64,
    pub output: Option<std::path::PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            surface: "bolza".into(),
            t_grid: vec![100.0, 200.0, 400.0, 800.0],
            replicas: 64,
            delta: 0.1,
            alpha: 0.3,
            rho: 0.5,
            f_center: (0.0, 0.0),
            f_radius: 0.2,
            master_seed: 0,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t_grid.is_empty() {
            return Err(invalid("t_grid", "must not be empty"));
        }
        if self.t_grid.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(invalid("t_grid", "times must be positive"));
        }
        if self.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("t_grid", "must be strictly increasing"));
        }
        if self.replicas < 2 {
            return Err(invalid("replicas", format!("must be at least 2, got {}", self.replicas)));
        }
        if !(self.f_radius >= 0.0) {
            return Err(invalid("f_radius", format!("must be nonnegative, got {}", self.f_radius)));
        }
        DiskPoint::new(self.f_center.0, self.f_center.1).map_err(|_| {
            invalid("f_center", format!("{:?} is not inside the unit disk", self.f_center))
        })?;
        self.kernel_config().map(|_| ())
    }

    pub fn surface_spec(&self) -> Result<Arc<SurfaceSpec>> {
        surface_by_name(&self.surface).map(Arc::new)
    }

    pub fn localizer(&self, spec: &SurfaceSpec) -> Result<LocalizerFn> {
        if self.f_radius == 0.0 {
            return Ok(LocalizerFn::constant(0.0));
        }
        let c = DiskPoint::new(self.f_center.0, self.f_center.1)?;
        LocalizerFn::bump(c, self.f_radius, spec)
    }

    /// Kernel parameters with the localizer attached.
    pub fn kernel_config(&self) -> Result<KernelConfig> {
        let spec = self.surface_spec()?;
        let phi = build_phi(self.alpha)?;
        let f = self.localizer(&spec)?;
        Ok(KernelConfig::new(self.delta, phi, self.rho, spec)?.with_localizer(f))
    }

    pub fn t_max(&self) -> f64 {
        *self.t_grid.last().expect("validated t_grid")
    }
}

/// SplitMix64 finalizer: a fixed bijective scramble of 64-bit words.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-replica seed, a pure function of the master seed and the index.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index.wrapping_mul(0xD605_BBB5_8C8A_BBD5))
}

/// Counts of one replica at one grid time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeCounts {
    pub t: f64,
    pub n: usize,
    pub n_phi: f64,
    pub n_phi_f: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplicaRecord {
    pub replica: usize,
    pub seed: u64,
    pub u0: UnitTangent,
    pub counts: Vec<TimeCounts>,
    pub wall_ms: f64,
}

/// Trace a Liouville-random segment of length `t`, redrawing after vertex hits.
pub fn random_trace(rng: &mut ChaCha8Rng, t: f64, spec: &SurfaceSpec, replica: usize) -> Result<GeodesicTrace> {
    for _ in 0..=MAX_RETRIES {
        let u0 = liouville_sample(rng, spec);
        match trace(&u0, t, spec) {
            Err(Error::VertexHit { .. }) => continue,
            other => return other,
        }
    }
    Err(Error::TooManyRetries {
        replica,
        retries: MAX_RETRIES,
    })
}

fn run_replica(cfg: &ExperimentConfig, kernel: &KernelConfig, replica: usize) -> Result<ReplicaRecord> {
    let start = Instant::now();
    let seed = derive_seed(cfg.master_seed, replica as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tr = random_trace(&mut rng, cfg.t_max(), &kernel.surface, replica)?;
    let all = self_intersections(&tr);
    let counts = cfg
        .t_grid
        .iter()
        .map(|&t| {
            let Counts { n, n_phi, n_phi_f } = weighted_counts(&all.restricted(t), &kernel.phi, kernel.f.as_ref());
            TimeCounts { t, n, n_phi, n_phi_f }
        })
        .collect();
    Ok(ReplicaRecord {
        replica,
        seed,
        u0: tr.u0,
        counts,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// One trace per replica at the largest grid time; counts at smaller times
/// come from restricting its crossing set. Records are ordered by index.
pub fn run_ensemble(cfg: &ExperimentConfig) -> Result<Vec<ReplicaRecord>> {
    cfg.validate()?;
    let kernel = cfg.kernel_config()?;
    (0..cfg.replicas)
        .into_par_iter()
        .map(|i| run_replica(cfg, &kernel, i))
        .collect()
}

/// Ensemble moments at one grid time.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TimeSummary {
    pub t: f64,
    pub n: Moments,
    pub n_phi: Moments,
    pub n_phi_f: Moments,
}

impl TimeSummary {
    pub fn merge(&self, other: &TimeSummary) -> TimeSummary {
        TimeSummary {
            t: self.t,
            n: self.n.merge(&other.n),
            n_phi: self.n_phi.merge(&other.n_phi),
            n_phi_f: self.n_phi_f.merge(&other.n_phi_f),
        }
    }
}

/// Per-time moments, in grid order.
pub fn summarize(records: &[ReplicaRecord]) -> Vec<TimeSummary> {
    let Some(first) = records.first() else {
        return Vec::new();
    };
    let mut out: Vec<TimeSummary> = first
        .counts
        .iter()
        .map(|c| TimeSummary {
            t: c.t,
            ..TimeSummary::default()
        })
        .collect();
    for r in records {
        for (s, c) in out.iter_mut().zip(&r.counts) {
            s.n.push(c.n as f64);
            s.n_phi.push(c.n_phi);
            s.n_phi_f.push(c.n_phi_f);
        }
    }
    out
}

/// Merge summaries of two disjoint batches over the same grid.
pub fn merge_summaries(a: &[TimeSummary], b: &[TimeSummary]) -> Vec<TimeSummary> {
    a.iter().zip(b).map(|(x, y)| x.merge(y)).collect()
}

/// `replica,seed,t,N,N_phi,N_phi_f,wall_ms`, one row per replica and time.
/// Wall times are left blank unless `timing` is set, so repeated runs
/// produce identical files.
pub fn records_csv(records: &[ReplicaRecord], timing: bool) -> String {
    let mut out = String::from("replica,seed,t,N,N_phi,N_phi_f,wall_ms\n");
    for r in records {
        for c in &r.counts {
            let wall = if timing { format!("{:.3}", r.wall_ms) } else { String::new() };
            let _ = writeln!(out, "{},{},{},{},{},{},{}", r.replica, r.seed, c.t, c.n, c.n_phi, c.n_phi_f, wall);
        }
    }
    out
}

pub fn summary_csv(summary: &[TimeSummary]) -> String {
    let mut out = String::from(
        "t,mean_N,var_N,mean_Nphi,var_Nphi,mean_Nphif,var_Nphif,se_N,se_Nphi,se_Nphif\n",
    );
    for s in summary {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            s.t,
            s.n.mean,
            s.n.variance(),
            s.n_phi.mean,
            s.n_phi.variance(),
            s.n_phi_f.mean,
            s.n_phi_f.variance(),
            s.n.std_error(),
            s.n_phi.std_error(),
            s.n_phi_f.std_error()
        );
    }
    out
}
