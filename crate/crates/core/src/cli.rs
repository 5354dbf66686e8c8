//! Command-line front end: `geoflux <subcommand> --seed N [flags]`.
//!
//! Values come from built-in defaults, then an optional `--config` file of
//! `key=value` lines (keys are flag names without dashes), then flags.
//! Exit status is 0 on success, 1 on usage or runtime errors, and 2 when
//! `--gate` is given and a check misses its threshold.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hyperbolic::DiskPoint;
use crate::intersections::self_intersections;
use crate::kernels::SANDWICH_STEPS_PER_DELTA;
use crate::stats::{
    bump_observable, correlation_decay, derive_seed, global_fluctuation_report, localized_clt, random_trace,
    records_csv, remark_counterexample, row_sum_check, run_ensemble, sandwich_check, scaling_exponents, slln_report,
    summarize, summary_csv, ExperimentConfig, ReplicaRecord,
};

#[derive(Parser, Debug)]
#[command(name = "geoflux", version, about = "Self-intersection statistics of random geodesics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Law-of-large-numbers constants of N, N_phi, N_phi_f.
    Slln(Common),
    /// Variance growth exponents of N_phi and N_phi_f.
    Scaling(Common),
    /// Normality of standardized localized counts.
    Clt {
        #[command(flatten)]
        common: Common,
        /// Time at which to test (must be on the grid).
        #[arg(long)]
        t_star: Option<f64>,
    },
    /// Row means of H_delta against delta^2 kappa_phi.
    KernelCheck {
        #[command(flatten)]
        common: Common,
        /// Monte Carlo samples per point.
        #[arg(long)]
        samples: Option<usize>,
        /// Number of random base tangents.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Sandwich integrals around N_phi on random segments.
    Sandwich {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        traces: Option<usize>,
        /// Segment length T.
        #[arg(long)]
        time: Option<f64>,
    },
    /// Autocorrelation of a bump observable along the flow.
    Mixing {
        #[command(flatten)]
        common: Common,
        /// Comma-separated lags.
        #[arg(long)]
        lags: Option<String>,
        /// Radius of the bump observable.
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Double averages of a discontinuous kernel along a skew product.
    Counterexample {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Arcs and crossings of one random segment.
    TraceDump {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        time: Option<f64>,
    },
}

#[derive(Args, Debug, Default, Clone)]
pub struct Common {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replicas: Option<usize>,
    /// Comma-separated increasing times.
    #[arg(long)]
    pub t_grid: Option<String>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// Localizer center as `re,im`.
    #[arg(long)]
    pub f_center: Option<String>,
    #[arg(long)]
    pub f_radius: Option<f64>,
    #[arg(long)]
    pub surface: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// File of `key=value` defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Exit with status 2 when a check misses its threshold.
    #[arg(long)]
    pub gate: bool,
    /// Fill the wall_ms column of records.csv.
    #[arg(long)]
    pub record_timing: bool,
}

/// Parse failures and invalid values; exit status 1.
#[derive(Debug)]
pub struct UsageError(pub String);

/// A fully resolved invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct CommandSpec {
    pub name: &'static str,
    pub config: ExperimentConfig,
    pub output: PathBuf,
    pub gate: bool,
    pub record_timing: bool,
    pub t_star: f64,
    pub samples: usize,
    pub points: usize,
    pub traces: usize,
    pub time: f64,
    pub lags: Vec<f64>,
    pub radius: f64,
    pub steps: usize,
}

fn usage(flag: &str, msg: impl std::fmt::Display) -> UsageError {
    UsageError(format!("invalid value for --{flag}: {msg}"))
}

/// Flag values layered over config-file values.
struct Layer {
    file: HashMap<String, String>,
}

impl Layer {
    fn load(path: Option<&Path>) -> std::result::Result<Layer, UsageError> {
        let mut file = HashMap::new();
        if let Some(p) = path {
            let text = fs::read_to_string(p).map_err(|e| usage("config", format!("{}: {e}", p.display())))?;
            for (n, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| usage("config", format!("line {} is not key=value", n + 1)))?;
                let k = k.trim().replace('_', "-");
                if !KNOWN_KEYS.contains(&k.as_str()) {
                    return Err(usage("config", format!("unknown key '{k}' on line {}", n + 1)));
                }
                file.insert(k, v.trim().to_string());
            }
        }
        Ok(Layer { file })
    }

    fn get<T: FromStr>(&self, key: &str, flag: Option<T>) -> std::result::Result<Option<T>, UsageError>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.file
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| usage(key, format!("'{v}': {e}"))))
            .transpose()
    }
}

const KNOWN_KEYS: &[&str] = &[
    "seed", "replicas", "t-grid", "delta", "alpha", "rho", "f-center", "f-radius", "surface", "output", "t-star",
    "samples", "points", "traces", "time", "lags", "radius", "steps",
];

fn parse_list(flag: &str, s: &str) -> std::result::Result<Vec<f64>, UsageError> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| usage(flag, format!("'{x}': {e}"))))
        .collect()
}

fn to_usage(e: Error) -> UsageError {
    match e {
        Error::InvalidParameter { name, reason } => usage(&name.replace('_', "-"), reason),
        Error::UnknownSurface(s) => usage("surface", format!("unknown surface '{s}'")),
        other => UsageError(other.to_string()),
    }
}

/// Resolve parsed flags into a validated [`CommandSpec`].
pub fn resolve(cli: Cli) -> std::result::Result<CommandSpec, UsageError> {
    let (name, common, t_star, samples, points, traces, time, lags, radius, steps) = match cli.command {
        Command::Slln(c) => ("slln", c, None, None, None, None, None, None, None, None),
        Command::Scaling(c) => ("scaling", c, None, None, None, None, None, None, None, None),
        Command::Clt { common, t_star } => ("clt", common, t_star, None, None, None, None, None, None, None),
        Command::KernelCheck { common, samples, points } => {
            ("kernel-check", common, None, samples, points, None, None, None, None, None)
        }
        Command::Sandwich { common, traces, time } => ("sandwich", common, None, None, None, traces, time, None, None, None),
        Command::Mixing { common, lags, radius } => ("mixing", common, None, None, None, None, None, lags, radius, None),
        Command::Counterexample { common, steps } => {
            ("counterexample", common, None, None, None, None, None, None, None, steps)
        }
        Command::TraceDump { common, time } => ("trace-dump", common, None, None, None, None, time, None, None, None),
    };
    let layer = Layer::load(common.config.as_deref())?;
    let defaults = ExperimentConfig::default();
    let replicas_default = match name {
        "scaling" | "clt" => 200,
        "mixing" => 10_000,
        _ => defaults.replicas,
    };
    let t_grid = match layer.get::<String>("t-grid", common.t_grid.clone())? {
        Some(s) => parse_list("t-grid", &s)?,
        None => defaults.t_grid.clone(),
    };
    let f_center = match layer.get::<String>("f-center", common.f_center.clone())? {
        Some(s) => match parse_list("f-center", &s)?.as_slice() {
            [x, y] => (*x, *y),
            _ => return Err(usage("f-center", "expected two numbers 're,im'")),
        },
        None => defaults.f_center,
    };
    let config = ExperimentConfig {
        surface: layer.get("surface", common.surface.clone())?.unwrap_or(defaults.surface.clone()),
        t_grid,
        replicas: layer.get("replicas", common.replicas)?.unwrap_or(replicas_default),
        delta: layer.get("delta", common.delta)?.unwrap_or(defaults.delta),
        alpha: layer.get("alpha", common.alpha)?.unwrap_or(defaults.alpha),
        rho: layer.get("rho", common.rho)?.unwrap_or(defaults.rho),
        f_center,
        f_radius: layer.get("f-radius", common.f_radius)?.unwrap_or(defaults.f_radius),
        master_seed: 0,
        output: None,
    };
    config.validate().map_err(to_usage)?;
    let spec = CommandSpec {
        name,
        output: layer
            .get::<PathBuf>("output", common.output.clone())?
            .unwrap_or_else(|| PathBuf::from("geoflux-output")),
        gate: common.gate,
        record_timing: common.record_timing,
        t_star: layer.get("t-star", t_star)?.unwrap_or(400.0),
        samples: layer.get("samples", samples)?.unwrap_or(100_000),
        points: layer.get("points", points)?.unwrap_or(5),
        traces: layer.get("traces", traces)?.unwrap_or(100),
        time: layer.get("time", time)?.unwrap_or(if name == "trace-dump" { 50.0 } else { 100.0 }),
        lags: match layer.get::<String>("lags", lags)? {
            Some(s) => parse_list("lags", &s)?,
            None => vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
        },
        radius: layer.get("radius", radius)?.unwrap_or(1.0),
        steps: layer.get("steps", steps)?.unwrap_or(1000),
        config,
    };
    if spec.samples < 100 {
        return Err(usage("samples", "must be at least 100"));
    }
    if spec.points == 0 {
        return Err(usage("points", "must be at least 1"));
    }
    if spec.traces == 0 {
        return Err(usage("traces", "must be at least 1"));
    }
    if !(spec.time > 0.0) {
        return Err(usage("time", "must be positive"));
    }
    if spec.lags.iter().any(|&l| !(l >= 0.0)) {
        return Err(usage("lags", "must be nonnegative"));
    }
    if spec.steps == 0 {
        return Err(usage("steps", "must be at least 1"));
    }
    if name == "clt" && !spec.config.t_grid.iter().any(|&t| (t - spec.t_star).abs() < 1e-9) {
        return Err(usage("t-star", format!("{} is not on the time grid", spec.t_star)));
    }
    // checked last so that bad values are reported first
    let seed = layer
        .get("seed", common.seed)?
        .ok_or_else(|| UsageError("missing required flag --seed".into()))?;
    let mut spec = spec;
    spec.config.master_seed = seed;
    spec.config.output = Some(spec.output.clone());
    Ok(spec)
}

/// Parse an argument list (without the program name).
pub fn parse<I, S>(args: I) -> std::result::Result<CommandSpec, UsageError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once(std::ffi::OsString::from("geoflux")).chain(args.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(argv).map_err(|e| UsageError(clap_message(&e)))?;
    resolve(cli)
}

const SUBCOMMANDS: &str = "slln, scaling, clt, kernel-check, sandwich, mixing, counterexample, trace-dump";

fn clap_message(e: &clap::Error) -> String {
    use clap::error::ErrorKind;
    let mut msg = e.to_string();
    if matches!(e.kind(), ErrorKind::InvalidSubcommand | ErrorKind::MissingSubcommand) {
        msg.push_str(&format!("valid subcommands: {SUBCOMMANDS}\n"));
    }
    msg
}

/// Text report plus named files to write.
#[derive(Debug, Default)]
pub struct Outcome {
    pub report: String,
    pub files: Vec<(String, String)>,
    pub passed: bool,
}

fn kv(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{key}={value}");
}

fn ensemble_files(records: &[ReplicaRecord], timing: bool) -> Vec<(String, String)> {
    vec![
        ("records.csv".into(), records_csv(records, timing)),
        ("summary.csv".into(), summary_csv(&summarize(records))),
    ]
}

/// Run the experiment without touching the file system.
pub fn execute(spec: &CommandSpec) -> Result<Outcome> {
    let cfg = &spec.config;
    let mut r = String::new();
    kv(&mut r, "command", spec.name);
    kv(&mut r, "seed", cfg.master_seed);
    let mut files = Vec::new();
    let passed = match spec.name {
        "slln" => {
            let records = run_ensemble(cfg)?;
            let rep = slln_report(&records, cfg)?;
            kv(&mut r, "replicas", cfg.replicas);
            kv(&mut r, "kappa_m", rep.kappa_m);
            kv(&mut r, "kappa_m_half", rep.kappa_m_half);
            kv(&mut r, "two_kappa_m", rep.two_kappa_m);
            kv(&mut r, "kappa_phi", rep.kappa_phi);
            kv(&mut r, "kappa_phi_half", rep.kappa_phi_half);
            kv(&mut r, "a_phi_f", rep.a_phi_f);
            for row in &rep.rows {
                let t = row.t;
                kv(&mut r, &format!("n_over_t2[{t}]"), row.n_over_t2.estimate);
                kv(&mut r, &format!("n_over_t2_se[{t}]"), row.n_over_t2.std_error);
                kv(&mut r, &format!("nphi_over_t2[{t}]"), row.n_phi_over_t2.estimate);
                kv(&mut r, &format!("nphi_over_t2_se[{t}]"), row.n_phi_over_t2.std_error);
                kv(&mut r, &format!("nphif_over_t2[{t}]"), row.n_phi_f_over_t2.estimate);
                kv(&mut r, &format!("nphif_over_t2_se[{t}]"), row.n_phi_f_over_t2.std_error);
            }
            kv(&mut r, "measured_n_over_kappa_m", rep.measured_n_over_kappa_m);
            kv(&mut r, "consistency_z", rep.consistency_z);
            let last = rep.rows.last().expect("nonempty grid");
            let rel = last.n_over_t2.estimate / rep.kappa_m_half - 1.0;
            let rel_phi = last.n_phi_over_t2.estimate / rep.kappa_phi_half - 1.0;
            kv(&mut r, "n_vs_kappa_m_half_rel", rel);
            kv(&mut r, "nphi_vs_kappa_phi_half_rel", rel_phi);
            files = ensemble_files(&records, spec.record_timing);
            rel.abs() <= 0.1 && rel_phi.abs() <= 0.1
        }
        "scaling" => {
            let records = run_ensemble(cfg)?;
            let rep = scaling_exponents(&records, cfg)?;
            for (key, fit) in [("global", &rep.global), ("local", &rep.local)] {
                kv(&mut r, &format!("slope_{key}"), fit.slope);
                kv(&mut r, &format!("slope_{key}_ci_low"), fit.ci_low);
                kv(&mut r, &format!("slope_{key}_ci_high"), fit.ci_high);
                kv(&mut r, &format!("slope_{key}_r_squared"), fit.r_squared);
                let res: Vec<String> = fit.residuals.iter().map(|x| x.to_string()).collect();
                kv(&mut r, &format!("slope_{key}_residuals"), res.join(","));
            }
            files = ensemble_files(&records, spec.record_timing);
            (1.6..=2.4).contains(&rep.global.slope) && (2.6..=3.4).contains(&rep.local.slope)
        }
        "clt" => {
            let records = run_ensemble(cfg)?;
            let rep = localized_clt(&records, cfg, spec.t_star)?;
            kv(&mut r, "t_star", spec.t_star);
            kv(&mut r, "ks_stat", rep.ks_stat);
            kv(&mut r, "p_value", rep.p_value);
            kv(&mut r, "skewness", rep.skewness);
            kv(&mut r, "excess_kurtosis", rep.excess_kurtosis);
            let fl = global_fluctuation_report(&records, cfg, spec.t_star)?;
            kv(&mut r, "centering", fl.centering);
            for m in &fl.by_time {
                kv(&mut r, &format!("global_var[{}]", m.t), m.variance);
                kv(&mut r, &format!("global_third[{}]", m.t), m.third);
                kv(&mut r, &format!("global_fourth[{}]", m.t), m.fourth);
            }
            if let Some(g) = fl.gqf {
                kv(&mut r, "gqf_theta1", g.theta1);
                kv(&mut r, "gqf_theta2", g.theta2);
                kv(&mut r, "gqf_third_cumulant_mismatch", g.third_cumulant_mismatch);
            }
            files = ensemble_files(&records, spec.record_timing);
            rep.p_value > 0.01 && rep.skewness.abs() < 0.5
        }
        "kernel-check" => {
            let kcfg = cfg.kernel_config()?;
            let rep = row_sum_check(&kcfg, spec.points, spec.samples, cfg.master_seed)?;
            kv(&mut r, "delta", rep.delta);
            kv(&mut r, "kappa_phi", rep.kappa_phi);
            kv(&mut r, "target_delta2_kappa_phi", rep.target);
            let mut csv = String::from("point,u_re,u_im,u_dir,row_mean,std_error,z\n");
            for (i, row) in rep.rows.iter().enumerate() {
                kv(&mut r, &format!("row_mean[{i}]"), row.estimate.estimate);
                kv(&mut r, &format!("row_mean_se[{i}]"), row.estimate.std_error);
                kv(&mut r, &format!("z[{i}]"), row.z);
                let _ = writeln!(
                    csv,
                    "{i},{},{},{},{},{},{}",
                    row.u.base.re(),
                    row.u.base.im(),
                    row.u.dir(),
                    row.estimate.estimate,
                    row.estimate.std_error,
                    row.z
                );
            }
            kv(&mut r, "max_abs_z", rep.max_abs_z());
            kv(&mut r, "max_pairwise_z", rep.max_pairwise_z);
            files.push(("kernel_check.csv".into(), csv));
            rep.max_abs_z() < 3.0 && rep.max_pairwise_z < 3.0
        }
        "sandwich" => {
            let kcfg = cfg.kernel_config()?;
            let step = kcfg.delta / SANDWICH_STEPS_PER_DELTA;
            let rep = sandwich_check(&kcfg, spec.traces, spec.time, step, cfg.master_seed)?;
            kv(&mut r, "delta", rep.delta);
            kv(&mut r, "time", rep.t);
            kv(&mut r, "step", rep.step);
            kv(&mut r, "traces", rep.rows.len());
            kv(&mut r, "violations", rep.violations());
            kv(&mut r, "mean_gap_over_t", rep.mean_gap_over_t());
            kv(&mut r, "gap_exceeds_delta_edges", rep.gap_exceeds_delta_edges());
            kv(&mut r, "gap_exceeds_two_delta_edges", rep.gap_exceeds_two_delta_edges());
            let mut csv = String::from("trace,seed,lower,n_phi,upper,gap,edge_delta,edge_two_delta\n");
            for row in &rep.rows {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{},{}",
                    row.trace,
                    row.seed,
                    row.bounds.lower,
                    row.n_phi,
                    row.bounds.upper,
                    row.bounds.gap(),
                    row.edge_count_delta,
                    row.edge_count_two_delta
                );
            }
            files.push(("sandwich.csv".into(), csv));
            rep.violations() == 0
        }
        "mixing" => {
            let s = cfg.surface_spec()?;
            let center = DiskPoint::new(cfg.f_center.0, cfg.f_center.1)?;
            let g = bump_observable(&s, center, spec.radius)?;
            let rep = correlation_decay(&g, &spec.lags, cfg)?;
            kv(&mut r, "replicas", cfg.replicas);
            kv(&mut r, "radius", spec.radius);
            kv(&mut r, "variance", rep.variance);
            let mut csv = String::from("lag,corr,std_error,shuffled_corr,shuffled_std_error\n");
            for (p, q) in rep.points.iter().zip(&rep.shuffled) {
                kv(&mut r, &format!("corr[{}]", p.lag), p.corr);
                kv(&mut r, &format!("corr_se[{}]", p.lag), p.std_error);
                kv(&mut r, &format!("shuffled_corr[{}]", p.lag), q.corr);
                let _ = writeln!(csv, "{},{},{},{},{}", p.lag, p.corr, p.std_error, q.corr, q.std_error);
            }
            files.push(("correlation.csv".into(), csv));
            let first = rep.points.iter().find(|p| p.lag == 0.0).map(|p| p.corr);
            let far = rep.points.iter().max_by(|a, b| a.lag.total_cmp(&b.lag)).map(|p| p.corr);
            match (first, far) {
                (Some(c0), Some(cl)) => cl.abs() < 0.2 * c0,
                _ => true,
            }
        }
        "counterexample" => {
            let rep = remark_counterexample(spec.steps, cfg.master_seed)?;
            kv(&mut r, "n_steps", rep.n_steps);
            kv(&mut r, "orbit_average", rep.orbit_average);
            kv(&mut r, "product_integral", rep.product_integral);
            kv(&mut r, "continuous_control", rep.continuous_control);
            rep.orbit_average == 1.0 && rep.product_integral == 0.0
        }
        "trace-dump" => {
            let s = cfg.surface_spec()?;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.master_seed, 0));
            let tr = random_trace(&mut rng, spec.time, &s, 0)?;
            let crossings = self_intersections(&tr);
            kv(&mut r, "time", spec.time);
            kv(&mut r, "u0_re", tr.u0.base.re());
            kv(&mut r, "u0_im", tr.u0.base.im());
            kv(&mut r, "u0_dir", tr.u0.dir());
            kv(&mut r, "arcs", tr.arcs.len());
            kv(&mut r, "crossings", crossings.len());
            files.push(("trace.csv".into(), tr.to_csv()));
            files.push(("crossings.csv".into(), crossings.to_csv()));
            true
        }
        other => unreachable!("unknown command {other}"),
    };
    kv(&mut r, "thresholds_met", passed);
    files.push(("report.txt".into(), r.clone()));
    Ok(Outcome {
        report: r,
        files,
        passed,
    })
}

fn write_outputs(dir: &Path, files: &[(String, String)]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (name, body) in files {
        fs::write(dir.join(name), body)?;
    }
    Ok(())
}

fn configure_threads() {
    if let Some(n) = std::env::var("GEOFLUX_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            // fails only if a pool already exists, which then stays in use
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Run a resolved command, write its files, print the report; returns the
/// process exit status.
pub fn run(spec: &CommandSpec) -> i32 {
    configure_threads();
    let outcome = match execute(spec) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    if let Err(e) = write_outputs(&spec.output, &outcome.files) {
        eprintln!("error: cannot write to {}: {e}", spec.output.display());
        return 1;
    }
    print!("{}", outcome.report);
    if spec.gate && !outcome.passed {
        2
    } else {
        0
    }
}

/// Entry point for the binary: parse `std::env::args`, run, return status.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    match Cli::try_parse_from(&args) {
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            if code == 0 {
                let _ = e.print();
            } else {
                eprint!("{}", clap_message(&e));
            }
            code
        }
        Ok(cli) => match resolve(cli) {
            Ok(spec) => run(&spec),
            Err(UsageError(msg)) => {
                eprintln!("error: {msg}");
                1
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slln_defaults() {
        let s = parse(["slln", "--seed", "42"]).unwrap();
        assert_eq!(s.name, "slln");
        assert_eq!(s.config.surface, "bolza");
        assert_eq!(s.config.t_grid, vec![100.0, 200.0, 400.0, 800.0]);
        assert_eq!(s.config.replicas, 64);
        assert_eq!(s.config.delta, 0.1);
        assert_eq!(s.config.alpha, 0.3);
        assert_eq!(s.config.master_seed, 42);
    }

    #[test]
    fn invalid_values_name_the_flag() {
        let e = parse(["scaling", "--replicas", "1"]).unwrap_err();
        assert!(e.0.contains("--replicas"), "{}", e.0);
        let e = parse(["slln", "--seed", "1", "--delta", "0.4"]).unwrap_err();
        assert!(e.0.contains("--delta"), "{}", e.0);
        let e = parse(["slln", "--seed", "1", "--t-grid", "100,x"]).unwrap_err();
        assert!(e.0.contains("--t-grid"), "{}", e.0);
        let e = parse(["slln"]).unwrap_err();
        assert!(e.0.contains("--seed"), "{}", e.0);
        let e = parse(["clt", "--seed", "1", "--t-star", "300"]).unwrap_err();
        assert!(e.0.contains("--t-star"), "{}", e.0);
    }

    #[test]
    fn unknown_subcommand_lists_valid_ones() {
        let e = parse(["bogus"]).unwrap_err();
        for name in ["slln", "scaling", "clt", "kernel-check", "sandwich", "mixing", "counterexample", "trace-dump"] {
            assert!(e.0.contains(name), "{name} missing from: {}", e.0);
        }
        assert!(parse(["slln", "--seed", "1", "--bogus"]).is_err());
    }

    #[test]
    fn config_file_is_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("exp.conf");
        fs::write(&p, "# manifest\nseed = 5\nreplicas=9\ndelta=0.05\nt_grid=10,20\n").unwrap();
        let s = parse(["slln", "--config", p.to_str().unwrap(), "--replicas", "3"]).unwrap();
        assert_eq!(s.config.master_seed, 5);
        assert_eq!(s.config.replicas, 3);
        assert_eq!(s.config.delta, 0.05);
        assert_eq!(s.config.t_grid, vec![10.0, 20.0]);
        fs::write(&p, "colour=blue\n").unwrap();
        assert!(parse(["slln", "--seed", "1", "--config", p.to_str().unwrap()]).is_err());
    }
}
