mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use stresslet_core::geometry::{canonical_strain, TorusGeometry};
use stresslet_core::lattice_sums::{lattice_constants, refined_c0_prime, BoundedValue};
use stresslet_core::mobility::{angular_velocity_torus, curl_tilde_u_origin, decay_probe, DecayProbeOptions};
use stresslet_core::sim::{
    build_configuration, min_distance, per_particle_omega, rotate_density, sample_orientations, simulate,
    write_trajectory_csv, ConfigurationKind, EmpiricalMeasure, OmegaMode, OrientationDensity, RateNormalization,
    SamplingScheme, TrajectoryMetadata,
};
use stresslet_core::summation::with_threads;
use stresslet_core::transport::{g_function, g_prime_zero, linear_regime_time, w1_dual_xi1_bound, DualTarget};
use stresslet_core::{Error, Reduction};

use output::{csv_table, RunManifest, Sink};

const COLUMNS_HELP: &str = "\
Output files (with --out DIR; otherwise the main report goes to stdout and the manifest to stderr):
  c0           c0.json
  omega        omega.json
  simulate     trajectory.csv   columns t,i,x1,x2,x3,xi1,xi2,xi3
               trajectory.json  kind,k,n,radius,cbar,seed,mode,normalization,sampling
               summary.csv      columns t,dual_to_f,dual_to_fbar,g,linear_bound
  probe-decay  decay.csv        columns L,log_L,remainder,oscillation,gradient,log_remainder,log_oscillation,log_gradient
               decay.json       slopes and origin curl per L
  every run    manifest.json

Exit codes: 0 success, 1 usage error, 2 numeric precondition failure.
All floats are printed with 17 significant digits.";

#[derive(Parser, Serialize)]
#[command(name = "stresslet", version, about = "Stresslet lattice sums, periodic mobility and orientation dynamics", after_long_help = COLUMNS_HELP)]
struct Cli {
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Use the fixed-shape reduction tree so results are bit-identical for any thread count.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Truncated lattice sum, tail bound and the intervals for c0', c0 and cbar.
    C0(C0Args),
    /// Leading-order angular velocity of one sphere in a periodic box.
    Omega(OmegaArgs),
    /// Orientation trajectories of a cubic or non-cubic configuration.
    Simulate(SimulateArgs),
    /// Sup norms on the unit ball for growing box sizes, with log-log slopes.
    ProbeDecay(ProbeArgs),
}

#[derive(Args, Serialize)]
struct C0Args {
    /// Truncation level: sum over |y|_inf <= 2k.
    #[arg(long, default_value_t = 35, value_parser = clap::value_parser!(u32).range(2..))]
    k: u32,
    /// Also evaluate the cell averages explicitly.
    #[arg(long)]
    refined: bool,
    /// Gauss points per axis for the refined cell averages.
    #[arg(long, default_value_t = 4)]
    quadrature_order: usize,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum TorusKind {
    Cubic,
    Anisotropic,
}

#[derive(Args, Serialize)]
struct OmegaArgs {
    #[arg(long, value_enum, default_value_t = TorusKind::Anisotropic)]
    torus: TorusKind,
    /// Particle radius, in (0, 1/2).
    #[arg(long, default_value_t = 0.1)]
    radius: f64,
    #[arg(long, default_value_t = 35, value_parser = clap::value_parser!(u32).range(2..))]
    k: u32,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Cubic,
    Noncubic,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Lattice,
    Direct,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum DensityArg {
    Bump,
    Hemisphere,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum NormalizationArg {
    Physical,
    Rescaled,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SamplingArg {
    Mirrored,
    Iid,
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = Kind::Noncubic)]
    kind: Kind,
    /// Grid parameter: N = k^3 (cubic) or 4k^3 (noncubic).
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    k: u32,
    #[arg(long, default_value_t = 0.01)]
    radius: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Final time.
    #[arg(long = "T", default_value_t = 1.0)]
    t_end: f64,
    /// Output cadence.
    #[arg(long, default_value_t = 0.1)]
    dt: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Lattice)]
    mode: ModeArg,
    /// Lattice-sum truncation level for the rate constant.
    #[arg(long, default_value_t = 35, value_parser = clap::value_parser!(u32).range(2..))]
    lattice_k: u32,
    /// Image truncation |n|_inf for direct mode.
    #[arg(long, default_value_t = 2)]
    truncation: u32,
    #[arg(long, value_enum, default_value_t = NormalizationArg::Physical)]
    normalization: NormalizationArg,
    #[arg(long, value_enum, default_value_t = DensityArg::Bump)]
    density: DensityArg,
    #[arg(long, value_enum, default_value_t = SamplingArg::Mirrored)]
    sampling: SamplingArg,
    /// Quadrature order of the orientation density.
    #[arg(long, default_value_t = 48)]
    quadrature_order: usize,
}

#[derive(Args, Serialize)]
struct ProbeArgs {
    /// Box sizes, at least four, each >= 4.
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32")]
    l_values: Vec<f64>,
    /// Sample points in the unit ball.
    #[arg(long, default_value_t = 512)]
    samples: usize,
    /// Image truncation |n|_inf.
    #[arg(long, default_value_t = 4)]
    truncation: u32,
    /// Gauss points per face panel for the cell-average correction.
    #[arg(long, default_value_t = 8)]
    quadrature_order: usize,
}

enum Failure {
    Usage(String),
    Numeric(Error),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numeric(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome = Result<Option<u64>, Failure>;

#[derive(Serialize)]
struct Interval {
    estimate: f64,
    half_width: f64,
    lower: f64,
    upper: f64,
}

impl From<BoundedValue<f64>> for Interval {
    fn from(b: BoundedValue<f64>) -> Self {
        Interval { estimate: b.estimate, half_width: b.half_width, lower: b.lower(), upper: b.upper() }
    }
}

#[derive(Serialize)]
struct C0Report {
    k: u32,
    partial_sum: f64,
    tail_bound: f64,
    roundoff_slack: f64,
    c0_prime: Interval,
    c0: Interval,
    cbar: Interval,
    excludes_zero: bool,
    refined_c0_prime: Option<Interval>,
}

fn cmd_c0(args: &C0Args, mode: Reduction, sink: &Sink) -> Result<bool, Failure> {
    let lc = lattice_constants::<f64>(args.k, mode)?;
    let refined = if args.refined {
        Some(refined_c0_prime::<f64>(args.k, args.quadrature_order, mode)?.into())
    } else {
        None
    };
    let report = C0Report {
        k: args.k,
        partial_sum: lc.c0_prime.estimate,
        tail_bound: lc.c0_prime.half_width,
        roundoff_slack: lc.c0_prime.slack.unwrap_or(0.0),
        c0_prime: lc.c0_prime.into(),
        c0: lc.c0.into(),
        cbar: lc.cbar.into(),
        excludes_zero: lc.c0_prime.excludes_zero(),
        refined_c0_prime: refined,
    };
    sink.emit_json("c0.json", &report)?;
    Ok(report.excludes_zero)
}

#[derive(Serialize)]
struct OmegaReport {
    torus: TorusKind,
    radius: f64,
    k: u32,
    omega: [f64; 3],
    curl_origin: [Interval; 3],
    omega3: Interval,
}

fn cmd_omega(args: &OmegaArgs, mode: Reduction, sink: &Sink) -> Outcome {
    let torus = match args.torus {
        TorusKind::Cubic => TorusGeometry::cubic(1.0)?,
        TorusKind::Anisotropic => TorusGeometry::anisotropic(1.0)?,
    };
    let a = canonical_strain();
    let omega = angular_velocity_torus(&torus, &a, args.radius, args.k, mode)?;
    let curl = curl_tilde_u_origin(&torus.lattice(), &a, args.k, mode)?;
    let r3 = args.radius.powi(3);
    let report = OmegaReport {
        torus: args.torus,
        radius: args.radius,
        k: args.k,
        omega: omega.omega.0,
        curl_origin: curl.components.map(Interval::from),
        omega3: curl.components[2].scale(0.5 * r3).into(),
    };
    sink.emit_json("omega.json", &report)?;
    Ok(None)
}

fn cmd_simulate(args: &SimulateArgs, mode: Reduction, sink: &Sink) -> Outcome {
    let Some(dir) = sink.dir() else {
        return Err(Failure::Usage("simulate writes several files and needs --out DIR".into()));
    };
    let kind = match args.kind {
        Kind::Cubic => ConfigurationKind::Cubic,
        Kind::Noncubic => ConfigurationKind::Noncubic,
    };
    let config = build_configuration(kind, args.k, args.radius)?;
    let h = match args.density {
        DensityArg::Bump => OrientationDensity::new(
            stresslet_core::sim::DensityProfile::Bump { threshold: 0.1 },
            args.quadrature_order,
        )?,
        DensityArg::Hemisphere => {
            OrientationDensity::new(stresslet_core::sim::DensityProfile::Hemisphere, args.quadrature_order)?
        }
    };
    let normalization = match args.normalization {
        NormalizationArg::Physical => RateNormalization::Physical,
        NormalizationArg::Rescaled => RateNormalization::Rescaled,
    };
    let omega_mode = match args.mode {
        ModeArg::Lattice => OmegaMode::Lattice { k: args.lattice_k },
        ModeArg::Direct => OmegaMode::Direct { truncation: args.truncation },
    };
    let sampling = match args.sampling {
        SamplingArg::Mirrored => SamplingScheme::Mirrored,
        SamplingArg::Iid => SamplingScheme::Iid,
    };
    let a = canonical_strain();
    let omegas = per_particle_omega(&config, &a, omega_mode, normalization, mode)?;
    let initial = sample_orientations(&h, config.len(), args.seed, sampling)?;
    let traj = simulate(&config, &initial, &omegas, args.t_end, args.dt)?;

    // Reference rotation of the non-cubic limit, in the same normalization.
    let cbar = lattice_constants::<f64>(args.lattice_k, mode)?.cbar.estimate;
    let rate_cbar = cbar * 16.0 * normalization.physical_factor();
    let slope = 0.4 * g_prime_zero(&h, rate_cbar);

    let mut csv = Vec::new();
    write_trajectory_csv(&traj, &mut csv)?;
    std::fs::write(dir.join("trajectory.csv"), csv)?;
    let meta = TrajectoryMetadata {
        kind,
        k: args.k,
        n: config.len(),
        radius: args.radius,
        cbar,
        seed: args.seed,
        mode: omega_mode,
        normalization,
        sampling,
    };
    sink.emit_json("trajectory.json", &meta)?;

    let rows: Vec<Vec<f64>> = traj
        .times
        .iter()
        .zip(&traj.measures)
        .map(|(t, m): (&f64, &EmpiricalMeasure)| {
            let fbar = rotate_density(&h, *t, rate_cbar);
            vec![
                *t,
                w1_dual_xi1_bound(m, DualTarget::Density(&h)),
                w1_dual_xi1_bound(m, DualTarget::Density(&fbar)),
                g_function(*t, &h, rate_cbar),
                slope * *t,
            ]
        })
        .collect();
    let table = csv_table(&["t", "dual_to_f", "dual_to_fbar", "g", "linear_bound"], &rows)?;
    sink.emit("summary.csv", &table)?;

    #[derive(Serialize)]
    struct Stats {
        n: usize,
        d_min: Option<f64>,
        max_drift_angle: f64,
        g_prime_zero: f64,
        linear_regime_time: f64,
    }
    let stats = Stats {
        n: config.len(),
        d_min: min_distance(&config).ok(),
        max_drift_angle: traj.max_drift_angle(),
        g_prime_zero: g_prime_zero(&h, rate_cbar),
        linear_regime_time: linear_regime_time(&h, rate_cbar),
    };
    sink.emit_json("stats.json", &stats)?;
    Ok(Some(args.seed))
}

#[derive(Serialize)]
struct DecayReport {
    l_values: Vec<f64>,
    slopes: [f64; 3],
    origin_curl: Vec<[f64; 3]>,
}

fn cmd_probe(args: &ProbeArgs, sink: &Sink) -> Outcome {
    let opts = DecayProbeOptions { samples: args.samples, truncation: args.truncation, face_order: args.quadrature_order };
    let r = decay_probe(&args.l_values, opts)?;
    let rows: Vec<Vec<f64>> = (0..r.box_sizes.len())
        .map(|i| {
            let l = r.box_sizes[i];
            let n = [r.norms[0][i], r.norms[1][i], r.norms[2][i]];
            vec![l, l.ln(), n[0], n[1], n[2], n[0].ln(), n[1].ln(), n[2].ln()]
        })
        .collect();
    let header = [
        "L",
        "log_L",
        "remainder",
        "oscillation",
        "gradient",
        "log_remainder",
        "log_oscillation",
        "log_gradient",
    ];
    sink.emit("decay.csv", &csv_table(&header, &rows)?)?;
    if sink.dir().is_some() {
        let report = DecayReport {
            l_values: r.box_sizes.clone(),
            slopes: r.fitted_slopes,
            origin_curl: r.origin_curl.iter().map(|c| c.0).collect(),
        };
        sink.emit_json("decay.json", &report)?;
    }
    Ok(None)
}

fn run(cli: &Cli, threads: usize) -> Result<(Option<u64>, bool), Failure> {
    let mode = if cli.deterministic { Reduction::Deterministic } else { Reduction::Adaptive };
    let sink = Sink::new(cli.out.clone())?;
    with_threads(threads, || match &cli.command {
        Command::C0(a) => cmd_c0(a, mode, &sink).map(|ok| (None, ok)),
        Command::Omega(a) => cmd_omega(a, mode, &sink).map(|s| (s, true)),
        Command::Simulate(a) => cmd_simulate(a, mode, &sink).map(|s| (s, true)),
        Command::ProbeDecay(a) => cmd_probe(a, &sink).map(|s| (s, true)),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let threads = cli
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let start = Instant::now();
    let result = run(&cli, threads);
    let (code, seed) = match result {
        Ok((seed, true)) => (ExitCode::SUCCESS, seed),
        Ok((seed, false)) => {
            eprintln!("error: the interval for c0' does not exclude zero");
            (ExitCode::from(2), seed)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
        Err(Failure::Numeric(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let command = match &cli.command {
        Command::C0(_) => "c0",
        Command::Omega(_) => "omega",
        Command::Simulate(_) => "simulate",
        Command::ProbeDecay(_) => "probe-decay",
    };
    let manifest = RunManifest {
        command: command.into(),
        parameters: serde_json::to_value(&cli).unwrap_or(serde_json::Value::Null),
        seed,
        version: env!("CARGO_PKG_VERSION"),
        duration_seconds: start.elapsed().as_secs_f64(),
        threads,
        deterministic: cli.deterministic,
    };
    if let Ok(sink) = Sink::new(cli.out.clone()) {
        if let Err(e) = sink.emit_manifest(&manifest) {
            eprintln!("error: cannot write manifest: {e}");
            return ExitCode::from(1);
        }
    }
    code
}
