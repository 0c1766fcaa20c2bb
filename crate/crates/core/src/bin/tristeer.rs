use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use tristeer::moments::{discrepancies, Discrepancy, MomentField};
use tristeer::steering::{steering_report, Direction, Path, TranscriptionFlag};
use tristeer::sweep::{
    emit, maximize_steering, render_sweep, rows_to_csv, run_sweep, run_sweep_with_workers, to_json,
    verify, ClassFilter, Format, Level, SweepRow, SweepSpec, DEFAULT_GRID_POINTS,
};
use tristeer::wigner::oracle_moment_set;
use tristeer::{
    compute_moments, derive_mixing, parse, rotation_matrix, FockIndex, Frequencies, DEFAULT_EPS,
};

#[derive(Parser)]
#[command(
    name = "tristeer",
    version,
    about = "EPR steering among three coupled oscillators"
)]
struct Cli {
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output encoding (csv or json).
    #[arg(long, global = true, value_parser = parse_format)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mixing tangents and rotation matrix for one mu_theta.
    Angles {
        #[arg(long, allow_hyphen_values = true, value_parser = parse::real)]
        mu_theta: f64,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
    },
    /// Lab-frame second and fourth moments.
    Moments {
        #[arg(long, value_parser = parse::fock)]
        fock: FockIndex,
        #[arg(long, allow_hyphen_values = true, value_parser = parse::real)]
        mu_theta: f64,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        /// Replace tabulated values that disagree with the quadrature oracle.
        #[arg(long)]
        trust_oracle: bool,
    },
    /// All six directed steering values.
    Steering {
        #[arg(long, value_parser = parse::fock)]
        fock: FockIndex,
        #[arg(long, allow_hyphen_values = true, value_parser = parse::real)]
        mu_theta: f64,
        #[arg(long, default_value = "closed", value_parser = parse::path)]
        path: Path,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
    },
    /// Sweep over a mu_theta grid and a range of states.
    Sweep(SweepArgs),
    /// Locate the maximum of one steering direction.
    Maximize {
        #[arg(long, value_parser = parse::direction)]
        dir: Direction,
        #[arg(long, value_parser = parse::fock)]
        fock: FockIndex,
        #[arg(long, allow_hyphen_values = true, value_parser = parse::bracket)]
        bracket: Option<(f64, f64)>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Run the invariant suite; exit status 1 on any failed check.
    Verify {
        #[arg(long)]
        full: bool,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// JSON sweep specification; the flags below are ignored when given.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    mu_min: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    mu_max: f64,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    points: usize,
    /// Upper bounds N,M,L of the quantum numbers.
    #[arg(long, default_value = "2,2,2", value_parser = parse::fock)]
    ranges: FockIndex,
    /// n00, 0m0, 00l or full.
    #[arg(long, default_value = "full", value_parser = parse_class)]
    class: ClassFilter,
    #[arg(long, default_value = "closed", value_parser = parse::path)]
    path: Path,
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
}

fn parse_format(s: &str) -> tristeer::Result<Format> {
    s.parse()
}

fn parse_class(s: &str) -> tristeer::Result<ClassFilter> {
    s.parse()
}

enum Failure {
    Usage(String),
    Verification,
}

impl From<tristeer::Error> for Failure {
    fn from(e: tristeer::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

#[derive(Serialize)]
struct AnglesOut {
    mu_theta: f64,
    mu_big_phi: f64,
    mu_phi: f64,
    theta: f64,
    big_phi: f64,
    phi: f64,
    rotation: [[f64; 3]; 3],
}

#[derive(Serialize)]
struct MomentsOut {
    fock: FockIndex,
    mu_theta: f64,
    theta: f64,
    moments: tristeer::MomentSet,
    discrepancies: Vec<Discrepancy>,
}

#[derive(Serialize)]
struct SteeringOut {
    row: SweepRow,
    path: Path,
    transcription_flags: Vec<TranscriptionFlag>,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let out = cli.out.as_deref();
    let format = cli.format;
    let text = match cli.command {
        Command::Angles { mu_theta, eps } => {
            let cfg = derive_mixing(mu_theta, eps)?;
            let a = AnglesOut {
                mu_theta,
                mu_big_phi: cfg.mu_big_phi(),
                mu_phi: cfg.mu_phi(),
                theta: cfg.theta.radians(),
                big_phi: cfg.big_phi.radians(),
                phi: cfg.phi.radians(),
                rotation: rotation_matrix(&cfg),
            };
            match format.unwrap_or_default() {
                Format::Json => to_json(&a)?,
                Format::Csv => {
                    let mut s = String::from("quantity,value\n");
                    for (k, v) in [
                        ("mu_theta", a.mu_theta),
                        ("mu_big_phi", a.mu_big_phi),
                        ("mu_phi", a.mu_phi),
                        ("theta", a.theta),
                        ("big_phi", a.big_phi),
                        ("phi", a.phi),
                    ] {
                        s.push_str(&format!("{k},{v:?}\n"));
                    }
                    for (i, row) in a.rotation.iter().enumerate() {
                        for (j, v) in row.iter().enumerate() {
                            s.push_str(&format!("R{}{},{v:?}\n", i + 1, j + 1));
                        }
                    }
                    s
                }
            }
        }
        Command::Moments {
            fock,
            mu_theta,
            theta,
            trust_oracle,
        } => {
            let cfg = derive_mixing(mu_theta, DEFAULT_EPS)?;
            let freq = Frequencies::uniform(theta)?;
            let mut moments = compute_moments(fock, &cfg, &freq);
            let mut found = Vec::new();
            if trust_oracle {
                let oracle = oracle_moment_set(fock, &cfg, &freq)?;
                found = discrepancies(&moments, &oracle, fock, mu_theta, 1e-8);
                for d in &found {
                    eprintln!(
                        "warning: {} differs from quadrature (rel {:e}); using quadrature",
                        d.field, d.rel_err
                    );
                    moments.set(d.field, d.oracle);
                }
            }
            match format.unwrap_or_default() {
                Format::Json => to_json(&MomentsOut {
                    fock,
                    mu_theta,
                    theta,
                    moments,
                    discrepancies: found,
                })?,
                Format::Csv => {
                    let mut s = String::from("field,value\n");
                    for f in MomentField::ALL {
                        s.push_str(&format!("{},{:?}\n", f.name(), moments.get(f)));
                    }
                    s
                }
            }
        }
        Command::Steering {
            fock,
            mu_theta,
            path,
            theta,
        } => {
            let cfg = derive_mixing(mu_theta, DEFAULT_EPS)?;
            let freq = Frequencies::uniform(theta)?;
            let report = steering_report(fock, &cfg, &freq, path)?;
            for f in &report.flags {
                eprintln!(
                    "warning: closed form {} disagrees with moments ({:?} vs {:?})",
                    f.direction, f.closed_form, f.moments
                );
            }
            let row = SweepRow::new(mu_theta, fock, &report);
            match format.unwrap_or_default() {
                Format::Json => to_json(&SteeringOut {
                    row,
                    path,
                    transcription_flags: report.flags,
                })?,
                Format::Csv => rows_to_csv(&[row]),
            }
        }
        Command::Sweep(args) => {
            let spec = match &args.spec {
                Some(path) => SweepSpec::from_file(path)?,
                None => {
                    let spec = SweepSpec {
                        mu_theta_min: args.mu_min,
                        mu_theta_max: args.mu_max,
                        grid_points: args.points,
                        fock_ranges: [args.ranges.n, args.ranges.m, args.ranges.l],
                        class_filter: args.class,
                        path: args.path,
                        theta: args.theta,
                        eps: args.eps,
                    };
                    spec.validate()?;
                    spec
                }
            };
            let result = match args.workers {
                Some(w) => run_sweep_with_workers(&spec, w)?,
                None => run_sweep(&spec)?,
            };
            for e in &result.errors {
                eprintln!(
                    "warning: ({},{},{}) at mu_theta={:?}: {}",
                    e.n, e.m, e.l, e.mu_theta, e.message
                );
            }
            render_sweep(&result, format.unwrap_or_default())?
        }
        Command::Maximize {
            dir,
            fock,
            bracket,
            tol,
        } => {
            let bracket = bracket.unwrap_or((-1.0 + DEFAULT_EPS, 1.0));
            let m = maximize_steering(dir, fock, bracket, tol)?;
            match format.unwrap_or_default() {
                Format::Json => to_json(&m)?,
                Format::Csv => format!(
                    "direction,n,m,l,mu_theta,S\n{},{},{},{},{:?},{:?}\n",
                    m.direction, m.fock.n, m.fock.m, m.fock.l, m.mu_theta, m.value
                ),
            }
        }
        Command::Verify { full } => {
            let level = if full { Level::Full } else { Level::Fast };
            let report = verify(level)?;
            for c in report.failures() {
                eprintln!("FAIL {}: {:e} > {:e}", c.name, c.max_residual, c.tolerance);
            }
            for f in &report.transcription_flags {
                eprintln!(
                    "warning: transcription flag {} at {} mu_theta={:?}",
                    f.direction, f.fock, f.mu_theta
                );
            }
            let text = match format.unwrap_or(Format::Json) {
                Format::Json => to_json(&report)?,
                Format::Csv => {
                    let mut s = String::from("check,max_residual,tolerance,passed\n");
                    for c in &report.checks {
                        s.push_str(&format!(
                            "{},{:?},{:?},{}\n",
                            c.name, c.max_residual, c.tolerance, c.passed
                        ));
                    }
                    s
                }
            };
            emit(&text, out)?;
            return if report.passed() {
                Ok(())
            } else {
                Err(Failure::Verification)
            };
        }
    };
    emit(&text, out)?;
    Ok(())
}
