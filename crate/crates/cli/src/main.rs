//! `jetmech` command-line front end.
//!
//! Exit codes: 0 pass, 1 a check or drift bound failed, 2 usage or
//! configuration error, 3 numeric or domain failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jetmech::checks::{run_check, CheckId, CheckOptions};
use jetmech::geometry::{JetPoint, PhasePoint};
use jetmech::integrate::{
    drift_report, integrate_hamiltonian, integrate_lagrangian, IntegratorOptions, Observable,
    Trajectory, TrajectoryKind, DEFAULT_SAMPLES,
};
use jetmech::kepler;
use jetmech::systems::{Builtin, System, SystemDefinition};

/// Directory searched for `<name>.json` system definitions.
const SYSTEMS_DIR_ENV: &str = "JETMECH_SYSTEMS_DIR";

#[derive(Parser)]
#[command(name = "jetmech", version, about = "Numerical checks for non-autonomous mechanics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect available systems.
    Systems {
        #[command(subcommand)]
        action: SystemsAction,
    },
    /// Run a randomized identity check and print its report.
    Check(CheckArgs),
    /// Integrate a trajectory and report drift of monitored quantities.
    Integrate(IntegrateArgs),
    /// Kepler invariants, action-angle charts and orbits.
    Kepler {
        #[command(subcommand)]
        action: KeplerAction,
    },
}

#[derive(Subcommand)]
enum SystemsAction {
    /// List built-ins and definitions in the systems directory.
    List {
        #[arg(long)]
        dir: Option<PathBuf>,
    },
    /// Print the definition of a system as JSON.
    Show {
        system: String,
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SystemArg {
    /// Built-in id, path to a definition file, or a name in the systems directory.
    #[arg(long)]
    system: String,
    #[arg(long)]
    dir: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    system: SystemArg,
    #[arg(long)]
    check: String,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Defaults to the check's own tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    symmetry: Option<String>,
    /// Named integral or expression over (t, q, p).
    #[arg(long)]
    integral: Option<String>,
    /// Write the report JSON here as well as to stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Picture {
    Hamiltonian,
    Lagrangian,
}

#[derive(Args)]
struct IntegrateArgs {
    #[command(flatten)]
    system: SystemArg,
    #[arg(long, value_enum, default_value = "hamiltonian")]
    picture: Picture,
    /// Comma-separated `q1..qn,p1..pn` (or `qt1..qtn` in the Lagrangian picture).
    #[arg(long, allow_hyphen_values = true)]
    state: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    t0: f64,
    #[arg(long, allow_hyphen_values = true)]
    t_end: f64,
    #[arg(long, default_value_t = 1e-10)]
    rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    atol: f64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    /// Monitored quantity: integral name, expression, `E:<frame>` or `J:<symmetry>`.
    #[arg(long = "monitor")]
    monitors: Vec<String>,
    #[arg(long, default_value_t = 1e-6)]
    drift_tol: f64,
    /// Trajectory CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Drift report JSON output.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct StateArg {
    /// Comma-separated `q1,q2,p1,p2`.
    #[arg(long, allow_hyphen_values = true)]
    state: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    t: f64,
}

#[derive(Subcommand)]
enum KeplerAction {
    Invariants {
        #[command(flatten)]
        at: StateArg,
        #[arg(long, default_value_t = kepler::DEFAULT_REGION_EPS)]
        eps: f64,
    },
    Chart {
        #[command(flatten)]
        at: StateArg,
    },
    /// Integrate and emit `t, cyclic, I, x1, angle` columns.
    Orbit {
        #[command(flatten)]
        at: StateArg,
        /// Span in periods (bound orbits only); ignored when `--t-end` is given.
        #[arg(long, default_value_t = 10.0)]
        periods: f64,
        #[arg(long, allow_hyphen_values = true)]
        t_end: Option<f64>,
        #[arg(long, default_value_t = 1e-10)]
        rtol: f64,
        #[arg(long, default_value_t = 1e-12)]
        atol: f64,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<jetmech::Error> for Failure {
    fn from(e: jetmech::Error) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Numeric(e.to_string())
        }
    }
}

type Outcome = Result<bool, Failure>;

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

fn systems_dir(dir: &Option<PathBuf>) -> Option<PathBuf> {
    dir.clone()
        .or_else(|| std::env::var_os(SYSTEMS_DIR_ENV).map(PathBuf::from))
}

fn read_definition(path: &Path) -> Result<SystemDefinition, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    Ok(SystemDefinition::from_json(&text)?)
}

fn load_system(arg: &SystemArg) -> Result<System, Failure> {
    if let Some(b) = Builtin::from_id(&arg.system) {
        return Ok(System::builtin(b));
    }
    let direct = PathBuf::from(&arg.system);
    let path = if direct.is_file() {
        direct
    } else {
        match systems_dir(&arg.dir).map(|d| d.join(format!("{}.json", arg.system))) {
            Some(p) if p.is_file() => p,
            _ => {
                return Err(Failure::Usage(format!(
                    "unknown system `{}`: not a built-in, a file, or a definition in ${SYSTEMS_DIR_ENV}",
                    arg.system
                )))
            }
        }
    };
    Ok(System::from_definition(&read_definition(&path)?)?)
}

fn parse_state(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Usage(format!("`{s}` in --state is not a number")))
        })
        .collect()
}

fn planar_state(at: &StateArg) -> Result<PhasePoint, Failure> {
    let x = parse_state(&at.state)?;
    if x.len() != 4 {
        return Err(Failure::Usage(format!(
            "--state needs q1,q2,p1,p2; got {} values",
            x.len()
        )));
    }
    Ok(PhasePoint::new(at.t, x[..2].to_vec(), x[2..].to_vec())?)
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable output"));
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| io_failure(path, e))
}

fn cmd_systems(action: SystemsAction) -> Outcome {
    match action {
        SystemsAction::List { dir } => {
            for b in Builtin::ALL {
                let s = System::builtin(b).summary();
                println!("{:<16} dim={} builtin   {}", b.id(), s.dim, b.description());
            }
            if let Some(dir) = systems_dir(&dir) {
                let mut files: Vec<PathBuf> = fs::read_dir(&dir)
                    .map_err(|e| io_failure(&dir, e))?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.extension().is_some_and(|x| x == "json"))
                    .collect();
                files.sort();
                for f in files {
                    match read_definition(&f).and_then(|d| Ok(System::from_definition(&d)?)) {
                        Ok(s) => println!(
                            "{:<16} dim={} {:<9} {}",
                            s.name,
                            s.dim,
                            s.kind(),
                            f.display()
                        ),
                        Err(Failure::Usage(m)) | Err(Failure::Numeric(m)) => {
                            eprintln!("skipping {}: {m}", f.display())
                        }
                    }
                }
            }
            Ok(true)
        }
        SystemsAction::Show { system, dir } => {
            let def = match Builtin::from_id(&system) {
                Some(b) => b.definition(),
                None => {
                    let s = load_system(&SystemArg {
                        system: system.clone(),
                        dir: dir.clone(),
                    })?;
                    print_json(&s.summary());
                    return Ok(true);
                }
            };
            println!("{}", def.to_json());
            Ok(true)
        }
    }
}

fn cmd_check(args: CheckArgs) -> Outcome {
    let sys = load_system(&args.system)?;
    let id: CheckId = args.check.parse()?;
    let opts = CheckOptions {
        samples: args.samples,
        tol: args.tol,
        seed: args.seed,
        symmetry: args.symmetry,
        integral: args.integral,
        sampling: None,
    };
    let report = run_check(&sys, id, &opts)?;
    let json = report.to_json();
    if let Some(path) = &args.report {
        write_file(path, format!("{json}\n").as_bytes())?;
    }
    println!("{json}");
    Ok(report.pass)
}

fn cmd_integrate(args: IntegrateArgs) -> Outcome {
    let sys = load_system(&args.system)?;
    let n = sys.dim;
    let x = parse_state(&args.state)?;
    if x.len() != 2 * n {
        return Err(Failure::Usage(format!(
            "--state needs {} values for a system of dimension {n}, got {}",
            2 * n,
            x.len()
        )));
    }
    let opts = IntegratorOptions::new(args.rtol, args.atol).with_samples(args.samples);
    let (traj, kind): (Trajectory, TrajectoryKind) = match args.picture {
        Picture::Hamiltonian => {
            let start = PhasePoint::new(args.t0, x[..n].to_vec(), x[n..].to_vec())?;
            (
                integrate_hamiltonian(&sys.hamiltonian, &start, args.t_end, &opts)?,
                TrajectoryKind::Hamiltonian,
            )
        }
        Picture::Lagrangian => {
            let start = JetPoint::new(args.t0, x[..n].to_vec(), x[n..].to_vec())?;
            (
                integrate_lagrangian(sys.require_lagrangian()?, &start, args.t_end, &opts)?,
                TrajectoryKind::Lagrangian,
            )
        }
    };
    let monitors = args
        .monitors
        .iter()
        .map(|m| sys.monitor(m, kind))
        .collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<&dyn Observable> = monitors.iter().map(|m| m.as_ref()).collect();
    if let Some(path) = &args.out {
        let mut buf = Vec::new();
        traj.write_csv_with(&refs, &mut buf)
            .map_err(|e| io_failure(path, e))?;
        write_file(path, &buf)?;
    }
    let report = drift_report(&traj, &refs, args.drift_tol);
    let json = serde_json::to_string_pretty(&report).expect("serializable report");
    if let Some(path) = &args.report {
        write_file(path, format!("{json}\n").as_bytes())?;
    }
    println!("{json}");
    let last = traj.last();
    eprintln!(
        "integrated to t = {} with {} accepted / {} rejected steps",
        last.t, traj.accepted, traj.rejected
    );
    Ok(report.pass())
}

fn cmd_kepler(action: KeplerAction) -> Outcome {
    match action {
        KeplerAction::Invariants { at, eps } => {
            let p = planar_state(&at)?;
            let inv = kepler::invariants(&p)?;
            let region = kepler::classify(&p, eps)?;
            print_json(&serde_json::json!({ "region": region, "invariants": inv }));
            Ok(true)
        }
        KeplerAction::Chart { at } => {
            let p = planar_state(&at)?;
            print_json(&kepler::action_angle(&p)?);
            Ok(true)
        }
        KeplerAction::Orbit {
            at,
            periods,
            t_end,
            rtol,
            atol,
            samples,
            out,
        } => {
            let p = planar_state(&at)?;
            let start = kepler::action_angle(&p)?;
            let span = match (t_end, start.period) {
                (Some(t), _) => t - at.t,
                (None, Some(period)) => periods * period,
                (None, None) => {
                    return Err(Failure::Usage(
                        "unbound orbits have no period; pass --t-end".into(),
                    ))
                }
            };
            let (_, h) = kepler::kepler_system(2)?;
            let opts = IntegratorOptions::new(rtol, atol).with_samples(samples);
            let traj = integrate_hamiltonian(&h, &p, at.t + span, &opts)?;
            let pts: Vec<PhasePoint> = (0..traj.samples.len())
                .map(|i| traj.phase_point(i).expect("Hamiltonian trajectory"))
                .collect();
            let series = kepler::chart_series(&pts)?;
            if let Some(path) = &out {
                let mut buf = Vec::new();
                series.write_csv(&mut buf).map_err(|e| io_failure(path, e))?;
                write_file(path, &buf)?;
            }
            print_json(&series.drift());
            Ok(true)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Systems { action } => cmd_systems(action),
        Command::Check(args) => cmd_check(args),
        Command::Integrate(args) => cmd_integrate(args),
        Command::Kepler { action } => cmd_kepler(action),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            2
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("error: {m}");
            3
        }
    };
    let _ = std::io::stdout().flush();
    ExitCode::from(code)
}
