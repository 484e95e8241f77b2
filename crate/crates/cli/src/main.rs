use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use filicyl::angle::BoundaryAngle;
use filicyl::blowup::CylinderPoint;
use filicyl::portrait::{render_csv, render_svg, PortraitOptions};
use filicyl::regularization::{compare_sliding_vs_reduced, deviation_csv, TransitionFunction};
use filicyl::report::{analysis_report, stability_json, to_pretty};
use filicyl::simulator::{integrate_cylinder, integrate_r3, IntegratorOptions, Trajectory};
use filicyl::stability::{stability_verdict, BoundaryContext, FieldClass, SweepOptions, Verdict};
use filicyl::system::{parse_system, DoubleDiscontinuitySystem, HalfPlane};
use filicyl::Error;

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_HYPOTHESIS: u8 = 3;
const EXIT_MIXED: u8 = 4;
const EXIT_INTEGRATION: u8 = 5;
const EXIT_UNSTABLE: u8 = 10;
const EXIT_UNDECIDED: u8 = 11;

#[derive(Parser)]
#[command(
    name = "filicyl",
    version,
    about = "Double-discontinuity Filippov systems on the blow-up cylinder"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Space {
    R3,
    Cylinder,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Transition {
    Sine,
    Cubic,
}

#[derive(Subcommand)]
enum Command {
    /// Per-stripe slow-manifold analysis as JSON.
    Analyze {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Semi-local structural stability verdict around one stripe border.
    Stability {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// One of 0, pi/2, pi, 3pi/2.
        #[arg(long)]
        theta0: String,
        /// Compact K as "x_min,x_max,delta".
        #[arg(long = "K", default_value = "-10,10,pi/4", allow_hyphen_values = true)]
        k: String,
        /// Initial conditions per axis of K for the numeric sweeps.
        #[arg(long, default_value_t = 5)]
        sweep_grid: usize,
        /// Print the full ledger to stdout.
        #[arg(long)]
        details: bool,
    },
    /// Integrate one trajectory in R³ or on the cylinder.
    Simulate {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// "x,y,z" in R³ or "x,theta,r" on the cylinder.
        #[arg(long, allow_hyphen_values = true)]
        ic: String,
        #[arg(long, value_enum, default_value = "r3")]
        space: Space,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[arg(long)]
        sample_dt: Option<f64>,
        #[arg(long, default_value_t = 1e-10)]
        rtol: f64,
        #[arg(long, default_value_t = 1e-12)]
        atol: f64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// SVG portrait of the cylinder or the raw grid as CSV.
    Portrait {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "svg")]
        format: Format,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        /// Axial window "x_min,x_max".
        #[arg(long, default_value = "-3,3", allow_hyphen_values = true)]
        x_range: String,
    },
    /// Deviation between sliding motion and its ε-regularizations.
    Regcheck {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Half-plane label: 12, 23, 34 or 14.
        #[arg(long, default_value = "14")]
        plane: String,
        #[arg(long, allow_hyphen_values = true)]
        ic: String,
        #[arg(long, default_value_t = 2.0)]
        t_end: f64,
        #[arg(long, default_value = "1e-1,1e-2,1e-3")]
        eps: String,
        #[arg(long, value_enum, default_value = "sine")]
        transition: Transition,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Json { .. } | Error::Parse { .. } => EXIT_PARSE,
            Error::WfhViolation | Error::SfhViolation(_) | Error::ConstantDegenerate => {
                EXIT_HYPOTHESIS
            }
            Error::StepFailure { .. } | Error::LeftSlidingRegion { .. } => EXIT_INTEGRATION,
            _ => EXIT_USAGE,
        };
        let mut message = e.to_string();
        if let Error::StepFailure { state, .. } = &e {
            let _ = write!(message, "; last good state {state:?}");
        }
        Failure { code, message }
    }
}

type Outcome = Result<u8, Failure>;

fn load(path: &Path) -> Result<DoubleDiscontinuitySystem, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    parse_system(&text).map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn write(path: &Path, body: &str) -> Result<(), Failure> {
    std::fs::write(path, body)
        .map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))
}

/// A number, or a multiple of π written as `pi`, `pi/4`, `3pi/2`, `-pi/4`.
fn parse_scalar(s: &str) -> Option<f64> {
    let t = s.trim().to_ascii_lowercase().replace([' ', '*'], "");
    if let Ok(v) = t.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let (neg, t) = match t.strip_prefix('-') {
        Some(rest) => (true, rest.to_string()),
        None => (false, t),
    };
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.to_string(), d.parse::<f64>().ok()?),
        None => (t, 1.0),
    };
    let coef = match num.strip_suffix("pi")? {
        "" => 1.0,
        c => c.parse::<f64>().ok()?,
    };
    let v = coef * std::f64::consts::PI / den;
    Some(if neg { -v } else { v })
}

fn parse_list(s: &str, n: Option<usize>, what: &str) -> Result<Vec<f64>, Failure> {
    let vals: Option<Vec<f64>> = s.split(',').map(parse_scalar).collect();
    match vals {
        Some(v) if n.is_none_or(|n| v.len() == n) && !v.is_empty() => Ok(v),
        _ => Err(Failure::new(
            EXIT_USAGE,
            format!("cannot read {what} from {s:?}"),
        )),
    }
}

fn cmd_analyze(system: &Path, out: &Path) -> Outcome {
    let sys = load(system)?;
    let a = analysis_report(&sys);
    write(out, &to_pretty(&a.json))?;
    if a.wfh_everywhere {
        Ok(EXIT_OK)
    } else {
        eprintln!("weak fundamental hypothesis fails on at least one stripe (flags in the report)");
        Ok(EXIT_HYPOTHESIS)
    }
}

fn cmd_stability(
    system: &Path,
    out: &Path,
    theta0: &str,
    k: &str,
    sweep_grid: usize,
    details: bool,
) -> Outcome {
    let sys = load(system)?;
    let theta0 = BoundaryAngle::parse(theta0).ok_or_else(|| {
        Failure::new(
            EXIT_USAGE,
            format!("theta0 must be 0, pi/2, pi or 3pi/2, got {theta0:?}"),
        )
    })?;
    let kv = parse_list(k, Some(3), "K")?;
    let ctx = BoundaryContext::new(theta0, kv[0], kv[1], kv[2])?;
    let opts = SweepOptions {
        grid: sweep_grid.max(2),
        ..SweepOptions::default()
    };
    let report = stability_verdict(&sys, &ctx, &opts)?;
    let body = to_pretty(&stability_json(&report));
    write(out, &body)?;
    println!("{}", report.one_line());
    if details {
        print!("{body}");
    }
    if report.class == FieldClass::Mixed {
        return Ok(EXIT_MIXED);
    }
    Ok(match report.verdict {
        Verdict::Stable => EXIT_OK,
        Verdict::Unstable => EXIT_UNSTABLE,
        Verdict::Undecided => EXIT_UNDECIDED,
    })
}

fn trajectory_csv(traj: &Trajectory, space: Space) -> String {
    let mut s = String::from(match space {
        Space::R3 => "t,x,y,z,event\n",
        Space::Cylinder => "t,x,theta,r,physical_time,event\n",
    });
    let mut events = traj.events.iter().peekable();
    let mut row = |t: f64, v: [f64; 3], pt: f64, ev: &str| {
        let _ = match space {
            Space::R3 => writeln!(s, "{t:e},{:e},{:e},{:e},{ev}", v[0], v[1], v[2]),
            Space::Cylinder => writeln!(s, "{t:e},{:e},{:e},{:e},{pt:e},{ev}", v[0], v[1], v[2]),
        };
    };
    for sample in &traj.samples {
        while let Some(e) = events.next_if(|e| e.t < sample.t) {
            row(e.t, e.state, f64::NAN, e.kind.label());
        }
        if let Some(e) = events.next_if(|e| e.t == sample.t) {
            row(sample.t, sample.state, sample.physical_time, e.kind.label());
        } else {
            row(sample.t, sample.state, sample.physical_time, "");
        }
    }
    for e in events {
        row(e.t, e.state, f64::NAN, e.kind.label());
    }
    s
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    system: &Path,
    out: &Path,
    ic: &str,
    space: Space,
    t_end: f64,
    sample_dt: Option<f64>,
    rtol: f64,
    atol: f64,
    format: Format,
) -> Outcome {
    let sys = load(system)?;
    let v = parse_list(ic, Some(3), "initial condition")?;
    let opts = IntegratorOptions {
        rel_tol: rtol,
        abs_tol: atol,
        sample_dt,
        ..IntegratorOptions::default()
    }
    .with_t_end(t_end);
    let traj = match space {
        Space::R3 => integrate_r3(&sys, [v[0], v[1], v[2]], &opts),
        Space::Cylinder => integrate_cylinder(&sys, CylinderPoint::new(v[0], v[1], v[2]), &opts),
    };
    let traj = match traj {
        Ok(t) => t,
        Err(e) => {
            let f = Failure::from(e);
            let _ = write(out, &format!("error,{}\n", f.message.replace(',', ";")));
            return Err(f);
        }
    };
    let body = match format {
        Format::Csv => trajectory_csv(&traj, space),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&traj)
                .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Svg => return Err(Failure::new(EXIT_USAGE, "simulate writes csv or json")),
    };
    write(out, &body)?;
    if let Some(kind) = traj.halted_by() {
        eprintln!("stopped at {}: {}", traj.last().t, kind.label());
    }
    Ok(EXIT_OK)
}

fn cmd_portrait(system: &Path, out: &Path, format: Format, grid: usize, x_range: &str) -> Outcome {
    let sys = load(system)?;
    let xr = parse_list(x_range, Some(2), "x-range")?;
    let opts = PortraitOptions {
        x_min: xr[0],
        x_max: xr[1],
        grid,
        ..PortraitOptions::default()
    };
    let body = match format {
        Format::Svg => render_svg(&sys, &opts)?,
        Format::Csv => render_csv(&sys, &opts)?,
        Format::Json => return Err(Failure::new(EXIT_USAGE, "portrait writes svg or csv")),
    };
    write(out, &body)?;
    Ok(EXIT_OK)
}

fn cmd_regcheck(
    system: &Path,
    out: &Path,
    plane: &str,
    ic: &str,
    t_end: f64,
    eps: &str,
    transition: Transition,
) -> Outcome {
    let sys = load(system)?;
    let hp = HalfPlane::parse(plane)
        .ok_or_else(|| Failure::new(EXIT_USAGE, format!("unknown half-plane {plane:?}")))?;
    let v = parse_list(ic, Some(3), "initial condition")?;
    let eps = parse_list(eps, None, "epsilon list")?;
    let tf = match transition {
        Transition::Sine => TransitionFunction::Sine,
        Transition::Cubic => TransitionFunction::Cubic,
    };
    let rows = compare_sliding_vs_reduced(&sys, hp, [v[0], v[1], v[2]], t_end, &eps, tf)?;
    write(out, &deviation_csv(&rows))?;
    Ok(EXIT_OK)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Analyze { system, out } => cmd_analyze(&system, &out),
        Command::Stability {
            system,
            out,
            theta0,
            k,
            sweep_grid,
            details,
        } => cmd_stability(&system, &out, &theta0, &k, sweep_grid, details),
        Command::Simulate {
            system,
            out,
            ic,
            space,
            t_end,
            sample_dt,
            rtol,
            atol,
            format,
        } => cmd_simulate(
            &system, &out, &ic, space, t_end, sample_dt, rtol, atol, format,
        ),
        Command::Portrait {
            system,
            out,
            format,
            grid,
            x_range,
        } => cmd_portrait(&system, &out, format, grid, &x_range),
        Command::Regcheck {
            system,
            out,
            plane,
            ic,
            t_end,
            eps,
            transition,
        } => cmd_regcheck(&system, &out, &plane, &ic, t_end, &eps, transition),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalars() {
        assert_eq!(parse_scalar("1.5"), Some(1.5));
        assert_eq!(parse_scalar("pi/4"), Some(std::f64::consts::FRAC_PI_4));
        assert_eq!(parse_scalar("-pi/4"), Some(-std::f64::consts::FRAC_PI_4));
        assert_eq!(parse_scalar("3pi/2"), Some(1.5 * std::f64::consts::PI));
        assert_eq!(parse_scalar("pie"), None);
    }
}
