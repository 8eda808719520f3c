//! `pwshadow`: command-line access to the exact circle-map toolkit.
//!
//! Exit codes: 0 on success, 1 when a verification fails, 2 on bad input or an
//! unmet precondition.

mod files;
mod plot;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use pwshadow::circlemap::{CirclePoint, Lift};
use pwshadow::families::{check_f0, make_beta, make_psi, snap_to_f0, BetaParams, PsiParams};
use pwshadow::measure::{is_preserving, lebesgueize, outer_homeo};
use pwshadow::perturb::{perturb_pipeline, refine_against, verify_conditions, PerturbedSystem};
use pwshadow::seeds::{fig2_expected_g_slopes, fig2_expected_h_slopes, fig2_left_map, seed_maps};
use pwshadow::shadowing::{
    gen_asymptotic_orbit, gen_pseudo_orbit_with, noise_by_name, slimit_trace_with, verify_trace, PointChoice,
    PseudoOrbit, Schedule, TraceResult, Tracer,
};
use pwshadow::{Error, PiRational};

use files::{load_map, load_system, num, read_toml, to_toml, MapFile, OrbitFile, SystemFile};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failed(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::ConditionFailed { .. } | Error::Covering { .. } => CliError::Failed(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

type CliResult = Result<(), CliError>;

#[derive(Parser)]
#[command(name = "pwshadow", version, about = "Exact piecewise-affine circle maps and pseudo-orbit tracing")]
struct Cli {
    /// Where to write the full report when a verification fails.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Choice {
    Midpoint,
    Minimax,
}

impl From<Choice> for PointChoice {
    fn from(c: Choice) -> Self {
        match c {
            Choice::Midpoint => PointChoice::Midpoint,
            Choice::Minimax => PointChoice::Minimax,
        }
    }
}

/// Map arguments accept a map file or `seed:NAME` for a bundled map.
#[derive(Subcommand)]
enum Command {
    /// Zigzag map with the given number of laps through the given points.
    MakeBeta {
        #[arg(long)]
        laps: usize,
        /// Comma-separated breakpoints from 0 to 1; equispaced when omitted.
        #[arg(long, value_delimiter = ',')]
        points: Option<Vec<String>>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Boundary-pinch map from its five free parameters.
    MakePsi {
        #[arg(long)]
        eps: String,
        #[arg(long)]
        a_prime: String,
        #[arg(long)]
        d: String,
        #[arg(long)]
        e: String,
        #[arg(long)]
        h_prime: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Move a map into normal form by a small perturbation.
    SnapF0 {
        map: String,
        #[arg(long, default_value = "1/100")]
        eps: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decide whether a map preserves Lebesgue measure.
    CheckPreserving { map: String },
    /// Compose a map with its distribution function to make it preserving.
    Lebesgueize {
        map: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build a certified perturbed system within `eps` of a preserving map.
    Perturb {
        map: String,
        #[arg(long)]
        eps: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build a finer system compatible with a coarse one.
    Refine {
        coarse: PathBuf,
        #[arg(long)]
        eps: String,
        /// Map to refine; defaults to the coarse system's own map.
        #[arg(long)]
        map: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a seeded pseudo-orbit of a system's map.
    Orbit {
        system: PathBuf,
        #[arg(long)]
        x0: String,
        #[arg(long, default_value_t = 100)]
        len: usize,
        /// Step error bound; defaults to `255/256` of the system's delta.
        #[arg(long)]
        delta: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "uniform")]
        noise: String,
        /// Halve the bound every this many steps.
        #[arg(long)]
        geometric_block: Option<usize>,
        /// Map generating the orbit; defaults to the system's map.
        #[arg(long)]
        map: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Find a true orbit shadowing a pseudo-orbit.
    Trace {
        system: PathBuf,
        orbit: PathBuf,
        #[arg(long)]
        map: Option<String>,
        #[arg(long, value_enum, default_value = "midpoint")]
        choice: Choice,
        /// Per-step CSV; stdout when omitted.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Two-scale tracing of an orbit whose errors shrink.
    SlimitTrace {
        coarse: PathBuf,
        fine: PathBuf,
        orbit: PathBuf,
        #[arg(long, value_enum, default_value = "midpoint")]
        choice: Choice,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Re-check every condition of a system, and optionally a tracing point.
    Verify {
        system: PathBuf,
        #[arg(long, requires = "point")]
        orbit: Option<PathBuf>,
        #[arg(long, requires = "orbit")]
        point: Option<String>,
    },
    /// Draw a map, or a system's map over its partition, as SVG.
    Plot {
        /// Map file, `seed:NAME`, or a system file with `--system`.
        input: String,
        #[arg(long)]
        system: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Reproduce the bundled figure example and its slopes.
    DemoFig2 {
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

fn emit(output: Option<&Path>, text: &str) -> CliResult {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_map(output: Option<&Path>, header: &str, l: &Lift) -> CliResult {
    emit(output, &to_toml(header, &MapFile::from_lift(l)))
}

fn emit_system(output: Option<&Path>, header: &str, s: &PerturbedSystem) -> CliResult {
    emit(output, &to_toml(header, &SystemFile::from_system(s)))
}

fn list(v: &[PiRational]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

fn write_csv(path: Option<&Path>, header: &str, orbit: &PseudoOrbit, res: &TraceResult) -> CliResult {
    let mut buf: Vec<u8> = header.as_bytes().to_vec();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let io = |e: csv::Error| CliError::Usage(e.to_string());
        w.write_record(["step", "x", "step_error", "trace_error"]).map_err(io)?;
        for s in 0..=res.horizon {
            let step = if s == 0 { String::new() } else { format!("{:e}", orbit.step_errors[s - 1].to_f64()) };
            let x = format!("{:.17}", orbit.points[s].coord().to_f64());
            let err = format!("{:e}", res.forward_errors[s].to_f64());
            w.write_record([s.to_string(), x, step, err]).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match path {
        Some(p) => fs::write(p, buf).map_err(|e| CliError::Usage(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(&buf).map_err(|e| CliError::Usage(e.to_string())),
    }
}

/// Exact literal when short, otherwise the float value and size.
fn show(x: &PiRational) -> String {
    let text = x.to_string();
    if text.len() <= 80 {
        format!("{text} ({:.6e})", x.to_f64())
    } else {
        format!("{:.17e} (exact form: {} bits)", x.to_f64(), x.size_bits())
    }
}

fn summarize(res: &TraceResult, mesh: &PiRational) -> String {
    format!("tracing point {}\nsup error {}; mesh {}\n", show(res.tracing_point.coord()), show(&res.sup_error()), show(mesh))
}

fn run(cmd: Command) -> CliResult {
    match cmd {
        Command::MakeBeta { laps, points, output } => {
            let params = match points {
                Some(p) => BetaParams::new(laps, p.iter().map(|s| num(s)).collect::<Result<_, _>>()?)?,
                None => BetaParams::equispaced(laps)?,
            };
            let degree = if laps % 2 == 1 { 1 } else { 0 };
            emit_map(output.as_deref(), &format!("# zigzag map, {laps} laps\n"), &Lift::from_map(make_beta(&params), degree)?)
        }
        Command::MakePsi { eps, a_prime, d, e, h_prime, output } => {
            let p = PsiParams::new(num(&eps)?, num(&a_prime)?, num(&d)?, num(&e)?, num(&h_prime)?)?;
            emit_map(output.as_deref(), "# boundary-pinch map\n", &Lift::from_map(make_psi(&p), 1)?)
        }
        Command::SnapF0 { map, eps, output } => {
            let l = snap_to_f0(&load_map(&map)?, &num(&eps)?)?;
            emit_map(output.as_deref(), &format!("# {map} moved into normal form, eps {eps}\n"), &l)
        }
        Command::CheckPreserving { map } => {
            let l = load_map(&map)?;
            let cert = is_preserving(&l)?;
            println!("critical values: {}", list(&cert.critical_values));
            for (y, sum) in &cert.witnesses {
                println!("band at {y}: reciprocal slope sum {sum}");
            }
            let f0 = check_f0(&l);
            println!("normal form: {}", if f0.verdict { "yes" } else { "no" });
            if cert.verdict {
                println!("preserving");
                Ok(())
            } else {
                Err(CliError::Failed("not measure preserving".into()))
            }
        }
        Command::Lebesgueize { map, output } => {
            let l = load_map(&map)?;
            let g = lebesgueize(&l)?;
            let h = outer_homeo(&l)?;
            let header = format!("# {map} made preserving; outer homeomorphism slopes: {}\n", list(h.as_map().slopes()));
            emit_map(output.as_deref(), &header, &g)
        }
        Command::Perturb { map, eps, output } => {
            let mut sys = perturb_pipeline(&load_map(&map)?, &num(&eps)?)?;
            sys.label = format!("{map} at eps {eps}");
            eprintln!("{} arcs, mesh {}, delta {}", sys.q.len(), sys.mesh(), sys.delta);
            emit_system(output.as_deref(), &format!("# certified system for {map}, eps {eps}\n"), &sys)
        }
        Command::Refine { coarse, eps, map, output } => {
            let cs = load_system(&coarse)?;
            let g = match &map {
                Some(m) => load_map(m)?,
                None => cs.theta.clone(),
            };
            let mut fine = refine_against(&cs, &g, &num(&eps)?)?;
            fine.label = format!("refinement of {}", cs.label);
            eprintln!("{} arcs, mesh {}, delta {}", fine.q.len(), fine.mesh(), fine.delta);
            emit_system(output.as_deref(), &format!("# refinement of {}\n", coarse.display()), &fine)
        }
        Command::Orbit { system, x0, len, delta, seed, noise, geometric_block, map, output } => {
            let sys = load_system(&system)?;
            let tau = match &map {
                Some(m) => load_map(m)?,
                None => sys.theta.clone(),
            };
            let delta = match delta {
                Some(d) => num(&d)?,
                None => sys.delta.scale(&BigInt::from(255), &BigInt::from(256)),
            };
            let model = noise_by_name(&noise).ok_or_else(|| CliError::Usage(format!("unknown noise model {noise:?}")))?;
            let x0 = CirclePoint::new(&num(&x0)?);
            let orbit = match geometric_block {
                Some(block) if noise == "uniform" => {
                    gen_asymptotic_orbit(&tau, &x0, &delta, &Schedule::Geometric { block, floor: None }, len, seed)?
                }
                Some(_) => return Err(CliError::Usage("shrinking orbits use uniform noise".into())),
                None => gen_pseudo_orbit_with(&tau, &x0, &delta, len, seed, model.as_ref()),
            };
            let header = format!("# pseudo-orbit, seed {seed}, noise {noise}, {len} points\n");
            emit(output.as_deref(), &to_toml(&header, &OrbitFile::from_orbit(&orbit, seed, &noise)))
        }
        Command::Trace { system, orbit, map, choice, csv } => {
            let sys = load_system(&system)?;
            let tau = match &map {
                Some(m) => load_map(m)?,
                None => sys.theta.clone(),
            };
            let file: OrbitFile = read_toml(&orbit)?;
            let o = file.to_orbit(&tau)?;
            let res = Tracer::new(&sys, &tau)?.trace_with(&o, o.len() - 1, choice.into())?;
            let mesh = sys.mesh();
            eprint!("{}", summarize(&res, &mesh));
            write_csv(csv.as_deref(), &format!("# trace, orbit seed {}\n", file.seed), &o, &res)?;
            if res.sup_error() < mesh {
                Ok(())
            } else {
                Err(CliError::Failed("tracing error reached the mesh".into()))
            }
        }
        Command::SlimitTrace { coarse, fine, orbit, choice, csv } => {
            let (cs, fs) = (load_system(&coarse)?, load_system(&fine)?);
            let tau = fs.theta.clone();
            let file: OrbitFile = read_toml(&orbit)?;
            let o = file.to_orbit(&tau)?;
            let (ct, ft) = (Tracer::new(&cs, &tau)?, Tracer::new(&fs, &tau)?);
            let res = slimit_trace_with(&ct, &ft, &o, o.len() - 1, choice.into())?;
            let switch = res.phase_switch.unwrap_or(0);
            eprint!("{}", summarize(&res, &cs.mesh()));
            eprintln!("handover at step {switch}{}", if res.second_case { " (one step late)" } else { "" });
            write_csv(csv.as_deref(), &format!("# two-scale trace, orbit seed {}, handover {switch}\n", file.seed), &o, &res)?;
            let report = verify_trace(&tau, &res.tracing_point, &o, &cs.mesh(), Some((switch + 1, &fs.mesh())));
            if report.passed() {
                Ok(())
            } else {
                Err(CliError::Failed(report.to_string()))
            }
        }
        Command::Verify { system, orbit, point } => {
            let sys = load_system(&system)?;
            let report = verify_conditions(&sys);
            print!("{report}");
            if !report.all_passed() {
                return Err(CliError::Failed(format!("condition check failed\n{report}")));
            }
            if let (Some(orbit), Some(point)) = (orbit, point) {
                let o = read_toml::<OrbitFile>(&orbit)?.to_orbit(&sys.theta)?;
                let r = verify_trace(&sys.theta, &CirclePoint::new(&num(&point)?), &o, &sys.mesh(), None);
                println!("{r}");
                if !r.passed() {
                    return Err(CliError::Failed("tracing point does not shadow the orbit".into()));
                }
            }
            Ok(())
        }
        Command::Plot { input, system, output } => {
            let svg = if system {
                let sys = load_system(Path::new(&input))?;
                let marks: Vec<f64> = sys.q.points().iter().map(PiRational::to_f64).collect();
                plot::render(&sys.label, &[(&sys.sigma, "#9ab"), (&sys.theta, "#c22")], &marks)
            } else {
                let l = load_map(&input)?;
                let marks: Vec<f64> = l.breakpoints().iter().map(PiRational::to_f64).collect();
                plot::render(&input, &[(&l, "#c22")], &marks)
            };
            emit(output.as_deref(), &svg)
        }
        Command::DemoFig2 { svg } => {
            let f = fig2_left_map();
            let h = outer_homeo(&f)?;
            let g = lebesgueize(&f)?;
            let (hs, gs) = (h.as_map().slopes().to_vec(), g.slopes().to_vec());
            let (he, ge) = (fig2_expected_h_slopes(), fig2_expected_g_slopes());
            let preserving = is_preserving(&g)?.verdict;
            let quoted = |v: &[PiRational]| v.iter().map(|x| format!("\"{x}\"")).collect::<Vec<_>>().join(", ");
            println!("# figure example: outer homeomorphism h and preserving map G = h o F");
            for (name, got, want) in [("h", &hs, &he), ("G", &gs, &ge)] {
                println!("[{name}]\ncomputed = [{}]\nexpected = [{}]\nequal = {}\n", quoted(got), quoted(want), got == want);
            }
            println!("[G_preserving]\nequal = {preserving}");
            if let Some(p) = svg {
                let h_lift = h.to_lift()?;
                let marks: Vec<f64> = f.breakpoints().iter().map(PiRational::to_f64).collect();
                emit(Some(&p), &plot::render("figure example", &[(&f, "#9ab"), (&h_lift, "#2a2"), (&g, "#c22")], &marks))?;
            }
            if hs == he && gs == ge && preserving {
                Ok(())
            } else {
                Err(CliError::Failed("slopes differ from the expected figure".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Failed(m)) => {
            match &cli.report {
                Some(p) => match fs::write(p, format!("{m}\n")) {
                    Ok(()) => eprintln!("verification failed; report written to {}", p.display()),
                    Err(e) => eprintln!("verification failed: {m}\n(could not write {}: {e})", p.display()),
                },
                None => eprintln!("verification failed: {m}"),
            }
            ExitCode::from(1)
        }
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            if m.starts_with("unknown seed map") {
                let names: Vec<&str> = seed_maps().iter().map(|s| s.name()).collect();
                eprintln!("bundled maps: {}", names.join(", "));
            }
            eprintln!("run `pwshadow --help` for usage");
            ExitCode::from(2)
        }
    }
}
