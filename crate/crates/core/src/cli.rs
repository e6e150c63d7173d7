//! The `bilane` command line.
//!
//! Exit codes: 0 success (including undetermined classifications), 1 usage
//! or input error, 2 numerical failure or a violated identity.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::classify::{classify_profile, ClassifyOptions};
use crate::coeffs::{compute_coefficients, sign_report, verify_symbol_identity, Params, SignReport};
use crate::dopri::{IntegrateOptions, State};
use crate::energy::{audit_monotonicity, energy_levels};
use crate::error::Error;
use crate::io::{self, CoefficientsJson, EnergySidecar, TrajectorySidecar};
use crate::ode::{equilibrium_spectrum, integrate, shoot_regular_with, Equilibrium, Trajectory};
use crate::plot::line_plot;
use crate::rational::{parse_rational, to_f64, Rational};

pub const THREADS_ENV: &str = "BILANE_THREADS";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::SignLemmaViolated { .. } | Error::SpectrumMismatch(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn real_arg(s: &str) -> Result<f64, String> {
    rational_arg(s).map(|q| to_f64(&q))
}

fn state_arg(s: &str) -> Result<[f64; 4], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(format!("expected four comma-separated values w,w1,w2,w3; got {}", parts.len()));
    }
    let mut out = [0.0; 4];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = real_arg(part)?;
    }
    Ok(out)
}

#[derive(Debug, Parser)]
#[command(name = "bilane", version, about = "Emden-Fowler analysis of the biharmonic Lane-Emden equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print K0..K3, J1, gamma0 and C_pn.
    Coeffs(CoeffsArgs),
    /// Check the operator symbol against the composed bilaplacian.
    SymbolCheck(SymbolArgs),
    /// Integrate the radial Emden-Fowler ODE.
    Integrate(IntegrateArgs),
    /// Shoot a regular solution from near the origin.
    Shoot(ShootArgs),
    /// Audit energy monotonicity along a trajectory CSV.
    Energy(EnergyArgs),
    /// Classify a sampled radial profile.
    Classify(ClassifyArgs),
    /// Run one task over a range of exponents in parallel.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    /// Spatial dimension.
    #[arg(long)]
    pub n: u32,
    /// Exponent, decimal or num/den.
    #[arg(long, value_parser = rational_arg)]
    pub p: Rational,
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Print exact num/den values.
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub json: bool,
    /// Accept any p > 1 instead of only the open window.
    #[arg(long)]
    pub allow_endpoint: bool,
}

#[derive(Debug, Args)]
pub struct SymbolArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 32)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, value_parser = real_arg, default_value = "1e-10")]
    pub rtol: f64,
    #[arg(long, value_parser = real_arg, default_value = "1e-12")]
    pub atol: f64,
    #[arg(long, value_parser = real_arg, default_value = "1e6")]
    pub w_max: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_steps: usize,
}

impl SolverArgs {
    fn options(&self) -> IntegrateOptions {
        IntegrateOptions { rtol: self.rtol, atol: self.atol, w_max: self.w_max, max_steps: self.max_steps }
    }
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_parser = real_arg, default_value = "0", allow_hyphen_values = true)]
    pub t0: f64,
    #[arg(long, value_parser = real_arg, allow_hyphen_values = true)]
    pub t1: f64,
    /// Initial state w,w1,w2,w3.
    #[arg(long, value_parser = state_arg, allow_hyphen_values = true)]
    pub state: [f64; 4],
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Trajectory CSV; the sidecar goes next to it with a .json extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Plot of w against t.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ShootArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Value of u at the origin.
    #[arg(long, value_parser = real_arg)]
    pub u0: f64,
    #[arg(long, value_parser = real_arg, allow_hyphen_values = true)]
    pub t0: f64,
    #[arg(long, value_parser = real_arg, default_value = "0", allow_hyphen_values = true)]
    pub t1: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Trajectory CSV (t,w,w1,w2,w3).
    #[arg(long)]
    pub traj: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Plot of E against t.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Profile CSV (r,u).
    #[arg(long)]
    pub profile: PathBuf,
    #[arg(long, value_parser = real_arg, default_value = "1/3")]
    pub window_fraction: f64,
    #[arg(long, value_parser = real_arg, default_value = "0.05")]
    pub tol_limit: f64,
    #[arg(long, value_parser = real_arg, default_value = "0.01")]
    pub tol_zero: f64,
    #[arg(long, value_parser = real_arg, default_value = "0.05")]
    pub tol_rate: f64,
    /// Report JSON; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Plot of ln u against ln r.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepTask {
    Coeffs,
    Signs,
    Levels,
    Spectrum,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, value_parser = rational_arg)]
    pub p_min: Rational,
    #[arg(long, value_parser = rational_arg)]
    pub p_max: Rational,
    #[arg(long)]
    pub steps: usize,
    #[arg(long, value_enum)]
    pub task: SweepTask,
    /// Output directory; one JSON file per exponent.
    #[arg(long)]
    pub out: PathBuf,
}

/// A validated exponent sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub n: u32,
    pub p_min: Rational,
    pub p_max: Rational,
    pub steps: usize,
    pub task: SweepTask,
}

impl SweepSpec {
    pub fn new(n: u32, p_min: Rational, p_max: Rational, steps: usize, task: SweepTask) -> Result<Self, Error> {
        let (lo, hi) = Params::window(n).ok_or(Error::OutsideWindow { n, p: p_min.to_string() })?;
        for p in [&p_min, &p_max] {
            if !(&lo < p && p < &hi) {
                return Err(Error::OutsideWindow { n, p: p.to_string() });
            }
        }
        if p_min >= p_max {
            return Err(Error::InvalidIntegration(format!("p_min = {p_min} must be below p_max = {p_max}")));
        }
        if steps == 0 {
            return Err(Error::TooFewPoints { needed: 1, got: 0 });
        }
        Ok(SweepSpec { n, p_min, p_max, steps, task })
    }

    /// Evenly spaced exact exponents from `p_min` to `p_max`.
    pub fn exponents(&self) -> Vec<Rational> {
        if self.steps == 1 {
            return vec![self.p_min.clone()];
        }
        let span = &self.p_max - &self.p_min;
        let last = Rational::from_integer((self.steps as i64 - 1).into());
        (0..self.steps)
            .map(|i| &self.p_min + &span * Rational::from_integer((i as i64).into()) / &last)
            .collect()
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(&cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    match command {
        Command::Coeffs(a) => cmd_coeffs(a, out),
        Command::SymbolCheck(a) => cmd_symbol_check(a, out),
        Command::Integrate(a) => cmd_integrate(a, out, err),
        Command::Shoot(a) => cmd_shoot(a, out, err),
        Command::Energy(a) => cmd_energy(a, out, err),
        Command::Classify(a) => cmd_classify(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &[u8]) -> CliResult {
    std::fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| io_err(path, e))
}

fn emit(out: &mut dyn Write, text: &str) -> CliResult {
    out.write_all(text.as_bytes()).map_err(|e| CliError::Usage(e.to_string()))
}

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

#[derive(Serialize)]
struct CoeffsOutput {
    #[serde(flatten)]
    coefficients: CoefficientsJson,
    signs: Option<SignReport>,
}

pub fn cmd_coeffs(args: &CoeffsArgs, out: &mut dyn Write) -> CliResult {
    let params = Params::new(args.params.n, args.params.p.clone(), !args.allow_endpoint)?;
    let coeffs = compute_coefficients(&params);
    let signs = if params.in_open_window() { Some(sign_report(&params)?) } else { None };
    if args.json {
        let body = CoeffsOutput { coefficients: CoefficientsJson::from(&coeffs), signs };
        return emit(out, &io::to_json(&body));
    }
    let f = coeffs.floats();
    let show = |q: &Rational, x: f64| if args.exact { q.to_string() } else { format!("{x:?}") };
    let mut text = format!("n = {}\np = {}\n", params.n(), params.p());
    for (name, q, x) in [
        ("K0", &coeffs.k0, f.k0),
        ("K1", &coeffs.k1, f.k1),
        ("K2", &coeffs.k2, f.k2),
        ("K3", &coeffs.k3, f.k3),
        ("J1", &coeffs.j1, f.j1),
        ("gamma0", &coeffs.gamma0, f.gamma0),
    ] {
        text += &format!("{name} = {}\n", show(q, x));
    }
    match f.c_pn {
        Some(c) => text += &format!("C_pn = {c:?}\n"),
        None => text += "C_pn = undefined (K0 <= 0)\n",
    }
    if let Some(s) = signs {
        text += &format!("signs: K0 {} K1 {} K2 {} K3 {} J1 {}\n", s.k0, s.k1, s.k2, s.k3, s.j1);
    }
    emit(out, &text)
}

pub fn cmd_symbol_check(args: &SymbolArgs, out: &mut dyn Write) -> CliResult {
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let params = Params::relaxed(args.params.n, args.params.p.clone())?;
    let report = verify_symbol_identity(&params, args.trials, args.seed);
    if let Some(m) = &report.first_mismatch {
        return Err(CliError::Numerical(format!(
            "symbol mismatch at m = {}, k = {}: lhs = {}, rhs = {}",
            m.m, m.k, m.lhs, m.rhs
        )));
    }
    emit(out, &format!("{}/{} exact\n", report.exact_trials, report.trials))
}

fn emit_trajectory(
    traj: &Trajectory,
    sidecar: &TrajectorySidecar,
    out_path: Option<&Path>,
    svg: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult {
    let mut csv = Vec::new();
    io::write_trajectory(&mut csv, traj)?;
    let json = io::to_json(sidecar);
    match out_path {
        Some(path) => {
            write_file(path, &csv)?;
            write_file(&sidecar_path(path), json.as_bytes())?;
        }
        None => {
            out.write_all(&csv).map_err(|e| CliError::Usage(e.to_string()))?;
            err.write_all(json.as_bytes()).map_err(|e| CliError::Usage(e.to_string()))?;
        }
    }
    if let Some(path) = svg {
        let pts: Vec<(f64, f64)> = traj.states.iter().map(|s| (s.t, s.y[0])).collect();
        write_file(path, line_plot(&pts, "w against t", "t", "w").as_bytes())?;
    }
    if traj.termination.is_failure() {
        return Err(CliError::Numerical(format!(
            "integration stopped: {:?} at t = {}",
            traj.termination,
            traj.states.last().map_or(f64::NAN, |s| s.t)
        )));
    }
    Ok(())
}

fn dynamics_params(args: &ParamArgs) -> CliResult<Params> {
    Ok(Params::relaxed(args.n, args.p.clone())?)
}

pub fn cmd_integrate(args: &IntegrateArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let params = dynamics_params(&args.params)?;
    let traj = integrate(&params, State::new(args.t0, args.state), args.t1, &args.solver.options())?;
    let sidecar = TrajectorySidecar::new(&traj);
    emit_trajectory(&traj, &sidecar, args.out.as_deref(), args.svg.as_deref(), out, err)
}

pub fn cmd_shoot(args: &ShootArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let params = dynamics_params(&args.params)?;
    let traj = shoot_regular_with(&params, args.u0, args.t0, args.t1, &args.solver.options())?;
    let mut sidecar = TrajectorySidecar::new(&traj);
    let (lo, hi) = if args.t1 > args.t0 { (args.t0, args.t0 + 5.0) } else { (args.t0 - 5.0, args.t0) };
    sidecar.initial_rate = traj.log_slope(lo, hi).map(|f| f.slope);
    emit_trajectory(&traj, &sidecar, args.out.as_deref(), args.svg.as_deref(), out, err)
}

pub fn cmd_energy(args: &EnergyArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let params = dynamics_params(&args.params)?;
    let traj = io::read_trajectory(open(&args.traj)?, &params).map_err(|e| io_err(&args.traj, e))?;
    let audit = audit_monotonicity(&params, &traj)?;
    let mut csv = Vec::new();
    io::write_energy(&mut csv, &audit)?;
    let json = io::to_json(&EnergySidecar::from(&audit));
    match &args.out {
        Some(path) => {
            write_file(path, &csv)?;
            write_file(&sidecar_path(path), json.as_bytes())?;
            emit(out, &json)?;
        }
        None => {
            out.write_all(&csv).map_err(|e| CliError::Usage(e.to_string()))?;
            err.write_all(json.as_bytes()).map_err(|e| CliError::Usage(e.to_string()))?;
        }
    }
    if let Some(path) = &args.svg {
        let pts: Vec<(f64, f64)> = audit.records.iter().map(|r| (r.t, r.energy)).collect();
        write_file(path, line_plot(&pts, "E against t", "t", "E").as_bytes())?;
    }
    Ok(())
}

pub fn cmd_classify(args: &ClassifyArgs, out: &mut dyn Write) -> CliResult {
    let params = Params::strict(args.params.n, args.params.p.clone())?;
    let profile = io::read_radial_profile(open(&args.profile)?, &params).map_err(|e| io_err(&args.profile, e))?;
    let options = ClassifyOptions {
        window_fraction: args.window_fraction,
        tol_limit: args.tol_limit,
        tol_zero: args.tol_zero,
        tol_rate: args.tol_rate,
    };
    let report = classify_profile(&params, &profile, &options)?;
    let json = io::to_json(&report);
    match &args.out {
        Some(path) => write_file(path, json.as_bytes())?,
        None => emit(out, &json)?,
    }
    if let Some(path) = &args.svg {
        let pts: Vec<(f64, f64)> =
            profile.samples().iter().filter(|s| s.1 > 0.0).map(|&(r, u)| (r.ln(), u.ln())).collect();
        write_file(path, line_plot(&pts, "ln u against ln r", "ln r", "ln u").as_bytes())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct LevelsOutput {
    n: u32,
    p: String,
    level_zero: f64,
    level_singular: f64,
}

#[derive(Serialize)]
struct SpectrumOutput {
    n: u32,
    p: String,
    zero_exact: Vec<String>,
    zero: Vec<[f64; 2]>,
    constant_value: f64,
    constant: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct SignsOutput {
    n: u32,
    p: String,
    #[serde(flatten)]
    signs: SignReport,
}

fn sweep_task(task: SweepTask, params: &Params) -> CliResult<String> {
    let n = params.n();
    let p = params.p().to_string();
    Ok(match task {
        SweepTask::Coeffs => {
            let body = CoeffsOutput {
                coefficients: CoefficientsJson::from(&compute_coefficients(params)),
                signs: Some(sign_report(params)?),
            };
            io::to_json(&body)
        }
        SweepTask::Signs => io::to_json(&SignsOutput { n, p, signs: sign_report(params)? }),
        SweepTask::Levels => {
            let l = energy_levels(params)?;
            io::to_json(&LevelsOutput { n, p, level_zero: l.level_zero, level_singular: l.level_singular })
        }
        SweepTask::Spectrum => {
            let zero = equilibrium_spectrum(params, Equilibrium::Zero)?;
            let constant = equilibrium_spectrum(params, Equilibrium::Constant)?;
            io::to_json(&SpectrumOutput {
                n,
                p,
                zero_exact: zero.exact_roots.iter().flatten().map(|q| q.to_string()).collect(),
                zero: zero.roots.iter().map(|z| [z.re, z.im]).collect(),
                constant_value: constant.value,
                constant: constant.roots.iter().map(|z| [z.re, z.im]).collect(),
            })
        }
    })
}

/// Worker count from `BILANE_THREADS`, else the available parallelism.
pub fn sweep_threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&v| v > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> CliResult {
    let spec = SweepSpec::new(args.n, args.p_min.clone(), args.p_max.clone(), args.steps, args.task)?;
    std::fs::create_dir_all(&args.out).map_err(|e| io_err(&args.out, e))?;
    let jobs: Vec<(usize, Rational)> = spec.exponents().into_iter().enumerate().collect();
    let workers = sweep_threads().min(jobs.len()).max(1);
    let task_name = match spec.task {
        SweepTask::Coeffs => "coeffs",
        SweepTask::Signs => "signs",
        SweepTask::Levels => "levels",
        SweepTask::Spectrum => "spectrum",
    };

    let results: Vec<CliResult<PathBuf>> = std::thread::scope(|scope| {
        let chunks: Vec<Vec<(usize, Rational)>> =
            (0..workers).map(|w| jobs.iter().skip(w).step_by(workers).cloned().collect()).collect();
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|chunk| {
                let dir = &args.out;
                scope.spawn(move || {
                    chunk
                        .into_iter()
                        .map(|(i, p)| {
                            let params = Params::strict(spec.n, p)?;
                            let body = sweep_task(spec.task, &params)?;
                            let path = dir.join(format!("{task_name}_n{}_{i:04}.json", spec.n));
                            write_file(&path, body.as_bytes())?;
                            Ok((i, path))
                        })
                        .collect::<Vec<CliResult<(usize, PathBuf)>>>()
                })
            })
            .collect();
        let mut all: Vec<CliResult<(usize, PathBuf)>> =
            handles.into_iter().flat_map(|h| h.join().expect("sweep worker panicked")).collect();
        all.sort_by_key(|r| r.as_ref().map_or(usize::MAX, |(i, _)| *i));
        all.into_iter().map(|r| r.map(|(_, p)| p)).collect()
    });

    let mut first_error = None;
    for r in results {
        match r {
            Ok(path) => emit(out, &format!("{}\n", path.display()))?,
            Err(e) => {
                if first_error.is_none() {
                    first_error = Some(e);
                }
            }
        }
    }
    match first_error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
