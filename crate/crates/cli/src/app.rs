use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hbvm_core::integrator::{
    self, convergence_order, IntegrationFailure, SolveSettings, Trajectory,
};
use hbvm_core::spectral::isospectral_report;
use hbvm_core::{Builtin, Error, HamiltonianSystem, HbvmTableau, NodeKind};
use serde_json::{json, Value};

use crate::export;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum ExitStatus {
    Success = 0,
    /// Bad arguments, or arguments the library rejected.
    Validation = 1,
    /// Nonlinear solver, eigensolver or other numerical failure.
    Numerical = 2,
    /// `spectrum` found the eigenvalues of `A` and `X_s` do not match.
    Mismatch = 3,
}

#[derive(Debug, Parser)]
#[command(
    name = "hbvm",
    version,
    about = "Energy-preserving HBVM(k,s) Runge-Kutta methods"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Butcher tableau of HBVM(k,s) as JSON.
    Tableau {
        #[command(flatten)]
        method: MethodArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Spectrum of A against that of X_s as JSON; exit status 3 on mismatch.
    Spectrum {
        #[command(flatten)]
        method: MethodArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Integrate a problem and record state and energy drift at every step.
    Integrate {
        #[command(flatten)]
        method: MethodArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Global error at --t-end for h, h/2, h/4, … and the fitted order.
    Order {
        #[command(flatten)]
        method: MethodArgs,
        #[arg(long, value_parser = problem_parser())]
        problem: Builtin,
        /// Largest step size.
        #[arg(long, default_value_t = 0.1)]
        h: f64,
        /// Number of step sizes, each half the previous one.
        #[arg(long, default_value_t = 5)]
        levels: usize,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Maximum energy drift of HBVM(k,s) for k from s (or the smallest valid k) to --k-max.
    Conserve {
        #[arg(long)]
        s: usize,
        #[arg(long, default_value_t = 12)]
        k_max: usize,
        #[arg(long, value_enum, default_value_t = Nodes::Gauss)]
        nodes: Nodes,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Nodes {
    Gauss,
    Lobatto,
}

impl From<Nodes> for NodeKind {
    fn from(n: Nodes) -> Self {
        match n {
            Nodes::Gauss => NodeKind::Gauss,
            Nodes::Lobatto => NodeKind::Lobatto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn problem_parser() -> impl TypedValueParser<Value = Builtin> {
    PossibleValuesParser::new(Builtin::ALL.map(Builtin::as_str))
        .map(|name| name.parse::<Builtin>().expect("restricted to known names"))
}

#[derive(Debug, Args)]
pub struct MethodArgs {
    /// Number of quadrature nodes.
    #[arg(long)]
    pub k: usize,
    /// Degree of the polynomial approximation.
    #[arg(long)]
    pub s: usize,
    #[arg(long, value_enum, default_value_t = Nodes::Gauss)]
    pub nodes: Nodes,
}

impl MethodArgs {
    fn tableau(&self) -> Result<HbvmTableau, Error> {
        HbvmTableau::new(self.nodes.into(), self.k, self.s)
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_parser = problem_parser())]
    pub problem: Builtin,
    #[arg(long, default_value_t = 0.1)]
    pub h: f64,
    #[arg(long, default_value_t = 500)]
    pub steps: usize,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Relative fixed-point tolerance.
    #[arg(long, default_value_t = 1e-14)]
    pub tol: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
}

impl SolverArgs {
    fn settings(&self) -> SolveSettings {
        SolveSettings {
            tol: self.tol,
            max_iter: self.max_iter,
            ..Default::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

/// A failed command: what to print and how to exit.
#[derive(Debug)]
struct Failure {
    status: ExitStatus,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::SingularMatrix { .. }
            | Error::EigenNoConvergence { .. }
            | Error::QuadratureNoConvergence { .. }
            | Error::SolverNoConvergence { .. }
            | Error::DegenerateFit { .. }
            | Error::Postcondition { .. } => ExitStatus::Numerical,
            Error::DimensionMismatch { .. }
            | Error::InsufficientExactness { .. }
            | Error::Domain(_)
            | Error::UnknownProblem(_) => ExitStatus::Validation,
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

impl From<IntegrationFailure> for Failure {
    fn from(f: IntegrationFailure) -> Self {
        let status = Failure::from(f.error.clone()).status;
        Failure {
            status,
            message: f.to_string(),
        }
    }
}

fn io_failure(path: &Option<PathBuf>, e: impl std::fmt::Display) -> Failure {
    let target = path.as_ref().map_or_else(
        || "standard output".to_string(),
        |p| p.display().to_string(),
    );
    Failure {
        status: ExitStatus::Validation,
        message: format!("cannot write {target}: {e}"),
    }
}

fn open(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| io_failure(path, e))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(
    path: &Option<PathBuf>,
    f: impl FnOnce(&mut dyn Write) -> Result<(), String>,
) -> Result<(), Failure> {
    let mut w = open(path)?;
    f(&mut w).map_err(|e| io_failure(path, e))?;
    w.flush().map_err(|e| io_failure(path, e))
}

fn emit_json(path: &Option<PathBuf>, v: &Value) -> Result<(), Failure> {
    emit(path, |w| {
        export::write_json(w, v).map_err(|e| e.to_string())
    })
}

fn meta(
    problem: Builtin,
    kind: NodeKind,
    k: Option<usize>,
    s: usize,
    settings: &SolveSettings,
) -> Value {
    json!({
        "problem": problem.as_str(),
        "kind": kind.as_str(),
        "k": k,
        "s": s,
        "tol": export::json_real(settings.tol),
        "max_iter": settings.max_iter,
    })
}

fn cmd_tableau(method: &MethodArgs, output: &Option<PathBuf>) -> Result<ExitStatus, Failure> {
    let t = method.tableau()?;
    emit_json(output, &export::tableau_json(&t))?;
    Ok(ExitStatus::Success)
}

fn cmd_spectrum(method: &MethodArgs, output: &Option<PathBuf>) -> Result<ExitStatus, Failure> {
    let t = method.tableau()?;
    let r = isospectral_report(&t)?;
    emit_json(output, &export::spectrum_json(&t, &r))?;
    if r.matched {
        Ok(ExitStatus::Success)
    } else {
        eprintln!(
            "spectrum mismatch: max eigenvalue distance {:e}, largest discarded eigenvalue {:e}",
            r.max_eig_mismatch, r.zero_tail_max
        );
        Ok(ExitStatus::Mismatch)
    }
}

fn write_trajectory(
    out: &OutputArgs,
    traj: &Trajectory,
    dim: usize,
    meta: Value,
) -> Result<(), Failure> {
    match out.format {
        Format::Csv => emit(&out.output, |w| {
            export::write_trajectory_csv(w, traj, dim).map_err(|e| e.to_string())
        }),
        Format::Json => emit_json(&out.output, &export::trajectory_json(traj, dim, meta)),
    }
}

fn cmd_integrate(
    method: &MethodArgs,
    run: &RunArgs,
    solver: &SolverArgs,
    out: &OutputArgs,
) -> Result<ExitStatus, Failure> {
    let t = method.tableau()?;
    let settings = solver.settings();
    settings.validate()?;
    let y0 = run.problem.default_initial_state();
    let dim = y0.len();
    let mut m = meta(run.problem, t.kind(), Some(t.k()), t.s(), &settings);
    m["h"] = export::json_real(run.h);
    m["steps"] = run.steps.into();
    match integrator::integrate(&run.problem, &t, &y0, run.h, run.steps, &settings) {
        Ok(traj) => {
            write_trajectory(out, &traj, dim, m)?;
            Ok(ExitStatus::Success)
        }
        Err(failure) => {
            if !failure.partial.is_empty() {
                write_trajectory(out, &failure.partial, dim, m)?;
            }
            Err(failure.into())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_order(
    method: &MethodArgs,
    problem: Builtin,
    h: f64,
    levels: usize,
    t_end: f64,
    solver: &SolverArgs,
    out: &OutputArgs,
) -> Result<ExitStatus, Failure> {
    let t = method.tableau()?;
    let settings = solver.settings();
    let h_list: Vec<f64> = (0..levels).map(|j| h / 2f64.powi(j as i32)).collect();
    let y0 = problem.default_initial_state();
    let study = convergence_order(&problem, &t, &y0, &h_list, t_end, &settings)?;
    for p in study.points.iter().filter(|p| p.excluded) {
        eprintln!(
            "note: h = {:e} has error {:e} below the round-off floor {:e}; left out of the fit",
            p.h,
            p.error,
            integrator::ROUND_OFF_FLOOR
        );
    }
    match out.format {
        Format::Csv => emit(&out.output, |w| {
            export::write_order_csv(w, &study).map_err(|e| e.to_string())
        })?,
        Format::Json => {
            let mut m = meta(problem, t.kind(), Some(t.k()), t.s(), &settings);
            m["t_end"] = export::json_real(t_end);
            emit_json(&out.output, &export::order_json(&study, m))?
        }
    }
    Ok(ExitStatus::Success)
}

/// Maximum drift for each `k`, computed concurrently and returned in `k`
/// order. Stops at the first failing `k`.
fn conserve_sweep(
    kind: NodeKind,
    ks: &[usize],
    s: usize,
    run: &RunArgs,
    settings: &SolveSettings,
) -> (Vec<(usize, f64)>, Option<Failure>) {
    let y0 = run.problem.default_initial_state();
    let results: Vec<Result<f64, Failure>> = std::thread::scope(|scope| {
        let handles: Vec<_> = ks
            .iter()
            .map(|&k| {
                let y0 = &y0;
                scope.spawn(move || -> Result<f64, Failure> {
                    let t = HbvmTableau::new(kind, k, s)?;
                    let traj =
                        integrator::integrate(&run.problem, &t, y0, run.h, run.steps, settings)
                            .map_err(|f| {
                                let mut failure = Failure::from(f);
                                failure.message = format!("k = {k}: {}", failure.message);
                                failure
                            })?;
                    Ok(traj.max_abs_drift())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    let mut rows = Vec::new();
    for (&k, r) in ks.iter().zip(results) {
        match r {
            Ok(d) => rows.push((k, d)),
            Err(f) => return (rows, Some(f)),
        }
    }
    (rows, None)
}

fn cmd_conserve(
    s: usize,
    k_max: usize,
    nodes: Nodes,
    run: &RunArgs,
    solver: &SolverArgs,
    out: &OutputArgs,
) -> Result<ExitStatus, Failure> {
    let kind = NodeKind::from(nodes);
    let settings = solver.settings();
    settings.validate()?;
    if s == 0 {
        return Err(Error::Domain("s must be at least 1".into()).into());
    }
    let ks: Vec<usize> = (s..=k_max)
        .filter(|&k| kind.exactness_for(k) + 1 >= 2 * s)
        .collect();
    if ks.is_empty() {
        return Err(Error::Domain(format!(
            "no admissible k in {s}..={k_max} for {kind} nodes with s = {s}"
        ))
        .into());
    }
    let (rows, failure) = conserve_sweep(kind, &ks, s, run, &settings);
    if failure.is_none() || !rows.is_empty() {
        match out.format {
            Format::Csv => emit(&out.output, |w| {
                export::write_conserve_csv(w, &rows).map_err(|e| e.to_string())
            })?,
            Format::Json => {
                let mut m = meta(run.problem, kind, None, s, &settings);
                m["h"] = export::json_real(run.h);
                m["steps"] = run.steps.into();
                m["nu"] = run.problem.poly_degree().into();
                emit_json(&out.output, &export::conserve_json(&rows, m))?
            }
        }
    }
    match failure {
        Some(f) => Err(f),
        None => Ok(ExitStatus::Success),
    }
}

fn dispatch(cli: &Cli) -> Result<ExitStatus, Failure> {
    match &cli.command {
        Command::Tableau { method, output } => cmd_tableau(method, output),
        Command::Spectrum { method, output } => cmd_spectrum(method, output),
        Command::Integrate {
            method,
            run,
            solver,
            out,
        } => cmd_integrate(method, run, solver, out),
        Command::Order {
            method,
            problem,
            h,
            levels,
            t_end,
            solver,
            out,
        } => cmd_order(method, *problem, *h, *levels, *t_end, solver, out),
        Command::Conserve {
            s,
            k_max,
            nodes,
            run,
            solver,
            out,
        } => cmd_conserve(*s, *k_max, *nodes, run, solver, out),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status. Diagnostics go to standard error.
pub fn run<I, T>(args: I) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitStatus::Validation
            } else {
                ExitStatus::Success
            };
        }
    };
    match dispatch(&cli) {
        Ok(status) => status,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.status
        }
    }
}
