//! `neadmm` command-line harness. Writes iteration traces as CSV.
//!
//! Exit codes: 0 converged, 2 stopped at the iteration limit, 1 runtime
//! error, 64 usage error.

mod args;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use neadmm::csv_io::{read_bags, write_bags, write_diagnostics, write_trace};
use neadmm::diagnostics::{DiagnosticRow, DiagnosticsRecorder, OptimumReference};
use neadmm::engine::{solve_with_observer, RhoSchedule, SolveFailure, SolveOutcome, StopCriteria, TraceRow};
use neadmm::maxop::{maxop_solve, MaxOpProblem, MaxOpState};
use neadmm::scalar_examples::{Example, ScalarExampleProblem};
use neadmm::sphere::{onebit_solve, OneBitCsState};
use neadmm::synth::{generate_bags, generate_onebit, label_balance};
use neadmm::terms::{L1Norm, LogisticLoss};

use args::{
    BagShape, Cli, Command, DiagnoseArgs, ExampleArgs, ExampleChoice, GenerateBagsArgs, MultiInstanceArgs, OneBitArgs,
    ScheduleKind, SolverArgs,
};

const EXIT_USAGE: u8 = 64;

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<neadmm::NeAdmmError> for Failure {
    fn from(e: neadmm::NeAdmmError) -> Self {
        Failure::Runtime(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Converged,
    IterationLimit,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(Status::Converged) => ExitCode::SUCCESS,
        Ok(Status::IterationLimit) => ExitCode::from(2),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<Status, Failure> {
    match command {
        Command::Example1(a) => run_example(Example::One, a),
        Command::Example2(a) => run_example(Example::Two, a),
        Command::Diagnose(a) => run_diagnose(a),
        Command::OnebitCs(a) => run_onebit(a),
        Command::MultiInstance(a) => run_multi_instance(a),
        Command::GenerateBags(a) => run_generate_bags(a),
    }
}

fn schedule(args: &SolverArgs, default_rho: f64) -> Result<RhoSchedule, Failure> {
    let rho0 = args.rho0.unwrap_or(default_rho);
    let s = match args.rho_schedule {
        ScheduleKind::Constant => RhoSchedule::constant(rho0),
        ScheduleKind::Increment(delta) => RhoSchedule::increment(rho0, delta),
    };
    s.map_err(|e| Failure::Usage(e.to_string()))
}

fn stop(args: &SolverArgs, default_iter: usize) -> Result<StopCriteria, Failure> {
    StopCriteria::new(args.tol_primal, args.tol_dual, args.max_iter.unwrap_or(default_iter))
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match path {
        Some(p) => File::create(p)
            .map(|f| Box::new(BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", p.display()))),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn emit_trace(
    output: Option<&PathBuf>,
    trace: &[TraceRow],
    diagnostics: Option<&[DiagnosticRow]>,
) -> Result<(), Failure> {
    let mut out = open_output(output.map(PathBuf::as_path))?;
    write_trace(&mut out, trace, diagnostics)?;
    out.flush().map_err(|e| Failure::Runtime(e.to_string()))
}

fn describe_last(trace: &[TraceRow]) -> String {
    trace.last().map_or_else(
        || "no iterations".to_string(),
        |r| {
            format!(
                "objective {:.10}, ||r|| {:.3e}, ||s|| {:.3e}",
                r.objective, r.r_norm, r.s_norm
            )
        },
    )
}

/// Writes the trace (partial on failure), prints a one-line summary and
/// maps the outcome to a status.
fn finish<S>(
    result: Result<SolveOutcome<S>, SolveFailure<S>>,
    output: Option<&PathBuf>,
    diagnostics: Option<&[DiagnosticRow]>,
    extra: impl FnOnce(&S) -> String,
) -> Result<Status, Failure> {
    match result {
        Ok(out) => {
            emit_trace(output, &out.trace, diagnostics)?;
            let status = if out.converged {
                Status::Converged
            } else {
                Status::IterationLimit
            };
            let what = match status {
                Status::Converged => "converged",
                Status::IterationLimit => "iteration limit reached",
            };
            eprintln!(
                "{what} after {} iterations: {}{}",
                out.trace.len(),
                describe_last(&out.trace),
                extra(&out.state)
            );
            Ok(status)
        }
        Err(f) => {
            emit_trace(output, &f.trace, diagnostics.map(|d| &d[..d.len().min(f.trace.len())]))?;
            Err(Failure::Runtime(format!(
                "solve aborted after {} iterations: {}",
                f.trace.len(),
                f.error
            )))
        }
    }
}

fn run_example(which: Example, args: ExampleArgs) -> Result<Status, Failure> {
    let schedule = schedule(&args.solver, 1.0)?;
    let stop = stop(&args.solver, 30)?;
    let setup = ScalarExampleProblem::new(which);
    let problem = setup.problem();
    let init = which.default_init(schedule.initial());
    let p_star = which.optimum().p;
    let gap = |s: &neadmm::IterateState| format!(", |p - p*| {:.3e}", (problem.objective(s) - p_star).abs());
    if !args.diagnose {
        let result = solve_with_observer(&problem, init, schedule, stop, &mut |_| {});
        return finish(result, args.solver.output.as_ref(), None, gap);
    }
    let mut rec = DiagnosticsRecorder::new(&problem, OptimumReference::for_example(which), &init)?;
    let result = solve_with_observer(&problem, init, schedule, stop, &mut |r| rec.observe(r));
    if let Some(e) = rec.error {
        return Err(e.into());
    }
    finish(result, args.solver.output.as_ref(), Some(&rec.rows), gap)
}

fn run_diagnose(args: DiagnoseArgs) -> Result<Status, Failure> {
    let which = match args.example {
        ExampleChoice::One => Example::One,
        ExampleChoice::Two => Example::Two,
    };
    let schedule = schedule(&args.solver, 1.0)?;
    let stop = stop(&args.solver, 30)?;
    let setup = ScalarExampleProblem::new(which);
    let problem = setup.problem();
    let init = which.default_init(schedule.initial());
    let mut rec = DiagnosticsRecorder::new(&problem, OptimumReference::for_example(which), &init)?;
    let result = solve_with_observer(&problem, init, schedule, stop, &mut |r| rec.observe(r));
    if let Some(e) = rec.error {
        return Err(e.into());
    }
    let mut out = open_output(args.solver.output.as_deref())?;
    write_diagnostics(&mut out, &rec.rows)?;
    out.flush().map_err(|e| Failure::Runtime(e.to_string()))?;
    let flagged = rec.rows.iter().filter(|r| !r.flags.is_empty()).count();
    eprintln!("{} iterations diagnosed, {flagged} flagged", rec.rows.len());
    match result {
        Ok(o) if o.converged => Ok(Status::Converged),
        Ok(_) => Ok(Status::IterationLimit),
        Err(f) => Err(Failure::Runtime(format!(
            "solve aborted after {} iterations: {}",
            f.trace.len(),
            f.error
        ))),
    }
}

fn run_onebit(args: OneBitArgs) -> Result<Status, Failure> {
    if args.k > args.n {
        return Err(Failure::Usage(format!(
            "--k ({}) must not exceed --n ({})",
            args.k, args.n
        )));
    }
    let schedule = schedule(&args.solver, 1000.0)?;
    let stop = stop(&args.solver, 500)?;
    let data = generate_onebit(args.n, args.m, args.k, args.seed)?;
    let problem = data.problem(args.lambda)?;
    let init = OneBitCsState::back_projection(&problem, schedule.initial());
    let result = onebit_solve(&problem, init, schedule, stop);
    finish(result, args.solver.output.as_ref(), None, |s| {
        format!(
            ", | ||x||^2 - 1 | {:.3e}, |<x, x_true>| {:.4}",
            (s.x.norm_squared() - 1.0).abs(),
            s.x.dot(&data.x_true).abs()
        )
    })
}

fn bags_from(input: Option<&Path>, shape: &BagShape) -> Result<neadmm::maxop::BagDataset, Failure> {
    match input {
        Some(p) => {
            let f = File::open(p).map_err(|e| Failure::Runtime(format!("cannot open {}: {e}", p.display())))?;
            Ok(read_bags(f)?)
        }
        None => Ok(generate_bags(shape.bags, shape.instances, shape.features, shape.seed)?.0),
    }
}

fn run_multi_instance(args: MultiInstanceArgs) -> Result<Status, Failure> {
    let schedule = schedule(&args.solver, 0.1)?;
    let stop = stop(&args.solver, 1000)?;
    let data = bags_from(args.input.as_deref(), &args.shape)?;
    let loss = LogisticLoss::new(data.labels.clone());
    let reg = L1Norm::new(args.lambda);
    let problem = MaxOpProblem::new(&data, &loss, &reg);
    let init = MaxOpState::zeros(&data, schedule.initial());
    let result = maxop_solve(&problem, init, schedule, stop);
    finish(result, args.solver.output.as_ref(), None, |s| {
        format!(", max |q - max t| {:.3e}", (&s.q - data.bag_max(&s.t)).amax())
    })
}

fn run_generate_bags(args: GenerateBagsArgs) -> Result<Status, Failure> {
    let s = &args.shape;
    let (data, _) = generate_bags(s.bags, s.instances, s.features, s.seed)?;
    let mut out = open_output(args.output.as_deref())?;
    write_bags(&mut out, &data)?;
    out.flush().map_err(|e| Failure::Runtime(e.to_string()))?;
    eprintln!(
        "{} bags, {} instances, {} features, label balance {:.3}",
        data.n_bags(),
        data.n_instances(),
        data.n_features(),
        label_balance(&data)
    );
    Ok(Status::Converged)
}
