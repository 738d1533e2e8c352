//! `provar` binary: subcommand parsing, configuration precedence, and
//! exit-code mapping. Exit status is 0 on success, 1 for configuration
//! or file problems, and 2 when a run diverges.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use provar_cli::config::{pick, FileConfig};
use provar_cli::experiment::{
    self, EstimatorChoice, Problem, RunPlan, StepSpec, ThetaToken, Workload,
};
use provar_cli::{io, CliError};
use provar_core::solver::Reference;
use provar_core::stepsize::Regime;

#[derive(Parser)]
#[command(
    name = "provar",
    version,
    about = "Proximal stochastic gradient experiments: single runs, theta sweeps, estimator comparisons, and reference solves"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one estimator and write a checkpoint CSV.
    Run(CommonArgs),
    /// Run one estimator family over a θ list, one CSV per θ.
    Sweep(CommonArgs),
    /// Run several estimators under identical conditions, one CSV each.
    Compare(CommonArgs),
    /// Compute a deterministic reference solution file.
    Reference(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Flat key = value configuration file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset path (LIBSVM text format).
    #[arg(long)]
    data: Option<String>,
    /// Problem family: ridge, lasso, or nnpca.
    #[arg(long)]
    problem: Option<String>,
    /// Estimator spec such as sgd, bsaga:10, bsvrg:0.5, sarah, or
    /// sarge; compare accepts a comma-separated list.
    #[arg(long)]
    estimator: Option<String>,
    /// θ for bsaga/bsvrg; sweep accepts a comma-separated list. The
    /// literal n stands for the sample count.
    #[arg(long)]
    theta: Option<String>,
    /// Epoch length m for bsvrg/sarah (default: n).
    #[arg(long = "epoch-len")]
    epoch_len: Option<String>,
    /// Step size: theory, paper, or a positive number (default: theory).
    #[arg(long)]
    step: Option<String>,
    /// Regime for theory steps: convex, strongly-convex, or nonconvex
    /// (default: by problem).
    #[arg(long)]
    regime: Option<String>,
    /// Sampling seed (default: 0).
    #[arg(long)]
    seed: Option<String>,
    /// Effective passes over the data; iterations = epochs × n
    /// (default: 20).
    #[arg(long)]
    epochs: Option<String>,
    /// Penalty weight for ridge/lasso (default: 1/n).
    #[arg(long)]
    beta: Option<String>,
    /// Reference file for the gap columns; computed on the fly when
    /// absent.
    #[arg(long = "ref")]
    reference: Option<String>,
    /// Output CSV path (run), output directory (sweep/compare), or
    /// reference file path (reference).
    #[arg(long)]
    out: Option<String>,
    /// Residual tolerance for reference solves (default: 1e-12).
    #[arg(long)]
    tol: Option<String>,
    /// Iteration cap for reference solves (default: 500000).
    #[arg(long = "max-iters")]
    max_iters: Option<String>,
}

/// Settings after merging flags, the config file, and defaults.
struct Resolved {
    data: PathBuf,
    problem: Problem,
    estimator: Option<String>,
    theta: Option<String>,
    epoch_len: Option<usize>,
    step: StepSpec,
    regime: Option<Regime>,
    seed: u64,
    epochs: usize,
    beta: Option<f64>,
    ref_path: Option<PathBuf>,
    out: Option<PathBuf>,
    tol: f64,
    max_iters: usize,
}

fn missing(key: &str) -> CliError {
    CliError::Config(format!("missing required setting: {key}"))
}

fn parse_count(text: &str, what: &str) -> Result<usize, CliError> {
    text.parse::<usize>()
        .ok()
        .filter(|v| *v > 0)
        .ok_or_else(|| {
            CliError::Config(format!(
                "invalid {what} {text:?} (expected a positive integer)"
            ))
        })
}

fn parse_positive(text: &str, what: &str) -> Result<f64, CliError> {
    text.parse::<f64>()
        .ok()
        .filter(|v| *v > 0.0 && v.is_finite())
        .ok_or_else(|| {
            CliError::Config(format!(
                "invalid {what} {text:?} (expected a positive number)"
            ))
        })
}

fn resolve(args: &CommonArgs) -> Result<Resolved, CliError> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let get = |flag: &Option<String>, key: &str| -> Option<String> {
        pick(flag.as_deref(), &file, key).map(str::to_owned)
    };

    let data = get(&args.data, "data").ok_or_else(|| missing("data"))?;
    let problem = experiment::parse_problem(
        &get(&args.problem, "problem").ok_or_else(|| missing("problem"))?,
    )?;
    let epoch_len = get(&args.epoch_len, "epoch_len")
        .map(|t| parse_count(&t, "epoch_len"))
        .transpose()?;
    let step = match get(&args.step, "step") {
        Some(t) => experiment::parse_step(&t)?,
        None => StepSpec::Theory,
    };
    let regime = get(&args.regime, "regime")
        .map(|t| experiment::parse_regime(&t))
        .transpose()?;
    let seed = match get(&args.seed, "seed") {
        Some(t) => t
            .parse::<u64>()
            .map_err(|_| CliError::Config(format!("invalid seed {t:?}")))?,
        None => 0,
    };
    let epochs = match get(&args.epochs, "epochs") {
        Some(t) => parse_count(&t, "epochs")?,
        None => 20,
    };
    let beta = get(&args.beta, "beta")
        .map(|t| parse_positive(&t, "beta"))
        .transpose()?;
    let tol = match get(&args.tol, "tol") {
        Some(t) => parse_positive(&t, "tol")?,
        None => 1e-12,
    };
    let max_iters = match get(&args.max_iters, "max_iters") {
        Some(t) => parse_count(&t, "max_iters")?,
        None => 500_000,
    };

    Ok(Resolved {
        data: PathBuf::from(data),
        problem,
        estimator: get(&args.estimator, "estimator"),
        theta: get(&args.theta, "theta"),
        epoch_len,
        step,
        regime,
        seed,
        epochs,
        beta,
        ref_path: get(&args.reference, "ref").map(PathBuf::from),
        out: get(&args.out, "out").map(PathBuf::from),
        tol,
        max_iters,
    })
}

fn load_or_compute_reference(s: &Resolved, workload: &Workload) -> Result<Reference, CliError> {
    if let Some(path) = &s.ref_path {
        let r = io::read_reference(path).map_err(CliError::Io)?;
        let p = workload.data.n_features();
        if r.x_star.len() != p {
            return Err(CliError::Config(format!(
                "reference dimension {} does not match the dataset's {} features",
                r.x_star.len(),
                p
            )));
        }
        Ok(r)
    } else {
        let r = experiment::compute_reference(workload, s.tol, s.max_iters)?;
        if !r.converged {
            eprintln!(
                "warning: reference solve stopped at residual {:.3e} before reaching tolerance {:.3e}",
                r.residual, s.tol
            );
        }
        Ok(r)
    }
}

fn ensure_out_dir(out: &Option<PathBuf>, default: &str) -> Result<PathBuf, CliError> {
    let dir = out.clone().unwrap_or_else(|| PathBuf::from(default));
    fs::create_dir_all(&dir).map_err(|e| {
        CliError::Config(format!(
            "cannot create output directory {}: {e}",
            dir.display()
        ))
    })?;
    Ok(dir)
}

/// Runs one fully resolved plan and writes its CSV; returns the output
/// path and the resolved step size.
fn run_one(
    workload: &Workload,
    s: &Resolved,
    choice: EstimatorChoice,
    theta_flag: Option<ThetaToken>,
    reference: &Reference,
    path: &PathBuf,
) -> Result<f64, CliError> {
    let n = workload.data.n_samples();
    let estimator = choice.resolve(theta_flag, s.epoch_len, n)?;
    let obj = workload.objective()?;
    let step = experiment::resolve_step_policy(s.step, s.problem, s.regime, &obj);
    let plan = RunPlan {
        estimator,
        step,
        seed: s.seed,
        epochs: s.epochs,
    };
    let trajectory = experiment::execute(workload, &plan, Some(reference))?;
    io::write_csv(path, &trajectory.checkpoints).map_err(CliError::Io)?;
    Ok(trajectory.step_size)
}

fn cmd_run(args: &CommonArgs) -> Result<(), CliError> {
    let s = resolve(args)?;
    let spec = s.estimator.as_deref().ok_or_else(|| missing("estimator"))?;
    if spec.contains(',') {
        return Err(CliError::Config(
            "run takes a single estimator; use compare for a list".to_string(),
        ));
    }
    let choice = experiment::parse_estimator(spec)?;
    let theta_flag = match &s.theta {
        Some(t) if t.contains(',') => {
            return Err(CliError::Config(
                "run takes a single theta; use sweep for a list".to_string(),
            ))
        }
        Some(t) => Some(experiment::parse_theta_token(t)?),
        None => None,
    };
    let workload = experiment::build_workload(s.problem, &s.data, s.beta, s.seed)?;
    let reference = load_or_compute_reference(&s, &workload)?;
    let out = s.out.clone().unwrap_or_else(|| PathBuf::from("run.csv"));
    let eta = run_one(&workload, &s, choice, theta_flag, &reference, &out)?;
    let n = workload.data.n_samples();
    eprintln!(
        "{}: eta = {:.16e}, reference residual = {:.3e}",
        choice.file_stem(theta_flag, n),
        eta,
        reference.residual
    );
    println!("{}", out.display());
    Ok(())
}

/// Fans independent runs out over threads; each writes its own CSV
/// atomically. Returns the written paths in the order given.
fn run_parallel(
    workload: &Workload,
    s: &Resolved,
    jobs: Vec<(EstimatorChoice, PathBuf)>,
    reference: &Reference,
) -> Result<Vec<PathBuf>, CliError> {
    let n = workload.data.n_samples();
    let mut results: Vec<Option<Result<f64, CliError>>> = Vec::new();
    results.resize_with(jobs.len(), || None);
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (slot, (choice, path)) in results.iter_mut().zip(&jobs) {
            handles.push(scope.spawn(move || {
                *slot = Some(run_one(workload, s, *choice, None, reference, path));
            }));
        }
        for handle in handles {
            handle.join().expect("worker thread panicked");
        }
    });
    let mut paths = Vec::new();
    for (result, (choice, path)) in results.into_iter().zip(&jobs) {
        let eta = result.expect("every job ran")?;
        eprintln!("{}: eta = {:.16e}", choice.file_stem(None, n), eta);
        paths.push(path.clone());
    }
    Ok(paths)
}

fn cmd_sweep(args: &CommonArgs) -> Result<(), CliError> {
    let s = resolve(args)?;
    let spec = s.estimator.as_deref().ok_or_else(|| missing("estimator"))?;
    let choice = experiment::parse_estimator(spec)?;
    if !choice.family.takes_theta() {
        return Err(CliError::Config(format!(
            "sweep requires bsaga or bsvrg, got {}",
            choice.family
        )));
    }
    if choice.theta.is_some() {
        return Err(CliError::Config(
            "give sweep its theta values via --theta, not in the estimator spec".to_string(),
        ));
    }
    let thetas = experiment::parse_theta_list(s.theta.as_deref().ok_or_else(|| missing("theta"))?)?;
    let workload = experiment::build_workload(s.problem, &s.data, s.beta, s.seed)?;
    let n = workload.data.n_samples();
    let mut seen = Vec::new();
    let mut jobs = Vec::new();
    let out_dir = ensure_out_dir(&s.out, "sweep")?;
    for token in thetas {
        let theta = token.resolve(n);
        if seen.contains(&theta.to_bits()) {
            return Err(CliError::Config(format!("duplicate theta value {theta}")));
        }
        seen.push(theta.to_bits());
        let choice = EstimatorChoice {
            family: choice.family,
            theta: Some(token),
        };
        let path = out_dir.join(format!("{}.csv", choice.file_stem(None, n)));
        jobs.push((choice, path));
    }
    let reference = load_or_compute_reference(&s, &workload)?;
    eprintln!("reference residual = {:.3e}", reference.residual);
    for path in run_parallel(&workload, &s, jobs, &reference)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn cmd_compare(args: &CommonArgs) -> Result<(), CliError> {
    let s = resolve(args)?;
    let spec = s.estimator.as_deref().ok_or_else(|| missing("estimator"))?;
    let choices = experiment::parse_estimator_list(spec)?;
    let theta_flag = match &s.theta {
        Some(t) => Some(experiment::parse_theta_token(t)?),
        None => None,
    };
    let workload = experiment::build_workload(s.problem, &s.data, s.beta, s.seed)?;
    let n = workload.data.n_samples();
    let out_dir = ensure_out_dir(&s.out, "compare")?;
    let mut seen = Vec::new();
    let mut jobs = Vec::new();
    for mut choice in choices {
        // Bake the shared --theta into each spec that takes one so the
        // worker threads need no further context.
        if choice.theta.is_none() && choice.family.takes_theta() {
            choice.theta = theta_flag;
        }
        let stem = choice.file_stem(None, n);
        if seen.contains(&stem) {
            return Err(CliError::Config(format!(
                "estimators collide on output name {stem}.csv"
            )));
        }
        let path = out_dir.join(format!("{stem}.csv"));
        seen.push(stem);
        jobs.push((choice, path));
    }
    let reference = load_or_compute_reference(&s, &workload)?;
    eprintln!("reference residual = {:.3e}", reference.residual);
    for path in run_parallel(&workload, &s, jobs, &reference)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn cmd_reference(args: &CommonArgs) -> Result<(), CliError> {
    let s = resolve(args)?;
    let workload = experiment::build_workload(s.problem, &s.data, s.beta, s.seed)?;
    let r = experiment::compute_reference(&workload, s.tol, s.max_iters)?;
    if !r.converged {
        eprintln!(
            "warning: reference solve stopped at residual {:.3e} before reaching tolerance {:.3e}",
            r.residual, s.tol
        );
    }
    eprintln!(
        "f_star = {:.16e}, residual = {:.3e}, converged = {}",
        r.f_star, r.residual, r.converged
    );
    let out = s
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("reference.txt"));
    io::write_reference(&out, &r).map_err(CliError::Io)?;
    println!("{}", out.display());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Compare(args) => cmd_compare(&args),
        Command::Reference(args) => cmd_reference(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are not errors.
            let code = u8::from(err.use_stderr());
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
