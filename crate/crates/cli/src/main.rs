use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use focs_core::io::{
    instance_to_json, kkt_report_json, read_instance, read_schedule_entries, summary_json,
    write_profile_csv, write_schedule_csv, write_trace,
};
use focs_core::verify::{check_kkt_with, oracle_solve, recover_duals, KktError, KktOptions};
use focs_core::{
    format_rational, generate_instance, parse_rational, run_focs_with, ChargingProblem, FocsError,
    FocsOptions, GeneratorConfig, Objective, Q, Schedule,
};
use num_traits::{Signed, Zero};

mod exit {
    pub const INPUT: u8 = 1;
    pub const INFEASIBLE: u8 = 2;
    pub const VERIFY: u8 = 3;
}

/// A failure with the exit status it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn input(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: exit::INPUT,
            error: error.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure::input(error)
    }
}

type Outcome = Result<u8, Failure>;

#[derive(Parser)]
#[command(name = "focs", version, about = "Exact offline EV charging schedules by repeated maximum flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the optimal schedule and power profile.
    Solve(SolveArgs),
    /// Check a schedule against the optimality conditions.
    Verify(VerifyArgs),
    /// Brute-force optimum over an energy grid (small instances only).
    Oracle(OracleArgs),
    /// Write a random feasible instance.
    Gen(GenArgs),
    /// Write the per-iteration and per-round trace as JSON lines.
    Trace(TraceArgs),
}

#[derive(Args)]
struct InstanceArg {
    /// Instance file (JSON).
    #[arg(long)]
    instance: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InstanceArg,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Objective exponent reported in the summary (integer, at least 2).
    #[arg(long, default_value_t = 2)]
    alpha: u32,
    /// Also write trace.jsonl.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: InstanceArg,
    /// Schedule file (CSV); missing rows count as zero energy.
    #[arg(long)]
    schedule: PathBuf,
    /// Directory for kkt_report.json; the report always goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    alpha: u32,
    /// Relative tolerance for floating-point schedules; values this close to
    /// 0 or to a limit are clamped onto it.
    #[arg(long, num_args = 0..=1, default_missing_value = "1e-9")]
    tol: Option<f64>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    input: InstanceArg,
    /// Energy grid step.
    #[arg(long, default_value = "1/4")]
    delta: String,
    #[arg(long, default_value_t = 2)]
    alpha: u32,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 10)]
    jobs: usize,
    #[arg(long, default_value_t = 24)]
    horizon: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest per-job maximum power.
    #[arg(long, default_value_t = 4)]
    max_power: u32,
    /// Energies are multiples of 1/energy-denominator.
    #[arg(long, default_value_t = 1)]
    energy_denominator: u32,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    input: InstanceArg,
    /// Output directory for trace.jsonl; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(args) => solve(args),
        Command::Verify(args) => verify(args),
        Command::Oracle(args) => oracle(args),
        Command::Gen(args) => generate(args),
        Command::Trace(args) => trace(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}

fn load(path: &Path) -> Result<ChargingProblem, Failure> {
    let file = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let instance = read_instance(io::BufReader::new(file))
        .with_context(|| format!("cannot read instance {}", path.display()))?;
    let bad = instance.infeasible_jobs();
    if !bad.is_empty() {
        let detail: Vec<String> = bad
            .iter()
            .map(|j| {
                format!(
                    "job {} needs {} but can take at most {}",
                    j.id,
                    format_rational(&j.energy),
                    format_rational(&j.capacity())
                )
            })
            .collect();
        return Err(Failure {
            code: exit::INFEASIBLE,
            error: anyhow!("infeasible instance: {}", detail.join("; ")),
        });
    }
    ChargingProblem::new(instance).map_err(Failure::input)
}

fn objective(alpha: u32) -> Result<Objective, Failure> {
    Objective::power(alpha).map_err(Failure::input)
}

fn run(problem: &ChargingProblem, trace: bool) -> Result<focs_core::FocsResult, Failure> {
    run_focs_with(problem, &FocsOptions { trace, ..Default::default() }).map_err(|e| match e {
        FocsError::Infeasible { .. } => Failure {
            code: exit::INFEASIBLE,
            error: e.into(),
        },
        other => Failure::input(other),
    })
}

fn create(dir: &Path, name: &str) -> Result<io::BufWriter<fs::File>, Failure> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(name);
    let file = fs::File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(io::BufWriter::new(file))
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<(), Failure> {
    let mut out = create(dir, name)?;
    serde_json::to_writer_pretty(&mut out, value).context(name.to_owned())?;
    writeln!(out).and_then(|_| out.flush()).context(name.to_owned())?;
    Ok(())
}

fn solve(args: SolveArgs) -> Outcome {
    let obj = objective(args.alpha)?;
    let problem = load(&args.input.instance)?;
    let result = run(&problem, args.trace)?;
    let value = obj.value(&result.profile, problem.partition()).map_err(Failure::input)?;

    write_schedule_csv(&problem, &result.schedule, create(&args.out, "schedule.csv")?).context("schedule.csv")?;
    write_profile_csv(&problem, &result.profile, create(&args.out, "profile.csv")?).context("profile.csv")?;
    write_json(&args.out, "summary.json", &summary_json(&problem, &result, Some((args.alpha, &value))))?;
    if args.trace {
        write_trace(&problem, &result, create(&args.out, "trace.jsonl")?).context("trace.jsonl")?;
    }
    println!(
        "{} jobs, {} intervals, {} rounds, objective (alpha = {}) {}",
        problem.num_jobs(),
        problem.num_intervals(),
        result.num_rounds(),
        args.alpha,
        format_rational(&value)
    );
    Ok(0)
}

/// Snaps entries within `tol` of zero or of their limit onto it.
fn clamp(problem: &ChargingProblem, entries: &mut [(usize, usize, Q)], tol: &Q) {
    let one = Q::from_integer(1.into());
    for (j, i, e) in entries.iter_mut() {
        let Some(limit) = problem.energy_limit(*j, *i) else {
            continue;
        };
        if e.is_negative() && -e.clone() <= *tol {
            *e = Q::zero();
        } else if *e > *limit && &*e - limit <= tol * limit.clone().max(one.clone()) {
            *e = limit.clone();
        }
    }
}

fn verify(args: VerifyArgs) -> Outcome {
    let obj = objective(args.alpha)?;
    let problem = load(&args.input.instance)?;
    let file = fs::File::open(&args.schedule)
        .with_context(|| format!("cannot open {}", args.schedule.display()))?;
    let mut entries = read_schedule_entries(&problem, io::BufReader::new(file))
        .with_context(|| format!("schedule {} does not match the instance", args.schedule.display()))?;

    let options = match args.tol {
        None => KktOptions::exact(),
        Some(t) => {
            let tol = Q::from_float(t)
                .filter(|t| !t.is_negative())
                .ok_or_else(|| Failure::input(anyhow!("tolerance must be a non-negative number")))?;
            clamp(&problem, &mut entries, &tol);
            KktOptions::relative(tol)
        }
    };
    let schedule = Schedule::from_entries(&problem, entries).context("constraint violation")?;
    let report = match check_kkt_with(&problem, &schedule, &options) {
        Ok(report) => report,
        Err(KktError::Incomplete(e)) => return Err(Failure::input(anyhow!("constraint violation: {e}"))),
    };
    let duals = recover_duals(&problem, &schedule, &obj);
    let json = kkt_report_json(&problem, &report, &duals);
    if let Some(dir) = &args.out {
        write_json(dir, "kkt_report.json", &json)?;
    }
    println!("{}", serde_json::to_string_pretty(&json).context("report")?);
    if report.passed() {
        Ok(0)
    } else {
        for v in &report.violations {
            eprintln!(
                "{} violated for job {}: intervals {} and {} at powers {} and {}",
                v.condition.label(),
                v.job,
                v.first + 1,
                v.second + 1,
                format_rational(&v.first_power),
                format_rational(&v.second_power)
            );
        }
        Ok(exit::VERIFY)
    }
}

fn oracle(args: OracleArgs) -> Outcome {
    let obj = objective(args.alpha)?;
    let step = parse_rational(&args.delta).map_err(Failure::input)?;
    let problem = load(&args.input.instance)?;
    let solution = oracle_solve(&problem, &obj, &step).map_err(Failure::input)?;
    let focs = run(&problem, false)?;
    let focs_value = obj.value(&focs.profile, problem.partition()).map_err(Failure::input)?;

    write_schedule_csv(&problem, &solution.schedule, create(&args.out, "oracle_schedule.csv")?)
        .context("oracle_schedule.csv")?;
    write_profile_csv(&problem, &solution.profile, create(&args.out, "oracle_profile.csv")?)
        .context("oracle_profile.csv")?;
    let json = serde_json::json!({
        "alpha": args.alpha,
        "delta": format_rational(&step),
        "candidates": solution.candidates,
        "objective": format_rational(&solution.objective),
        "gap_bound": format_rational(&solution.gap_bound),
        "warnings": solution.warnings,
        "focs_objective": format_rational(&focs_value),
        "equal": solution.objective == focs_value,
    });
    write_json(&args.out, "oracle.json", &json)?;
    println!(
        "oracle {} over {} candidates; focs {}",
        format_rational(&solution.objective),
        solution.candidates,
        format_rational(&focs_value)
    );
    Ok(0)
}

fn generate(args: GenArgs) -> Outcome {
    if args.jobs == 0 || args.horizon == 0 || args.max_power == 0 || args.energy_denominator == 0 {
        return Err(Failure::input(anyhow!(
            "jobs, horizon, max-power and energy-denominator must be positive"
        )));
    }
    let config = GeneratorConfig {
        jobs: args.jobs,
        horizon: args.horizon,
        max_power: args.max_power,
        energy_denominator: args.energy_denominator,
        allow_zero: false,
    };
    let text = instance_to_json(&generate_instance(&config, args.seed));
    match &args.out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            }
            fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
        }
        None => io::stdout().write_all(text.as_bytes()).context("stdout")?,
    }
    Ok(0)
}

fn trace(args: TraceArgs) -> Outcome {
    let problem = load(&args.input.instance)?;
    let result = run(&problem, true)?;
    match &args.out {
        Some(dir) => write_trace(&problem, &result, create(dir, "trace.jsonl")?).context("trace.jsonl")?,
        None => write_trace(&problem, &result, io::stdout().lock()).context("stdout")?,
    }
    Ok(0)
}
