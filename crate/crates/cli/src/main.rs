use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rtctimes_core::edf::{edf_polytope, edf_schedulable, minimal_deadlines};
use rtctimes_core::experiment::{
    envelope, envelope_csv, fitted_log_coefficient, records_csv, run_experiment, top_bucket_ratio, DeadlineRule,
    ExperimentConfig,
};
use rtctimes_core::fp::{fp_region, fp_schedulable, fp_schedulable_arbitrary, PointSource};
use rtctimes_core::lp::LpOutcome;
use rtctimes_core::model::TaskFile;
use rtctimes_core::optimize::{max_reward_edf, max_reward_fp};
use rtctimes_core::region::{andor_csv, andor_svg, polytope_csv, polytope_svg, rows_to_csv};
use rtctimes_core::sim::{default_horizon, response_times, simulate, Policy};
use rtctimes_core::{DeadlineModel, Error, Rational, TaskSet};

#[derive(Parser)]
#[command(name = "rtctimes", version, about = "Exact FP/EDF schedulability regions over execution times")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide schedulability of the execution times stored in the file.
    Check {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        analysis: Analysis,
    },
    /// Export the constraint rows of the schedulable region.
    Region {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        analysis: Analysis,
        /// Write the rows as CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also draw the region (two tasks only).
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Reduce the EDF deadline set to its irredundant instants.
    Minimize {
        #[command(flatten)]
        input: Input,
        /// Write the retained rows as CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also draw the reduced polytope (two tasks only).
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Maximize a linear reward w . C over the schedulable region.
    Optimize {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        analysis: Analysis,
        /// Comma-separated rational weights, one per task.
        #[arg(short = 'w', long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        weights: Vec<Rational>,
    },
    /// Simulate the synchronous release pattern.
    Simulate {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = PolicyArg::Fp)]
        policy: PolicyArg,
        /// Defaults to H (FP, constrained deadlines) or H + max D.
        #[arg(long)]
        horizon: Option<Rational>,
        /// Write the execution trace as CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random task sets: |D_min| against the hyperperiod.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct Input {
    /// Task-set JSON file.
    file: PathBuf,
    /// Override the deadline model declared in the file.
    #[arg(long, value_enum)]
    deadline_model: Option<ModelArg>,
}

#[derive(Args)]
struct Analysis {
    #[arg(long, value_enum, default_value_t = PolicyArg::Fp)]
    policy: PolicyArg,
    /// Schedulability points for FP.
    #[arg(long, value_enum, default_value_t = PointsArg::Lehoczky)]
    points: PointsArg,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, default_value_t = 2)]
    tasks: usize,
    #[arg(long, default_value_t = 2)]
    lo: u64,
    #[arg(long, default_value_t = 50)]
    hi: u64,
    #[arg(long, value_enum, default_value_t = RuleArg::Uniform1ToT)]
    deadline_rule: RuleArg,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Records CSV; the envelope and metadata are written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Fp,
    Edf,
}

#[derive(Clone, Copy, ValueEnum)]
enum PointsArg {
    Lehoczky,
    Reduced,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Constrained,
    Arbitrary,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    #[value(name = "uniform_1_to_T")]
    Uniform1ToT,
    #[value(name = "equal_T")]
    EqualT,
}

impl From<PolicyArg> for Policy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Fp => Policy::Fp,
            PolicyArg::Edf => Policy::Edf,
        }
    }
}

impl From<PointsArg> for PointSource {
    fn from(p: PointsArg) -> Self {
        match p {
            PointsArg::Lehoczky => PointSource::Lehoczky,
            PointsArg::Reduced => PointSource::Reduced,
        }
    }
}

impl Input {
    fn load(&self) -> Result<TaskSet, Error> {
        let text = fs::read_to_string(&self.file)?;
        let file: TaskFile = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
        let model = self.deadline_model.map(|m| match m {
            ModelArg::Constrained => DeadlineModel::Constrained,
            ModelArg::Arbitrary => DeadlineModel::Arbitrary,
        });
        file.into_task_set(model)
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verdict(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn check(input: &Input, analysis: &Analysis) -> Result<ExitCode, Error> {
    let ts = input.load()?;
    let c = ts.wcets()?;
    match analysis.policy {
        PolicyArg::Edf => {
            let v = edf_schedulable(&ts, &c)?;
            match &v.violated_instant {
                None => println!("edf: schedulable"),
                Some(t) if t.is_zero() => println!("edf: not schedulable (total utilization exceeds 1)"),
                Some(t) => println!("edf: not schedulable (demand exceeds supply at t = {t})"),
            }
            Ok(verdict(v.schedulable))
        }
        PolicyArg::Fp if ts.has_constrained_deadlines() => {
            let v = fp_schedulable(&ts, &c, analysis.points.into())?;
            for (i, t) in v.witnesses.iter().enumerate() {
                println!("task {}: certified at t = {t}", i + 1);
            }
            match v.failing_task {
                None => println!("fp: schedulable"),
                Some(i) => println!("fp: not schedulable (task {i} has no certifying point)"),
            }
            Ok(verdict(v.schedulable))
        }
        PolicyArg::Fp => {
            let v = fp_schedulable_arbitrary(&ts, &c)?;
            for task in &v.tasks {
                println!(
                    "task {}: busy period {}, jobs 0..={}",
                    task.task, task.busy_period, task.last_job
                );
            }
            match v.first_failure {
                None => println!("fp: schedulable"),
                Some(_) if v.utilization > Rational::one() => {
                    println!("fp: not schedulable (total utilization {} exceeds 1)", v.utilization)
                }
                Some((i, j)) => println!("fp: not schedulable (task {i}, job {j} misses its deadline)"),
            }
            Ok(verdict(v.schedulable))
        }
    }
}

fn region(input: &Input, analysis: &Analysis, out: Option<&Path>, svg: Option<&Path>) -> Result<ExitCode, Error> {
    let ts = input.load()?;
    match analysis.policy {
        PolicyArg::Fp => {
            let region = fp_region(&ts, analysis.points.into())?;
            let rows: usize = region.groups().iter().map(Vec::len).sum();
            eprintln!("{rows} rows in {} groups", region.groups().len());
            write_or_print(out, &andor_csv(&region))?;
            if let Some(path) = svg {
                fs::write(path, andor_svg(&region)?)?;
            }
        }
        PolicyArg::Edf => {
            let poly = edf_polytope(&ts)?;
            eprintln!("{} rows", poly.rows().len());
            write_or_print(out, &polytope_csv(&poly))?;
            if let Some(path) = svg {
                fs::write(path, polytope_svg(&poly)?)?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn minimize(input: &Input, out: Option<&Path>, svg: Option<&Path>) -> Result<ExitCode, Error> {
    let ts = input.load()?;
    let m = minimal_deadlines(&ts)?;
    let instants: Vec<String> = m.deadlines.instants.iter().map(Rational::to_string).collect();
    println!("{}", instants.join(" "));
    let csv = rows_to_csv(ts.len(), &m.rows);
    match out {
        Some(path) => fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    if let Some(path) = svg {
        fs::write(path, polytope_svg(&m.polytope()?)?)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn print_outcome(outcome: &LpOutcome) {
    println!("status {:?}", outcome.status);
    if let Some(v) = &outcome.optimum {
        println!("optimum {v}");
    }
    if let Some(x) = &outcome.argmax {
        println!("argmax {x}");
    }
    for label in &outcome.binding_rows {
        println!("binding {label}");
    }
}

fn optimize(input: &Input, analysis: &Analysis, weights: &[Rational]) -> Result<ExitCode, Error> {
    let ts = input.load()?;
    match analysis.policy {
        PolicyArg::Edf => print_outcome(&max_reward_edf(&ts, weights)?),
        PolicyArg::Fp => {
            let best = max_reward_fp(&ts, weights, analysis.points.into())?;
            print_outcome(&best.outcome);
            let picks: Vec<String> = best.selection.iter().map(Rational::to_string).collect();
            println!("selection {}", picks.join(" "));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn simulate_cmd(
    input: &Input,
    policy: PolicyArg,
    horizon: Option<&Rational>,
    out: Option<&Path>,
) -> Result<ExitCode, Error> {
    let ts = input.load()?;
    let c = ts.wcets()?;
    let policy = policy.into();
    let horizon = horizon.cloned().unwrap_or_else(|| default_horizon(&ts, policy));
    let trace = simulate(&ts, &c, policy, &horizon)?;
    if let Some(path) = out {
        fs::write(path, trace.to_csv())?;
    }
    println!("horizon {horizon}");
    for rt in response_times(&trace) {
        let worst = rt.worst.map_or_else(|| "-".to_string(), |w| w.to_string());
        println!("task {}: worst response {worst}, unfinished {}", rt.task, rt.unfinished);
    }
    match &trace.first_miss {
        None => println!("no deadline miss"),
        Some(m) => {
            let done = m.completion.as_ref().map_or_else(|| "unfinished".to_string(), |t| format!("completed at {t}"));
            println!("miss: task {}, job {}, deadline {}, {done}", m.task, m.job, m.deadline);
        }
    }
    Ok(verdict(trace.schedulable()))
}

/// `records.csv` -> `records.<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn experiment(args: &ExperimentArgs) -> Result<ExitCode, Error> {
    let config = ExperimentConfig {
        tasks: args.tasks,
        period_lo: args.lo,
        period_hi: args.hi,
        deadline_rule: match args.deadline_rule {
            RuleArg::Uniform1ToT => DeadlineRule::UniformOneToT,
            RuleArg::EqualT => DeadlineRule::EqualT,
        },
        samples: args.samples,
        seed: args.seed,
    };
    let records = run_experiment(&config)?;
    let buckets = envelope(&records);
    let c = fitted_log_coefficient(&records);
    match &args.out {
        Some(path) => {
            fs::write(path, records_csv(&records))?;
            fs::write(sibling(path, "envelope.csv"), envelope_csv(&buckets))?;
            fs::write(
                sibling(path, "meta.txt"),
                format!("{}fitted_c={c:.6}\n", config.metadata()),
            )?;
        }
        None => print!("{}", records_csv(&records)),
    }
    eprintln!("{} records, {} buckets", records.len(), buckets.len());
    eprintln!("fitted c (|D_min| <= c log2 H) = {c:.4}");
    if let (Some(top), Some(ratio)) = (buckets.last(), top_bucket_ratio(&buckets)) {
        eprintln!(
            "top bucket 2^{}: envelope |D_min| = {} against |D| = {} (ratio {ratio:.4})",
            top.bucket, top.max_dmin, top.argmax_d
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match &cli.command {
        Command::Check { input, analysis } => check(input, analysis),
        Command::Region {
            input,
            analysis,
            out,
            svg,
        } => region(input, analysis, out.as_deref(), svg.as_deref()),
        Command::Minimize { input, out, svg } => minimize(input, out.as_deref(), svg.as_deref()),
        Command::Optimize {
            input,
            analysis,
            weights,
        } => optimize(input, analysis, weights),
        Command::Simulate {
            input,
            policy,
            horizon,
            out,
        } => simulate_cmd(input, *policy, horizon.as_ref(), out.as_deref()),
        Command::Experiment(args) => experiment(args),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
