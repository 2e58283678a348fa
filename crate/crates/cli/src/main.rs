use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spinlase::config::{load_config, SweepSpec, Task};
use spinlase::sweep::{run_sweep, SweepError};
use spinlase::{emit_figures, validate};

#[derive(Parser)]
#[command(
    name = "spinlase",
    version,
    about = "Superradiant lasing with interacting spins"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the tasks of a sweep configuration.
    Sweep(RunArgs),
    /// Draw SVG figures for a result directory.
    Figures {
        #[arg(long)]
        out: PathBuf,
        /// Restrict to these tasks (repeatable).
        #[arg(long, value_parser = parse_task)]
        task: Vec<Task>,
    },
    /// Exact steady states only (the exact-steady-state task).
    Exact(RunArgs),
    /// Run the built-in oracle and invariant checks.
    Validate,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides run.out.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core. Overrides run.jobs.
    #[arg(long)]
    jobs: Option<usize>,
    /// Restrict to these tasks (repeatable); overrides run.tasks.
    #[arg(long, value_parser = parse_task)]
    task: Vec<Task>,
}

fn parse_task(s: &str) -> Result<Task, String> {
    Task::parse(s).ok_or_else(|| {
        let names: Vec<_> = Task::ALL.iter().map(Task::as_str).collect();
        format!("unknown task `{s}`; expected one of {}", names.join(", "))
    })
}

fn run(args: RunArgs, exact_only: bool) -> ExitCode {
    let spec: SweepSpec = match load_config(&args.config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let tasks = if exact_only {
        vec![Task::ExactSteadyState]
    } else if args.task.is_empty() {
        spec.run.tasks.clone()
    } else {
        args.task.clone()
    };
    let Some(out) = args.out.or_else(|| spec.run.out.clone()) else {
        eprintln!("error: {}", SweepError::NoOutput);
        return ExitCode::from(1);
    };
    let jobs = args.jobs.unwrap_or(spec.run.jobs);
    match run_sweep(&spec, &tasks, &out, jobs) {
        Ok(r) => {
            println!(
                "{} records, {} failed points -> {}",
                r.records,
                r.failures,
                out.display()
            );
            if r.failures > 0 {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Sweep(a) => run(a, false),
        Cmd::Exact(a) => run(a, true),
        Cmd::Figures { out, task } => {
            let only = (!task.is_empty()).then_some(task.as_slice());
            match emit_figures(&out, only) {
                Ok(r) => {
                    for e in &r.errors {
                        eprintln!("error: {e}");
                    }
                    println!(
                        "{} figures -> {}",
                        r.written.len(),
                        out.join("figures").display()
                    );
                    if r.errors.is_empty() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(2)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Cmd::Validate => {
            let checks = validate::run_validation();
            for c in &checks {
                println!("{c}");
            }
            if checks.iter().all(|c| c.pass) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
    }
}
