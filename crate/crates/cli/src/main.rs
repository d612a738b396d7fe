use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sea_grasp::config::{MatrixSelection, RunConfig, TraceLevel};
use sea_grasp::harness::{
    default_matrix, enveloping_matrix, run_trials, transition_matrix, ControllerKind, Friction,
    HarnessParams, ObjectKind, SweepReport, TrialSpec,
};
use sea_grasp::io;
use sea_grasp::validation;

/// Simulate proprioceptive grasps with a two-finger series-elastic gripper.
#[derive(Parser)]
#[command(name = "seagrasp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for all cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Per-trial JSON traces: off, failures or all.
    #[arg(long)]
    trace: Option<TraceLevel>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single trial.
    Trial {
        #[command(flatten)]
        common: Common,
        /// mimo, fixed_ratio_<r>, phys_ua_<r>, transition, enveloping_mimo, ...
        #[arg(long)]
        controller: ControllerKind,
        /// circle_<diameter mm> or box_<side mm>
        #[arg(long)]
        object: ObjectKind,
        /// Object distance from the palm, mm.
        #[arg(long)]
        location: f64,
        /// Initial distal angle, degrees. Not allowed for phys_ua.
        #[arg(long)]
        pose: Option<f64>,
        #[arg(long, default_value = "rubber")]
        friction: Friction,
    },
    /// Run the trial matrix chosen in the config (the full sweep by default).
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        repetitions: Option<u32>,
        /// default, enveloping or transition
        #[arg(long)]
        matrix: Option<MatrixSelection>,
    },
    /// Run the enveloping suite.
    Envelop {
        #[command(flatten)]
        common: Common,
    },
    /// Run the fingertip-to-enveloping transition suite.
    Transition {
        #[command(flatten)]
        common: Common,
    },
    /// Run the built-in invariant and oracle checks.
    Validate {
        #[command(flatten)]
        common: Common,
    },
}

/// Failure with its exit status.
struct Fail(u8, String);

fn usage(msg: impl Into<String>) -> Fail {
    Fail(2, msg.into())
}

fn load(common: &Common) -> Result<RunConfig, Fail> {
    let mut config = match &common.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            RunConfig::from_toml(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(out) = &common.out {
        config.run.output_dir = out.clone();
    }
    if let Some(jobs) = common.jobs {
        config.run.jobs = jobs;
    }
    if let Some(trace) = common.trace {
        config.run.trace = trace;
    }
    if let Some(seed) = common.seed {
        config.run.seed = seed;
    }
    Ok(config)
}

fn params(config: &RunConfig) -> Result<HarnessParams, Fail> {
    config.harness_params().map_err(usage)
}

/// Run, write traces and reports, print the summary. Exit 1 if any trial
/// diverged.
fn execute(config: &RunConfig, specs: &[TrialSpec]) -> Result<(), Fail> {
    let params = params(config)?;
    let dir = &config.run.output_dir;
    prepare(dir)?;
    let level = config.run.trace;
    let runs = run_trials(specs, &params, config.jobs(), level != TraceLevel::Off);
    let mut results = Vec::with_capacity(runs.len());
    for (i, run) in runs.into_iter().enumerate() {
        let mut result = run.result;
        if let Some(trace) = run
            .trace
            .filter(|_| level.wants(result.outcome.is_success()))
        {
            let name = io::trace_file_name(i, &result.spec);
            io::write_trace_file(&dir.join("traces").join(&name), &trace)
                .map_err(|e| usage(e.to_string()))?;
            result.trace_path = Some(format!("traces/{name}"));
        }
        results.push(result);
    }
    let report = SweepReport::from_results(results);
    io::write_report(dir, &report, Some(&config.to_toml())).map_err(|e| usage(e.to_string()))?;
    print_summary(&report);
    let diverged = report.results.iter().filter(|r| r.diverged).count();
    if diverged > 0 {
        return Err(Fail(1, format!("{diverged} trial(s) diverged")));
    }
    Ok(())
}

fn prepare(dir: &Path) -> Result<(), Fail> {
    fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    let probe = dir.join(".write-test");
    fs::write(&probe, b"").map_err(|e| usage(format!("{}: not writable: {e}", dir.display())))?;
    let _ = fs::remove_file(probe);
    Ok(())
}

fn print_summary(report: &SweepReport) {
    if let [single] = report.results.as_slice() {
        println!(
            "{} {} {}mm {} -> {} (pose change {})",
            single.spec.controller,
            single.spec.object,
            single.spec.location_mm,
            single.spec.friction,
            single.outcome,
            single
                .pose_change_deg
                .map(|p| format!("{p:.2} deg"))
                .unwrap_or_else(|| "n/a".into()),
        );
        return;
    }
    println!(
        "{:<32} {:>6} {:>8} {:>10} {:>10} {:>9}",
        "controller", "trials", "success", "fingertip", "enveloped", "limited"
    );
    for s in &report.summaries {
        println!(
            "{:<32} {:>6} {:>8.3} {:>10} {:>10} {:>9}",
            s.controller,
            s.trials,
            s.success_rate,
            s.fingertip_stable,
            s.enveloped,
            s.joint_limited
        );
    }
}

fn run(cli: Cli) -> Result<(), Fail> {
    match cli.command {
        Command::Trial {
            common,
            controller,
            object,
            location,
            pose,
            friction,
        } => {
            let config = load(&common)?;
            let spec = TrialSpec {
                controller,
                object,
                location_mm: location,
                initial_distal_deg: pose,
                friction,
                seed: config.run.seed,
            };
            spec.validate().map_err(|e| usage(e.to_string()))?;
            execute(&config, &[spec])
        }
        Command::Sweep {
            common,
            repetitions,
            matrix,
        } => {
            let mut config = load(&common)?;
            if let Some(r) = repetitions {
                if r == 0 {
                    return Err(usage("--repetitions must be at least 1"));
                }
                config.run.repetitions = r;
            }
            if let Some(m) = matrix {
                config.run.matrix = m;
            }
            let seed = config.run.seed;
            let specs = match config.run.matrix {
                MatrixSelection::Default => default_matrix(config.run.repetitions, seed),
                MatrixSelection::Enveloping => enveloping_matrix(seed),
                MatrixSelection::Transition => transition_matrix(seed),
            };
            execute(&config, &specs)
        }
        Command::Envelop { common } => {
            let config = load(&common)?;
            execute(&config, &enveloping_matrix(config.run.seed))
        }
        Command::Transition { common } => {
            let config = load(&common)?;
            execute(&config, &transition_matrix(config.run.seed))
        }
        Command::Validate { common } => {
            let config = load(&common)?;
            let checks = validation::run_all(&params(&config)?, config.run.seed);
            for c in &checks {
                println!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(Fail(1, format!("{failed} check(s) failed")));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
