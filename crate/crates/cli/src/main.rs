use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use fracstable::io::sha256_hex;
use serde_json::json;

use fracstable_cli::config::*;
use fracstable_cli::{tasks, CliError};

/// Fundamental solutions, mild solutions and Monte Carlo checks for
/// time-fractional equations with stable spatial operators.
#[derive(Debug, Parser)]
#[command(name = "fracstable", version)]
struct Cli {
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: the config's `output`, else `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, env = "FRACSTABLE_THREADS")]
    threads: Option<usize>,
    /// Exit with status 1 when any reported check fails.
    #[arg(long, global = true, env = "FRACSTABLE_STRICT")]
    strict: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Args, Default)]
struct ParamArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long = "dim")]
    dimension: Option<usize>,
    /// JSON measure block.
    #[arg(long)]
    measure: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate E_{α,δ}(z) for z ≤ 0.
    MlEval {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        delta: Option<f64>,
        /// Comma-separated arguments.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        z: Vec<f64>,
    },
    /// Synthesize Z, Y or G at one time.
    KernelEval {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, value_enum)]
        format: Option<FieldFormat>,
    },
    /// Picard iteration for the mild solution.
    Solve {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        t_final: Option<f64>,
    },
    /// Sample X(E(t)) and compare with Z(t, ·).
    Simulate {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        emit_samples: bool,
    },
    /// Numerical identity checks.
    Verify {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum)]
        suite: Option<Suite>,
    },
    /// Log-log decay fits of kernel or solution norms.
    FitDecay {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        kind: Option<String>,
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        times: Vec<f64>,
        #[arg(long)]
        emit_csv: bool,
    },
    /// L_p norms under grid refinement around the critical exponent.
    ScanCritical {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        kind: Option<String>,
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
    },
}

fn apply_params(cfg: &mut ExperimentConfig, a: &ParamArgs) -> Result<(), CliError> {
    let p = &mut cfg.params;
    if let Some(v) = a.alpha {
        p.alpha = v;
    }
    if let Some(v) = a.beta {
        p.beta = v;
    }
    if let Some(v) = a.gamma {
        p.gamma = v;
    }
    if let Some(v) = a.lambda {
        p.lambda = v;
    }
    if let Some(v) = a.dimension {
        p.dimension = v;
    }
    if let Some(path) = &a.measure {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let spec = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("measure: {e}")))?;
        cfg.measure = Some(spec);
    }
    Ok(())
}

/// Sets `key` in the options block.
fn set_option(cfg: &mut ExperimentConfig, key: &str, value: serde_json::Value) {
    if !cfg.options.is_object() {
        cfg.options = json!({});
    }
    cfg.options[key] = value;
}

fn apply_command(cfg: &mut ExperimentConfig, cmd: &Command) -> Result<Task, CliError> {
    let (task, params) = match cmd {
        Command::MlEval { params, delta, z } => {
            if let Some(d) = delta {
                set_option(cfg, "delta", json!(d));
            }
            if !z.is_empty() {
                set_option(cfg, "z", json!(z));
            }
            (Task::MlEval, params)
        }
        Command::KernelEval { params, kind, t, format } => {
            if let Some(k) = kind {
                set_option(cfg, "kind", json!(k.to_uppercase()));
            }
            if let Some(t) = t {
                set_option(cfg, "t", json!(t));
            }
            if let Some(f) = format {
                set_option(cfg, "format", json!(f));
            }
            (Task::KernelEval, params)
        }
        Command::Solve { params, t_final } => {
            if let Some(t) = t_final {
                set_option(cfg, "t_final", json!(t));
            }
            (Task::Solve, params)
        }
        Command::Simulate { params, t, n, emit_samples } => {
            if let Some(t) = t {
                set_option(cfg, "t", json!(t));
            }
            if let Some(n) = n {
                set_option(cfg, "n", json!(n));
            }
            if *emit_samples {
                set_option(cfg, "emit_samples", json!(true));
            }
            (Task::Simulate, params)
        }
        Command::Verify { params, suite } => {
            if let Some(s) = suite {
                set_option(cfg, "suite", json!(s));
            }
            (Task::Verify, params)
        }
        Command::FitDecay { params, kind, p, times, emit_csv } => {
            if let Some(k) = kind {
                let k = if k.eq_ignore_ascii_case("solution") { "solution".to_string() } else { k.to_uppercase() };
                set_option(cfg, "kind", json!(k));
            }
            if !p.is_empty() {
                set_option(cfg, "p", p.iter().map(|&v| exponent_value(v)).collect());
            }
            if !times.is_empty() {
                set_option(cfg, "times", json!(times));
            }
            if *emit_csv {
                set_option(cfg, "emit_csv", json!(true));
            }
            (Task::FitDecay, params)
        }
        Command::ScanCritical { params, kind, p } => {
            if let Some(k) = kind {
                set_option(cfg, "kind", json!(k.to_uppercase()));
            }
            if !p.is_empty() {
                set_option(cfg, "p", p.iter().map(|&v| exponent_value(v)).collect());
            }
            (Task::ScanCritical, params)
        }
    };
    apply_params(cfg, params)?;
    if let Some(t) = cfg.task {
        if t != task {
            return Err(CliError::Config(format!("config task `{}` conflicts with subcommand `{}`", t.name(), task.name())));
        }
    }
    Ok(task)
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<String, CliError> {
    std::fs::write(dir.join(name), bytes).map_err(|e| CliError::Task(format!("writing {name}: {e}")))?;
    Ok(sha256_hex(bytes))
}

fn unix_seconds() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = Some(s);
    }
    let task = match &cli.command {
        Some(cmd) => apply_command(&mut cfg, cmd)?,
        None => cfg.task.ok_or_else(|| CliError::Config("no subcommand given and the config names no task".into()))?,
    };
    cfg.task = Some(task);
    cfg.seed = Some(cfg.seed());
    cfg.validate()?;
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    }
    let out = cli.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out).map_err(|e| CliError::Task(format!("{}: {e}", out.display())))?;

    let started = unix_seconds();
    let clock = Instant::now();
    let outcome = tasks::run(task, &cfg)?;
    let elapsed = clock.elapsed().as_secs_f64();

    let mut outputs = Vec::new();
    for (name, bytes) in &outcome.files {
        outputs.push(json!({"file": name, "sha256": write_file(&out, name, bytes)?}));
    }
    let report = serde_json::to_vec_pretty(&outcome.report).expect("report serializes");
    outputs.push(json!({"file": "report.json", "sha256": write_file(&out, "report.json", &report)?}));
    let manifest = json!({
        "tool": "fracstable",
        "version": env!("CARGO_PKG_VERSION"),
        "task": task.name(),
        "seed": cfg.seed(),
        "config": cfg,
        "threads": rayon::current_num_threads(),
        "outputs": outputs,
        "pass": outcome.pass,
        "timing": {"started_unix": started, "elapsed_seconds": elapsed},
    });
    write_file(&out, "manifest.json", &serde_json::to_vec_pretty(&manifest).expect("manifest serializes"))?;
    // A closed stdout (e.g. piped into `head`) must not abort after the files are written.
    let _ = writeln!(std::io::stdout().lock(), "{}", String::from_utf8_lossy(&report));
    Ok(outcome.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(pass) => {
            if !pass {
                eprintln!("one or more checks failed");
                if cli.strict {
                    return ExitCode::from(1);
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
