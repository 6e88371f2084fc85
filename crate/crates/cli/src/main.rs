use clap::{Parser, Subcommand};
use mieflow_cli::config::ExperimentConfig;
use mieflow_cli::experiments::run_experiment;
use mieflow_cli::output::{write_all, Manifest};
use mieflow_cli::verify::{render, run_suite, SUITES};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "mieflow", version, about = "Measurement-induced entanglement experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Overrides the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (MIEFLOW_THREADS applies when this is absent)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory
    #[arg(long, global = true, default_value = "mieflow-out")]
    out: PathBuf,
    /// Also write a log-log SVG per series
    #[arg(long, global = true)]
    svg: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config
    Run { config: PathBuf },
    /// Run an invariant suite: oracle, topo, rs or mera
    Verify { suite: String },
}

fn env_threads() -> Result<Option<usize>, String> {
    match std::env::var("MIEFLOW_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("MIEFLOW_THREADS must be a positive integer, got '{v}'")),
        },
        Err(_) => Ok(None),
    }
}

/// Flag, then environment, then config, then all cores.
fn setup_threads(flag: Option<usize>, config: Option<usize>) -> Result<usize, String> {
    if flag == Some(0) {
        return Err("--threads must be positive".into());
    }
    let n = match flag.or(env_threads()?).or(config) {
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    Ok(n)
}

fn run(cli: &Cli, path: &PathBuf) -> ExitCode {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let mut cfg = match ExperimentConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}:{e}", path.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(seed) = cli.seed {
        cfg.sampling.seed = seed;
    }
    let threads = match setup_threads(cli.threads, cfg.sampling.threads) {
        Ok(n) => n,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let clock = Instant::now();
    let report = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    };
    let manifest = Manifest {
        name: cfg.name(),
        kind: cfg.kind.name().to_string(),
        config_path: path.display().to_string(),
        config_text: text,
        seed: cfg.sampling.seed,
        threads,
        n_samples: cfg.sampling.n_samples,
        started_unix,
        wall_time_s: clock.elapsed().as_secs_f64(),
    };
    match write_all(&cli.out, &report, &manifest, cli.svg) {
        Ok(files) => {
            for (k, v) in &report.summary {
                println!("{k} = {v}");
            }
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: writing {}: {e}", cli.out.display());
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

fn verify(cli: &Cli, suite: &str) -> ExitCode {
    if !SUITES.contains(&suite) {
        eprintln!("error: unknown suite '{suite}', expected one of {}", SUITES.join(", "));
        return ExitCode::from(EXIT_CONFIG);
    }
    if let Err(e) = setup_threads(cli.threads, None) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    match run_suite(suite) {
        Ok(checks) => {
            print!("{}", render(&checks));
            if checks.iter().all(|c| c.pass) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAILURE)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run { config } => run(&cli, config),
        Command::Verify { suite } => verify(&cli, suite),
    }
}
