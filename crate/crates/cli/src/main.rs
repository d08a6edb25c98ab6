use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use lrcone_cli::config::{ExperimentKind, LoadedConfig};
use lrcone_cli::{describe, output, run};

#[derive(Parser)]
#[command(name = "lrcone", version, about = "Light-cone experiments for lattice bosons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker threads for grid points (0 = all cores).
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run all invariant suites.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// List experiment kinds.
    List,
    /// Explain an experiment kind.
    Describe { kind: String },
}

fn init_threads(threads: usize) -> usize {
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        log::warn!("could not configure thread pool: {e}");
    }
    rayon::current_num_threads()
}

fn run(config: PathBuf, out: PathBuf, threads: usize, seed: Option<u64>) -> ExitCode {
    let loaded = match LoadedConfig::read(&config) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("{}: {e}", config.display());
            return ExitCode::from(2);
        }
    };
    let threads = init_threads(threads);
    let start = Instant::now();
    let result = match run::execute(&loaded, seed) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{}: {e}", config.display());
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let elapsed = start.elapsed().as_secs_f64();
    let seed = seed.unwrap_or(loaded.config.seed);
    match output::write_outputs(&out, &loaded, &result, seed, threads, elapsed) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            for c in &result.checks {
                println!("{c}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("cannot write outputs to {}: {e}", out.display());
            ExitCode::FAILURE
        }
    }
}

fn verify(seed: u64, threads: usize) -> ExitCode {
    init_threads(threads);
    match lrcone_core::verify::default_suites(seed, 20) {
        Ok(checks) => {
            for c in &checks {
                println!("{c}");
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            println!("{} checks, {failed} failed", checks.len());
            if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(4)
            }
        }
        Err(e) => {
            eprintln!("verify: {e}");
            ExitCode::from(3)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, threads, seed } => run(config, out, threads, seed),
        Command::Verify { seed, threads } => verify(seed, threads),
        Command::List => {
            for kind in ExperimentKind::ALL {
                println!("{:<11} {}", kind.name(), describe::summary(kind));
            }
            ExitCode::SUCCESS
        }
        Command::Describe { kind } => match ExperimentKind::parse(&kind) {
            Some(k) => {
                println!("{}", describe::describe(k));
                ExitCode::SUCCESS
            }
            None => {
                let known: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
                eprintln!("unknown experiment kind `{kind}` (known: {})", known.join(", "));
                ExitCode::from(2)
            }
        },
    }
}
