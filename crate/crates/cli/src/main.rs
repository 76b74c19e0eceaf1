use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use cpt_refine::refine::Gate;
use cpt_refine::{GaConfig, Method, Metric, Progress};
use cpt_refine_cli::{cmd_method, cmd_reproduce, cmd_score, MethodRequest};
use env_logger::Env;

/// Approximate a conditional probability table with structural refinements.
#[derive(Parser, Debug)]
#[command(name = "cpt-refine", version)]
struct Cli {
    /// Worker threads (default: CPT_REFINE_THREADS, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Suppress the progress line on stderr.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score an approximate table against the truth.
    Score {
        truth: PathBuf,
        approx: PathBuf,
        #[arg(long, default_value = "tvd")]
        metric: Metric,
        /// Print the per-row distances as well.
        #[arg(long)]
        verbose: bool,
    },
    /// Run every method and print the comparison.
    Reproduce {
        truth: PathBuf,
        #[command(flatten)]
        ga: GaArgs,
        /// Write the comparison CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write every report and approximate table into this directory.
        #[arg(long)]
        artifacts: Option<PathBuf>,
    },
    /// Remove the edge from one parent.
    Prune {
        truth: PathBuf,
        #[arg(long)]
        parent: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Route some parents through a logic gate.
    Divorce {
        truth: PathBuf,
        /// Comma-separated parent names.
        #[arg(long, value_delimiter = ',', required = true)]
        parents: Vec<String>,
        /// AND, OR or XOR.
        #[arg(long)]
        gate: Gate,
        /// NAME=STATE[,STATE]: the states of a divorced parent that count as
        /// true. Binary parents default to their second state.
        #[arg(long)]
        map: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Best two-block simple canonical model.
    Scm {
        truth: PathBuf,
        #[command(flatten)]
        ga: GaArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Independence of causal influences, one mechanism per parent.
    Ici {
        truth: PathBuf,
        #[command(flatten)]
        ga: GaArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Surjective ICI; searches every partition unless one is given.
    Sici {
        truth: PathBuf,
        /// Blocks separated by '|', parents within a block by ',',
        /// e.g. "Hypertension | Depression,Sex,SleepDuration".
        #[arg(long)]
        partition: Option<String>,
        #[command(flatten)]
        ga: GaArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct GaArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 300)]
    population: usize,
    #[arg(long, default_value_t = 2000)]
    max_generations: usize,
    #[arg(long, default_value_t = 50)]
    stall_limit: usize,
}

impl GaArgs {
    fn config(&self) -> GaConfig {
        GaConfig {
            seed: self.seed,
            restarts: self.restarts,
            population: self.population,
            max_generations: self.max_generations,
            stall_limit: self.stall_limit,
            ..GaConfig::default()
        }
    }
}

/// Throttled single-line progress on stderr.
struct ProgressLine {
    enabled: bool,
    last: Mutex<Option<Instant>>,
}

impl ProgressLine {
    fn new(quiet: bool) -> Self {
        Self {
            enabled: !quiet && std::io::stderr().is_terminal(),
            last: Mutex::new(None),
        }
    }

    fn report(&self, label: &str, p: &Progress) {
        if !self.enabled {
            return;
        }
        let mut last = self.last.lock().expect("progress lock");
        if last.is_some_and(|t| t.elapsed() < Duration::from_millis(200)) {
            return;
        }
        *last = Some(Instant::now());
        eprint!(
            "\r{label}: restart {} generation {} evaluations {} best {:.4}   ",
            p.restart, p.generation, p.evaluations, p.best_score
        );
    }

    fn finish(&self) {
        if self.enabled && self.last.lock().expect("progress lock").is_some() {
            eprintln!();
        }
    }
}

fn run(cli: Cli) -> cpt_refine::Result<String> {
    let progress = ProgressLine::new(cli.quiet);
    let method = |request, ga: &GaArgs, out: &Option<PathBuf>, truth: &PathBuf, label: &str| {
        let outcome = cmd_method(truth, &request, &ga.config(), out.as_deref(), &|p| {
            progress.report(label, p)
        });
        progress.finish();
        outcome.map(|o| o.to_text())
    };
    let no_ga = GaArgs {
        seed: 0,
        restarts: 1,
        population: 2,
        max_generations: 1,
        stall_limit: 1,
    };
    match cli.command {
        Command::Score {
            truth,
            approx,
            metric,
            verbose,
        } => cmd_score(&truth, &approx, metric, verbose),
        Command::Reproduce {
            truth,
            ga,
            out,
            artifacts,
        } => {
            let report = cmd_reproduce(
                &truth,
                &ga.config(),
                out.as_deref(),
                artifacts.as_deref(),
                &|m, p| progress.report(m.name(), p),
            );
            progress.finish();
            report.map(|r| r.to_text())
        }
        Command::Prune { truth, parent, out } => method(
            MethodRequest::Prune { parent },
            &no_ga,
            &out,
            &truth,
            Method::Pruning.name(),
        ),
        Command::Divorce {
            truth,
            parents,
            gate,
            map,
            out,
        } => method(
            MethodRequest::Divorce {
                parents,
                gate,
                maps: map,
            },
            &no_ga,
            &out,
            &truth,
            Method::Divorcing.name(),
        ),
        Command::Scm { truth, ga, out } => {
            method(MethodRequest::Scm, &ga, &out, &truth, Method::Scm.name())
        }
        Command::Ici { truth, ga, out } => {
            method(MethodRequest::Ici, &ga, &out, &truth, Method::Ici.name())
        }
        Command::Sici {
            truth,
            partition,
            ga,
            out,
        } => method(
            MethodRequest::Sici { partition },
            &ga,
            &out,
            &truth,
            Method::Sici.name(),
        ),
    }
}

fn threads(cli: &Cli) -> Result<Option<usize>, String> {
    match cli.threads {
        Some(n) => Ok(Some(n)),
        None => match std::env::var("CPT_REFINE_THREADS") {
            Ok(v) => v
                .parse()
                .map(Some)
                .map_err(|_| format!("CPT_REFINE_THREADS={v:?} is not a thread count")),
            Err(_) => Ok(None),
        },
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    match threads(&cli) {
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
            {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
        Ok(None) => {}
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }

    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
