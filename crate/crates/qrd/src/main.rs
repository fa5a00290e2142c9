use clap::{Parser, Subcommand, ValueEnum};
use qrd::experiment::{self, ExperimentConfig, RunOutput};
use qrd::Error;
use std::path::PathBuf;

/// SER analysis and simulation of rotation-diversity BPSK with displaced
/// squeezed states over Gamma-Gamma turbulence.
#[derive(Parser)]
#[command(name = "qrd", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Experiment manifest (TOML, or JSON by extension). Defaults built in.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the master seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker thread count; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// SER versus photon budget for the rotated and reference schemes.
    SerSweep,
    /// Union-bound SER over the (theta, beta) grid at fixed budget.
    Surface,
    /// Closed-form and numeric optimal designs with agreement deltas.
    Optimize {
        /// Photon budget to optimize for.
        #[arg(long, default_value_t = 80.0)]
        n: f64,
    },
    /// Special-function and channel self-checks; nonzero exit on failure.
    Validate,
}

const EXIT_CONFIG: i32 = 1;
const EXIT_NUMERICAL: i32 = 2;
const EXIT_VALIDATION: i32 = 3;

fn main() {
    std::process::exit(run(Cli::parse()));
}

fn run(cli: Cli) -> i32 {
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot configure thread pool: {e}");
            return EXIT_CONFIG;
        }
    }

    let mut cfg = match &cli.config {
        Some(path) => match ExperimentConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_CONFIG;
            }
        },
        None => match cli.cmd {
            Cmd::Surface => ExperimentConfig::surface_default(),
            _ => ExperimentConfig::default(),
        },
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }

    let rendered = match &cli.cmd {
        Cmd::SerSweep => experiment::ser_sweep(&cfg).map(|out| render(&out, cli.format)),
        Cmd::Surface => experiment::surface(&cfg).map(|out| render(&out, cli.format)),
        Cmd::Optimize { n } => experiment::optimize_report(&cfg, *n).map(|rep| {
            let mut s = serde_json::to_string_pretty(&rep).expect("report serializes");
            s.push('\n');
            s
        }),
        Cmd::Validate => {
            let checks = experiment::validate_checks(1.0);
            let mut s = String::new();
            for c in &checks {
                s.push_str(&format!(
                    "{:<55} observed {:+.10e}  expected {:+.10e}  tol {:.1e}  {}\n",
                    c.name,
                    c.observed,
                    c.expected,
                    c.tolerance,
                    if c.pass { "ok" } else { "FAIL" }
                ));
            }
            if let Err(code) = emit(&cli.out, &s) {
                return code;
            }
            return if checks.iter().all(|c| c.pass) {
                0
            } else {
                EXIT_VALIDATION
            };
        }
    };

    match rendered {
        Ok(text) => match emit(&cli.out, &text) {
            Ok(()) => 0,
            Err(code) => code,
        },
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => EXIT_CONFIG,
                _ => EXIT_NUMERICAL,
            }
        }
    }
}

fn render(out: &RunOutput, format: Format) -> String {
    match format {
        Format::Csv => experiment::to_csv(out),
        Format::Json => experiment::to_json(out),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> std::result::Result<(), i32> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| {
            eprintln!("error: cannot write {}: {e}", path.display());
            EXIT_CONFIG
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
