use std::path::PathBuf;
use std::process::ExitCode;

use cdnn_bench::config::ExperimentConfig;
use cdnn_bench::verify::{verify, VerifyKind};
use cdnn_bench::{run, BenchError};
use cdnn_core::data::{format_f64, generate, load_csv, write_csv, DgpFamily, DgpSpec};
use cdnn_core::estimator::load_checkpoint;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "cdnn", version, about = "Two-stage neural treatment-effect estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a dataset from a synthetic process and write it as CSV.
    Generate {
        #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
        family: Option<String>,
        /// JSON file holding a full process description.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Run an experiment and write `<stem>.csv` and `<stem>.md`.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Output stem; overrides the config's `output`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run an invariant suite.
    Verify {
        #[arg(value_enum)]
        kind: VerifyArg,
    },
    /// Predict per-row effects from a saved estimator.
    Score {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyArg {
    Gradients,
    Lemma,
    Orthogonality,
    All,
}

enum Failure {
    Check(String),
    Error(BenchError),
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        Failure::Error(e)
    }
}

impl From<cdnn_core::Error> for Failure {
    fn from(e: cdnn_core::Error) -> Self {
        Failure::Error(e.into())
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Generate { family, spec, n, seed, output } => {
            let spec = match (family, spec) {
                (Some(name), _) => name.parse::<DgpFamily>()?.spec(seed),
                (None, Some(path)) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
                    let mut spec: DgpSpec = serde_json::from_str(&text)
                        .map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
                    spec.seed = seed;
                    spec
                }
                (None, None) => unreachable!("clap requires one source"),
            };
            write_csv(&generate(&spec, n)?, &output)?;
            eprintln!("wrote {n} rows to {}", output.display());
        }
        Command::Bench { config, output } => {
            let mut config = ExperimentConfig::load(&config)?;
            if output.is_some() {
                config.output = output;
            }
            let report = run(&config)?;
            let stem = config.output.clone().unwrap_or_else(|| PathBuf::from("report"));
            let (csv, md) = report.emit(&stem)?;
            print!("{}", report.to_markdown());
            let failures = report.failure_count();
            if failures > 0 {
                eprintln!("warning: {failures} estimator fit(s) failed and were excluded");
            }
            eprintln!("wrote {} and {}", csv.display(), md.display());
            if report.aggregates.iter().any(|a| a.succeeded == 0) {
                return Err(Failure::Check("an estimator failed on every replication".into()));
            }
        }
        Command::Verify { kind } => {
            let kinds = match kind {
                VerifyArg::Gradients => vec![VerifyKind::Gradients],
                VerifyArg::Lemma => vec![VerifyKind::Lemma],
                VerifyArg::Orthogonality => vec![VerifyKind::Orthogonality],
                VerifyArg::All => VerifyKind::ALL.to_vec(),
            };
            let mut failed = Vec::new();
            for k in kinds {
                let report = verify(k)?;
                println!("{report}");
                if !report.passed() {
                    failed.push(k.name());
                }
            }
            if !failed.is_empty() {
                return Err(Failure::Check(format!("failed: {}", failed.join(", "))));
            }
        }
        Command::Score { checkpoint, data, output } => {
            let estimator = load_checkpoint(&checkpoint)?;
            let data = load_csv(&data)?;
            let ite = estimator.predict_dataset(&data)?;
            let mut body = String::from("row,ite\n");
            for (i, v) in ite.iter().enumerate() {
                body.push_str(&format!("{i},{}\n", format_f64(*v)));
            }
            std::fs::write(&output, body).map_err(|e| BenchError::io(&output, e))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
