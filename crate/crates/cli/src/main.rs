use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sipframe_cli::emit::summary;
use sipframe_cli::{emit, run, CliError, Format, ProblemSpec, RunOptions, Task};

#[derive(Parser)]
#[command(name = "sipframe", version, about = "Frames and K-frames in weighted l^p spaces with a semi-inner product")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Randomized check of the semi-inner-product axioms and duality maps.
    Axioms(Common),
    /// Estimate frame and K-frame bounds.
    Certify(Common),
    /// Build a dual family and check the reconstruction identity.
    Reconstruct(Common),
    /// Check the premise and conclusions of the perturbation theorem.
    Perturb(Common),
    /// Sampling and reconstruction in a discrete reproducing kernel space.
    Sample(Common),
}

#[derive(Args)]
struct Common {
    /// Problem spec (JSON, schema 1).
    #[arg(long)]
    spec: PathBuf,
    /// Overrides the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of optimizer restarts.
    #[arg(long)]
    restarts: Option<usize>,
    /// Attach the exhaustive grid oracle (complex dimension at most 3).
    #[arg(long)]
    oracle: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall-clock time in the report (makes it nondeterministic).
    #[arg(long)]
    timing: bool,
}

fn execute(task: Task, c: Common) -> Result<(), CliError> {
    let spec = ProblemSpec::from_path(&c.spec)?;
    let opts = RunOptions {
        seed: c.seed,
        restarts: c.restarts,
        oracle: c.oracle,
        timing: c.timing,
    };
    let report = run(&spec, task, &opts)?;
    match &c.out {
        Some(path) => {
            let f = File::create(path).map_err(|e| CliError::Numerical(format!("cannot create {}: {e}", path.display())))?;
            emit(&report, c.format, &mut BufWriter::new(f))?;
            eprintln!("{}", summary(&report));
        }
        None => emit(&report, c.format, &mut io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    // Usage errors are validation errors (exit 1), not clap's default 2.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let (task, common) = match cli.command {
        Command::Axioms(c) => (Task::Axioms, c),
        Command::Certify(c) => (Task::Certify, c),
        Command::Reconstruct(c) => (Task::Reconstruct, c),
        Command::Perturb(c) => (Task::Perturb, c),
        Command::Sample(c) => (Task::Sample, c),
    };
    match execute(task, common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
