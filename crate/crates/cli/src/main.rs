use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ssvlab_cli::{cmd_eval, cmd_reproduce, cmd_solve, cmd_train, CliError, ConfigFile, RunOptions};

#[derive(Parser)]
#[command(name = "ssvlab", version, about = "Self-similar-variable surrogate laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the `seed` key.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "ssvlab-out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the reference solution.
    Solve(Common),
    /// Train the physical and SSV heads.
    Train(Common),
    /// Extrapolation metrics and comparison snapshots.
    Eval(Common),
    /// Full pipeline for one figure (fig1, fig2, fig3, fig5, fig6, fig7).
    Reproduce {
        figure: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("SSVLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Config(format!("SSVLAB_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Other(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    let opts = |c: Common| -> Result<RunOptions, CliError> {
        Ok(RunOptions { config: ConfigFile::load(&c.config)?, seed: c.seed, out: c.out })
    };
    let manifest = match cli.command {
        Command::Solve(c) => cmd_solve(&opts(c)?)?,
        Command::Train(c) => cmd_train(&opts(c)?)?,
        Command::Eval(c) => cmd_eval(&opts(c)?)?,
        Command::Reproduce { figure, common } => cmd_reproduce(&opts(common)?, figure.as_deref())?,
    };
    for (name, path) in &manifest.artifacts {
        println!("{name}\t{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ssvlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
