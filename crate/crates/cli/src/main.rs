use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ssm_cli::config::Format;
use ssm_cli::error::CliError;
use ssm_cli::{report, Overrides};

#[derive(Parser)]
#[command(name = "ssm", version, about = "Diagonal state space model experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the job in a JSON config for each seed.
    Run {
        config: PathBuf,
        /// Comma-separated seeds, replacing the config's list.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Seeds run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Tabulate the summaries found under a results directory.
    Report {
        dir: PathBuf,
        /// CSV destination; defaults to `<dir>/report.csv`.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            config,
            seeds,
            output_dir,
            format,
            jobs,
        } => {
            let config = ssm_cli::load_config(&config, &Overrides { seeds, output_dir, format })?;
            let summary = ssm_cli::run(&config, jobs)?;
            print!("{}", ssm_cli::render_run(&config, &summary));
            Ok(())
        }
        Command::Report { dir, csv } => {
            let built = report::build(&dir)?;
            print!("{}", report::render_text(&built));
            let csv_path = csv.unwrap_or_else(|| dir.join("report.csv"));
            std::fs::write(&csv_path, report::render_csv(&built)?)
                .map_err(|e| CliError::io(&csv_path.display().to_string(), e))?;
            if built.is_complete() {
                Ok(())
            } else {
                Err(CliError::report(format!(
                    "{} gap(s), {} unreadable summary file(s)",
                    built.tables.iter().map(|t| t.gaps()).sum::<usize>(),
                    built.corrupted.len()
                )))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", CliError::schema(e.to_string().trim_end()).to_json());
            return ExitCode::from(2);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
