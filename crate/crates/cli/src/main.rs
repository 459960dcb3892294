use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dexp3m::feedback::DeliveryOrder;
use dexp3m_cli::{commands, ExperimentConfig, Result};

#[derive(Parser)]
#[command(name = "dexp3m", version, about = "Delayed multiple-play bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    NewestFirst,
    Arrival,
}

#[derive(Subcommand)]
enum Command {
    /// Run every seed of a config and write CSVs.
    Run {
        config: PathBuf,
        /// Overrides `experiment.output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the config once per value of its [sweep] axis.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and check a config without running it.
    Validate { config: PathBuf },
    /// Print the virtual-slot table for delays (2, 0, 0).
    DemoTable2 {
        #[arg(long, value_enum, default_value = "newest-first")]
        order: Order,
    },
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out } => {
            let loaded = ExperimentConfig::load(&config)?;
            let outcome = commands::run(&loaded, out.as_deref())?;
            for r in &outcome.results {
                println!(
                    "seed {:>6}  pseudo_regret {:>14.4}  realized_regret {:>14.4}  bound {:>12.2}",
                    r.seed, r.report.pseudo_regret, r.report.realized_regret, r.report.bound_value
                );
            }
            println!("wrote {}", outcome.output_dir.display());
        }
        Command::Sweep { config, out } => {
            let loaded = ExperimentConfig::load(&config)?;
            let outcome = commands::sweep(&loaded, out.as_deref())?;
            for row in &outcome.rows {
                println!(
                    "{}={:<8} mean_regret {:>14.4} ± {:<10.4} bound {:>12.2}",
                    outcome.axis, row.value, row.pseudo.mean, row.pseudo.stderr, row.bound
                );
            }
            println!("wrote {}", outcome.output_dir.display());
        }
        Command::Validate { config } => {
            let loaded = ExperimentConfig::load(&config)?;
            print!("{}", commands::validate(&loaded)?);
        }
        Command::DemoTable2 { order } => {
            let order = match order {
                Order::NewestFirst => DeliveryOrder::NewestFirst,
                Order::Arrival => DeliveryOrder::Arrival,
            };
            print!("{}", commands::demo_table2(order)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
