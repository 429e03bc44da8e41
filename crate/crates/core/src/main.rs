use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tangle_sim::metrics::{self, BatchSpec};
use tangle_sim::SimConfig;

#[derive(Parser)]
#[command(version, about = "Tangle consensus simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run every cell of a batch spec.
    Batch {
        #[command(flatten)]
        common: Common,
    },
    /// Check a config file and print the effective values.
    Validate {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// KEY=VALUE, applied after the file. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn load_config(common: &Common) -> Result<SimConfig, String> {
    let mut config = match &common.config {
        Some(path) => SimConfig::from_file(path).map_err(|e| e.to_string())?,
        None => SimConfig::default(),
    };
    for o in &common.overrides {
        config.apply_override(o).map_err(|e| e.to_string())?;
    }
    let errors = config.validate();
    if !errors.is_empty() {
        return Err(errors
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("\n"));
    }
    Ok(config)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(false)` reports a safety failure.
fn execute(cli: Cli) -> Result<bool, String> {
    match cli.command {
        Command::Validate { common } => {
            print!("{}", load_config(&common)?.to_text());
            Ok(true)
        }
        Command::Run { common, seed } => {
            let config = load_config(&common)?;
            let seed = seed.unwrap_or(config.seed);
            let result = tangle_sim::run(&config, seed).map_err(|e| e.to_string())?;
            let out = &common.out;
            std::fs::create_dir_all(out).map_err(|e| format!("{}: {e}", out.display()))?;
            metrics::write_runs(
                &out.join(metrics::RUNS_FILE),
                &[metrics::RunRow::new(0, &result)],
            )
            .map_err(|e| e.to_string())?;
            metrics::write_confirmations(
                &out.join(metrics::confirmation_file(0)),
                &result.confirmations,
            )
            .map_err(|e| e.to_string())?;
            let path = out.join("result.json");
            let json = serde_json::to_vec_pretty(&result).map_err(|e| e.to_string())?;
            std::fs::write(&path, json).map_err(|e| format!("{}: {e}", path.display()))?;
            let mut latencies = result.confirmation_latencies();
            println!(
                "seed {} consensus_time_ms {} liveness_failure {} safety_failure {} median_confirmation_ms {} reattachments {}",
                result.seed,
                result.consensus_time.map_or("-".to_string(), |t| t.to_string()),
                result.liveness_failure,
                result.safety_failure,
                metrics::median(&mut latencies).map_or("-".to_string(), |t| t.to_string()),
                result.orphan_reattach_count,
            );
            Ok(!result.safety_failure)
        }
        Command::Batch { common } => {
            let path = common.config.as_ref().ok_or("batch needs --config")?;
            let mut spec = BatchSpec::from_file(path).map_err(|e| e.to_string())?;
            for o in &common.overrides {
                spec.base.apply_override(o).map_err(|e| e.to_string())?;
            }
            let outcome = metrics::run_batch(&spec, &common.out).map_err(|e| e.to_string())?;
            let liveness = outcome.rows.iter().filter(|r| r.liveness_failure).count();
            println!(
                "{} runs, {} liveness failures, {} safety failures -> {}",
                outcome.rows.len(),
                liveness,
                outcome.safety_failures,
                common.out.display()
            );
            Ok(outcome.safety_failures == 0)
        }
    }
}
