use std::path::PathBuf;
use std::process::ExitCode;

use chb::cli::{load_config, run_experiment, write_metrics_csv, StrategyChoice, SweepParam, SweepSpec};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "chb", version, about = "Cahn-Hilliard-Biot finite element solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Monolithic,
    Splitting,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepArg {
    Gamma,
    Xi,
}

#[derive(Subcommand)]
enum Command {
    /// Run a base case or a parameter sweep and write metrics.csv.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        strategy: Option<StrategyArg>,
        /// Sweep this parameter over the configured (or default) grid.
        #[arg(long, value_enum)]
        sweep: Option<SweepArg>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// n = 16 cells per side, 20 steps.
        #[arg(long)]
        desk: bool,
    },
}

fn main() -> ExitCode {
    let Command::Run { config, strategy, sweep, out, desk } = Cli::parse().command;

    let mut cfg = match load_config(&config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if desk {
        cfg.apply_desk_profile();
    }
    if let Some(s) = strategy {
        cfg.strategy = match s {
            StrategyArg::Monolithic => StrategyChoice::Monolithic,
            StrategyArg::Splitting => StrategyChoice::Splitting,
            StrategyArg::Both => StrategyChoice::Both,
        };
    }
    if let Some(p) = sweep {
        let param = match p {
            SweepArg::Gamma => SweepParam::Gamma,
            SweepArg::Xi => SweepParam::Xi,
        };
        let values = cfg.sweep.as_ref().filter(|s| s.param == param).map(|s| s.values.clone()).unwrap_or_default();
        cfg.sweep = Some(SweepSpec { param, values });
    }
    let out_dir = out
        .or_else(|| cfg.output_dir.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("output"));
    cfg.output_dir = Some(out_dir.display().to_string());

    if let Err(e) = std::fs::create_dir_all(&out_dir)
        .and_then(|_| std::fs::write(out_dir.join("config.json"), cfg.to_json()))
    {
        eprintln!("error: cannot write to {}: {e}", out_dir.display());
        return ExitCode::from(1);
    }

    let records = match run_experiment(&cfg, Some(&out_dir)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    for r in &records {
        let value = r.param_value.map(|v| format!(" = {v}")).unwrap_or_default();
        println!(
            "{}{value} {}: converged={} outer={} newton={} steps={} time={:.2}s",
            r.param_name, r.strategy, r.converged, r.outer_iters, r.inner_newton_iters, r.steps_completed, r.wall_seconds
        );
    }
    if let Err(e) = write_metrics_csv(&records, &out_dir.join("metrics.csv")) {
        eprintln!("error: cannot write metrics: {e}");
        return ExitCode::from(1);
    }
    if records.iter().any(|r| r.internal_fault) {
        eprintln!("error: linear solver fault in at least one run");
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}
