use std::process::ExitCode;

use clap::Parser;
use spectrwm_cli::{run_experiment, Cli, ExperimentConfig, SEED_ENV};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match ExperimentConfig::resolve(&cli, std::env::var(SEED_ENV).ok()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match run_experiment(&cfg) {
        Ok(report) => {
            for line in &report.notes {
                println!("{line}");
            }
            for v in &report.verdicts {
                let mark = if v.passed { "PASS" } else { "FAIL" };
                println!("{mark} {}: {}", v.name, v.detail);
            }
            println!("wrote {} files to {}", report.files.len(), cfg.out.display());
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
