use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use fastconv::harness::config::{Experiment, RunConfig};
use fastconv::harness::run::{load_config, run};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    Invert,
    Convolve,
    Abel,
    Fracrd,
    Visco,
    OracleCompare,
    ComplexitySweep,
}

impl From<Cmd> for Experiment {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Invert => Experiment::Invert,
            Cmd::Convolve => Experiment::Convolve,
            Cmd::Abel => Experiment::Abel,
            Cmd::Fracrd => Experiment::Fracrd,
            Cmd::Visco => Experiment::Visco,
            Cmd::OracleCompare => Experiment::OracleCompare,
            Cmd::ComplexitySweep => Experiment::ComplexitySweep,
        }
    }
}

/// Fast, oblivious, variable-step convolution quadrature experiments.
#[derive(Parser, Debug)]
#[command(version)]
struct Cli {
    /// Experiment to run; may instead come from the config file.
    experiment: Option<Cmd>,
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// Contour node count.
    #[arg(long = "K")]
    k: Option<usize>,
    /// Base of the geometric mosaic.
    #[arg(long = "B")]
    b: Option<u32>,
    #[arg(long)]
    hmin: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Final time.
    #[arg(long = "T")]
    t_end: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = RunConfig {
        experiment: cli.experiment.map(Into::into),
        preset: cli.preset,
        tol: cli.tol,
        eps: cli.eps,
        k_nodes: cli.k,
        base: cli.b,
        h_min: cli.hmin,
        gamma: cli.gamma,
        alpha: cli.alpha,
        t_end: cli.t_end,
        out: cli.out,
        ..RunConfig::default()
    };
    let result = load_config(cli.config.as_deref(), overrides).and_then(|cfg| run(&cfg));
    match result {
        Ok(report) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
            if report.exit_code() != 0 {
                eprintln!("fastconv: {} stopped early", report.experiment.name());
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("fastconv: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
