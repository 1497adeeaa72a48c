use std::path::PathBuf;
use std::process::ExitCode;

use berglab::harness::{self, ExperimentConfig, CRITERIA};
use clap::{Parser, ValueEnum};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Subcommand {
    GeometryCheck,
    KernelCheck,
    Bp,
    OperatorNorm,
    GoodLambda,
    LemmaSuite,
    Necessity,
    All,
}

impl Subcommand {
    fn name(self) -> &'static str {
        match self {
            Subcommand::GeometryCheck => "geometry-check",
            Subcommand::KernelCheck => "kernel-check",
            Subcommand::Bp => "bp",
            Subcommand::OperatorNorm => "operator-norm",
            Subcommand::GoodLambda => "good-lambda",
            Subcommand::LemmaSuite => "lemma-suite",
            Subcommand::Necessity => "necessity",
            Subcommand::All => "all",
        }
    }
}

/// Numerical checks of weighted Bergman projection estimates.
#[derive(Debug, Parser)]
#[command(name = "berglab", version)]
struct Cli {
    #[arg(value_enum)]
    subcommand: Subcommand,
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Report directory; overrides the config's `output`.
    #[arg(long, env = "BERGLAB_OUT_DIR")]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "BERGLAB_THREADS")]
    threads: Option<usize>,
}

const CONFIG_ERROR: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { CONFIG_ERROR } else { 0 });
        }
    };
    let mut cfg = match ExperimentConfig::load(&cli.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("berglab: {e}");
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("berglab: cannot set thread count: {e}");
            return ExitCode::from(CONFIG_ERROR);
        }
    }
    let out = cli.out.or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("berglab-report"));
    let report = harness::run_with(cli.subcommand.name(), &cfg, |n, checks, secs| {
        let name = CRITERIA.iter().find(|c| c.0 == n).map_or("", |c| c.1);
        eprintln!("criterion {n:2} {name} ({secs:.1} s)");
        for c in checks {
            let value = c.value.map_or("-".to_string(), |v| format!("{v:.4e}"));
            eprintln!("  {:7} {} = {} [{}]", c.verdict.to_string(), c.name, value, c.condition);
        }
    });
    let report = match report {
        Ok(r) => r,
        Err(e) => {
            eprintln!("berglab: {e}");
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    if let Err(e) = report.emit(&out) {
        eprintln!("berglab: cannot write report to {}: {e}", out.display());
        return ExitCode::from(CONFIG_ERROR);
    }
    for c in report.checks.iter().filter(|c| c.criterion.is_none()) {
        let value = c.value.map_or("-".to_string(), |v| format!("{v:.4e}"));
        eprintln!("  {:7} {} = {} [{}]", c.verdict.to_string(), c.name, value, c.condition);
    }
    println!("{}", out.display());
    ExitCode::from(report.exit_code() as u8)
}
