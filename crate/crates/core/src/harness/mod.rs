//! Experiment configs, the acceptance criteria and report emission.

pub mod config;
pub mod criteria;
pub mod report;

use std::time::Instant;

pub use config::{ExperimentConfig, Knobs};
pub use criteria::{run_criterion, run_extras, Section, CRITERIA};
pub use report::{Cell, Check, ExperimentReport, Table, Verdict, SCHEMA_VERSION};

use crate::error::{Error, Result};

pub const SUBCOMMANDS: [&str; 8] =
    ["geometry-check", "kernel-check", "bp", "operator-norm", "good-lambda", "lemma-suite", "necessity", "all"];

/// Criteria run by a subcommand.
pub fn criteria_of(subcommand: &str) -> Result<Vec<u32>> {
    Ok(match subcommand {
        "geometry-check" => vec![5, 6],
        "kernel-check" => vec![1, 2, 3, 4],
        "bp" => vec![7],
        "operator-norm" => vec![10],
        "good-lambda" => vec![9],
        "lemma-suite" => vec![8],
        "necessity" => vec![11],
        "all" => (1..=12).collect(),
        other => return Err(Error::Config(format!("unknown subcommand {other:?}"))),
    })
}

fn absorb(report: &mut ExperimentReport, criterion: Option<u32>, key: String, section: Result<Section>, start: Instant) {
    report.wall_clock.insert(key, start.elapsed().as_secs_f64());
    match section {
        Ok(s) => {
            report.checks.extend(s.checks);
            report.tables.extend(s.tables);
        }
        // a probe that cannot run is a failed check, not a harness error
        Err(e) => report.checks.push(Check::new(criterion, "probe error", f64::NAN, &e.to_string(), Verdict::Fail)),
    }
}

/// Runs every criterion and diagnostic of `subcommand`. `progress` sees each
/// criterion's checks as soon as it finishes.
pub fn run_with(
    subcommand: &str,
    cfg: &ExperimentConfig,
    mut progress: impl FnMut(u32, &[Check], f64),
) -> Result<ExperimentReport> {
    let criteria = criteria_of(subcommand)?;
    let mut report = ExperimentReport::new(subcommand, cfg.clone());
    for n in criteria {
        let start = Instant::now();
        let before = report.checks.len();
        absorb(&mut report, Some(n), format!("criterion_{n:02}"), run_criterion(n, cfg), start);
        progress(n, &report.checks[before..], start.elapsed().as_secs_f64());
    }
    let start = Instant::now();
    if let Some(extra) = run_extras(subcommand, cfg).transpose() {
        absorb(&mut report, None, "diagnostics".into(), extra, start);
    }
    Ok(report)
}

pub fn run(subcommand: &str, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_with(subcommand, cfg, |_, _, _| {})
}
