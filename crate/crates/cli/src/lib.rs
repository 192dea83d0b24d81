//! The `otm-lab` experiment driver.

mod args;
mod report;

use std::fs;
use std::io::Write;

use anyhow::{Context, Result};
use clap::Parser;
use otmlab::adversaries::{
    run_attack_trials, run_bounded_key_trials, run_rewinding_trials, strategy_by_name, AttackReport, MemoryAttackConfig,
};
use otmlab::bounds::{
    certify, dual_witness, interactive_bound, noninteractive_bound, objective_a_prime, primal_witness,
};
use otmlab::protocol::{
    distinguishing_experiment, run_honest_trials, ExperimentConfig, ExperimentReport, ProtocolReport,
};

pub use args::{Cli, Command, CommonArgs, Format};
pub use report::{Artifact, BoundsRow, SdpReport, Table};

/// Exit status for a run whose verdicts all passed.
pub const EXIT_PASS: i32 = 0;
/// Exit status when a verdict failed.
pub const EXIT_FAIL: i32 = 1;
/// Exit status for invalid invocations.
pub const EXIT_USAGE: i32 = 2;

/// Parse `argv`, run, write the artifact, and return the exit status.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match run(&cli).and_then(|artifact| emit(&cli, &artifact).map(|()| artifact)) {
        Ok(artifact) if artifact.passed => EXIT_PASS,
        Ok(_) => EXIT_FAIL,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}

/// Execute the subcommand and build its report.
pub fn run(cli: &Cli) -> Result<Artifact> {
    let c = &cli.common;
    let n = usize::try_from(c.n)?;
    let m = usize::try_from(c.m)?;
    let experiment =
        ExperimentConfig { n, m, trials: c.trials, seed: c.seed, s0: c.s0.map(|b| b == 1), s1: c.s1.map(|b| b == 1) };
    let memory = MemoryAttackConfig {
        n,
        delta: usize::try_from(c.delta)?,
        trials: c.trials,
        seed: c.seed,
        s0: experiment.s0,
        s1: experiment.s1,
    };
    let artifact = match &cli.command {
        Command::Protocol => {
            let r = run_honest_trials(&experiment)?;
            Artifact::new(
                cli,
                "protocol",
                r.verdict.passed(),
                &r,
                Table::single(&ProtocolReport::CSV_HEADER, r.csv_record()),
            )?
        }
        Command::Attack { name } => match name.as_str() {
            "rewind" => {
                let r = run_rewinding_trials(&memory)?;
                Artifact::new(cli, "attack", r.verdict.passed(), &r, Table::from_records(std::slice::from_ref(&r))?)?
            }
            "bounded-key" => {
                let r = run_bounded_key_trials(&memory)?;
                Artifact::new(cli, "attack", r.verdict.passed(), &r, Table::from_records(std::slice::from_ref(&r))?)?
            }
            other => {
                let strategy = strategy_by_name(other, m).context("unknown attack")?;
                let r = run_attack_trials(strategy.as_ref(), &experiment)?;
                Artifact::new(
                    cli,
                    "attack",
                    r.verdict.passed(),
                    &r,
                    Table::single(&AttackReport::CSV_HEADER, r.csv_record()),
                )?
            }
        },
        Command::Bounds { n_max } => {
            let rows: Vec<BoundsRow> = (1..=*n_max)
                .map(|n| BoundsRow {
                    n,
                    m: c.m,
                    noninteractive_bound: noninteractive_bound(n),
                    interactive_bound: interactive_bound(n, c.m),
                })
                .collect();
            Artifact::new(cli, "bounds", true, &rows, Table::from_records(&rows)?)?
        }
        Command::VerifySdp { tensor_max } => {
            let cert = certify(&objective_a_prime(), &primal_witness(), &dual_witness(), *tensor_max)?;
            let r = SdpReport::new(cert);
            Artifact::new(cli, "verify-sdp", r.verdict.passed(), &r, r.table())?
        }
        Command::UcDistinguish { adversary } => {
            let strategy = strategy_by_name(adversary, m).context("unknown adversary")?;
            let r = distinguishing_experiment(strategy.as_ref(), &experiment)?;
            Artifact::new(
                cli,
                "uc-distinguish",
                r.verdict.passed(),
                &r,
                Table::single(&ExperimentReport::CSV_HEADER, r.csv_record()),
            )?
        }
    };
    Ok(artifact)
}

fn emit(cli: &Cli, artifact: &Artifact) -> Result<()> {
    let bytes = artifact.render(cli)?;
    match &cli.common.out {
        Some(path) => fs::write(path, &bytes).with_context(|| format!("writing {}", path.display())),
        None => std::io::stdout().write_all(&bytes).context("writing standard output"),
    }
}
