use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use otmlab::adversaries::{ATTACK_NAMES, STRATEGY_NAMES};
use otmlab::DEFAULT_SEED;
use serde::Serialize;

/// Simulate, attack and certify one-time memories built from conjugate coding
/// and stateless tokens.
#[derive(Debug, Clone, Parser)]
#[command(name = "otm-lab", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CommonArgs {
    /// Number of qubits in the quantum key (query qubits for memory attacks).
    #[arg(long, global = true, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,

    /// Number of Monte Carlo trials (memories, for `attack rewind`).
    #[arg(long, global = true, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,

    /// Token query budget.
    #[arg(long, global = true, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub m: u64,

    /// Keys per secret bit of a toy measure-and-access memory.
    #[arg(long, global = true, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub delta: u64,

    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Fix the first secret bit instead of drawing it per trial.
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub s0: Option<u8>,

    /// Fix the second secret bit instead of drawing it per trial.
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub s1: Option<u8>,

    /// Output format [default: csv for `bounds`, json otherwise].
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Run the honest protocol and check the receiver always gets s_b.
    Protocol,
    /// Mount a named attack.
    Attack {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(ATTACK_NAMES))]
        name: String,
    },
    /// Tabulate the non-interactive and interactive bounds.
    Bounds {
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u32).range(1..))]
        n_max: u32,
    },
    /// Verify the SDP witnesses and print the certificate.
    VerifySdp {
        /// Check tensor powers of the witnesses up to this n.
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(0..=10))]
        tensor_max: u32,
    },
    /// Run the real-vs-ideal distinguishing experiment.
    UcDistinguish {
        #[arg(long, default_value = "breidbart", value_parser = clap::builder::PossibleValuesParser::new(STRATEGY_NAMES))]
        adversary: String,
    },
}
