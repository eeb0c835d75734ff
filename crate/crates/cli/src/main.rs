mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use facet_core::{GeneratorKind, PivotRule, SimplexVariant};

/// Facial reduction and degeneracy diagnostics for standard-form LPs.
#[derive(Debug, Parser)]
#[command(name = "facet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Facially reduce an instance and print the reduction summary.
    Reduce {
        file: PathBuf,
        /// Write the reduced instance (native format) here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether the feasible set has a strictly positive point.
    Analyze { file: PathBuf },
    /// List every feasible basis with its point and degeneracy degree.
    Enumerate { file: PathBuf },
    /// Generate a seeded instance in the native format.
    Generate {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        /// Defaults to $FACET_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve with the interior-point method or the simplex method.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "ipm")]
        method: Method,
        #[arg(long, value_enum, default_value = "bland")]
        rule: RuleArg,
        #[arg(long, value_enum, default_value = "primal")]
        variant: VariantArg,
    },
    /// Run an experiment protocol from a TOML config and write CSV.
    Experiment {
        config: PathBuf,
        /// Overrides `output` in the config; stdout when neither is set.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    PrimalNoSlater,
    PrimalSlater,
    DualNoSlater,
}

impl From<KindArg> for GeneratorKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::PrimalNoSlater => GeneratorKind::PrimalNoSlater,
            KindArg::PrimalSlater => GeneratorKind::PrimalSlater,
            KindArg::DualNoSlater => GeneratorKind::DualNoSlater,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Ipm,
    Simplex,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RuleArg {
    Bland,
    Dantzig,
}

impl From<RuleArg> for PivotRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Bland => PivotRule::Bland,
            RuleArg::Dantzig => PivotRule::Dantzig,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    Primal,
    Dual,
}

impl From<VariantArg> for SimplexVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Primal => SimplexVariant::Primal,
            VariantArg::Dual => SimplexVariant::Dual,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut stdout = std::io::stdout().lock();
    match commands::dispatch(cli.command, &mut stdout) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
