mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use strnum::{ModelSpec, Strategy, Universe};

#[derive(Parser, Debug)]
#[command(name = "strnum", version, about = "Strings, lengths and binary numerals: evaluate, solve, reduce, check axioms")]
pub struct Cli {
    #[command(flatten)]
    pub config: Config,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Config {
    /// Canonical model (a) or the restricted numeral model (b).
    #[arg(long, value_enum, default_value = "a", global = true)]
    pub model: ModelArg,
    #[arg(long, default_value_t = 6, global = true)]
    pub max_str_len: usize,
    #[arg(long, default_value_t = 64, global = true)]
    pub max_num: u64,
    /// Bound on strings chosen by existential quantifiers (default: max-str-len).
    #[arg(long, global = true)]
    pub witness_str_len: Option<usize>,
    /// Bound on numbers chosen by existential quantifiers (default: max-num).
    #[arg(long, global = true)]
    pub witness_num: Option<u64>,
    #[arg(long, value_enum, default_value = "text", global = true)]
    pub format: Format,
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, value_enum, default_value = "guided", global = true)]
    pub strategy: StrategyArg,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelArg {
    A,
    B,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyArg {
    Literal,
    Guided,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionArg {
    TpToTsn,
    TsnToTpi,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusKind {
    /// Quantifier-free power arithmetic.
    Tp,
    /// Arbitrary well-sorted formulas.
    Any,
}

#[derive(Args, Debug, Clone)]
pub struct Input {
    /// Formula file (`-` for standard input).
    pub file: Option<PathBuf>,
    /// Inline formula text.
    #[arg(short = 'e', long = "expr", conflicts_with = "file")]
    pub expr: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse and sort-check; print the theory and free variables.
    Check(Input),
    /// Search for a satisfying assignment of the free variables.
    Solve(Input),
    /// Apply a reduction and print the target formula.
    Reduce {
        #[arg(value_enum)]
        direction: DirectionArg,
        #[command(flatten)]
        input: Input,
        /// Also solve source and target and compare the verdicts.
        #[arg(long)]
        verify: bool,
    },
    /// Check the axioms in bounded model A.
    Axioms {
        /// Only axioms whose id starts with this prefix.
        #[arg(long)]
        filter: Option<String>,
        /// Check `(axiom ID FORMULA)` declarations from a file instead.
        #[arg(long)]
        axioms_file: Option<PathBuf>,
    },
    /// Evaluate J in models A and B.
    DemoIncompleteness,
    /// Print seeded random formulas.
    GenCorpus {
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, value_enum, default_value = "tp")]
        kind: CorpusKind,
        /// Nesting depth for `--kind any`.
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Reduce each `tp` formula and compare verdicts.
        #[arg(long)]
        verify: bool,
    },
}

impl Config {
    pub fn model(&self) -> ModelSpec {
        let universe = match self.model {
            ModelArg::A => Universe::CanonicalA,
            ModelArg::B => Universe::RestrictedB,
        };
        let m = ModelSpec::new(universe, self.max_str_len, self.max_num);
        match (self.witness_str_len, self.witness_num) {
            (None, None) => m,
            (l, n) => m.with_witness(strnum::semantics::Bounds {
                max_str_len: l.unwrap_or(self.max_str_len).max(self.max_str_len),
                max_num: n.unwrap_or(self.max_num).max(self.max_num),
            }),
        }
    }

    pub fn strategy(&self) -> Strategy {
        match self.strategy {
            StrategyArg::Literal => Strategy::Literal,
            StrategyArg::Guided => Strategy::Guided,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.config.jobs {
        if n == 0 || rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            eprintln!("error: --jobs must be a positive thread count");
            return ExitCode::from(2);
        }
    }
    ExitCode::from(commands::run(&cli))
}
