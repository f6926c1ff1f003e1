use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod artifacts;
mod commands;

/// Exit statuses shared by every subcommand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Accept = 0,
    Reject = 1,
    Unknown = 2,
    BadInput = 3,
    Internal = 4,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn input(e: impl ToString) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "fluentgen",
    version,
    about = "Grammars, Simper programs, Turing machines and subtyping class tables"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LayerArg {
    Oracle,
    Simper,
    Tm,
    Subtype,
    All,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide a subtype query over a class table
    CheckSubtype {
        table: PathBuf,
        /// Two towers such as `Qr E E Z L N E E Z`, or a file holding them
        query: String,
        #[arg(long, default_value_t = 100_000_000)]
        fuel: u64,
        /// Print every configuration
        #[arg(long)]
        trace: bool,
        /// Print the trace with the head marked by its side
        #[arg(long, requires = "trace")]
        oriented: bool,
    },
    /// Run a Turing machine on a comma-separated word
    RunTm {
        tm: PathBuf,
        #[arg(default_value = "")]
        input: String,
        #[arg(long, default_value_t = 10_000_000)]
        fuel: u64,
        #[arg(long)]
        trace: bool,
    },
    /// Interpret a Simper program on a comma-separated word
    SimperRun {
        src: PathBuf,
        #[arg(default_value = "")]
        input: String,
        #[arg(long, default_value_t = 1_000_000)]
        fuel: u64,
    },
    /// Compile a Simper program to a Turing machine
    SimperToTm {
        src: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Input symbols to support besides those the program names
        #[arg(long, value_delimiter = ',')]
        alphabet: Vec<String>,
    },
    /// Reduce a Turing machine to Java interfaces with a query and a builder
    TmToJava {
        tm: PathBuf,
        /// Word for the query harness, comma-separated; empty by default
        #[arg(long, default_value = "")]
        input: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Generate the CYK parser of a grammar as a Simper program
    GrammarToSimper {
        grammar: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run the whole pipeline and write every artifact with a manifest
    GrammarToJava {
        grammar: PathBuf,
        out_dir: PathBuf,
        /// Simper parser to use instead of the generated one
        #[arg(long)]
        program: Option<PathBuf>,
    },
    /// Decide membership of a word at one or all layers
    FluentCheck {
        grammar: PathBuf,
        #[arg(default_value = "")]
        word: String,
        #[arg(long, value_enum, default_value_t = LayerArg::All)]
        layer: LayerArg,
        /// Simper parser to use instead of the generated one
        #[arg(long)]
        program: Option<PathBuf>,
        #[arg(long, default_value_t = 1_000_000)]
        fuel_simper: u64,
        #[arg(long, default_value_t = 10_000_000)]
        fuel_tm: u64,
        #[arg(long, default_value_t = 100_000_000)]
        fuel_subtype: u64,
    },
}

fn dispatch(cmd: Cmd) -> Result<Status, CliError> {
    use commands::*;
    match cmd {
        Cmd::CheckSubtype {
            table,
            query,
            fuel,
            trace,
            oriented,
        } => check_subtype(&table, &query, fuel, trace, oriented),
        Cmd::RunTm {
            tm,
            input,
            fuel,
            trace,
        } => run_tm(&tm, &input, fuel, trace),
        Cmd::SimperRun { src, input, fuel } => simper_run(&src, &input, fuel),
        Cmd::SimperToTm { src, out, alphabet } => simper_to_tm(&src, out.as_deref(), &alphabet),
        Cmd::TmToJava { tm, input, out } => tm_to_java(&tm, &input, out.as_deref()),
        Cmd::GrammarToSimper { grammar, out } => grammar_to_simper(&grammar, out.as_deref()),
        Cmd::GrammarToJava {
            grammar,
            out_dir,
            program,
        } => artifacts::grammar_to_java(&grammar, program.as_deref(), &out_dir),
        Cmd::FluentCheck {
            grammar,
            word,
            layer,
            program,
            fuel_simper,
            fuel_tm,
            fuel_subtype,
        } => {
            let fuel = fluent_core::pipeline::Fuel {
                simper: fuel_simper,
                tm: fuel_tm,
                subtype: fuel_subtype,
            };
            fluent_check(&grammar, &word, layer, program.as_deref(), fuel)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { Status::BadInput as u8 } else { 0 });
        }
    };
    let status = dispatch(cli.cmd).unwrap_or_else(|e| {
        eprintln!("fluentgen: {e}");
        match e {
            CliError::Input(_) => Status::BadInput,
            CliError::Internal(_) => Status::Internal,
        }
    });
    ExitCode::from(status as u8)
}
