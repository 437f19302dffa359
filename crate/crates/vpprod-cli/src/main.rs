use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};

use vpprod::chc::{default_solvers, SolverSpec};
use vpprod::frontend::HyperProperty;
use vpprod::pipeline::{
    check_independence, enumerate_words, run, Entries, Language, PipelineError, RunConfig, RunMode, Stage,
};
use vpprod::reductions::Mode;

const USAGE_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "vpprod", version, about = "Product programs for hypersafety verification of recursive programs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the product, encode it as Horn clauses and solve; prints the JSON report.
    Run {
        program: PathBuf,
        /// Property file, or the property text itself (lines may be separated by `;`).
        #[arg(long)]
        property: String,
        #[arg(long)]
        reduction: Option<String>,
        /// aut, vpg, direct, generic, baseline:seq, baseline:direct-nocopies or baseline:direct-copies
        #[arg(long, default_value = "direct")]
        mode: String,
        /// `name=command line`; `{file}` stands for the SMT-LIB file. Repeatable.
        #[arg(long = "solver")]
        solvers: Vec<String>,
        /// Seconds per solver.
        #[arg(long, default_value_t = 600)]
        timeout: u64,
        #[arg(long)]
        emit_dir: Option<PathBuf>,
        /// `component=proc` (e.g. `P2=div`), or a bare procedure for every component. Repeatable.
        #[arg(long = "entry")]
        entries: Vec<String>,
    },
    /// Decide tail- and head-independence of the components and whether the well-nested
    /// shuffle is a sound sequentialization.
    CheckIndependence {
        program: PathBuf,
        /// Lines `dep <letter>` / `indep <letter>`.
        #[arg(long)]
        deps: PathBuf,
        /// One component per flag; a single component when absent.
        #[arg(long = "entry")]
        entries: Vec<String>,
    },
    /// Inspection helpers
    Debug {
        #[command(subcommand)]
        cmd: DebugCmd,
    },
}

#[derive(Subcommand)]
enum DebugCmd {
    /// Print the bounded language of a product, or of the plain well-nested shuffle.
    Enumerate {
        program: PathBuf,
        #[arg(long, default_value_t = 1)]
        copies: usize,
        #[arg(long)]
        reduction: Option<String>,
        #[arg(long, default_value = "direct")]
        mode: String,
        #[arg(long, default_value_t = 12)]
        max_len: usize,
        /// Enumerate the well-nested shuffle of the components by brute force instead.
        #[arg(long)]
        shuffle: bool,
        #[arg(long = "entry")]
        entries: Vec<String>,
    },
}

/// Prints a line to stdout; a closed pipe is not an error.
fn out(line: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn fail(stage: Stage, msg: impl std::fmt::Display) -> PipelineError {
    PipelineError::new(stage, msg.to_string())
}

fn read(path: &Path) -> Result<String, PipelineError> {
    std::fs::read_to_string(path).map_err(|e| fail(Stage::Io, format!("{}: {e}", path.display())))
}

fn entries(list: &[String]) -> Result<Entries, PipelineError> {
    let mut e = Entries::default();
    for t in list {
        e.add(t)?;
    }
    Ok(e)
}

fn property(arg: &str) -> Result<HyperProperty, PipelineError> {
    let text = if Path::new(arg).is_file() { read(Path::new(arg))? } else { arg.to_string() };
    HyperProperty::parse(&text).map_err(|e| fail(Stage::Property, e))
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    program: &Path,
    prop: &str,
    reduction: Option<String>,
    mode: &str,
    solvers: &[String],
    timeout: u64,
    emit_dir: Option<PathBuf>,
    entry_list: &[String],
) -> Result<u8, PipelineError> {
    let mode: RunMode = mode.parse().map_err(|e| fail(Stage::Config, e))?;
    let mut cfg = RunConfig::new(read(program)?, property(prop)?, mode);
    cfg.entries = entries(entry_list)?;
    cfg.reduction = reduction;
    cfg.solvers = if solvers.is_empty() {
        default_solvers()
    } else {
        solvers
            .iter()
            .map(|s| SolverSpec::parse(s))
            .collect::<Result<_, _>>()
            .map_err(|e| fail(Stage::Config, e))?
    };
    cfg.timeout = Duration::from_secs(timeout);
    cfg.emit_dir = emit_dir;
    let report = run(&cfg)?;
    out(&report.to_json());
    Ok(report.verdict.exit_code() as u8)
}

fn cmd_independence(program: &Path, deps: &Path, entry_list: &[String]) -> Result<u8, PipelineError> {
    let r = check_independence(&read(program)?, &read(deps)?, &entries(entry_list)?, entry_list.len())?;
    out(&r.to_json());
    Ok(if r.sound { 0 } else { 1 })
}

#[allow(clippy::too_many_arguments)]
fn cmd_enumerate(
    program: &Path,
    copies: usize,
    reduction: Option<String>,
    mode: &str,
    max_len: usize,
    shuffle: bool,
    entry_list: &[String],
) -> Result<u8, PipelineError> {
    let lang = if shuffle {
        Language::Shuffle
    } else {
        let mode: Mode = mode.parse().map_err(|e: String| fail(Stage::Config, e))?;
        Language::Product { reduction, mode }
    };
    let words = enumerate_words(&read(program)?, &entries(entry_list)?, copies, &lang, max_len)?;
    for w in &words {
        out(&w.join(" · "));
    }
    eprintln!("{} words", words.len());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = match cli.cmd {
        Cmd::Run {
            program,
            property,
            reduction,
            mode,
            solvers,
            timeout,
            emit_dir,
            entries,
        } => cmd_run(&program, &property, reduction, &mode, &solvers, timeout, emit_dir, &entries),
        Cmd::CheckIndependence { program, deps, entries } => cmd_independence(&program, &deps, &entries),
        Cmd::Debug {
            cmd:
                DebugCmd::Enumerate {
                    program,
                    copies,
                    reduction,
                    mode,
                    max_len,
                    shuffle,
                    entries,
                },
        } => cmd_enumerate(&program, copies, reduction, &mode, max_len, shuffle, &entries),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(USAGE_ERROR)
        }
    }
}
