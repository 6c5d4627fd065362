//! Command-line driver for taskframe: `run`, `snapshot`, `bench` and
//! `emit-ir`. Exit codes: 0 on success, 2 for usage and compile errors,
//! 3 for runtime errors.

pub mod bench;
pub mod corpus;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use taskframe::frontend::{check_source, CheckedProgram};
use taskframe::lowering::emit::emit_ir;
use taskframe::lowering::ir::IrModule;
use taskframe::lowering::{compile_program, CompileMode, CompileOptions};
use taskframe::machine::{run_sequential, EntryCall, RunOptions, RunResult, RuntimeError, DEFAULT_CAPACITY};
use taskframe::scheduler::run_parallel;

use bench::{BenchConfig, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPILE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "taskframe", version, about = "Compile and run TSIA programs on task-frame stacks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an entry call and print its results as name=value.
    Run(RunArgs),
    /// Print the stack before every executed frame (one worker).
    Snapshot(SnapshotArgs),
    /// Time a benchmark suite.
    Bench(BenchArgs),
    /// Dump the compiled routines.
    EmitIr(EmitArgs),
}

#[derive(Debug, Args)]
pub struct Source {
    /// A .tsia file; names of bundled examples (fig2a, fib, sum, esum,
    /// dcvsum, putab) also work.
    pub file: PathBuf,
    #[arg(long, default_value = "task")]
    pub mode: CompileMode,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: Source,
    /// Entry call, e.g. "tfib(20;;k)" or "vsum(3;z=1;)".
    #[arg(long)]
    pub entry: String,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Bytes per worker stack.
    #[arg(long, env = "TSIA_STACK_BYTES", default_value_t = DEFAULT_CAPACITY)]
    pub stack_size: usize,
    /// Print a trace line per event.
    #[arg(long)]
    pub trace: bool,
    /// Print the stack before every executed frame (one worker only).
    #[arg(long)]
    pub snapshots: bool,
    /// Skip reference liveness checks.
    #[arg(long)]
    pub no_debug_checks: bool,
    /// Check frame tiling and write targets after every step.
    #[arg(long)]
    pub full_checks: bool,
}

#[derive(Debug, Args)]
pub struct SnapshotArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub entry: String,
    #[arg(long, env = "TSIA_STACK_BYTES", default_value_t = DEFAULT_CAPACITY)]
    pub stack_size: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    pub suite: Suite,
    /// Problem sizes, comma separated (suite default if omitted).
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<i64>,
    /// Worker counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub workers: Vec<usize>,
    /// Timed samples per row.
    #[arg(long, default_value_t = 5)]
    pub samples: usize,
    /// Calls per sample.
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EmitArgs {
    #[command(flatten)]
    pub source: Source,
}

/// A failed command: the message for stderr and the exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn compile_failure(message: String) -> Failure {
    Failure { code: EXIT_COMPILE, message }
}

fn runtime_failure(e: RuntimeError) -> Failure {
    match e {
        RuntimeError::Entry(m) => compile_failure(format!("entry call: {m}")),
        e @ RuntimeError::BadCapacity { .. } => compile_failure(e.to_string()),
        e => Failure { code: EXIT_RUNTIME, message: format!("runtime error: {e}") },
    }
}

fn check(path: &Path) -> Result<CheckedProgram, Failure> {
    let src = corpus::load(path).map_err(|e| compile_failure(format!("{}: {e}", path.display())))?;
    check_source(&src).map_err(|e| compile_failure(format!("{}: {e}", path.display())))
}

fn compile(source: &Source) -> Result<IrModule, Failure> {
    let checked = check(&source.file)?;
    compile_program(&checked, &CompileOptions::new(source.mode))
        .map_err(|e| compile_failure(format!("{}: {e}", source.file.display())))
}

fn entry(s: &str) -> Result<EntryCall, Failure> {
    s.parse().map_err(|e| compile_failure(format!("entry call `{s}`: {e}")))
}

fn print_results(out: &mut dyn Write, r: &RunResult) -> std::io::Result<()> {
    out.write_all(&r.output)?;
    for (name, v) in &r.outs {
        writeln!(out, "{name}={v}")?;
    }
    Ok(())
}

fn cmd_run(a: &RunArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if a.workers == 0 {
        return Err(compile_failure("--workers must be at least 1".into()));
    }
    if a.snapshots && a.workers > 1 {
        return Err(compile_failure("--snapshots needs --workers 1".into()));
    }
    let module = compile(&a.source)?;
    let call = entry(&a.entry)?;
    let opts = RunOptions {
        stack_bytes: a.stack_size,
        trace: a.trace,
        snapshots: a.snapshots,
        debug_checks: !a.no_debug_checks,
        full_checks: a.full_checks,
        interleave: false,
    };
    let r = if a.workers == 1 {
        run_sequential(&module, &call, &opts)
    } else {
        run_parallel(&module, &call, a.workers, a.seed, &opts)
    }
    .map_err(runtime_failure)?;
    let io = |e: std::io::Error| Failure { code: EXIT_RUNTIME, message: e.to_string() };
    for s in &r.snapshots {
        out.write_all(s.as_bytes()).map_err(io)?;
    }
    if let Some(t) = &r.trace {
        write!(out, "{t}").map_err(io)?;
    }
    print_results(out, &r).map_err(io)
}

fn cmd_snapshot(a: &SnapshotArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let module = compile(&a.source)?;
    let opts = RunOptions { stack_bytes: a.stack_size, snapshots: true, ..RunOptions::default() };
    let r = run_sequential(&module, &entry(&a.entry)?, &opts).map_err(runtime_failure)?;
    let text: String = r.snapshots.concat();
    out.write_all(text.as_bytes()).map_err(|e| Failure { code: EXIT_RUNTIME, message: e.to_string() })
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let mut cfg = BenchConfig::defaults(a.suite);
    if !a.sizes.is_empty() {
        cfg.sizes = a.sizes.clone();
    }
    if !a.workers.is_empty() {
        cfg.workers = a.workers.clone();
    }
    if cfg.workers.contains(&0) {
        return Err(compile_failure("--workers must be at least 1".into()));
    }
    cfg.samples = a.samples;
    cfg.reps = a.reps.unwrap_or(cfg.reps);
    cfg.seed = a.seed;
    let report = bench::run_suite(a.suite, &cfg).map_err(runtime_failure)?;
    out.write_all(report.render().as_bytes()).map_err(|e| Failure { code: EXIT_RUNTIME, message: e.to_string() })
}

fn cmd_emit(a: &EmitArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let module = compile(&a.source)?;
    out.write_all(emit_ir(&module).as_bytes()).map_err(|e| Failure { code: EXIT_RUNTIME, message: e.to_string() })
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_COMPILE } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a, out),
        Command::Snapshot(a) => cmd_snapshot(a, out),
        Command::Bench(a) => cmd_bench(a, out),
        Command::EmitIr(a) => cmd_emit(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
