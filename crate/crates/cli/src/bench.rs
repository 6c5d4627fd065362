//! Benchmark suites. Every row is the median of several timed samples;
//! ratios compare rows from the same process and flags.

use std::time::Instant;

use taskframe::frontend::check_source;
use taskframe::lowering::ir::{IrModule, RoutineMode};
use taskframe::lowering::{compile_program, CompileMode, CompileOptions};
use taskframe::machine::{run_sequential, EntryCall, RunOptions, RunResult, RuntimeError};
use taskframe::scheduler::run_parallel;

use crate::corpus::bundled;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchRow {
    pub suite: String,
    pub program: String,
    pub mode: String,
    pub workers: usize,
    pub n: i64,
    /// Median wall time of one sample.
    pub median_ns: u64,
    pub peak_bytes: usize,
    /// Frames executed per sample.
    pub frames: u64,
}

#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// (label such as `tfib/fib`, n, ratio of medians)
    pub ratios: Vec<(String, i64, f64)>,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sizes: Vec<i64>,
    /// Timed samples per row; the median is reported.
    pub samples: usize,
    /// Calls per sample (the sum suite repeats the call like a C harness).
    pub reps: usize,
    pub workers: Vec<usize>,
    pub seed: u64,
}

impl BenchConfig {
    pub fn defaults(suite: Suite) -> Self {
        let (sizes, reps, workers) = match suite {
            Suite::Fib => (vec![28], 1, vec![1]),
            Suite::Sum => (vec![64_000], 100, vec![1]),
            Suite::Dcvsum => (vec![4096], 1, vec![1, 2, 4]),
        };
        BenchConfig { sizes, samples: 5, reps, workers, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Fib,
    Sum,
    Dcvsum,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Fib => "fib",
            Suite::Sum => "sum",
            Suite::Dcvsum => "dcvsum",
        }
    }
}

/// One benchmarked program: how it is compiled and called.
struct Variant {
    program: &'static str,
    mode: &'static str,
    module: IrModule,
    entry: fn(i64) -> String,
}

fn compile(src: &str, options: &CompileOptions) -> IrModule {
    compile_program(&check_source(src).expect("bundled program"), options).expect("bundled program compiles")
}

fn variants(suite: Suite) -> Vec<Variant> {
    match suite {
        Suite::Fib => {
            let src = bundled("fib").expect("bundled");
            let direct = compile(src, &CompileOptions::new(CompileMode::Direct));
            let task = compile(src, &CompileOptions::new(CompileMode::Task));
            vec![
                Variant { program: "fib", mode: "direct", module: direct.clone(), entry: |n| format!("fib({n};;k)") },
                Variant { program: "afib", mode: "direct", module: direct, entry: |n| format!("afib({n};;k)") },
                Variant { program: "tfib", mode: "task", module: task, entry: |n| format!("tfib({n};;k)") },
            ]
        }
        Suite::Sum => {
            // one module, each routine forced into its frame style
            let options = CompileOptions::new(CompileMode::Task)
                .with_override("lsum", RoutineMode::Activation)
                .with_override("csum", RoutineMode::Activation)
                .with_override("tsum", RoutineMode::Task);
            let m = compile(bundled("sum").expect("bundled"), &options);
            vec![
                Variant { program: "lsum", mode: "activation", module: m.clone(), entry: |n| format!("lsum(1,{n},0;;a)") },
                Variant { program: "csum", mode: "activation", module: m.clone(), entry: |n| format!("csum(1,{n},0;;a)") },
                Variant { program: "tsum", mode: "task", module: m, entry: |n| format!("tsum(1,{n},0;;a)") },
            ]
        }
        Suite::Dcvsum => {
            let m = compile(bundled("dcvsum").expect("bundled"), &CompileOptions::new(CompileMode::Task));
            vec![Variant { program: "dcvsum", mode: "task", module: m, entry: |n| format!("dcmain({n};;z)") }]
        }
    }
}

fn once(module: &IrModule, entry: &EntryCall, workers: usize, seed: u64, opts: &RunOptions) -> Result<RunResult, RuntimeError> {
    if workers == 1 {
        run_sequential(module, entry, opts)
    } else {
        run_parallel(module, entry, workers, seed, opts)
    }
}

fn median(mut xs: Vec<u64>) -> u64 {
    xs.sort_unstable();
    xs[xs.len() / 2]
}

/// Runs `suite`. The stack for timed runs is sized from an untimed probe
/// run so that deep activation recursion fits without timing a huge
/// allocation for the shallow variants.
pub fn run_suite(suite: Suite, cfg: &BenchConfig) -> Result<BenchReport, RuntimeError> {
    let mut report = BenchReport::default();
    let probe_opts = RunOptions { stack_bytes: 1 << 28, debug_checks: false, ..RunOptions::default() };
    for v in variants(suite) {
        for &n in &cfg.sizes {
            let entry: EntryCall = (v.entry)(n).parse().map_err(RuntimeError::Entry)?;
            let probe = run_sequential(&v.module, &entry, &probe_opts)?;
            let opts = RunOptions { stack_bytes: (probe.peak_bytes + 8192).next_multiple_of(8), ..probe_opts.clone() };
            for &workers in &cfg.workers {
                let mut times = Vec::with_capacity(cfg.samples);
                let mut frames = 0;
                for s in 0..cfg.samples.max(1) {
                    let start = Instant::now();
                    for r in 0..cfg.reps.max(1) {
                        let seed = cfg.seed.wrapping_add((s * cfg.reps + r) as u64);
                        let res = once(&v.module, &entry, workers, seed, &opts)?;
                        frames = res.steps;
                    }
                    times.push(start.elapsed().as_nanos() as u64);
                }
                report.rows.push(BenchRow {
                    suite: suite.name().to_string(),
                    program: v.program.to_string(),
                    mode: v.mode.to_string(),
                    workers,
                    n,
                    median_ns: median(times),
                    peak_bytes: probe.peak_bytes,
                    frames,
                });
            }
        }
    }
    let pairs: &[(&str, &str)] = match suite {
        Suite::Fib => &[("afib", "fib"), ("tfib", "afib"), ("tfib", "fib")],
        Suite::Sum => &[("csum", "lsum"), ("tsum", "csum"), ("tsum", "lsum")],
        Suite::Dcvsum => &[],
    };
    for &n in &cfg.sizes {
        for (a, b) in pairs {
            if let (Some(x), Some(y)) = (report.median(a, n, 1), report.median(b, n, 1)) {
                report.ratios.push((format!("{a}/{b}"), n, x as f64 / y as f64));
            }
        }
        if suite == Suite::Dcvsum {
            if let Some(base) = report.median("dcvsum", n, 1) {
                for &w in cfg.workers.iter().filter(|&&w| w != 1) {
                    if let Some(t) = report.median("dcvsum", n, w) {
                        report.ratios.push((format!("speedup x{w}"), n, base as f64 / t as f64));
                    }
                }
            }
        }
    }
    Ok(report)
}

impl BenchReport {
    pub fn median(&self, program: &str, n: i64, workers: usize) -> Option<u64> {
        self.rows.iter().find(|r| r.program == program && r.n == n && r.workers == workers).map(|r| r.median_ns)
    }

    pub fn ratio(&self, label: &str, n: i64) -> Option<f64> {
        self.ratios.iter().find(|(l, m, _)| l == label && *m == n).map(|r| r.2)
    }

    /// Text table, then the ratios, then one machine-readable line per row.
    pub fn render(&self) -> String {
        let mut out = format!(
            "{:<8} {:<11} {:>7} {:>9} {:>14} {:>12} {:>12}\n",
            "program", "mode", "workers", "n", "median_ns", "peak_bytes", "frames"
        );
        for r in &self.rows {
            out += &format!(
                "{:<8} {:<11} {:>7} {:>9} {:>14} {:>12} {:>12}\n",
                r.program, r.mode, r.workers, r.n, r.median_ns, r.peak_bytes, r.frames
            );
        }
        for (label, n, x) in &self.ratios {
            out += &format!("ratio {label} n={n} {x:.2}\n");
        }
        for r in &self.rows {
            out += &format!("bench {} {} {} {} {} {} {}\n", r.suite, r.program, r.mode, r.workers, r.n, r.median_ns, r.peak_bytes);
        }
        out
    }
}
