use proptest::prelude::*;
use taskframe::frontend::check_source;
use taskframe::lowering::ir::IrModule;
use taskframe::lowering::{compile_program, CompileMode, CompileOptions};
use taskframe::machine::{run_sequential, EventKind, RunOptions};
use taskframe::scheduler::{run_parallel, VictimPicker};
use taskframe_testkit::check_trace;

const DCVSUM: &str = include_str!("../../cli/corpus/dcvsum.tsia");
const PUTAB: &str = include_str!("../../cli/corpus/putab.tsia");
const FIB: &str = include_str!("../../cli/corpus/fib.tsia");

fn task(src: &str) -> IrModule {
    compile_program(&check_source(src).unwrap(), &CompileOptions::new(CompileMode::Task)).unwrap()
}

#[test]
fn victims_are_uniform_within_three_sigma() {
    const DRAWS: usize = 100_000;
    for (worker, workers) in [(0, 4), (2, 5), (7, 8)] {
        let mut p = VictimPicker::new(0x5eed, worker, workers);
        let mut counts = vec![0usize; workers];
        for _ in 0..DRAWS {
            counts[p.next_victim()] += 1;
        }
        assert_eq!(counts[worker], 0);
        let k = workers - 1;
        let expect = DRAWS as f64 / k as f64;
        let chi2: f64 = counts.iter().enumerate().filter(|(i, _)| *i != worker).map(|(_, &c)| (c as f64 - expect).powi(2) / expect).sum();
        // chi-square with k-1 degrees of freedom: mean k-1, variance 2(k-1)
        let df = (k - 1) as f64;
        assert!(chi2 < df + 3.0 * (2.0 * df).sqrt(), "{workers} workers: chi2 {chi2}");
    }
}

#[test]
fn victim_streams_are_reproducible_and_distinct_per_worker() {
    let draw = |seed, w| {
        let mut p = VictimPicker::new(seed, w, 6);
        (0..64).map(|_| p.next_victim()).collect::<Vec<_>>()
    };
    assert_eq!(draw(9, 3), draw(9, 3));
    assert_ne!(draw(9, 3), draw(10, 3));
    assert_ne!(draw(9, 1), draw(9, 2));
}

#[test]
fn one_worker_trace_is_the_sequential_trace() {
    let m = task(FIB);
    let opts = RunOptions { trace: true, ..RunOptions::default() };
    let entry = "tfib(10;;k)".parse().unwrap();
    let seq = run_sequential(&m, &entry, &opts).unwrap();
    let par = run_parallel(&m, &entry, 1, 42, &opts).unwrap();
    let text = |r: &taskframe::machine::RunResult| r.trace.as_ref().unwrap().to_string();
    assert_eq!(text(&seq), text(&par));
}

#[test]
fn putab_prints_abc_in_a_hundred_seeded_runs() {
    let m = task(PUTAB);
    let entry = "main(;;)".parse().unwrap();
    for seed in 0..100 {
        let opts = RunOptions { interleave: seed % 2 == 1, ..RunOptions::default() };
        let r = run_parallel(&m, &entry, 4, seed, &opts).unwrap();
        assert_eq!(r.output, b"abc", "seed {seed}");
    }
}

#[test]
fn thieves_get_starved_victims_and_retry() {
    // fib(1) leaves nothing to steal; the extra workers only retry.
    let m = task(FIB);
    let opts = RunOptions { trace: true, interleave: true, ..RunOptions::default() };
    let r = run_parallel(&m, &"tfib(1;;k)".parse().unwrap(), 3, 0, &opts).unwrap();
    assert_eq!(r.out("k"), Some(1));
    let trace = r.trace.unwrap();
    assert!(!trace.events.iter().any(|e| matches!(e.kind, EventKind::Steal { .. })));
    check_trace(&trace, 3, opts.stack_bytes).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dcvsum_is_determinate(n in 1i64..600, workers in 1usize..5, seed in any::<u64>()) {
        let m = task(DCVSUM);
        let opts = RunOptions { trace: true, full_checks: true, interleave: true, ..RunOptions::default() };
        let r = run_parallel(&m, &format!("dcmain({n};;z)").parse().unwrap(), workers, seed, &opts).unwrap();
        prop_assert_eq!(r.out("z"), Some(n * (n + 1) / 2));
        if workers > 1 {
            let stats = check_trace(r.trace.as_ref().unwrap(), workers, opts.stack_bytes).unwrap();
            prop_assert_eq!(stats.cop_fires, stats.steals + workers - 1);
        }
    }
}
