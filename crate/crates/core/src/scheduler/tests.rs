use super::*;
use crate::frontend::check_source;
use crate::lowering::{compile_program, CompileMode, CompileOptions};

const FIB: &str = include_str!("../../../cli/corpus/fib.tsia");
const DCVSUM: &str = include_str!("../../../cli/corpus/dcvsum.tsia");
const PUTAB: &str = include_str!("../../../cli/corpus/putab.tsia");

fn module(src: &str, mode: CompileMode) -> IrModule {
    compile_program(&check_source(src).unwrap(), &CompileOptions::new(mode)).unwrap()
}

fn par(m: &IrModule, entry: &str, workers: usize, seed: u64, opts: &RunOptions) -> RunResult {
    run_parallel(m, &entry.parse().unwrap(), workers, seed, opts).unwrap()
}

#[test]
fn dcvsum_three_workers() {
    let m = module(DCVSUM, CompileMode::Task);
    for seed in 0..10 {
        let r = par(&m, "dcmain(9;;z)", 3, seed, &RunOptions::default());
        assert_eq!(r.out("z"), Some(45));
    }
}

#[test]
fn putab_never_reorders() {
    let m = module(PUTAB, CompileMode::Task);
    for seed in 0..50 {
        let r = par(&m, "main(;;)", 4, seed, &RunOptions::default());
        assert_eq!(r.output, b"abc", "seed {seed}");
    }
}

#[test]
fn every_mode_agrees_in_parallel() {
    for mode in [CompileMode::Task, CompileMode::Activation, CompileMode::Mixed, CompileMode::Direct] {
        let m = module(FIB, mode);
        let entry = if mode == CompileMode::Direct { "fib(15;;k)" } else { "tfib(15;;k)" };
        let r = par(&m, entry, 2, 3, &RunOptions::default());
        assert_eq!(r.out("k"), Some(610), "{mode:?}");
    }
}

#[test]
fn trace_records_steals_and_cops() {
    let m = module(FIB, CompileMode::Task);
    let opts = RunOptions { trace: true, full_checks: true, ..RunOptions::default() };
    let r = par(&m, "tfib(12;;k)", 2, 1, &opts);
    assert_eq!(r.out("k"), Some(144));
    let trace = r.trace.unwrap();
    let cops = trace.events.iter().filter(|e| matches!(e.kind, EventKind::CopFire { .. })).count();
    let steals = trace.events.iter().filter(|e| matches!(e.kind, EventKind::Steal { .. })).count();
    // One bootstrap cop per extra worker plus one per steal.
    assert_eq!(cops, steals + 1);
    for w in 0..2 {
        let times: Vec<u64> = trace.events.iter().filter(|e| e.worker == w).map(|e| e.time).collect();
        assert!(times.windows(2).all(|p| p[0] < p[1]));
    }
}

#[test]
fn bootstrap_layout() {
    let mem = Memory::new(3, 4096, 0).unwrap();
    bootstrap(&mem).unwrap();
    let cops = mem.stack(0).frames().unwrap();
    assert_eq!(cops.len(), 2);
    assert!(cops.iter().all(|f| f.routine == COP && f.len == COP_BYTES && f.ready == 0));
    assert_eq!(ItemRef(mem.stack(0).load(cops[0].offset + HEADER_BYTES)), ItemRef::stack(1, 4096 - 40));
    for w in 1..3 {
        let f = mem.stack(w).frames().unwrap();
        assert_eq!((f[0].routine, f[0].len, f[0].ready), (THIEF, MIN_FRAME_BYTES, 0));
    }
}

#[test]
fn orphan_thief_is_a_deadlock() {
    let m = module(FIB, CompileMode::Task);
    let mem = Memory::new(2, 4096, 0).unwrap();
    bootstrap(&mem).unwrap();
    // A barrier no cop will ever lift.
    mem.stack(0).push_frame(THIEF, 0, 0, &[99]).unwrap();
    let err = drive(&m, &mem, 0, &RunOptions::default()).unwrap_err();
    assert!(matches!(err, RuntimeError::Deadlock { .. }), "{err}");
}

#[test]
fn overflow_on_any_worker_aborts_the_run() {
    let m = module(FIB, CompileMode::Activation);
    let opts = RunOptions { stack_bytes: 4096, ..RunOptions::default() };
    let err = run_parallel(&m, &"afib(200;;k)".parse().unwrap(), 3, 0, &opts).unwrap_err();
    assert!(matches!(err, RuntimeError::StackOverflow { .. }), "{err}");
}

#[test]
fn interleaved_runs_steal_and_stay_correct() {
    let m = module(DCVSUM, CompileMode::Task);
    for w in 2..=4 {
        let opts = RunOptions { trace: true, full_checks: true, interleave: true, ..RunOptions::default() };
        let r = par(&m, "dcmain(256;;z)", w, 5, &opts);
        assert_eq!(r.out("z"), Some(256 * 257 / 2));
        let steals = r.trace.unwrap().events.iter().filter(|e| matches!(e.kind, EventKind::Steal { .. })).count();
        assert!(steals > 0, "{w} workers");
    }
}
