use super::*;
use crate::frontend::check_source;
use crate::lowering::ir::RoutineMode;
use crate::lowering::{compile_program, CompileMode, CompileOptions};

const FIG2A: &str = include_str!("../../../cli/corpus/fig2a.tsia");
const FIB: &str = include_str!("../../../cli/corpus/fib.tsia");
const SUM: &str = include_str!("../../../cli/corpus/sum.tsia");
const ESUM: &str = include_str!("../../../cli/corpus/esum.tsia");
const DCVSUM: &str = include_str!("../../../cli/corpus/dcvsum.tsia");
const PUTAB: &str = include_str!("../../../cli/corpus/putab.tsia");

fn module(src: &str, opts: CompileOptions) -> IrModule {
    compile_program(&check_source(src).unwrap(), &opts).unwrap()
}

fn run_opts(src: &str, mode: CompileMode, entry: &str, opts: &RunOptions) -> RunResult {
    let m = module(src, CompileOptions::new(mode));
    run_sequential(&m, &entry.parse().unwrap(), opts).unwrap()
}

fn run(src: &str, mode: CompileMode, entry: &str) -> RunResult {
    let opts = RunOptions { full_checks: true, snapshots: true, ..RunOptions::default() };
    run_opts(src, mode, entry, &opts)
}

#[test]
fn entry_call_parsing() {
    let e: EntryCall = "tfib(36;;k)".parse().unwrap();
    assert_eq!(e.ins, [36]);
    assert_eq!(e.outs, ["k"]);
    let e: EntryCall = " putc('a';;) ".parse().unwrap();
    assert_eq!(e.ins, [97]);
    let e: EntryCall = "v(1,-2;z=5;)".parse().unwrap();
    assert_eq!(e.inouts, [("z".to_string(), 5)]);
    assert_eq!(e.to_string(), "v(1,-2;z=5;)");
    assert!("f(x;;)".parse::<EntryCall>().is_err());
    assert!("f(;;1)".parse::<EntryCall>().is_err());
    assert!("f(;;".parse::<EntryCall>().is_err());
}

#[test]
fn fig2a_in_every_mode() {
    for mode in [CompileMode::Task, CompileMode::Activation, CompileMode::Mixed, CompileMode::Direct] {
        assert_eq!(run(FIG2A, mode, "d(;;q)").out("q"), Some(14), "{mode:?}");
    }
}

#[test]
fn fig2a_task_snapshots() {
    let r = run(FIG2A, CompileMode::Task, "d(;;q)");
    let expected = [
        "1999960: d(;;v=@h+0) entry=0 ready=1 len=40\nEND\n",
        "1999912: b(;x=@s0+1999984;) entry=0 ready=1 len=40\n\
         1999952: c(x=4;;y=@h+0) entry=0 ready=0 len=48\nEND\n",
        "1999952: c(x=7;;y=@h+0) entry=0 ready=0 len=48\nEND\n",
        "1999952: a(x=7;;y=@h+0) entry=0 ready=1 len=48\nEND\n",
    ];
    assert_eq!(r.snapshots, expected);
}

#[test]
fn fig2a_activation_snapshots_keep_dead_frame() {
    let r = run(FIG2A, CompileMode::Activation, "d(;;q)");
    assert_eq!(r.snapshots.len(), 7);
    assert_eq!(r.snapshots[0], "1999952: d(;;v=@h+0) entry=0 ready=1 len=48\nEND\n");
    assert!(r.snapshots[1].contains("b(;x=@s0+1999992;)"));
    assert!(r.snapshots[1].contains("d(;;v=@h+0) entry=1 ready=0 len=48 locals(w=4)"));
    assert!(r.snapshots[2].contains("entry=1 ready=0 len=48 locals(w=7)"));
    assert!(r.snapshots[4].starts_with("1999856: a(x=7;;y=@h+0)"));
    assert!(r.snapshots[4].contains("c(x=7;;y=@h+0) entry=1"));
    assert!(r.snapshots[6].contains("d(;;v=@h+0) entry=2 ready=0 len=48 locals(w=7)"));
}

#[test]
fn fib_variants_agree() {
    let fibs = [0i64, 1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144];
    for (n, want) in fibs.iter().enumerate() {
        assert_eq!(run(FIB, CompileMode::Task, &format!("tfib({n};;k)")).out("k"), Some(*want));
        assert_eq!(run(FIB, CompileMode::Task, &format!("fib({n};;k)")).out("k"), Some(*want));
        assert_eq!(run(FIB, CompileMode::Activation, &format!("afib({n};;k)")).out("k"), Some(*want));
        assert_eq!(run(FIB, CompileMode::Direct, &format!("fib({n};;k)")).out("k"), Some(*want));
        assert_eq!(run(FIB, CompileMode::Mixed, &format!("tfib({n};;k)")).out("k"), Some(*want));
    }
}

#[test]
fn sums() {
    for mode in [CompileMode::Task, CompileMode::Activation, CompileMode::Mixed, CompileMode::Direct] {
        for name in ["lsum", "csum", "tsum"] {
            assert_eq!(run(SUM, mode, &format!("{name}(1,100,0;;a)")).out("a"), Some(5050));
        }
        assert_eq!(run(ESUM, mode, "esum(1,100,0;;a)").out("a"), Some(5050), "{mode:?}");
        assert_eq!(run(ESUM, mode, "esum(5,4,7;;a)").out("a"), Some(7));
        assert_eq!(run(DCVSUM, mode, "dcmain(100;;z)").out("z"), Some(5050));
    }
}

#[test]
fn tail_recursion_runs_in_one_frame() {
    let opts = RunOptions { debug_checks: false, ..RunOptions::default() };
    let small = run_opts(SUM, CompileMode::Task, "tsum(1,1000,0;;a)", &opts);
    let big = run_opts(SUM, CompileMode::Task, "tsum(1,100000,0;;a)", &opts);
    assert_eq!(small.peak_bytes, 64);
    assert_eq!(big.peak_bytes, 64);
    let a = run_opts(SUM, CompileMode::Activation, "csum(1,100,0;;a)", &opts);
    let b = run_opts(SUM, CompileMode::Activation, "csum(1,200,0;;a)", &opts);
    assert_eq!(b.peak_bytes - a.peak_bytes, 100 * 64);
}

#[test]
fn esum_snapshot_shows_skip_payload() {
    let r = run(ESUM, CompileMode::Task, "esum(1,3,0;;a)");
    let second = &r.snapshots[1];
    let lines: Vec<&str> = second.lines().collect();
    assert!(lines[0].contains("vseq(n=3,m=1;;a=@s0+"), "{second}");
    assert!(lines[1].contains("vsum(n=3,a=@s0+"), "{second}");
    assert!(lines[2].contains("_skip(n=24) entry=0 ready=0 len=64"), "{second}");
    assert!(lines[3].ends_with("payload[0,0,0]"), "{second}");
    assert_eq!(lines[4], "END");
}

#[test]
fn putab_prints_in_order() {
    let r = run(PUTAB, CompileMode::Task, "main(;;)");
    assert_eq!(r.output, b"abc");
    let r = run(PUTAB, CompileMode::Direct, "main(;;)");
    assert_eq!(r.output, b"abc");
}

#[test]
fn runtime_errors() {
    let m = module("f(int x;; int y) { y = 10 / x; }", CompileOptions::new(CompileMode::Task));
    let err = run_sequential(&m, &"f(0;;y)".parse().unwrap(), &RunOptions::default()).unwrap_err();
    assert!(matches!(err, RuntimeError::DivideByZero { ref routine, .. } if routine == "f"));
    assert!(err.to_string().starts_with("1:"));

    let m = module("f(int n;; int y) { int a[n]; y = a[n]; }", CompileOptions::new(CompileMode::Activation));
    let err = run_sequential(&m, &"f(2;;y)".parse().unwrap(), &RunOptions::default()).unwrap_err();
    assert!(matches!(err, RuntimeError::IndexOutOfBounds { index: 2, len: 2, .. }));
    let err = run_sequential(&m, &"f(-1;;y)".parse().unwrap(), &RunOptions::default()).unwrap_err();
    assert!(matches!(err, RuntimeError::NegativeArrayLength { len: -1, .. }));

    let m = module(SUM, CompileOptions::new(CompileMode::Activation));
    let opts = RunOptions { stack_bytes: 4096, ..RunOptions::default() };
    let err = run_sequential(&m, &"csum(1,1000,0;;a)".parse().unwrap(), &opts).unwrap_err();
    assert!(matches!(err, RuntimeError::StackOverflow { .. }));
    let err = run_sequential(&m, &"csum(1;;a)".parse().unwrap(), &opts).unwrap_err();
    assert!(matches!(err, RuntimeError::Entry(_)));
}

#[test]
fn overrides_mix_frame_kinds() {
    let opts = CompileOptions::new(CompileMode::Task).with_override("csum", RoutineMode::Activation);
    let m = module(SUM, opts);
    let r = run_sequential(&m, &"csum(1,10,0;;a)".parse().unwrap(), &RunOptions::default()).unwrap();
    assert_eq!(r.out("a"), Some(55));
}

#[test]
fn trace_records_frames_and_effects() {
    let opts = RunOptions { trace: true, ..RunOptions::default() };
    let r = run_opts(PUTAB, CompileMode::Task, "main(;;)", &opts);
    let trace = r.trace.unwrap();
    assert_eq!(trace.effects(), [("stdout".to_string(), 97), ("stdout".into(), 98), ("stdout".into(), 99)]);
    let text = trace.to_string();
    assert!(text.starts_with("event 0 0 exec s0+1999960 main(;;) entry=0\n"), "{text}");
    assert!(text.contains("event 0 3 effect stdout 97"), "{text}");
}
