use super::emit::{emit_ir, ready_flags, routine_line};
use super::ir::*;
use super::*;
use crate::frontend::check_source;

const FIG2A: &str = include_str!("../../../cli/corpus/fig2a.tsia");
const FIB: &str = include_str!("../../../cli/corpus/fib.tsia");
const SUM: &str = include_str!("../../../cli/corpus/sum.tsia");
const ESUM: &str = include_str!("../../../cli/corpus/esum.tsia");
const DCVSUM: &str = include_str!("../../../cli/corpus/dcvsum.tsia");
const PUTAB: &str = include_str!("../../../cli/corpus/putab.tsia");

fn compile(src: &str, mode: CompileMode) -> IrModule {
    compile_program(&check_source(src).unwrap(), &CompileOptions::new(mode)).unwrap()
}

fn compile_err(src: &str, mode: CompileMode) -> LowerError {
    compile_program(&check_source(src).unwrap(), &CompileOptions::new(mode)).unwrap_err().0.remove(0)
}

fn line(m: &IrModule, name: &str) -> String {
    routine_line(m, m.lookup(name).unwrap())
}

#[test]
fn fig2a_task_layout() {
    let m = compile(FIG2A, CompileMode::Task);
    assert_eq!(m.user_routines().count(), 4);
    assert_eq!(line(&m, "d"), "routine 8 d task frame=40 entries=1 spawns=[b:1,c:0]");
    assert_eq!(line(&m, "c"), "routine 7 c task frame=48 entries=1 spawns=[a:1]");
    assert_eq!(line(&m, "b"), "routine 6 b task frame=40 entries=1 spawns=[]");
    // w has no consumer in d, so b's reference points at a dead cell.
    let g = &m.lookup("d").unwrap().groups[0];
    assert_eq!(g.dead_cells, 0);
    assert_eq!(g.items[0].home, ItemHome::Slot { plan: 1, slot: 0 });
    assert_eq!(g.offsets, [0, 40]);
    assert_eq!(g.fixed_bytes, 88);
}

#[test]
fn fig2a_activation_entries() {
    let m = compile(FIG2A, CompileMode::Activation);
    assert_eq!(m.lookup("d").unwrap().entry_count(), 3);
    assert_eq!(m.lookup("a").unwrap().entry_count(), 1);
    assert_eq!(m.lookup("c").unwrap().entry_count(), 2);
    assert_eq!(line(&m, "d"), "routine 8 d activation frame=48 entries=3 spawns=[b:1] [c:1]");
}

#[test]
fn tfib_spawns_two_independent_calls() {
    let m = compile(FIB, CompileMode::Task);
    assert_eq!(ready_flags(&m, "tfib").unwrap(), [vec![1, 1, 0]]);
    let g = &m.lookup("tfib").unwrap().groups[0];
    assert_eq!(g.dead_cells, 0);
    assert!(m.lookup("tfib$h1").is_none());
}

#[test]
fn reading_a_pending_result_splits_into_a_continuation() {
    let m = compile(FIB, CompileMode::Task);
    let h = m.lookup("fib$h1").unwrap();
    assert_eq!(h.origin, m.by_name.get("fib").copied());
    assert_eq!(h.sig.ins.len(), 2);
    assert_eq!(h.sig.outs.len(), 1);
    assert_eq!(ready_flags(&m, "fib").unwrap(), [vec![1, 1, 0]]);
    assert_eq!(line(&m, "fib$h1"), format!("routine {} fib$h1 task frame=56 entries=1 spawns=[]", h.id));
}

#[test]
fn tail_call_spawns_one_frame_of_the_same_size() {
    let m = compile(SUM, CompileMode::Task);
    let t = m.lookup("tsum").unwrap();
    assert_eq!(t.groups.len(), 1);
    assert_eq!(t.groups[0].plans[0].callee, t.id);
    assert_eq!(t.groups[0].fixed_bytes as usize, t.frame_bytes);
    let l = m.lookup("lsum").unwrap();
    assert!(l.groups.is_empty());
}

#[test]
fn loop_with_call_is_rejected_in_task_mode() {
    let src = "f(int n;;int z) { int i=0; while (i<n) { g(i;;z); i+=1; } }\ng(int x;;int y){y=x;}";
    assert!(matches!(compile_err(src, CompileMode::Task), LowerError::LoopContainsCall { .. }));
    compile(src, CompileMode::Activation);
}

#[test]
fn dcvsum_and_putab_flags() {
    let m = compile(DCVSUM, CompileMode::Task);
    assert_eq!(ready_flags(&m, "dcvsum").unwrap(), [vec![1, 1, 0]]);
    let m = compile(PUTAB, CompileMode::Task);
    assert_eq!(ready_flags(&m, "putab").unwrap(), [vec![1, 0]]);
    assert_eq!(ready_flags(&m, "main").unwrap(), [vec![1, 0]]);
}

#[test]
fn esum_arrays_become_skip_payloads() {
    let m = compile(ESUM, CompileMode::Task);
    let e = m.lookup("esum").unwrap();
    assert!(e.uses_arrays);
    assert_eq!(ready_flags(&m, "esum").unwrap(), [vec![1, 0]]);
    let src = "f(int n;; int a[n]) { if (n>0) { a[0]=n; } }\n\
               g(int n;; int z) { f(n;;u); f(n;;v); z=0; }";
    let m = compile(src, CompileMode::Task);
    assert!(m.lookup("g").unwrap().uses_arrays);
}

#[test]
fn local_array_passed_to_self_is_rejected() {
    let src = "f(int n;; int z) { int b[2]; if (n>0) { b[0]=n; f(n-1;;z); g(2,b;;w); } else z=0; }\n\
               g(int n, int a[n];; int r) { r=a[0]; }\n\
               h(int n;; int z) { int c[1]; f(n, c;;z); }";
    // The third routine does not type-check; only the first two matter here.
    let src = src.lines().take(2).collect::<Vec<_>>().join("\n");
    compile(&src, CompileMode::Task);
    let bad = "f(int n, int a[n];; int z) { int b[n]; if (n>1) f(n-1, b;;z); else z=0; }";
    assert!(matches!(compile_err(bad, CompileMode::Task), LowerError::ArrayEscapes { .. }));
}

#[test]
fn mixed_mode_alternates() {
    let m = compile(FIG2A, CompileMode::Mixed);
    let modes: Vec<_> = m.user_routines().map(|r| r.mode().unwrap()).collect();
    assert_eq!(modes, [RoutineMode::Task, RoutineMode::Activation, RoutineMode::Task, RoutineMode::Activation]);
}

#[test]
fn overrides_apply_per_routine() {
    let checked = check_source(SUM).unwrap();
    let opts = CompileOptions::new(CompileMode::Task).with_override("csum", RoutineMode::Activation);
    let m = compile_program(&checked, &opts).unwrap();
    assert_eq!(m.lookup("csum").unwrap().mode(), Some(RoutineMode::Activation));
    assert_eq!(m.lookup("tsum").unwrap().mode(), Some(RoutineMode::Task));
    let bad = CompileOptions::new(CompileMode::Task).with_override("nope", RoutineMode::Task);
    assert!(compile_program(&checked, &bad).is_err());
    let bad = CompileOptions::new(CompileMode::Task).with_override("csum", RoutineMode::Direct);
    assert!(compile_program(&checked, &bad).is_err());
}

#[test]
fn empty_program_has_only_builtins() {
    let m = compile("", CompileMode::Task);
    assert_eq!(m.routines.len(), BUILTIN_COUNT);
    let text = emit_ir(&m);
    assert_eq!(text.lines().next().unwrap(), "routine 0 _skip builtin frame=40 entries=1 spawns=[]");
    assert_eq!(text.lines().count(), BUILTIN_COUNT);
}

#[test]
fn compilation_is_deterministic() {
    for src in [FIG2A, FIB, SUM, ESUM, DCVSUM, PUTAB] {
        for mode in [CompileMode::Task, CompileMode::Activation, CompileMode::Mixed] {
            assert_eq!(emit_ir(&compile(src, mode)), emit_ir(&compile(src, mode)));
        }
    }
}

#[test]
fn parent_reads_after_rename_do_not_split() {
    let src = "g(;;int y) { y=1; }\n\
               f(;;int z) { g(;;w); w=5; z=w; }";
    let m = compile(src, CompileMode::Task);
    assert!(m.lookup("f$h1").is_none());
    // w's first value has no consumer and lands in a dead cell.
    let g = &m.lookup("f").unwrap().groups[0];
    assert_eq!(g.dead_cells, 1);
}
