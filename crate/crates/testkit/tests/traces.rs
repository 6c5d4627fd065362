use taskframe::frontend::check_source;
use taskframe::lowering::{compile_program, CompileMode, CompileOptions};
use taskframe::machine::{EventKind, RunOptions, Trace};
use taskframe::scheduler::run_parallel;
use taskframe_testkit::check_trace;

const CAP: usize = 1 << 16;

/// A genuine trace of dcvsum on two interleaved workers, with steals.
fn recorded() -> Trace {
    let m = compile_program(&check_source(include_str!("../../cli/corpus/dcvsum.tsia")).unwrap(), &CompileOptions::new(CompileMode::Task)).unwrap();
    let opts = RunOptions { trace: true, interleave: true, stack_bytes: CAP, ..RunOptions::default() };
    for seed in 0.. {
        let r = run_parallel(&m, &"dcmain(64;;z)".parse().unwrap(), 2, seed, &opts).unwrap();
        let t = r.trace.unwrap();
        if t.events.iter().any(|e| matches!(e.kind, EventKind::Steal { .. })) {
            return t;
        }
    }
    unreachable!()
}

fn first_steal(t: &Trace) -> usize {
    t.events.iter().position(|e| matches!(e.kind, EventKind::Steal { .. })).unwrap()
}

fn rejected(t: &Trace, why: &str) {
    let err = check_trace(t, 2, CAP).expect_err(why);
    assert!(err.contains(why), "wanted `{why}`, got `{err}`");
}

#[test]
fn the_genuine_trace_passes() {
    let stats = check_trace(&recorded(), 2, CAP).unwrap();
    assert!(stats.steals > 0);
    assert_eq!(stats.cop_fires, stats.steals + 1);
}

#[test]
fn time_going_backwards() {
    let mut t = recorded();
    let last = t.events.iter().rposition(|e| e.worker == 0).unwrap();
    t.events[last].time = 0;
    rejected(&t, "time went");
}

#[test]
fn stealing_a_frame_that_was_not_ready() {
    let mut t = recorded();
    let i = first_steal(&t);
    if let EventKind::Steal { offset, frames, .. } = &mut t.events[i].kind {
        frames.iter_mut().find(|f| f.0 == *offset).unwrap().1 = 0;
    }
    rejected(&t, "was not ready");
}

#[test]
fn stealing_above_a_lower_ready_frame() {
    let mut t = recorded();
    let i = first_steal(&t);
    if let EventKind::Steal { offset, frames, .. } = &mut t.events[i].kind {
        let at = frames.iter().position(|f| f.0 == *offset).unwrap();
        // a ready frame wedged between the stolen one and the next
        let end = frames.get(at + 1).map_or(CAP, |f| f.0);
        frames.insert(at + 1, (end - 40, 1));
    }
    rejected(&t, "is lower");
}

#[test]
fn thief_length_differs_from_the_stolen_frame() {
    let mut t = recorded();
    let i = first_steal(&t);
    if let EventKind::Steal { len, .. } = &mut t.events[i].kind {
        *len += 8;
    }
    rejected(&t, "thief of length");
}

#[test]
fn stealing_from_oneself() {
    let mut t = recorded();
    let i = first_steal(&t);
    let w = t.events[i].worker;
    if let EventKind::Steal { victim, .. } = &mut t.events[i].kind {
        *victim = w;
    }
    rejected(&t, "stole from itself");
}

#[test]
fn executing_below_a_live_thief() {
    let mut t = recorded();
    let i = first_steal(&t);
    let EventKind::Steal { victim, offset, len, .. } = t.events[i].kind.clone() else { unreachable!() };
    let mut e = t.events[i].clone();
    e.worker = victim;
    e.time = u64::MAX;
    e.kind = EventKind::Exec { stack: victim, offset: offset + len, routine: "x".into(), entry: 0, args: String::new() };
    // the validator stops at the first violation, so later times do not matter
    t.events.insert(i + 1, e);
    rejected(&t, "ran below the live thief");
}

#[test]
fn a_missing_cop_leaves_a_thief() {
    let mut t = recorded();
    let last = t.events.iter().rposition(|e| matches!(e.kind, EventKind::CopFire { .. })).unwrap();
    t.events.remove(last);
    rejected(&t, "thieves left");
}

#[test]
fn a_cop_without_a_thief() {
    let mut t = recorded();
    let i = t.events.iter().position(|e| matches!(e.kind, EventKind::CopFire { .. })).unwrap();
    if let EventKind::CopFire { offset, .. } = &mut t.events[i].kind {
        *offset += 8;
    }
    rejected(&t, "where no thief lives");
}
