use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use taskframe::frontend::check_source;
use taskframe::lowering::{compile_program, CompileMode, CompileOptions};
use taskframe::machine::{run_sequential, EventKind, RunOptions};
use taskframe_testkit::{generate, GenConfig};

const SUM: &str = include_str!("../../cli/corpus/sum.tsia");

fn peak(mode: CompileMode, entry: &str) -> usize {
    let m = compile_program(&check_source(SUM).unwrap(), &CompileOptions::new(mode)).unwrap();
    run_sequential(&m, &entry.parse().unwrap(), &RunOptions::default()).unwrap().peak_bytes
}

#[test]
fn task_tail_recursion_runs_in_one_frame() {
    let small = peak(CompileMode::Task, "tsum(1,1000,0;;a)");
    assert_eq!(small, peak(CompileMode::Task, "tsum(1,100000,0;;a)"));
    assert_eq!(small, peak(CompileMode::Task, "tsum(1,1,0;;a)"));
}

#[test]
fn activation_recursion_grows_by_one_frame_per_call() {
    let at = |n: usize| peak(CompileMode::Activation, &format!("csum(1,{n},0;;a)"));
    let (a, b, c) = (at(100), at(200), at(400));
    assert!(b > a);
    assert_eq!((b - a) * 2, c - b, "slope must be constant");
    assert_eq!((b - a) % 100, 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// With full checks the machine verifies tiling after every step; a
    /// finished run has popped every frame and traced every step once.
    #[test]
    fn every_step_keeps_the_stack_tiled(seed in any::<u64>(), mode_ix in 0usize..3) {
        let mode = [CompileMode::Task, CompileMode::Activation, CompileMode::Mixed][mode_ix];
        let g = generate(&mut ChaCha8Rng::seed_from_u64(seed), &GenConfig::default());
        let m = compile_program(&check_source(&g.source).unwrap(), &CompileOptions::new(mode)).unwrap();
        let opts = RunOptions { full_checks: true, trace: true, stack_bytes: 1 << 20, ..RunOptions::default() };
        match run_sequential(&m, &g.entry, &opts) {
            Ok(r) => {
                let execs = r.trace.as_ref().unwrap().events.iter().filter(|e| matches!(e.kind, EventKind::Exec { .. })).count();
                prop_assert_eq!(execs as u64, r.steps);
                prop_assert!(r.peak_bytes >= 40 && r.peak_bytes <= 1 << 20);
            }
            // generated programs may divide by zero or index out of range
            Err(e) => prop_assert!(!e.to_string().contains("tile"), "{}", e),
        }
    }
}
