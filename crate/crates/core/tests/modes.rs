use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use taskframe::frontend::token::{tokenize, TokenKind};
use taskframe::frontend::{check_source, CheckedProgram};
use taskframe::lowering::{compile_program, CompileMode, CompileOptions};
use taskframe::machine::{run_sequential, EntryCall, RunOptions, RunResult};
use taskframe_testkit::{generate, run_oracle, GenConfig, OracleResult};

const MODES: [CompileMode; 4] = [CompileMode::Task, CompileMode::Activation, CompileMode::Mixed, CompileMode::Direct];

/// (source, entry) pairs over the bundled corpus.
fn corpus_entries() -> Vec<(&'static str, String)> {
    let fig2a = include_str!("../../cli/corpus/fig2a.tsia");
    let fib = include_str!("../../cli/corpus/fib.tsia");
    let sum = include_str!("../../cli/corpus/sum.tsia");
    let esum = include_str!("../../cli/corpus/esum.tsia");
    let dcvsum = include_str!("../../cli/corpus/dcvsum.tsia");
    let putab = include_str!("../../cli/corpus/putab.tsia");
    let mut v = vec![(fig2a, "d(;;q)".to_string()), (putab, "main(;;)".into()), (putab, "putab(;;)".into())];
    for n in [0, 1, 2, 7, 12] {
        for f in ["fib", "afib", "tfib"] {
            v.push((fib, format!("{f}({n};;k)")));
        }
    }
    for (i, n) in [(1, 0), (1, 10), (3, 40), (-5, 5)] {
        for f in ["lsum", "csum", "tsum"] {
            v.push((sum, format!("{f}({i},{n},2;;a)")));
        }
        v.push((esum, format!("esum({i},{n},2;;a)")));
    }
    for n in [1, 2, 3, 9, 64] {
        v.push((dcvsum, format!("dcmain({n};;z)")));
    }
    v
}

fn run(checked: &CheckedProgram, mode: CompileMode, entry: &EntryCall) -> RunResult {
    let m = compile_program(checked, &CompileOptions::new(mode)).unwrap();
    let opts = RunOptions { full_checks: true, trace: true, ..RunOptions::default() };
    run_sequential(&m, entry, &opts).unwrap()
}

fn agrees(r: &RunResult, want: &OracleResult) -> bool {
    r.outs == want.outs && r.output == want.output && r.trace.as_ref().unwrap().effects() == want.effects
}

#[test]
fn corpus_agrees_with_the_oracle_in_every_mode() {
    for (src, entry) in corpus_entries() {
        let checked = check_source(src).unwrap();
        let entry: EntryCall = entry.parse().unwrap();
        let want = run_oracle(&checked, &entry, 10_000_000).unwrap();
        for mode in MODES {
            let r = run(&checked, mode, &entry);
            assert!(agrees(&r, &want), "{entry} {mode:?}: {:?} vs {:?}", r.outs, want.outs);
        }
    }
}

/// Renames every identifier the generator invented for locals.
fn rename_locals(src: &str) -> String {
    let tokens = tokenize(src).unwrap();
    let mut out = String::new();
    let mut last = 0;
    for t in tokens {
        if let TokenKind::Ident(name) = &t.kind {
            let local = name.len() > 1
                && matches!(name.as_bytes()[0], b't' | b'w' | b'v' | b'b' | b'i')
                && name[1..].bytes().all(|c| c.is_ascii_digit());
            if local {
                out.push_str(&src[last..t.span.offset]);
                out.push_str(&format!("q_{name}_r"));
                last = t.span.offset + name.len();
            }
        }
    }
    out.push_str(&src[last..]);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn generated_programs_agree_with_the_oracle(seed in any::<u64>(), routines in 1usize..6) {
        let cfg = GenConfig { routines, ..GenConfig::default() };
        let g = generate(&mut ChaCha8Rng::seed_from_u64(seed), &cfg);
        let checked = check_source(&g.source).unwrap();
        let Ok(want) = run_oracle(&checked, &g.entry, 50_000) else { return Ok(()) };
        for mode in MODES {
            let r = run(&checked, mode, &g.entry);
            prop_assert!(agrees(&r, &want), "{:?}\n{}", mode, g.source);
        }
    }

    #[test]
    fn renaming_locals_changes_nothing(seed in any::<u64>()) {
        let g = generate(&mut ChaCha8Rng::seed_from_u64(seed), &GenConfig::default());
        let renamed = rename_locals(&g.source);
        let (a, b) = (check_source(&g.source).unwrap(), check_source(&renamed).unwrap());
        for mode in [CompileMode::Task, CompileMode::Activation] {
            let (x, y) = (run(&a, mode, &g.entry), run(&b, mode, &g.entry));
            prop_assert_eq!(x.outs, y.outs);
            prop_assert_eq!(x.output, y.output);
            prop_assert_eq!(x.steps, y.steps);
        }
    }
}
