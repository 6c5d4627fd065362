use std::path::PathBuf;
use std::process::Command;

use taskframe_cli::{run_cli, EXIT_COMPILE, EXIT_OK, EXIT_RUNTIME};

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("taskframe").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn ok(args: &[&str]) -> String {
    let (code, out, err) = cli(args);
    assert_eq!(code, EXIT_OK, "{args:?}: {err}");
    out
}

/// Rewrites stack offsets as distances from the stack's bottom end, so
/// snapshots compare equal across stack sizes.
fn normalize(text: &str, capacity: usize) -> String {
    let rel = |digits: &str| format!("~{}", capacity - digits.parse::<usize>().unwrap());
    let mut out = String::new();
    for line in text.lines() {
        let mut rest = line;
        if let Some((head, tail)) = line.split_once(": ") {
            if !head.is_empty() && head.bytes().all(|b| b.is_ascii_digit()) {
                out += &format!("{}: ", rel(head));
                rest = tail;
            }
        }
        while let Some(at) = rest.find("@s") {
            let after = &rest[at + 2..];
            let plus = after.find('+').unwrap();
            let digits: String = after[plus + 1..].chars().take_while(char::is_ascii_digit).collect();
            out += &rest[..at];
            out += &format!("@s{}{}", &after[..plus], rel(&digits));
            rest = &after[plus + 1 + digits.len()..];
        }
        out += rest;
        out.push('\n');
    }
    out
}

fn golden(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, want, "golden {name} differs");
}

fn snapshot_golden(name: &str, args: &[&str]) {
    let mut first = None;
    for cap in [2_000_000usize, 8192] {
        let cap_s = cap.to_string();
        let mut a = args.to_vec();
        a.extend(["--stack-size", &cap_s]);
        let text = normalize(&ok(&a), cap);
        match &first {
            None => first = Some(text),
            Some(f) => assert_eq!(f, &text, "{name} depends on the stack size"),
        }
    }
    golden(name, first.as_deref().unwrap());
}

#[test]
fn run_prints_results() {
    assert_eq!(ok(&["run", "fig2a.tsia", "--entry", "d(;;q)"]), "q=14\n");
    assert_eq!(ok(&["run", "sum.tsia", "--entry", "tsum(1,100,0;;a)"]), "a=5050\n");
    assert_eq!(ok(&["run", "fib", "--entry", "tfib(20;;k)", "--workers", "3", "--seed", "9"]), "k=6765\n");
    assert_eq!(ok(&["run", "putab", "--entry", "main(;;)", "--workers", "4"]), "abc");
    assert_eq!(ok(&["run", "dcvsum", "--entry", "dcmain(10;;z)", "--mode", "mixed"]), "z=55\n");
    assert_eq!(ok(&["run", "fig2a", "--entry", "b(;x=3;)"]), "x=6\n");
}

#[test]
fn every_mode_is_selectable() {
    for mode in ["task", "activation", "mixed", "direct"] {
        assert_eq!(ok(&["run", "fib", "--entry", "afib(12;;k)", "--mode", mode, "--no-debug-checks"]), "k=144\n");
    }
}

#[test]
fn snapshots_golden() {
    snapshot_golden("fig2a_task.snap", &["snapshot", "fig2a", "--entry", "d(;;q)"]);
    snapshot_golden("fig2a_activation.snap", &["snapshot", "fig2a", "--entry", "d(;;q)", "--mode", "activation"]);
    snapshot_golden("esum.snap", &["snapshot", "esum", "--entry", "esum(1,3,0;;a)"]);
}

#[test]
fn run_with_snapshots_matches_snapshot_command() {
    let snap = ok(&["snapshot", "fig2a", "--entry", "d(;;q)"]);
    let run = ok(&["run", "fig2a", "--entry", "d(;;q)", "--snapshots"]);
    assert_eq!(run, snap + "q=14\n");
}

#[test]
fn emit_ir_golden() {
    for name in ["fig2a", "fib", "sum", "esum", "dcvsum", "putab"] {
        golden(&format!("{name}.ir"), &ok(&["emit-ir", name]));
    }
    golden("fig2a_activation.ir", &ok(&["emit-ir", "fig2a", "--mode", "activation"]));
    let empty = std::env::temp_dir().join("taskframe-empty.tsia");
    std::fs::write(&empty, "").unwrap();
    let ir = ok(&["emit-ir", empty.to_str().unwrap()]);
    assert_eq!(ir.lines().count(), 5);
    assert!(ir.lines().all(|l| l.contains(" builtin ")));
}

#[test]
fn trace_lines() {
    let out = ok(&["run", "putab", "--entry", "main(;;)", "--trace"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "event 0 0 exec s0+1999960 main(;;) entry=0");
    assert!(lines.iter().all(|l| l.starts_with("event 0 ") || *l == "abc"));
    let effects: Vec<&str> = lines.iter().filter(|l| l.contains(" effect ")).copied().collect();
    assert_eq!(effects.len(), 3);
    assert!(effects[0].ends_with("effect stdout 97"));
    let par = ok(&["run", "fib", "--entry", "tfib(10;;k)", "--workers", "2", "--trace"]);
    assert!(par.contains(" cop-fire s1+"));
}

#[test]
fn compile_errors_exit_2_with_positions() {
    let dir = std::env::temp_dir();
    let bad = dir.join("taskframe-bad.tsia");
    std::fs::write(&bad, "f(;;int a) {\n  a = ;\n}\n").unwrap();
    let (code, _, err) = cli(&["run", bad.to_str().unwrap(), "--entry", "f(;;a)"]);
    assert_eq!(code, EXIT_COMPILE);
    assert!(err.contains("2:7"), "{err}");
    let undeclared = dir.join("taskframe-undeclared.tsia");
    std::fs::write(&undeclared, "f(;;int a) { a = b; }").unwrap();
    let (code, _, err) = cli(&["emit-ir", undeclared.to_str().unwrap()]);
    assert_eq!(code, EXIT_COMPILE);
    assert!(err.contains("`b` is not declared"), "{err}");
    assert_eq!(cli(&["run", "no-such-file.tsia", "--entry", "f(;;)"]).0, EXIT_COMPILE);
    assert_eq!(cli(&["run", "fig2a", "--entry", "nope(;;q)"]).0, EXIT_COMPILE);
    assert_eq!(cli(&["run", "fig2a", "--entry", "d(;;"]).0, EXIT_COMPILE);
    assert_eq!(cli(&["run", "fig2a", "--entry", "d(;;q)", "--mode", "fast"]).0, EXIT_COMPILE);
    assert_eq!(cli(&["run", "fig2a", "--entry", "d(;;q)", "--stack-size", "100"]).0, EXIT_COMPILE);
    assert_eq!(cli(&["frobnicate"]).0, EXIT_COMPILE);
}

#[test]
fn runtime_errors_exit_3_with_routine() {
    let f = std::env::temp_dir().join("taskframe-div.tsia");
    std::fs::write(&f, "half(int x;; int y) { y = 1 / x; }").unwrap();
    let (code, _, err) = cli(&["run", f.to_str().unwrap(), "--entry", "half(0;;y)"]);
    assert_eq!(code, EXIT_RUNTIME);
    assert!(err.contains("`half`"), "{err}");
    let (code, _, err) = cli(&["run", "fib", "--entry", "afib(300;;k)", "--mode", "activation", "--stack-size", "4096"]);
    assert_eq!(code, EXIT_RUNTIME);
    assert!(err.contains("stack overflow"), "{err}");
}

#[test]
fn bench_prints_table_and_machine_lines() {
    let out = ok(&["bench", "fib", "--sizes", "12", "--samples", "3"]);
    let bench: Vec<Vec<&str>> = out.lines().filter(|l| l.starts_with("bench ")).map(|l| l.split(' ').collect()).collect();
    assert_eq!(bench.len(), 3);
    assert!(bench.iter().all(|f| f.len() == 8 && f[1] == "fib" && f[5] == "12"));
    assert_eq!(bench.iter().map(|f| f[2]).collect::<Vec<_>>(), ["fib", "afib", "tfib"]);
    for r in ["afib/fib", "tfib/afib", "tfib/fib"] {
        assert!(out.contains(&format!("ratio {r} n=12 ")), "{out}");
    }
    let out = ok(&["bench", "dcvsum", "--sizes", "64", "--workers", "1,2", "--samples", "1"]);
    assert!(out.contains("bench dcvsum dcvsum task 2 64 "));
    assert!(out.contains("ratio speedup x2 n=64 "));
    let out = ok(&["bench", "sum", "--sizes", "50", "--reps", "2", "--samples", "1"]);
    assert!(out.contains("ratio tsum/lsum n=50 "));
}

#[test]
fn binary_exit_codes_and_env_stack_size() {
    let bin = env!("CARGO_BIN_EXE_taskframe");
    let run = |args: &[&str], env: Option<&str>| {
        let mut c = Command::new(bin);
        c.args(args).env_remove("TSIA_STACK_BYTES");
        if let Some(v) = env {
            c.env("TSIA_STACK_BYTES", v);
        }
        c.output().unwrap()
    };
    let o = run(&["run", "fig2a.tsia", "--entry", "d(;;q)"], None);
    assert_eq!((o.status.code(), o.stdout.as_slice()), (Some(0), b"q=14\n".as_slice()));
    assert_eq!(run(&["run", "fig2a", "--entry", "d(;;q)"], Some("12")).status.code(), Some(2));
    // the flag wins over the environment
    assert_eq!(run(&["run", "fig2a", "--entry", "d(;;q)", "--stack-size", "8192"], Some("12")).status.code(), Some(0));
    let o = run(&["snapshot", "fig2a", "--entry", "d(;;q)"], Some("8192"));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("8152: d("));
    assert_eq!(run(&["run", "fib", "--entry", "afib(300;;k)", "--mode", "activation"], Some("4096")).status.code(), Some(3));
}
