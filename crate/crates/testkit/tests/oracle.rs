use taskframe::frontend::check_source;
use taskframe_testkit::{run_oracle, OracleError, OracleResult};

fn oracle(src: &str, entry: &str) -> Result<OracleResult, OracleError> {
    run_oracle(&check_source(src).unwrap(), &entry.parse().unwrap(), 10_000_000)
}

fn out(src: &str, entry: &str, name: &str) -> i64 {
    let r = oracle(src, entry).unwrap();
    r.outs.iter().find(|(n, _)| n == name).unwrap().1
}

/// Textbook Fibonacci, independent of every TSIA program.
fn fib(n: i64) -> i64 {
    let (mut a, mut b) = (0, 1);
    for _ in 0..n {
        (a, b) = (b, a + b);
    }
    a
}

#[test]
fn corpus_values() {
    let fib_src = include_str!("../../cli/corpus/fib.tsia");
    let sum = include_str!("../../cli/corpus/sum.tsia");
    assert_eq!(out(include_str!("../../cli/corpus/fig2a.tsia"), "d(;;q)", "q"), 14);
    for n in 0..=20 {
        for f in ["fib", "afib", "tfib"] {
            assert_eq!(out(fib_src, &format!("{f}({n};;k)"), "k"), fib(n), "{f}({n})");
        }
    }
    for n in [0i64, 1, 10, 100] {
        for f in ["lsum", "csum", "tsum"] {
            assert_eq!(out(sum, &format!("{f}(1,{n},3;;a)"), "a"), 3 + n * (n + 1) / 2);
        }
        assert_eq!(out(include_str!("../../cli/corpus/esum.tsia"), &format!("esum(1,{n},0;;a)"), "a"), n * (n + 1) / 2);
    }
    for n in [1i64, 2, 9, 100] {
        assert_eq!(out(include_str!("../../cli/corpus/dcvsum.tsia"), &format!("dcmain({n};;z)"), "z"), n * (n + 1) / 2);
    }
}

#[test]
fn effects_follow_program_order() {
    let r = oracle(include_str!("../../cli/corpus/putab.tsia"), "main(;;)").unwrap();
    assert_eq!(r.output, b"abc");
    let want: Vec<(String, i64)> = "abc".bytes().map(|b| ("stdout".to_string(), b as i64)).collect();
    assert_eq!(r.effects, want);
    assert_eq!(r.calls, 5);
}

#[test]
fn inouts_and_array_slices() {
    let src = "inc(; int x;) { x += 1; }
               fill(int n;; int a[n]) { int i=0; while (i<n) { a[i]=i*i; i+=1; } }
               m(; int y; int z) { inc(;y;); int b[4]; fill(2;;b[2]); z = b[0]+b[1]+b[2]+b[3]; }";
    let r = oracle(src, "m(;y=5;z)").unwrap();
    assert_eq!(r.outs, vec![("y".to_string(), 6), ("z".to_string(), 1)]);
}

#[test]
fn runtime_errors() {
    let div = "f(int a;; int b) { b = 1 / a; }";
    assert!(matches!(oracle(div, "f(0;;b)"), Err(OracleError::DivideByZero(_))));
    let oob = "f(int i;; int b) { int a[2]; b = a[i]; }";
    assert!(matches!(oracle(oob, "f(2;;b)"), Err(OracleError::OutOfBounds(_))));
    let neg = "f(int n;; int b) { int a[n]; b = 0; }";
    assert!(matches!(oracle(neg, "f(-1;;b)"), Err(OracleError::NegativeLength(_))));
    let spin = "f(;;) { while (1) { } }";
    assert!(matches!(oracle(spin, "f(;;)"), Err(OracleError::Budget)));
    assert!(matches!(oracle(spin, "g(;;)"), Err(OracleError::Entry(_))));
}
