use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use taskframe::frontend::parser::parse;
use taskframe::frontend::pretty::pretty;
use taskframe::frontend::token::tokenize;
use taskframe::frontend::{check_source, validate, Program};
use taskframe_testkit::{generate, GenConfig};

const CORPUS: [&str; 6] = [
    include_str!("../../cli/corpus/fig2a.tsia"),
    include_str!("../../cli/corpus/fib.tsia"),
    include_str!("../../cli/corpus/sum.tsia"),
    include_str!("../../cli/corpus/esum.tsia"),
    include_str!("../../cli/corpus/dcvsum.tsia"),
    include_str!("../../cli/corpus/putab.tsia"),
];

fn parse_src(src: &str) -> Program {
    parse(&tokenize(src).unwrap()).unwrap()
}

fn generated(seed: u64) -> String {
    generate(&mut ChaCha8Rng::seed_from_u64(seed), &GenConfig::default()).source
}

fn round_trips(src: &str) {
    let ast = parse_src(src);
    let printed = pretty(&ast);
    assert_eq!(parse_src(&printed), ast, "{printed}");
    // printing is a fixed point after one pass
    assert_eq!(pretty(&parse_src(&printed)), printed);
}

fn positions_increase(src: &str) {
    let tokens = tokenize(src).unwrap();
    for w in tokens.windows(2) {
        assert!(w[0].span.offset < w[1].span.offset, "{:?} then {:?}", w[0], w[1]);
    }
}

#[test]
fn corpus_round_trips() {
    for src in CORPUS {
        round_trips(src);
        positions_increase(src);
    }
}

#[test]
fn validate_is_idempotent_on_corpus() {
    for src in CORPUS {
        let ast = parse_src(src);
        let once = validate(&ast).unwrap();
        assert_eq!(validate(&ast).unwrap(), once);
        // implicit declarations are explicit after one pass
        assert_eq!(validate(&once.program).unwrap().program, once.program);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn generated_programs_round_trip(seed in any::<u64>()) {
        let src = generated(seed);
        round_trips(&src);
        positions_increase(&src);
        let checked = check_source(&src).unwrap();
        prop_assert_eq!(validate(&checked.program).unwrap().program, checked.program);
    }

    #[test]
    fn token_positions_increase_on_any_text(src in "[a-z0-9_ (){};,=+*/%<>!'\\[\\]\\-\n]{0,80}") {
        if let Ok(tokens) = tokenize(&src) {
            for w in tokens.windows(2) {
                prop_assert!(w[0].span.offset < w[1].span.offset);
            }
        }
    }

    #[test]
    fn validate_gives_the_same_verdict_twice(src in "[a-d]\\((int [xy])?;;(int [yz])?\\) \\{ [a-d]\\(1;;[xyz]\\); \\}") {
        if let Ok(tokens) = tokenize(&src) {
            if let Ok(ast) = parse(&tokens) {
                let copy = ast.clone();
                let a = validate(&ast);
                prop_assert_eq!(&ast, &copy);
                prop_assert_eq!(validate(&ast), a);
            }
        }
    }
}
