mod common;

use std::collections::{BTreeMap, BTreeSet};

use fcuq::ast::Call;
use fcuq::matching::{match_ground_truth, CorrectnessLabel};
use fcuq::model::ExpectedCall;
use fcuq::parser::{parse_json_calls, parse_pycall};
use fcuq::{ast_equal, parse, CallFormat, FunctionCallAst, GroundTruth, ParseOutcome, Value};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn truth_for(ast: &FunctionCallAst) -> GroundTruth {
    GroundTruth {
        expected_calls: ast
            .calls
            .iter()
            .map(|c: &Call| ExpectedCall {
                name: c.name.clone(),
                params: c.args.iter().map(|a| (a.name.clone(), vec![a.value.clone()])).collect::<BTreeMap<_, _>>(),
                required: c.args.iter().map(|a| a.name.clone()).collect::<BTreeSet<_>>(),
            })
            .collect(),
        expects_refusal: false,
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #[test]
    fn parse_never_panics(text in ".{0,64}") {
        let _ = parse_pycall(&text);
        let _ = parse_json_calls(&text);
    }

    #[test]
    fn bracketed_noise_never_panics(body in "[a-z_.(),=\"\\[\\]{}:0-9 ]{0,40}") {
        let text = format!("[{body}]");
        let _ = parse_pycall(&text);
        let _ = parse_json_calls(&text);
    }

    #[test]
    fn ast_equality_is_an_equivalence(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = common::random_ast(&mut r);
        let b = common::permuted(&a, &mut r);
        let c = common::permuted(&b, &mut r);
        let other = common::random_ast(&mut r);
        prop_assert!(ast_equal(&a, &a));
        prop_assert!(ast_equal(&a, &b) && ast_equal(&b, &a));
        prop_assert!(ast_equal(&b, &c) && ast_equal(&a, &c));
        prop_assert_eq!(ast_equal(&a, &other), ast_equal(&other, &a));
        prop_assert_eq!(ast_equal(&a, &other), a.canonical_key() == other.canonical_key());
    }

    #[test]
    fn matching_ignores_argument_order(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ast = common::random_ast(&mut r);
        let gt = truth_for(&ast);
        let text = common::permuted(&ast, &mut r).to_pycall();
        prop_assert_eq!(match_ground_truth(&parse(&text, CallFormat::Pycall), &gt), CorrectnessLabel::Correct);
        let json = common::permuted(&ast, &mut r).to_json_calls();
        prop_assert_eq!(match_ground_truth(&parse(&json, CallFormat::Json), &gt), CorrectnessLabel::Correct);
    }

    #[test]
    fn changed_value_is_incorrect(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut ast = common::random_ast(&mut r);
        prop_assume!(!ast.calls[0].args.is_empty());
        let gt = truth_for(&ast);
        ast.calls[0].args[0].value = Value::Str("definitely not allowed".into());
        let label = match_ground_truth(&parse(&ast.to_pycall(), CallFormat::Pycall), &gt);
        prop_assert_eq!(label, CorrectnessLabel::Incorrect);
    }

    #[test]
    fn truncation_is_a_decode_error(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut text = common::random_ast(&mut r).to_pycall();
        text.pop();
        prop_assert!(parse_pycall(&text).is_decode_error());
    }
}

#[test]
fn refusals_are_not_decode_errors() {
    for text in ["I cannot answer that.", "[]", "None of the functions fit."] {
        assert!(matches!(parse_pycall(text), ParseOutcome::Refusal(_)), "{text}");
    }
    let gt = GroundTruth::refusal();
    assert_eq!(match_ground_truth(&parse_pycall("I cannot."), &gt), CorrectnessLabel::Correct);
    assert_eq!(match_ground_truth(&parse_pycall("[f(a=1)]"), &gt), CorrectnessLabel::Incorrect);
}

#[test]
fn json_and_pycall_forms_agree() {
    let py = parse_pycall(r#"[spotify.play(artist="Taylor Swift", duration=20), f(x=[1, 2.5, None], y={"k": True})]"#);
    let js = parse_json_calls(
        r#"[{"name": "spotify.play", "arguments": {"duration": 20, "artist": "Taylor Swift"}}, {"name": "f", "arguments": {"x": [1, 2.5, null], "y": {"k": true}}}]"#,
    );
    assert!(ast_equal(py.ast().unwrap(), js.ast().unwrap()));
}
