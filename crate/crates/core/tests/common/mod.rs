#![allow(dead_code)]

use fcuq::ast::{Arg, Call};
use fcuq::{FunctionCallAst, Token, TokenizedSequence, Value};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const NAMES: &[&str] = &["f", "get_weather", "math.gcd", "spotify.play", "history.get_key_events", "_x1"];
const PARAMS: &[&str] = &["a", "b", "city", "year", "event_type", "unit", "x_2"];
const STRINGS: &[&str] =
    &["", "Paris", "The Thinker", "say \"hi\"", "back\\slash", "tab\tnew\nline", "Zürich ☃", "'q'"];

pub fn random_value(rng: &mut ChaCha8Rng, depth: u32) -> Value {
    let top = if depth == 0 { 5 } else { 7 };
    match rng.random_range(0..top) {
        0 => Value::Str(STRINGS[rng.random_range(0..STRINGS.len())].to_string()),
        1 => Value::Int(rng.random_range(-100_000..100_000)),
        2 => {
            let mantissa: f64 = rng.random_range(-1000.0..1000.0);
            let exp = rng.random_range(-12..12);
            Value::Float(mantissa * 10f64.powi(exp))
        }
        3 => Value::Bool(rng.random()),
        4 => Value::Null,
        5 => Value::List((0..rng.random_range(0..4)).map(|_| random_value(rng, depth - 1)).collect()),
        _ => {
            let mut keys: Vec<&str> = PARAMS.to_vec();
            keys.shuffle(rng);
            let n = rng.random_range(0..3);
            Value::Dict(keys[..n].iter().map(|k| (k.to_string(), random_value(rng, depth - 1))).collect())
        }
    }
}

pub fn random_call(rng: &mut ChaCha8Rng) -> Call {
    let mut params: Vec<&str> = PARAMS.to_vec();
    params.shuffle(rng);
    let n = rng.random_range(0..4);
    Call {
        name: NAMES[rng.random_range(0..NAMES.len())].to_string(),
        args: params[..n].iter().map(|p| Arg { name: p.to_string(), value: random_value(rng, 2) }).collect(),
        spans: Default::default(),
    }
}

pub fn random_ast(rng: &mut ChaCha8Rng) -> FunctionCallAst {
    FunctionCallAst::new((0..rng.random_range(1..4)).map(|_| random_call(rng)).collect())
}

/// Same calls with every argument list shuffled.
pub fn permuted(ast: &FunctionCallAst, rng: &mut ChaCha8Rng) -> FunctionCallAst {
    let mut calls = ast.calls.clone();
    for c in &mut calls {
        c.args.shuffle(rng);
    }
    FunctionCallAst::new(calls)
}

pub fn random_tokens(rng: &mut ChaCha8Rng, len: usize) -> Vec<Token> {
    (0..len).map(|i| Token::new(format!("t{i}"), -rng.random_range(0.0..10.0))).collect()
}

/// A one-token sample whose probability is `exp(logprob)`.
pub fn sample(text: &str, logprob: f64) -> TokenizedSequence {
    TokenizedSequence::from_tokens(vec![Token::new(text, logprob)], 1.0)
}
