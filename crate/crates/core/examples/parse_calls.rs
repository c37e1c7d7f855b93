//! Parse model outputs in both surface formats and compare the ASTs.

use fcuq::parser::{parse_json_calls, parse_pycall};
use fcuq::{ast_equal, ParseOutcome};

fn describe(outcome: &ParseOutcome) -> String {
    match outcome {
        ParseOutcome::Parsed(ast) => format!("{} call(s): {}", ast.calls.len(), ast.to_pycall()),
        ParseOutcome::Refusal(text) => format!("refusal: {text:?}"),
        ParseOutcome::DecodeError { reason, position } => format!("decode error at byte {position}: {reason}"),
    }
}

fn main() {
    let py = parse_pycall(r#"[get_weather(city="Paris", days=3), spotify.play(artist="Nina Simone", duration=20)]"#);
    let js = parse_json_calls(
        r#"[{"name": "get_weather", "arguments": {"days": 3, "city": "Paris"}},
            {"name": "spotify.play", "arguments": {"artist": "Nina Simone", "duration": 20}}]"#,
    );
    println!("pycall: {}", describe(&py));
    println!("json:   {}", describe(&js));
    println!("same AST (argument order ignored): {}", ast_equal(py.ast().unwrap(), js.ast().unwrap()));

    for text in ["I'm sorry, none of the functions can do that.", "[get_weather(city=\"Paris\""] {
        println!("{text:?} -> {}", describe(&parse_pycall(text)));
    }
}
