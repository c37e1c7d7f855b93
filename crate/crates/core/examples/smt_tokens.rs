//! Type each greedy token and compare full vs. filtered G-NLL.

use fcuq::estimators::{score_gnll, score_smt_variant, BaseAggregator};
use fcuq::fixture::pseudo_tokenize;
use fcuq::model::{Token, TokenizedSequence};
use fcuq::parser::parse_pycall;
use fcuq::smt::classify_tokens;

fn main() {
    let text =
        r#"[history.get_key_events(country="France", start_year=1800, end_year=1900, event_type=["War", "Economy"])]"#;
    // Pretend the model was unsure only about the year.
    let tokens: Vec<Token> = pseudo_tokenize(text)
        .into_iter()
        .map(|t| {
            let lp = if t == "9" { -1.2 } else { -0.02 };
            Token::new(t, lp)
        })
        .collect();
    let seq = TokenizedSequence::from_tokens(tokens, 0.0);
    let outcome = parse_pycall(&seq.text);
    let typed = classify_tokens(&seq, outcome.ast().expect("parses")).expect("tokens align");

    for t in &typed {
        println!("{:>4}  {:?}", t.kind.to_string(), t.token.text);
    }
    let kept = typed.iter().filter(|t| t.kind.is_meaningful()).count();
    println!("\nkept {kept} of {} tokens", typed.len());
    println!("GNLL     {:.4}", score_gnll(&seq.tokens).unwrap().value);
    println!("GNLL_SMT {:.4}", score_smt_variant(&seq, &outcome, BaseAggregator::Gnll).unwrap().value);
}
