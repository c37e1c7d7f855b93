//! Build the judge prompt whose "A" probability becomes the PTRUE score.

use fcuq::estimators::score_ptrue;
use fcuq::model::{GroundTruth, Record, Split, Token, TokenizedSequence};
use fcuq::ptrue::{build_ptrue_prompt, FewShotBundle, PromptContext};

fn seq(text: &str, temperature: f64) -> TokenizedSequence {
    TokenizedSequence::from_tokens(vec![Token::new(text, -0.3)], temperature)
}

fn main() {
    let record = Record {
        id: "simple_0".into(),
        split: Split::Simple,
        model: "demo".into(),
        greedy: seq("[calculate_triangle_area(base=10, height=5)]", 0.0),
        samples: vec![
            seq("[calculate_triangle_area(base=10, height=5)]", 1.0),
            seq("[calculate_triangle_area(base=10, height=5, unit=\"units\")]", 1.0),
        ],
        ground_truth: GroundTruth::default(),
    };
    let context = PromptContext {
        question: "Find the area of a triangle with a base of 10 units and height of 5 units.",
        functions: r#"[{"name": "calculate_triangle_area", "parameters": {"base": "integer", "height": "integer"}}]"#,
    };
    let prompt = build_ptrue_prompt(&record, context, &FewShotBundle::default()).expect("record has samples");
    println!("{prompt}");
    // Suppose the judge put 0.83 on "A".
    println!("\n-> PTRUE uncertainty {:.2}", score_ptrue(0.83).unwrap().value);
}
