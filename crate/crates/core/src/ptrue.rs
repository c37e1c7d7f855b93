//! P(true) prompt construction.
//!
//! The judging model itself runs elsewhere; this module renders the prompt
//! (system block, one incorrect and one correct few-shot block, and the
//! block under evaluation) and [`crate::estimators::score_ptrue`] turns the
//! returned probability of "A" into an uncertainty score.

use std::fmt::Write as _;

use crate::estimators::ScoreError;
use crate::model::Record;

const SYSTEM_PROMPT: &str = "<|im_start|>system
You are an expert in composing functions. You are given a question and a set of possible functions. You are also given brainstormed ideas and a possible answer. Based on the question, you have to assess if the possible answer achieves the purpose.

If none of the functions can be used, it should be stated out in the answer. If the given question lacks the parameters required by the function, it should also be pointed out in the answer. Otherwise, only function calls should be included in the answer.

Any invoked function(s) MUST be put it in the format of [func_name1(params_name1=params_value1, params_name2=params_value2...), func_name2(params)]
<|im_end|>
";

/// Few-shot material shown before the example under evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FewShotBundle {
    pub question: String,
    pub functions: String,
    pub ideas: Vec<String>,
    pub incorrect_answer: String,
    pub correct_answer: String,
}

impl Default for FewShotBundle {
    /// The divide/add example. The function listing is kept byte-for-byte,
    /// including its unbalanced bracket after the denominator description.
    fn default() -> Self {
        FewShotBundle {
            question: "What is 19/53?".into(),
            functions: "[{'name': 'divide', 'description': 'Divides two numbers.', 'parameters': {'type': 'dict', 'properties': {'numerator': {'type': 'float', 'description': 'The numerator of the fraction.'}, 'denominator': {'type': 'float', 'description': 'The denominator of the fraction.']}}, 'required': ['numerator', 'denominator']}}, {'name': 'add', 'description': 'Adds two integers.', 'parameters': {'type': 'dict', 'properties': {'a': {'type': 'int', 'description': 'The first integer.'}, 'b': {'type': 'int', 'description': 'The second integer.'}}}, 'required': ['a', 'b']}}]".into(),
            ideas: vec![
                "[divide(denominator=53, numerator=19)]".into(),
                "[divide(numerator=53, denominator=53)]".into(),
                "[divide(numerator=19, denominator=19)]".into(),
                "[divide(numerator=19, denominator=53)]".into(),
            ],
            incorrect_answer: "[divide(numerator=53, denominator=19)]".into(),
            correct_answer: "[divide(numerator=19, denominator=53)]".into(),
        }
    }
}

/// The request a record answers: user question and available functions.
#[derive(Debug, Clone, Copy)]
pub struct PromptContext<'a> {
    pub question: &'a str,
    /// Function list as shown to the judge, usually compact JSON.
    pub functions: &'a str,
}

fn user_block(out: &mut String, question: &str, functions: &str, ideas: &[&str], answer: &str) {
    let _ = write!(
        out,
        "<|im_start|>user\nQuestion: {question}\n\nHere is a list of functions in JSON format that can be invoked:\n{functions}\n\nHere are some brainstormed ideas:\n"
    );
    for idea in ideas {
        out.push_str(idea);
        out.push('\n');
    }
    let _ = write!(
        out,
        "\nPossible answer:\n{answer}\n\nIs the possible answer:\nA) True\nB) False\nRespond with A or B only.<|im_end|>\n<|im_start|>assistant\nThe possible answer is: "
    );
}

/// Renders the full P(true) prompt for `record`. The sampled outputs are the
/// brainstormed ideas; the greedy output is the possible answer. The prompt
/// ends right where the judge's "A"/"B" token is expected.
pub fn build_ptrue_prompt(
    record: &Record,
    context: PromptContext<'_>,
    fewshot: &FewShotBundle,
) -> Result<String, ScoreError> {
    if record.samples.is_empty() {
        return Err(ScoreError::MissingSamples);
    }
    let shots: Vec<&str> = fewshot.ideas.iter().map(String::as_str).collect();
    let mut out = String::from(SYSTEM_PROMPT);
    user_block(&mut out, &fewshot.question, &fewshot.functions, &shots, &fewshot.incorrect_answer);
    out.push_str("B<|im_end|>\n");
    user_block(&mut out, &fewshot.question, &fewshot.functions, &shots, &fewshot.correct_answer);
    out.push_str("A<|im_end|>\n");
    let ideas: Vec<&str> = record.samples.iter().map(|s| s.text.as_str()).collect();
    user_block(&mut out, context.question, context.functions, &ideas, &record.greedy.text);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GroundTruth, Split, Token, TokenizedSequence};

    fn record(samples: usize) -> Record {
        let seq = |t: f64| TokenizedSequence::from_tokens(vec![Token::new("[f(a=1)]", -0.1)], t);
        Record {
            id: "simple_0".into(),
            split: Split::Simple,
            model: "m".into(),
            greedy: seq(0.0),
            samples: (0..samples).map(|_| seq(1.0)).collect(),
            ground_truth: GroundTruth::default(),
        }
    }

    const CTX: PromptContext<'static> = PromptContext { question: "Q?", functions: "[]" };

    #[test]
    fn prompt_layout() {
        let p = build_ptrue_prompt(&record(2), CTX, &FewShotBundle::default()).unwrap();
        assert!(p.starts_with("<|im_start|>system\nYou are an expert in composing functions."));
        assert_eq!(p.matches("Respond with A or B only.<|im_end|>").count(), 3);
        assert!(p.contains("Possible answer:\n[divide(numerator=19, denominator=53)]\n"));
        assert!(p.contains("Possible answer:\n[divide(numerator=53, denominator=19)]\n"));
        assert!(p.contains("The possible answer is: B<|im_end|>\n<|im_start|>user"));
        assert!(p.contains("The possible answer is: A<|im_end|>\n<|im_start|>user\nQuestion: Q?\n"));
        assert!(p.contains("Here are some brainstormed ideas:\n[f(a=1)]\n[f(a=1)]\n\nPossible answer:\n[f(a=1)]\n"));
        assert!(p.ends_with("<|im_start|>assistant\nThe possible answer is: "));
    }

    #[test]
    fn no_samples_is_an_error() {
        assert_eq!(build_ptrue_prompt(&record(0), CTX, &FewShotBundle::default()), Err(ScoreError::MissingSamples));
    }
}
