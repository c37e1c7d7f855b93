//! Correctness labels by AST matching against ground truth.

use serde::{Deserialize, Serialize};

use crate::ast::{Call, ParseOutcome};
use crate::model::{ExpectedCall, GroundTruth};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectnessLabel {
    Correct,
    Incorrect,
    DecodeError,
}

/// True if `call` satisfies `expected`: same name, every required parameter
/// present, every present parameter listed, and each value allowed.
pub fn call_matches(call: &Call, expected: &ExpectedCall) -> bool {
    if call.name != expected.name {
        return false;
    }
    if !expected.required.iter().all(|r| call.arg(r).is_some()) {
        return false;
    }
    call.args.iter().all(|a| expected.params.get(&a.name).is_some_and(|allowed| allowed.contains(&a.value)))
}

/// Labels a parsed greedy output.
///
/// For refusal-expecting requests, a refusal or an undecodable output is
/// correct since no call gets executed. Otherwise predicted calls must match
/// the expected calls one-to-one in any order.
pub fn match_ground_truth(pred: &ParseOutcome, gt: &GroundTruth) -> CorrectnessLabel {
    if gt.expects_refusal {
        return match pred {
            ParseOutcome::Parsed(_) => CorrectnessLabel::Incorrect,
            ParseOutcome::Refusal(_) | ParseOutcome::DecodeError { .. } => CorrectnessLabel::Correct,
        };
    }
    match pred {
        ParseOutcome::DecodeError { .. } => CorrectnessLabel::DecodeError,
        ParseOutcome::Refusal(_) => CorrectnessLabel::Incorrect,
        ParseOutcome::Parsed(ast) => {
            if perfect_matching_exists(&ast.calls, &gt.expected_calls) {
                CorrectnessLabel::Correct
            } else {
                CorrectnessLabel::Incorrect
            }
        }
    }
}

/// Bipartite perfect matching between predicted and expected calls
/// (augmenting paths).
fn perfect_matching_exists(pred: &[Call], expected: &[ExpectedCall]) -> bool {
    if pred.len() != expected.len() {
        return false;
    }
    let n = pred.len();
    let adj: Vec<Vec<usize>> =
        pred.iter().map(|c| (0..n).filter(|&j| call_matches(c, &expected[j])).collect()).collect();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let mut visited = vec![false; n];
        if !augment(i, &adj, &mut owner, &mut visited) {
            return false;
        }
    }
    true
}

fn augment(i: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], visited: &mut [bool]) -> bool {
    for &j in &adj[i] {
        if visited[j] {
            continue;
        }
        visited[j] = true;
        if owner[j].is_none_or(|k| augment(k, adj, owner, visited)) {
            owner[j] = Some(i);
            return true;
        }
    }
    false
}
