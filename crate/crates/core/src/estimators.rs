//! Uncertainty estimators.
//!
//! Single-sample aggregators work on the greedy output's token NLLs.
//! Multi-sample estimators work on sampled outputs, optionally clustered by
//! exact string match (EXM) or AST equality.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{CallFormat, ParseOutcome};
use crate::model::{Method, Token, TokenizedSequence, UncertaintyScore};
use crate::parser::parse;
use crate::smt::{smt_tokens, SmtError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoreError {
    #[error("token sequence is empty")]
    EmptySequence,
    #[error("sample set is empty")]
    EmptySampleSet,
    #[error("probability {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("record has no samples to brainstorm from")]
    MissingSamples,
    #[error("requested {requested} samples but only {available} are available")]
    TooFewSamples { requested: usize, available: usize },
    #[error(transparent)]
    Smt(#[from] SmtError),
}

fn score(method: Method, value: f64) -> UncertaintyScore {
    UncertaintyScore { method, value }
}

/// Highest token NLL.
pub fn score_max(tokens: &[Token]) -> Result<UncertaintyScore, ScoreError> {
    tokens.iter().map(Token::nll).reduce(f64::max).map(|v| score(Method::Max, v)).ok_or(ScoreError::EmptySequence)
}

/// Mean token NLL (log-perplexity).
pub fn score_avg(tokens: &[Token]) -> Result<UncertaintyScore, ScoreError> {
    if tokens.is_empty() {
        return Err(ScoreError::EmptySequence);
    }
    Ok(score(Method::Avg, nll_sum(tokens) / tokens.len() as f64))
}

/// Sum of token NLLs, i.e. the negative sequence log-likelihood.
pub fn score_gnll(tokens: &[Token]) -> Result<UncertaintyScore, ScoreError> {
    if tokens.is_empty() {
        return Err(ScoreError::EmptySequence);
    }
    Ok(score(Method::Gnll, nll_sum(tokens)))
}

/// Number of tokens.
pub fn score_len(tokens: &[Token]) -> UncertaintyScore {
    score(Method::Len, tokens.len() as f64)
}

fn nll_sum(tokens: &[Token]) -> f64 {
    tokens.iter().map(Token::nll).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaseAggregator {
    Max,
    Avg,
    Gnll,
}

impl BaseAggregator {
    pub fn apply(self, tokens: &[Token]) -> Result<f64, ScoreError> {
        Ok(match self {
            BaseAggregator::Max => score_max(tokens)?.value,
            BaseAggregator::Avg => score_avg(tokens)?.value,
            BaseAggregator::Gnll => score_gnll(tokens)?.value,
        })
    }

    fn smt_method(self) -> Method {
        match self {
            BaseAggregator::Max => Method::MaxSmt,
            BaseAggregator::Avg => Method::AvgSmt,
            BaseAggregator::Gnll => Method::GnllSmt,
        }
    }
}

/// Aggregates over the semantically meaningful tokens of `seq`. Uses the
/// full sequence when `outcome` has no AST or nothing survives filtering.
pub fn score_smt_variant(
    seq: &TokenizedSequence,
    outcome: &ParseOutcome,
    base: BaseAggregator,
) -> Result<UncertaintyScore, ScoreError> {
    let tokens = smt_tokens(seq, outcome)?;
    Ok(score(base.smt_method(), base.apply(&tokens)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "UPPERCASE")]
pub enum ClusterMethod {
    #[default]
    Exm,
    Ast,
}

impl std::str::FromStr for ClusterMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "EXM" => Ok(ClusterMethod::Exm),
            "AST" => Ok(ClusterMethod::Ast),
            _ => Err(format!("unknown clustering `{s}`")),
        }
    }
}

/// Partition of a sample set. Cluster ids follow first occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub cluster_of: Vec<usize>,
    pub k: usize,
    pub method: ClusterMethod,
}

impl ClusterAssignment {
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in &self.cluster_of {
            sizes[c] += 1;
        }
        sizes
    }

    pub fn members(&self, cluster: usize) -> impl Iterator<Item = usize> + '_ {
        self.cluster_of.iter().enumerate().filter(move |(_, &c)| c == cluster).map(|(i, _)| i)
    }
}

/// Groups samples: EXM by byte-identical text; AST by AST equality for
/// parsed samples, byte identity for the rest.
pub fn cluster_samples(
    samples: &[TokenizedSequence],
    method: ClusterMethod,
    format: CallFormat,
) -> Result<ClusterAssignment, ScoreError> {
    if samples.is_empty() {
        return Err(ScoreError::EmptySampleSet);
    }
    let keys: Vec<String> = samples
        .iter()
        .map(|s| match method {
            ClusterMethod::Exm => format!("t:{}", s.text),
            ClusterMethod::Ast => match parse(&s.text, format) {
                ParseOutcome::Parsed(ast) => format!("a:{}", ast.canonical_key()),
                _ => format!("t:{}", s.text),
            },
        })
        .collect();
    let mut ids: HashMap<&str, usize> = HashMap::new();
    let cluster_of = keys
        .iter()
        .map(|k| {
            let next = ids.len();
            *ids.entry(k.as_str()).or_insert(next)
        })
        .collect();
    Ok(ClusterAssignment { cluster_of, k: ids.len(), method })
}

fn entropy(probs: impl IntoIterator<Item = f64>) -> f64 {
    let h: f64 = probs.into_iter().filter(|&p| p > 0.0).map(|p| -p * p.ln()).sum();
    h.max(0.0)
}

/// Predictive entropy: negated mean length-normalized log-likelihood.
pub fn score_pe(samples: &[TokenizedSequence]) -> Result<UncertaintyScore, ScoreError> {
    if samples.is_empty() {
        return Err(ScoreError::EmptySampleSet);
    }
    let mut total = 0.0;
    for s in samples {
        if s.tokens.is_empty() {
            return Err(ScoreError::EmptySequence);
        }
        total += s.total_logprob() / s.tokens.len() as f64;
    }
    Ok(score(Method::Pe, -total / samples.len() as f64))
}

/// Options for probability-weighted semantic entropy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeOptions {
    /// Weight samples by length-normalized instead of raw sequence log-likelihood.
    pub length_normalized: bool,
}

/// Semantic entropy: entropy of the normalized cluster probability mass.
pub fn score_se(
    samples: &[TokenizedSequence],
    clusters: &ClusterAssignment,
    opts: SeOptions,
) -> Result<UncertaintyScore, ScoreError> {
    if samples.is_empty() {
        return Err(ScoreError::EmptySampleSet);
    }
    assert_eq!(samples.len(), clusters.cluster_of.len(), "clusters computed over a different sample set");
    let logp: Vec<f64> = samples
        .iter()
        .map(|s| {
            let lp = s.total_logprob();
            if opts.length_normalized && !s.tokens.is_empty() {
                lp / s.tokens.len() as f64
            } else {
                lp
            }
        })
        .collect();
    let shift = logp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut mass = vec![0.0; clusters.k];
    for (lp, &c) in logp.iter().zip(&clusters.cluster_of) {
        mass[c] += (lp - shift).exp();
    }
    let total: f64 = mass.iter().sum();
    assert!(total > 0.0, "max-shifted mass cannot vanish");
    let method = match clusters.method {
        ClusterMethod::Exm => Method::SeExm,
        ClusterMethod::Ast => Method::SeAst,
    };
    Ok(score(method, entropy(mass.iter().map(|m| m / total))))
}

/// Discrete semantic entropy: entropy of cluster frequencies.
pub fn score_dse(clusters: &ClusterAssignment) -> Result<UncertaintyScore, ScoreError> {
    let j = clusters.cluster_of.len();
    if j == 0 {
        return Err(ScoreError::EmptySampleSet);
    }
    let method = match clusters.method {
        ClusterMethod::Exm => Method::DseExm,
        ClusterMethod::Ast => Method::DseAst,
    };
    Ok(score(method, entropy(clusters.sizes().into_iter().map(|n| n as f64 / j as f64))))
}

/// P(true) uncertainty from the probability of answer "A".
pub fn score_ptrue(p_a: f64) -> Result<UncertaintyScore, ScoreError> {
    if !(0.0..=1.0).contains(&p_a) {
        return Err(ScoreError::OutOfRange(p_a));
    }
    Ok(score(Method::PTrue, 1.0 - p_a))
}

/// Seeded subsample of `count` samples without replacement, in original order.
pub fn subsample(samples: &[TokenizedSequence], count: usize, seed: u64) -> Result<Vec<TokenizedSequence>, ScoreError> {
    if count == 0 || count > samples.len() {
        return Err(ScoreError::TooFewSamples { requested: count, available: samples.len() });
    }
    if count == samples.len() {
        return Ok(samples.to_vec());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, samples.len(), count).into_vec();
    idx.sort_unstable();
    Ok(idx.into_iter().map(|i| samples[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(lps: &[f64]) -> Vec<Token> {
        lps.iter().enumerate().map(|(i, &l)| Token::new(format!("t{i}"), l)).collect()
    }

    fn sample(text: &str, logprob: f64) -> TokenizedSequence {
        TokenizedSequence { text: text.into(), tokens: vec![Token::new(text, logprob)], temperature: 1.0 }
    }

    #[test]
    fn single_sample_definitions() {
        assert_eq!(score_max(&toks(&[0.0, 0.0, 0.0])).unwrap().value, 0.0);
        assert_eq!(score_max(&toks(&[-0.1, -0.7, -0.2])).unwrap().value, 0.7);
        assert!((score_avg(&toks(&[-0.2, -0.4])).unwrap().value - 0.3).abs() < 1e-15);
        assert!((score_gnll(&toks(&[-0.1, -0.2])).unwrap().value - 0.3).abs() < 1e-15);
        assert!((score_gnll(&toks(&[0.5f64.ln()])).unwrap().value - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(score_len(&[]).value, 0.0);
        assert_eq!(score_len(&toks(&[0.0; 7])).value, 7.0);
        assert_eq!(score_max(&[]), Err(ScoreError::EmptySequence));
        assert_eq!(score_avg(&[]), Err(ScoreError::EmptySequence));
        assert_eq!(score_gnll(&[]), Err(ScoreError::EmptySequence));
    }

    #[test]
    fn exm_vs_ast_on_permuted_arguments() {
        let s = [sample("[f(a=1,b=2)]", -0.1), sample("[f(b=2,a=1)]", -0.1)];
        assert_eq!(cluster_samples(&s, ClusterMethod::Ast, CallFormat::Pycall).unwrap().k, 1);
        assert_eq!(cluster_samples(&s, ClusterMethod::Exm, CallFormat::Pycall).unwrap().k, 2);
        assert_eq!(cluster_samples(&[], ClusterMethod::Exm, CallFormat::Pycall), Err(ScoreError::EmptySampleSet));
    }

    #[test]
    fn unparsed_samples_cluster_by_text() {
        let s = [sample("no", -0.1), sample("no", -0.2), sample("[f(", -0.1), sample("nope", -0.1)];
        let c = cluster_samples(&s, ClusterMethod::Ast, CallFormat::Pycall).unwrap();
        assert_eq!(c.cluster_of, vec![0, 0, 1, 2]);
    }

    #[test]
    fn semantic_entropy_hand_values() {
        // Sequence probabilities 0.2 / 0.2 / 0.6; the first two share a cluster.
        let s = [sample("a", 0.2f64.ln()), sample("b", 0.2f64.ln()), sample("c", 0.6f64.ln())];
        let c = ClusterAssignment { cluster_of: vec![0, 0, 1], k: 2, method: ClusterMethod::Exm };
        let expected = -(0.4f64 * 0.4f64.ln() + 0.6 * 0.6f64.ln());
        let se = score_se(&s, &c, SeOptions::default()).unwrap();
        assert!((se.value - expected).abs() < 1e-12);
        assert!((se.value - 0.6730).abs() < 1e-4);
        let one = ClusterAssignment { cluster_of: vec![0, 0, 0], k: 1, method: ClusterMethod::Ast };
        assert_eq!(score_se(&s, &one, SeOptions::default()).unwrap().value, 0.0);
    }

    #[test]
    fn discrete_entropy_hand_values() {
        let mk = |sizes: &[usize]| {
            let cluster_of = sizes.iter().enumerate().flat_map(|(k, &n)| std::iter::repeat_n(k, n)).collect();
            ClusterAssignment { cluster_of, k: sizes.len(), method: ClusterMethod::Exm }
        };
        assert!((score_dse(&mk(&[5, 5])).unwrap().value - 2f64.ln()).abs() < 1e-15);
        assert_eq!(score_dse(&mk(&[10])).unwrap().value, 0.0);
        let h: f64 = [0.1f64, 0.2, 0.3, 0.4].iter().map(|p| -p * p.ln()).sum();
        assert!((score_dse(&mk(&[1, 2, 3, 4])).unwrap().value - h).abs() < 1e-12);
        assert!((h - 1.2799).abs() < 1e-4);
    }

    #[test]
    fn predictive_entropy() {
        let zero = TokenizedSequence::from_tokens(toks(&[0.0, 0.0]), 1.0);
        assert_eq!(score_pe(&[zero]).unwrap().value, 0.0);
        let one = TokenizedSequence::from_tokens(toks(&[-0.2, -0.4]), 1.0);
        assert!((score_pe(&[one]).unwrap().value - 0.3).abs() < 1e-15);
        assert_eq!(score_pe(&[]), Err(ScoreError::EmptySampleSet));
        let empty = TokenizedSequence::from_tokens(vec![], 1.0);
        assert_eq!(score_pe(&[empty]), Err(ScoreError::EmptySequence));
    }

    #[test]
    fn ptrue_orientation() {
        assert_eq!(score_ptrue(1.0).unwrap().value, 0.0);
        assert_eq!(score_ptrue(0.0).unwrap().value, 1.0);
        assert!((score_ptrue(0.73).unwrap().value - 0.27).abs() < 1e-15);
        assert_eq!(score_ptrue(1.2), Err(ScoreError::OutOfRange(1.2)));
        assert!(score_ptrue(f64::NAN).is_err());
    }

    #[test]
    fn subsample_contract() {
        let s: Vec<_> = (0..10).map(|i| sample(&format!("s{i}"), -0.1)).collect();
        assert_eq!(subsample(&s, 10, 3).unwrap(), s);
        let a = subsample(&s, 1, 42).unwrap();
        assert_eq!(a, subsample(&s, 1, 42).unwrap());
        assert_eq!(a.len(), 1);
        let four = subsample(&s, 4, 9).unwrap();
        let pos: Vec<usize> = four.iter().map(|x| s.iter().position(|y| y == x).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert!(matches!(subsample(&s, 11, 0), Err(ScoreError::TooFewSamples { .. })));
        assert!(matches!(subsample(&s, 0, 0), Err(ScoreError::TooFewSamples { .. })));
    }
}
