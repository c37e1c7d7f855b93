//! Shared data model: tokenized outputs, ground truth, records and scores.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ast::Value;

/// One generated token with its natural-log conditional probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub logprob: f64,
}

impl Token {
    pub fn new(text: impl Into<String>, logprob: f64) -> Self {
        Token { text: text.into(), logprob }
    }

    /// Negative log-likelihood, `-logprob`.
    pub fn nll(&self) -> f64 {
        -self.logprob
    }
}

/// A decoded output with its tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenizedSequence {
    pub text: String,
    pub tokens: Vec<Token>,
    #[serde(default)]
    pub temperature: f64,
}

impl TokenizedSequence {
    /// Builds a sequence whose text is the concatenation of the tokens.
    pub fn from_tokens(tokens: Vec<Token>, temperature: f64) -> Self {
        let text = tokens.iter().map(|t| t.text.as_str()).collect();
        TokenizedSequence { text, tokens, temperature }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn total_logprob(&self) -> f64 {
        self.tokens.iter().map(|t| t.logprob).sum()
    }

    pub fn concatenation_matches(&self) -> bool {
        let mut rest = self.text.as_str();
        for t in &self.tokens {
            match rest.strip_prefix(t.text.as_str()) {
                Some(r) => rest = r,
                None => return false,
            }
        }
        rest.is_empty()
    }
}

/// Benchmark task split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Simple,
    Multiple,
    Parallel,
    ParallelMultiple,
    Irrelevance,
}

impl Split {
    pub const ALL: [Split; 5] =
        [Split::Simple, Split::Multiple, Split::Parallel, Split::ParallelMultiple, Split::Irrelevance];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Simple => "simple",
            Split::Multiple => "multiple",
            Split::Parallel => "parallel",
            Split::ParallelMultiple => "parallel_multiple",
            Split::Irrelevance => "irrelevance",
        }
    }

    /// Display name used in report tables.
    pub fn title(self) -> &'static str {
        match self {
            Split::Simple => "Simple",
            Split::Multiple => "Multiple",
            Split::Parallel => "Parallel",
            Split::ParallelMultiple => "Parallel-Multiple",
            Split::Irrelevance => "Irrelevance",
        }
    }

    /// Infers the split from an id such as `parallel_multiple_12`.
    pub fn from_id(id: &str) -> Option<Split> {
        // Longest prefix first: `parallel_multiple_` before `parallel_`.
        [Split::ParallelMultiple, Split::Parallel, Split::Multiple, Split::Simple, Split::Irrelevance].into_iter().find(
            |s| id.strip_prefix(s.as_str()).and_then(|rest| rest.strip_prefix('_')).is_some_and(|n| !n.is_empty()),
        )
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        Split::ALL.into_iter().find(|sp| sp.as_str() == norm).ok_or_else(|| format!("unknown split `{s}`"))
    }
}

/// One expected call: allowed values per parameter and the required set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedCall {
    pub name: String,
    pub params: BTreeMap<String, Vec<Value>>,
    #[serde(default)]
    pub required: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct GroundTruth {
    #[serde(default)]
    pub expected_calls: Vec<ExpectedCall>,
    #[serde(default)]
    pub expects_refusal: bool,
}

impl GroundTruth {
    pub fn refusal() -> Self {
        GroundTruth { expected_calls: Vec::new(), expects_refusal: true }
    }
}

/// One benchmark request with the model's greedy output and samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub id: String,
    pub split: Split,
    pub model: String,
    pub greedy: TokenizedSequence,
    #[serde(default)]
    pub samples: Vec<TokenizedSequence>,
    pub ground_truth: GroundTruth,
}

impl Record {
    /// Shared sample temperature, if there are samples and they agree.
    pub fn sample_temperature(&self) -> Option<f64> {
        let first = self.samples.first()?.temperature;
        self.samples.iter().all(|s| s.temperature == first).then_some(first)
    }
}

/// Uncertainty estimation methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "MAX")]
    Max,
    #[serde(rename = "AVG")]
    Avg,
    #[serde(rename = "GNLL")]
    Gnll,
    #[serde(rename = "LEN")]
    Len,
    #[serde(rename = "PE")]
    Pe,
    #[serde(rename = "SE_EXM")]
    SeExm,
    #[serde(rename = "DSE_EXM")]
    DseExm,
    #[serde(rename = "SE_AST")]
    SeAst,
    #[serde(rename = "DSE_AST")]
    DseAst,
    #[serde(rename = "PTRUE")]
    PTrue,
    #[serde(rename = "MAX_SMT")]
    MaxSmt,
    #[serde(rename = "AVG_SMT")]
    AvgSmt,
    #[serde(rename = "GNLL_SMT")]
    GnllSmt,
}

impl Method {
    pub const ALL: [Method; 13] = [
        Method::Max,
        Method::Avg,
        Method::Gnll,
        Method::Len,
        Method::Pe,
        Method::SeExm,
        Method::DseExm,
        Method::SeAst,
        Method::DseAst,
        Method::PTrue,
        Method::MaxSmt,
        Method::AvgSmt,
        Method::GnllSmt,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Max => "MAX",
            Method::Avg => "AVG",
            Method::Gnll => "GNLL",
            Method::Len => "LEN",
            Method::Pe => "PE",
            Method::SeExm => "SE_EXM",
            Method::DseExm => "DSE_EXM",
            Method::SeAst => "SE_AST",
            Method::DseAst => "DSE_AST",
            Method::PTrue => "PTRUE",
            Method::MaxSmt => "MAX_SMT",
            Method::AvgSmt => "AVG_SMT",
            Method::GnllSmt => "GNLL_SMT",
        }
    }

    /// Multi-sample methods need the sampled outputs.
    pub fn needs_samples(self) -> bool {
        matches!(self, Method::Pe | Method::SeExm | Method::DseExm | Method::SeAst | Method::DseAst | Method::PTrue)
    }

    /// Maps an uncertainty score to a confidence in [0, 1] for calibration,
    /// or `None` for methods that do not produce probabilities.
    pub fn confidence(self, uncertainty: f64) -> Option<f64> {
        match self {
            Method::Max | Method::Avg | Method::Gnll | Method::MaxSmt | Method::AvgSmt | Method::GnllSmt => {
                Some((-uncertainty).exp().clamp(0.0, 1.0))
            }
            Method::PTrue => Some((1.0 - uncertainty).clamp(0.0, 1.0)),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_uppercase().replace(['-', '(', ')'], "");
        let norm = match norm.as_str() {
            "GNLL" => "GNLL".to_string(),
            "P_TRUE" | "PTRUE" => "PTRUE".to_string(),
            _ => norm,
        };
        Method::ALL.into_iter().find(|m| m.as_str() == norm).ok_or_else(|| format!("unknown method `{s}`"))
    }
}

/// A named uncertainty value; larger means more uncertain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyScore {
    pub method: Method,
    pub value: f64,
}

/// Which sequence of a record a violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeqRef {
    Greedy,
    Sample(usize),
}

impl fmt::Display for SeqRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqRef::Greedy => f.write_str("greedy"),
            SeqRef::Sample(i) => write!(f, "samples[{i}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyId,
    ConcatMismatch(SeqRef),
    EmptyTokenText { seq: SeqRef, index: usize },
    NonFiniteLogprob { seq: SeqRef, index: usize },
    PositiveLogprob { seq: SeqRef, index: usize, logprob: f64 },
    GreedyTemperatureNonZero(f64),
    NonPositiveSampleTemperature { index: usize, temperature: f64 },
    MixedSampleTemperature,
    RefusalWithExpectedCalls,
    RequiredParamNotListed { call: String, param: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyId => f.write_str("record id is empty"),
            Violation::ConcatMismatch(s) => write!(f, "{s}: token texts do not concatenate to the text"),
            Violation::EmptyTokenText { seq, index } => write!(f, "{seq}: token {index} has empty text"),
            Violation::NonFiniteLogprob { seq, index } => write!(f, "{seq}: token {index} has a non-finite logprob"),
            Violation::PositiveLogprob { seq, index, logprob } => {
                write!(f, "{seq}: token {index} has logprob {logprob} > 0")
            }
            Violation::GreedyTemperatureNonZero(t) => write!(f, "greedy temperature is {t}, expected 0"),
            Violation::NonPositiveSampleTemperature { index, temperature } => {
                write!(f, "samples[{index}] temperature {temperature} is not > 0")
            }
            Violation::MixedSampleTemperature => f.write_str("samples use different temperatures"),
            Violation::RefusalWithExpectedCalls => f.write_str("expects_refusal is set but expected calls are listed"),
            Violation::RequiredParamNotListed { call, param } => {
                write!(f, "{call}: required parameter `{param}` has no allowed values")
            }
        }
    }
}

fn check_sequence(seq: &TokenizedSequence, which: SeqRef, out: &mut Vec<Violation>) {
    for (index, t) in seq.tokens.iter().enumerate() {
        if t.text.is_empty() {
            out.push(Violation::EmptyTokenText { seq: which, index });
        }
        if !t.logprob.is_finite() {
            out.push(Violation::NonFiniteLogprob { seq: which, index });
        } else if t.logprob > 0.0 {
            out.push(Violation::PositiveLogprob { seq: which, index, logprob: t.logprob });
        }
    }
    if !seq.concatenation_matches() {
        out.push(Violation::ConcatMismatch(which));
    }
}

/// Returns every invariant the record breaks; empty means valid.
pub fn validate_record(record: &Record) -> Vec<Violation> {
    let mut out = Vec::new();
    if record.id.is_empty() {
        out.push(Violation::EmptyId);
    }
    check_sequence(&record.greedy, SeqRef::Greedy, &mut out);
    if record.greedy.temperature != 0.0 {
        out.push(Violation::GreedyTemperatureNonZero(record.greedy.temperature));
    }
    for (i, s) in record.samples.iter().enumerate() {
        check_sequence(s, SeqRef::Sample(i), &mut out);
        if !(s.temperature > 0.0) {
            out.push(Violation::NonPositiveSampleTemperature { index: i, temperature: s.temperature });
        }
    }
    if !record.samples.is_empty() && record.sample_temperature().is_none() {
        out.push(Violation::MixedSampleTemperature);
    }
    let gt = &record.ground_truth;
    if gt.expects_refusal && !gt.expected_calls.is_empty() {
        out.push(Violation::RefusalWithExpectedCalls);
    }
    for call in &gt.expected_calls {
        for param in &call.required {
            if !call.params.contains_key(param) {
                out.push(Violation::RequiredParamNotListed { call: call.name.clone(), param: param.clone() });
            }
        }
    }
    out
}

/// Ids that occur more than once, in first-repeat order.
pub fn duplicate_ids(records: &[Record]) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut dups = Vec::new();
    for r in records {
        if !seen.insert(r.id.as_str()) && !dups.contains(&r.id) {
            dups.push(r.id.clone());
        }
    }
    dups
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(parts: &[(&str, f64)], temperature: f64) -> TokenizedSequence {
        TokenizedSequence::from_tokens(parts.iter().map(|(t, l)| Token::new(*t, *l)).collect(), temperature)
    }

    fn record() -> Record {
        let out = [("[", 0.0), ("f", -0.1), ("(a=1)]", -0.2)];
        Record {
            id: "simple_0".into(),
            split: Split::Simple,
            model: "m".into(),
            greedy: seq(&out, 0.0),
            samples: (0..10).map(|_| seq(&out, 1.0)).collect(),
            ground_truth: GroundTruth::default(),
        }
    }

    #[test]
    fn well_formed_record_is_valid() {
        assert_eq!(validate_record(&record()), vec![]);
    }

    #[test]
    fn concatenation_mismatch() {
        let mut r = record();
        r.greedy.text = "[g(a=1)]".into();
        assert_eq!(validate_record(&r), vec![Violation::ConcatMismatch(SeqRef::Greedy)]);
    }

    #[test]
    fn mixed_sample_temperatures() {
        let mut r = record();
        r.samples[3].temperature = 1.5;
        assert_eq!(validate_record(&r), vec![Violation::MixedSampleTemperature]);
    }

    #[test]
    fn other_violations() {
        let mut r = record();
        r.greedy.temperature = 0.7;
        r.greedy.tokens[1].logprob = 0.2;
        r.ground_truth.expects_refusal = true;
        r.ground_truth.expected_calls.push(ExpectedCall {
            name: "f".into(),
            params: BTreeMap::new(),
            required: ["a".to_string()].into(),
        });
        let v = validate_record(&r);
        assert!(v.contains(&Violation::GreedyTemperatureNonZero(0.7)));
        assert!(v.iter().any(|x| matches!(x, Violation::PositiveLogprob { index: 1, .. })));
        assert!(v.contains(&Violation::RefusalWithExpectedCalls));
        assert!(v.iter().any(|x| matches!(x, Violation::RequiredParamNotListed { .. })));
    }

    #[test]
    fn empty_refusal_sequence_is_legal() {
        let mut r = record();
        r.greedy = TokenizedSequence::from_tokens(vec![], 0.0);
        r.samples.clear();
        assert!(validate_record(&r).is_empty());
    }

    #[test]
    fn split_from_id() {
        assert_eq!(Split::from_id("parallel_multiple_3"), Some(Split::ParallelMultiple));
        assert_eq!(Split::from_id("parallel_3"), Some(Split::Parallel));
        assert_eq!(Split::from_id("simple_0"), Some(Split::Simple));
        assert_eq!(Split::from_id("irrelevance_9"), Some(Split::Irrelevance));
        assert_eq!(Split::from_id("java_1"), None);
        assert_eq!(Split::from_id("simple_"), None);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(json, format!("\"{}\"", m.as_str()));
        }
        assert_eq!("G-NLL".parse::<Method>().unwrap(), Method::Gnll);
        assert_eq!("P(true)".parse::<Method>().unwrap(), Method::PTrue);
    }
}
