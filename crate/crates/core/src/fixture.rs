//! Deterministic synthetic records for tests and examples.
//!
//! Greedy outputs are correct for an exact, requested number of records.
//! With `informative` set, incorrect and undecodable greedy outputs carry one
//! low-probability token while correct ones stay near probability 1, so
//! G-NLL separates the classes perfectly.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{Arg, Call, CallFormat, FunctionCallAst, Value};
use crate::model::{ExpectedCall, GroundTruth, Record, Split, Token, TokenizedSequence};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FixtureError {
    #[error("invalid fixture spec: {0}")]
    InvalidSpec(String),
}

/// How the `j` samples of a record spread over distinct ASTs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClusterProfile {
    /// `k` clusters with sizes as equal as possible.
    Uniform(usize),
    /// Explicit cluster sizes; must sum to `j`.
    Sizes(Vec<usize>),
}

impl ClusterProfile {
    fn sizes(&self, j: usize) -> Result<Vec<usize>, FixtureError> {
        match self {
            ClusterProfile::Uniform(k) => {
                if *k == 0 || *k > j {
                    return Err(FixtureError::InvalidSpec(format!("cannot spread {j} samples over {k} clusters")));
                }
                Ok((0..*k).map(|i| j / k + usize::from(i < j % k)).collect())
            }
            ClusterProfile::Sizes(s) => {
                if s.iter().sum::<usize>() != j || s.contains(&0) {
                    return Err(FixtureError::InvalidSpec(format!("cluster sizes {s:?} do not partition {j} samples")));
                }
                Ok(s.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub n_records: usize,
    /// Fraction of decodable records whose greedy output is correct.
    pub accuracy: f64,
    pub j: usize,
    pub clusters: ClusterProfile,
    pub seed: u64,
    /// Answerable records whose greedy output is made undecodable.
    pub decode_errors: usize,
    pub split: Split,
    pub format: CallFormat,
    pub model: String,
    pub informative: bool,
    pub sample_temperature: f64,
}

impl FixtureSpec {
    pub fn new(n_records: usize, accuracy: f64, j: usize, clusters: ClusterProfile, seed: u64) -> Self {
        FixtureSpec {
            n_records,
            accuracy,
            j,
            clusters,
            seed,
            decode_errors: 0,
            split: Split::Simple,
            format: CallFormat::Pycall,
            model: "synthetic".into(),
            informative: true,
            sample_temperature: 1.0,
        }
    }

    /// Number of records with a correct greedy output.
    pub fn correct_count(&self) -> usize {
        (self.accuracy * (self.n_records - self.decode_errors) as f64).round() as usize
    }
}

/// Splits text into plausible sub-word tokens: words of at most six
/// letters (a leading space sticks to the word), single digits, and
/// punctuation runs of at most three characters.
pub fn pseudo_tokenize(text: &str) -> Vec<String> {
    #[derive(PartialEq, Clone, Copy)]
    enum Class {
        Alpha,
        Digit,
        Punct,
    }
    let class = |c: char| {
        if c.is_alphabetic() || c == '_' {
            Class::Alpha
        } else if c.is_ascii_digit() {
            Class::Digit
        } else {
            Class::Punct
        }
    };
    let mut out: Vec<String> = Vec::new();
    let mut cur = String::new();
    let mut cur_class: Option<Class> = None;
    let mut cur_len = 0;
    for c in text.chars() {
        let cl = class(c);
        let limit = match cl {
            Class::Alpha => 6,
            Class::Digit => 1,
            Class::Punct => 3,
        };
        let leading_space = cur == " ";
        let continues = cur_class == Some(cl) && cur_len < limit && c != ' ';
        if leading_space && cl != Class::Punct {
            cur.push(c);
            cur_class = Some(cl);
            cur_len = 1;
            continue;
        }
        if !continues || c == ' ' {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            cur_len = 0;
            cur_class = if c == ' ' { None } else { Some(cl) };
        }
        cur.push(c);
        cur_len += 1;
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

struct Template {
    name: &'static str,
    params: &'static [(&'static str, Kind)],
}

#[derive(Clone, Copy)]
enum Kind {
    Int,
    Str(&'static [&'static str]),
    StrList(&'static [&'static str]),
}

const CITIES: &[&str] = &["Paris", "Tokyo", "Lagos", "Lima", "Oslo", "Hanoi"];
const ARTISTS: &[&str] = &["Taylor Swift", "Maroon 5", "Auguste Rodin", "Nina Simone"];
const EVENTS: &[&str] = &["War", "Economy", "Revolutions", "Diplomacy"];

const TEMPLATES: &[Template] = &[
    Template { name: "get_weather", params: &[("city", Kind::Str(CITIES)), ("days", Kind::Int)] },
    Template { name: "calculate_triangle_area", params: &[("base", Kind::Int), ("height", Kind::Int)] },
    Template { name: "spotify.play", params: &[("artist", Kind::Str(ARTISTS)), ("duration", Kind::Int)] },
    Template {
        name: "history.get_key_events",
        params: &[
            ("country", Kind::Str(CITIES)),
            ("start_year", Kind::Int),
            ("end_year", Kind::Int),
            ("event_type", Kind::StrList(EVENTS)),
        ],
    },
];

fn draw_value(kind: Kind, rng: &mut ChaCha8Rng) -> Value {
    match kind {
        Kind::Int => Value::Int(rng.random_range(1..2000)),
        Kind::Str(pool) => Value::Str(pool[rng.random_range(0..pool.len())].to_string()),
        Kind::StrList(pool) => {
            let n = rng.random_range(1..=2);
            let mut items: Vec<&str> = pool.to_vec();
            items.shuffle(rng);
            Value::List(items[..n].iter().map(|s| Value::Str(s.to_string())).collect())
        }
    }
}

/// A different value of the same kind, `shift` steps away.
fn perturb(v: &Value, shift: i64) -> Value {
    match v {
        Value::Int(i) => Value::Int(i + shift),
        Value::Str(s) => Value::Str(format!("{s} {shift}")),
        Value::List(items) => {
            let mut items = items.clone();
            items.push(Value::Str(format!("Other {shift}")));
            Value::List(items)
        }
        other => other.clone(),
    }
}

fn draw_calls(split: Split, rng: &mut ChaCha8Rng) -> Vec<Call> {
    let n_calls = match split {
        Split::Parallel | Split::ParallelMultiple => 2,
        _ => 1,
    };
    let template = &TEMPLATES[rng.random_range(0..TEMPLATES.len())];
    (0..n_calls)
        .map(|c| {
            let t = if split == Split::ParallelMultiple && c == 1 {
                &TEMPLATES[rng.random_range(0..TEMPLATES.len())]
            } else {
                template
            };
            Call {
                name: t.name.to_string(),
                args: t.params.iter().map(|(n, k)| Arg { name: n.to_string(), value: draw_value(*k, rng) }).collect(),
                spans: Default::default(),
            }
        })
        .collect()
}

fn ground_truth(calls: &[Call]) -> GroundTruth {
    GroundTruth {
        expected_calls: calls
            .iter()
            .map(|c| ExpectedCall {
                name: c.name.clone(),
                params: c.args.iter().map(|a| (a.name.clone(), vec![a.value.clone()])).collect::<BTreeMap<_, _>>(),
                required: c.args.iter().map(|a| a.name.clone()).collect::<BTreeSet<_>>(),
            })
            .collect(),
        expects_refusal: false,
    }
}

fn render(calls: &[Call], format: CallFormat) -> String {
    let ast = FunctionCallAst::new(calls.to_vec());
    match format {
        CallFormat::Pycall => ast.to_pycall(),
        CallFormat::Json => ast.to_json_calls(),
    }
}

fn tokenize(
    text: &str,
    temperature: f64,
    rng: &mut ChaCha8Rng,
    base_nll: f64,
    spike: Option<f64>,
) -> TokenizedSequence {
    let pieces = pseudo_tokenize(text);
    let spike_at = spike.map(|_| rng.random_range(0..pieces.len().max(1)));
    let tokens = pieces
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut nll = if base_nll > 0.0 { rng.random_range(0.0..base_nll) } else { 0.0 };
            if spike_at == Some(i) {
                nll += spike.unwrap_or(0.0);
            }
            Token::new(p, -nll)
        })
        .collect();
    TokenizedSequence::from_tokens(tokens, temperature)
}

const REFUSAL: &str = "I cannot help with that request using the available functions.";

/// Generates `spec.n_records` records; identical specs give identical output.
pub fn generate_synthetic_fixture(spec: &FixtureSpec) -> Result<Vec<Record>, FixtureError> {
    if !(0.0..=1.0).contains(&spec.accuracy) {
        return Err(FixtureError::InvalidSpec(format!("accuracy {} outside [0, 1]", spec.accuracy)));
    }
    if spec.decode_errors > spec.n_records {
        return Err(FixtureError::InvalidSpec("more decode errors than records".into()));
    }
    if spec.decode_errors > 0 && spec.split == Split::Irrelevance {
        return Err(FixtureError::InvalidSpec("decode errors only apply to answerable splits".into()));
    }
    if !(spec.sample_temperature > 0.0) && spec.j > 0 {
        return Err(FixtureError::InvalidSpec("sample temperature must be positive".into()));
    }
    let sizes = if spec.j == 0 { Vec::new() } else { spec.clusters.sizes(spec.j)? };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    #[derive(Clone, Copy, PartialEq)]
    enum Outcome {
        Correct,
        Incorrect,
        Undecodable,
    }
    let n_correct = spec.correct_count();
    let mut outcomes: Vec<Outcome> = std::iter::repeat_n(Outcome::Undecodable, spec.decode_errors)
        .chain(std::iter::repeat_n(Outcome::Correct, n_correct))
        .chain(std::iter::repeat_n(Outcome::Incorrect, spec.n_records - spec.decode_errors - n_correct))
        .collect();
    outcomes.shuffle(&mut rng);

    let (base, noise_spike) = if spec.informative { (0.01, true) } else { (0.5, false) };
    let mut records = Vec::with_capacity(spec.n_records);
    for (i, outcome) in outcomes.into_iter().enumerate() {
        let truth = draw_calls(spec.split, &mut rng);
        let refusal = spec.split == Split::Irrelevance;
        let wrong_calls = {
            let mut w = truth.clone();
            let arg = rng.random_range(0..w[0].args.len());
            w[0].args[arg].value = perturb(&w[0].args[arg].value, 1);
            w
        };
        let greedy_text = match (refusal, outcome) {
            (true, Outcome::Correct) => REFUSAL.to_string(),
            (true, _) => render(&truth, spec.format),
            (false, Outcome::Correct) => render(&truth, spec.format),
            (false, Outcome::Incorrect) => render(&wrong_calls, spec.format),
            (false, Outcome::Undecodable) => {
                let mut t = render(&truth, spec.format);
                t.pop();
                t
            }
        };
        let spike = (noise_spike && outcome != Outcome::Correct).then(|| rng.random_range(1.0..3.0));
        let greedy = tokenize(&greedy_text, 0.0, &mut rng, base, spike);

        let greedy_calls = match (refusal, outcome) {
            (true, Outcome::Correct) => None,
            (false, Outcome::Incorrect) => Some(wrong_calls),
            _ => Some(truth.clone()),
        };
        let mut samples = Vec::with_capacity(spec.j);
        for (k, &size) in sizes.iter().enumerate() {
            for _ in 0..size {
                let text = match (&greedy_calls, k) {
                    (None, 0) => REFUSAL.to_string(),
                    (None, _) => {
                        let mut c = truth.clone();
                        c[0].args[0].value = perturb(&c[0].args[0].value, k as i64);
                        render(&c, spec.format)
                    }
                    (Some(calls), _) => {
                        let mut c = calls.clone();
                        if k > 0 {
                            let last = c[0].args.len() - 1;
                            c[0].args[last].value = perturb(&c[0].args[last].value, 100 + k as i64);
                        }
                        for call in &mut c {
                            call.args.shuffle(&mut rng);
                        }
                        render(&c, spec.format)
                    }
                };
                samples.push(tokenize(&text, spec.sample_temperature, &mut rng, 0.3, None));
            }
        }
        records.push(Record {
            id: format!("{}_{i}", spec.split.as_str()),
            split: spec.split,
            model: spec.model.clone(),
            greedy,
            samples,
            ground_truth: if refusal { GroundTruth::refusal() } else { ground_truth(&truth) },
        });
    }
    Ok(records)
}
