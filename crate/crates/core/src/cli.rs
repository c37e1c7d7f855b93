//! File ingestion and the score / evaluate / gate workflow behind the `fcuq`
//! binary. Every output is ordered by record id and depends only on the
//! inputs and the configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::CallFormat;
use crate::estimators::{
    cluster_samples, score_dse, score_len, score_pe, score_ptrue, score_se, score_smt_variant, subsample,
    BaseAggregator, ClusterMethod, ScoreError, SeOptions,
};
use crate::evaluation::{
    evaluate, gate, label_record, threshold_for_coverage, Decision, EvalConfig, EvalError, EvalReport, ExclusionPolicy,
    Recipe, ScoredRecord,
};
use crate::model::{validate_record, GroundTruth, Method, Record, Split, TokenizedSequence};
use crate::parser::parse;
use crate::ptrue::{build_ptrue_prompt, FewShotBundle, PromptContext};

/// A malformed input line (1-based).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct SchemaError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {} schema error(s), first: {}", .errors.len(), .errors[0])]
    Schema { path: PathBuf, errors: Vec<SchemaError> },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("record {id}: {source}")]
    Score { id: String, source: ScoreError },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl CliError {
    pub fn is_schema(&self) -> bool {
        matches!(self, CliError::Schema { .. })
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Which greedy tokens the single-sample aggregators see.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenFilter {
    #[default]
    Full,
    Smt,
}

impl FromStr for TokenFilter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(TokenFilter::Full),
            "smt" => Ok(TokenFilter::Smt),
            _ => Err(format!("unknown token filter `{s}`")),
        }
    }
}

/// A method as written on the command line. The generic names `SE` and
/// `DSE` take the configured clustering; `MAX`, `AVG` and `GNLL` take the
/// configured token filter. Fully qualified names are kept as given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MethodSpec {
    Exact(Method),
    Se,
    Dse,
}

impl FromStr for MethodSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "SE" => Ok(MethodSpec::Se),
            "DSE" => Ok(MethodSpec::Dse),
            _ => s.parse().map(MethodSpec::Exact),
        }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodSpec::Exact(m) => write!(f, "{m}"),
            MethodSpec::Se => f.write_str("SE"),
            MethodSpec::Dse => f.write_str("DSE"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub format: CallFormat,
    pub methods: Vec<MethodSpec>,
    pub clustering: ClusterMethod,
    pub token_filter: TokenFilter,
    /// Samples per record; records with more are subsampled with `seed`.
    /// `None` uses every sample.
    pub j: Option<usize>,
    pub seed: Option<u64>,
    pub policy: ExclusionPolicy,
    pub n_boot: usize,
    /// Empty means every standard recipe the data supports.
    pub recipes: Vec<Recipe>,
    pub se_length_normalized: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            format: CallFormat::Pycall,
            methods: Vec::new(),
            clustering: ClusterMethod::Exm,
            token_filter: TokenFilter::Full,
            j: Some(10),
            seed: None,
            policy: ExclusionPolicy::default(),
            n_boot: 1000,
            recipes: Vec::new(),
            se_length_normalized: false,
        }
    }
}

impl RunConfig {
    /// Concrete methods, deduplicated in first-seen order. An empty list
    /// means every method except PTRUE, which needs a sidecar, and except
    /// the multi-sample ones when J = 0.
    pub fn resolved_methods(&self) -> Vec<Method> {
        let specs: Vec<MethodSpec> = if self.methods.is_empty() {
            Method::ALL
                .into_iter()
                .filter(|m| *m != Method::PTrue && !(self.j == Some(0) && m.needs_samples()))
                .map(MethodSpec::Exact)
                .collect()
        } else {
            self.methods.clone()
        };
        let mut out = Vec::new();
        for spec in specs {
            let m = match (spec, self.clustering, self.token_filter) {
                (MethodSpec::Se, ClusterMethod::Exm, _) => Method::SeExm,
                (MethodSpec::Se, ClusterMethod::Ast, _) => Method::SeAst,
                (MethodSpec::Dse, ClusterMethod::Exm, _) => Method::DseExm,
                (MethodSpec::Dse, ClusterMethod::Ast, _) => Method::DseAst,
                (MethodSpec::Exact(m), _, TokenFilter::Smt) if self.methods.is_empty() => m,
                (MethodSpec::Exact(Method::Max), _, TokenFilter::Smt) => Method::MaxSmt,
                (MethodSpec::Exact(Method::Avg), _, TokenFilter::Smt) => Method::AvgSmt,
                (MethodSpec::Exact(Method::Gnll), _, TokenFilter::Smt) => Method::GnllSmt,
                (MethodSpec::Exact(m), _, _) => m,
            };
            if !out.contains(&m) {
                out.push(m);
            }
        }
        out
    }

    pub fn check(&self) -> Result<(), CliError> {
        if self.j == Some(0) {
            if let Some(m) = self.resolved_methods().into_iter().find(|m| m.needs_samples()) {
                return Err(CliError::Config(format!("{m} needs samples but J = 0")));
            }
        }
        Ok(())
    }

    fn eval_config(&self, methods: Vec<Method>) -> Result<EvalConfig, CliError> {
        let seed = match (self.seed, self.n_boot) {
            (Some(s), _) => s,
            (None, 0) => 0,
            (None, _) => return Err(CliError::Config("--seed is required for bootstrap standard errors".into())),
        };
        Ok(EvalConfig {
            recipes: self.recipes.clone(),
            methods,
            policy: self.policy,
            n_boot: self.n_boot,
            seed,
            risk_coverage: true,
            calibration: true,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub role: String,
    pub content: String,
}

/// A benchmark request: conversation turns and the callable functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    #[serde(skip)]
    pub split: Option<Split>,
    pub question: Vec<Vec<Message>>,
    pub function: Vec<serde_json::Value>,
}

impl Task {
    /// Content of the last user turn.
    pub fn user_question(&self) -> &str {
        self.question.iter().flatten().rev().find(|m| m.role == "user").map_or("", |m| m.content.as_str())
    }

    /// The function list as compact JSON.
    pub fn functions_json(&self) -> String {
        serde_json::to_string(&self.function).expect("JSON values serialize")
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Reads task definitions from JSON lines, a JSON array, or concatenated
/// (possibly pretty-printed) objects. The split comes from the id prefix.
pub fn ingest_tasks(path: &Path) -> Result<BTreeMap<Split, Vec<Task>>, CliError> {
    let text = read(path)?;
    let schema = |line, message: String| CliError::Schema {
        path: path.to_path_buf(),
        errors: vec![SchemaError { line, message }],
    };
    let mut out: BTreeMap<Split, Vec<Task>> = BTreeMap::new();
    let mut stream = serde_json::Deserializer::from_str(&text).into_iter::<serde_json::Value>();
    loop {
        let start = stream.byte_offset();
        let value = match stream.next() {
            None => break,
            Some(Ok(v)) => v,
            Some(Err(e)) => return Err(schema(e.line(), e.to_string())),
        };
        let skipped = text[start..].len() - text[start..].trim_start().len();
        let line = line_of(&text, start + skipped);
        let items = match value {
            serde_json::Value::Array(items) => items,
            other => vec![other],
        };
        for item in items {
            let mut task: Task = serde_json::from_value(item).map_err(|e| schema(line, e.to_string()))?;
            let split = Split::from_id(&task.id)
                .ok_or_else(|| schema(line, format!("cannot infer split from id `{}`", task.id)))?;
            task.split = Some(split);
            out.entry(split).or_default().push(task);
        }
    }
    Ok(out)
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    #[serde(default)]
    split: Option<Split>,
    model: String,
    greedy: TokenizedSequence,
    #[serde(default)]
    samples: Vec<TokenizedSequence>,
    ground_truth: GroundTruth,
}

/// Valid records plus one error per rejected line.
#[derive(Debug, Clone, Default)]
pub struct Ingested {
    pub records: Vec<Record>,
    pub errors: Vec<SchemaError>,
}

/// Parses and validates one record per line. In strict mode any bad line
/// fails the whole file; otherwise bad lines are reported and skipped.
pub fn ingest_outputs(path: &Path, strict: bool) -> Result<Ingested, CliError> {
    let text = read(path)?;
    let mut out = parse_outputs(&text);
    if strict && !out.errors.is_empty() {
        return Err(CliError::Schema { path: path.to_path_buf(), errors: std::mem::take(&mut out.errors) });
    }
    Ok(out)
}

/// [`ingest_outputs`] on in-memory text, lenient.
pub fn parse_outputs(text: &str) -> Ingested {
    let mut out = Ingested::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = i + 1;
        let err = |message: String| SchemaError { line: line_no, message };
        let raw: RawRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                out.errors.push(err(e.to_string()));
                continue;
            }
        };
        let Some(split) = raw.split.or_else(|| Split::from_id(&raw.id)) else {
            out.errors.push(err(format!("cannot infer split from id `{}`", raw.id)));
            continue;
        };
        let record = Record {
            id: raw.id,
            split,
            model: raw.model,
            greedy: raw.greedy,
            samples: raw.samples,
            ground_truth: raw.ground_truth,
        };
        let violations = validate_record(&record);
        if !violations.is_empty() {
            let msg = violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
            out.errors.push(err(msg));
            continue;
        }
        let key = (record.model.as_str(), record.id.as_str());
        if out.records.iter().any(|r| (r.model.as_str(), r.id.as_str()) == key) {
            out.errors.push(err(format!("duplicate id `{}` for model `{}`", record.id, record.model)));
            continue;
        }
        out.records.push(record);
    }
    out
}

/// Serializes records as JSON lines.
pub fn write_outputs(records: &[Record]) -> String {
    records.iter().map(|r| serde_json::to_string(r).expect("records serialize") + "\n").collect()
}

#[derive(Deserialize)]
struct PTrueLine {
    id: String,
    #[serde(alias = "p_a")]
    p_true: f64,
}

/// Reads `{"id": ..., "p_true": ...}` lines: the judge's probability of "A".
pub fn ingest_ptrue(path: &Path) -> Result<BTreeMap<String, f64>, CliError> {
    let text = read(path)?;
    let mut out = BTreeMap::new();
    let mut errors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<PTrueLine>(line) {
            Ok(p) if (0.0..=1.0).contains(&p.p_true) => {
                out.insert(p.id, p.p_true);
            }
            Ok(p) => errors.push(SchemaError { line: i + 1, message: format!("p_true {} outside [0, 1]", p.p_true) }),
            Err(e) => errors.push(SchemaError { line: i + 1, message: e.to_string() }),
        }
    }
    if !errors.is_empty() {
        return Err(CliError::Schema { path: path.to_path_buf(), errors });
    }
    Ok(out)
}

/// Stable per-record stream so subsampling ignores record order.
fn record_seed(seed: u64, id: &str) -> u64 {
    id.bytes().fold(seed ^ 0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Label and every configured score for one record.
pub fn score_record(record: &Record, config: &RunConfig, p_true: Option<f64>) -> Result<ScoredRecord, CliError> {
    let fail = |source| CliError::Score { id: record.id.clone(), source };
    let methods = config.resolved_methods();
    let samples: Vec<TokenizedSequence> = match config.j {
        Some(j) if j > 0 && j < record.samples.len() => {
            let seed = config
                .seed
                .ok_or_else(|| CliError::Config("--seed is required when subsampling to J samples".into()))?;
            subsample(&record.samples, j, record_seed(seed, &record.id)).map_err(fail)?
        }
        Some(j) if j > record.samples.len() && methods.iter().any(|m| m.needs_samples() && *m != Method::PTrue) => {
            return Err(fail(ScoreError::TooFewSamples { requested: j, available: record.samples.len() }));
        }
        _ => record.samples.clone(),
    };
    let outcome = parse(&record.greedy.text, config.format);
    let se_opts = SeOptions { length_normalized: config.se_length_normalized };
    let mut scores = BTreeMap::new();
    for m in methods {
        let greedy = &record.greedy.tokens;
        let value = match m {
            Method::Max => BaseAggregator::Max.apply(greedy),
            Method::Avg => BaseAggregator::Avg.apply(greedy),
            Method::Gnll => BaseAggregator::Gnll.apply(greedy),
            Method::Len => Ok(score_len(greedy).value),
            Method::MaxSmt => score_smt_variant(&record.greedy, &outcome, BaseAggregator::Max).map(|s| s.value),
            Method::AvgSmt => score_smt_variant(&record.greedy, &outcome, BaseAggregator::Avg).map(|s| s.value),
            Method::GnllSmt => score_smt_variant(&record.greedy, &outcome, BaseAggregator::Gnll).map(|s| s.value),
            Method::Pe => score_pe(&samples).map(|s| s.value),
            Method::SeExm | Method::SeAst | Method::DseExm | Method::DseAst => {
                let cm =
                    if matches!(m, Method::SeExm | Method::DseExm) { ClusterMethod::Exm } else { ClusterMethod::Ast };
                cluster_samples(&samples, cm, config.format).and_then(|c| {
                    if matches!(m, Method::SeExm | Method::SeAst) {
                        score_se(&samples, &c, se_opts)
                    } else {
                        score_dse(&c)
                    }
                    .map(|s| s.value)
                })
            }
            Method::PTrue => match p_true {
                Some(p) => score_ptrue(p).map(|s| s.value),
                None => return Err(CliError::Config(format!("no P(true) value for record {}", record.id))),
            },
        };
        scores.insert(m, value.map_err(fail)?);
    }
    Ok(ScoredRecord {
        id: record.id.clone(),
        split: record.split,
        model: record.model.clone(),
        label: label_record(record, config.format),
        scores,
    })
}

fn sort_key(r: &ScoredRecord) -> (&str, &str) {
    (r.model.as_str(), r.id.as_str())
}

/// Scores every record, ordered by (model, id).
pub fn score_records(
    records: &[Record],
    config: &RunConfig,
    p_true: &BTreeMap<String, f64>,
) -> Result<Vec<ScoredRecord>, CliError> {
    config.check()?;
    let mut out =
        records.iter().map(|r| score_record(r, config, p_true.get(&r.id).copied())).collect::<Result<Vec<_>, _>>()?;
    out.sort_by(|a, b| sort_key(a).cmp(&sort_key(b)));
    Ok(out)
}

pub fn write_scores(scores: &[ScoredRecord]) -> String {
    scores.iter().map(|s| serde_json::to_string(s).expect("scores serialize") + "\n").collect()
}

pub fn parse_scores(text: &str) -> Result<Vec<ScoredRecord>, Vec<SchemaError>> {
    let mut out = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(s) => out.push(s),
            Err(e) => errors.push(SchemaError { line: i + 1, message: e.to_string() }),
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(errors)
    }
}

/// Writes the score file for an outputs file. Returns the lenient-mode
/// line errors (always empty in strict mode).
pub fn cmd_score(
    config: &RunConfig,
    outputs: &Path,
    ptrue: Option<&Path>,
    out: &Path,
    strict: bool,
) -> Result<Vec<SchemaError>, CliError> {
    let ingested = ingest_outputs(outputs, strict)?;
    let p = match ptrue {
        Some(path) => ingest_ptrue(path)?,
        None => BTreeMap::new(),
    };
    let scores = score_records(&ingested.records, config, &p)?;
    write(out, &write_scores(&scores))?;
    Ok(ingested.errors)
}

fn looks_like_scores(text: &str) -> bool {
    text.lines()
        .find(|l| !l.trim().is_empty())
        .and_then(|l| serde_json::from_str::<serde_json::Value>(l).ok())
        .is_some_and(|v| v.get("scores").is_some() && v.get("label").is_some())
}

/// Score lines from either a score file or an outputs file, with optional
/// P(true) values merged in.
pub fn load_scores(
    config: &RunConfig,
    input: &Path,
    ptrue: Option<&Path>,
    strict: bool,
) -> Result<(Vec<ScoredRecord>, Vec<SchemaError>), CliError> {
    let text = read(input)?;
    let p = match ptrue {
        Some(path) => ingest_ptrue(path)?,
        None => BTreeMap::new(),
    };
    if looks_like_scores(&text) {
        let mut scores =
            parse_scores(&text).map_err(|errors| CliError::Schema { path: input.to_path_buf(), errors })?;
        for s in &mut scores {
            if let Some(&v) = p.get(&s.id) {
                let u = score_ptrue(v).map_err(|source| CliError::Score { id: s.id.clone(), source })?;
                s.scores.insert(Method::PTrue, u.value);
            }
        }
        scores.sort_by(|a, b| sort_key(a).cmp(&sort_key(b)));
        return Ok((scores, Vec::new()));
    }
    let ingested = ingest_outputs(input, strict)?;
    let mut cfg = config.clone();
    if !p.is_empty() && !cfg.methods.is_empty() && !cfg.resolved_methods().contains(&Method::PTrue) {
        cfg.methods.push(MethodSpec::Exact(Method::PTrue));
    } else if !p.is_empty() && cfg.methods.is_empty() {
        cfg.methods = Method::ALL.into_iter().map(MethodSpec::Exact).collect();
    }
    Ok((score_records(&ingested.records, &cfg, &p)?, ingested.errors))
}

/// Files written by [`cmd_evaluate`], relative to the output directory.
pub const REPORT_FILES: [&str; 5] = ["report.json", "table.csv", "cells.csv", "risk_coverage.csv", "calibration.csv"];

/// Evaluates scores (or outputs, scored on the fly) and writes the report
/// files into `out_dir`.
pub fn cmd_evaluate(
    config: &RunConfig,
    input: &Path,
    ptrue: Option<&Path>,
    out_dir: &Path,
    strict: bool,
) -> Result<EvalReport, CliError> {
    let (scores, _) = load_scores(config, input, ptrue, strict)?;
    let methods = if config.methods.is_empty() { Vec::new() } else { config.resolved_methods() };
    let report = evaluate(&scores, &config.eval_config(methods)?)?;
    fs::create_dir_all(out_dir).map_err(|source| CliError::Io { path: out_dir.to_path_buf(), source })?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    let contents = [json, report.table_csv(), report.cells_csv(), report.risk_coverage_csv(), report.calibration_csv()];
    for (name, body) in REPORT_FILES.iter().zip(contents) {
        write(&out_dir.join(name), &body)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateRule {
    /// Abstain when the score exceeds this value.
    Threshold(f64),
    /// Execute this fraction of the calibration scores.
    Coverage(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateDecision {
    pub id: String,
    pub model: String,
    pub method: Method,
    pub score: f64,
    pub decision: Decision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSummary {
    pub method: Method,
    pub threshold: f64,
    pub n: usize,
    pub executed: usize,
    pub abstained: usize,
    pub coverage: f64,
}

/// Execute/abstain decisions for one method. A coverage rule picks its
/// threshold from `calibration` scores when given, otherwise from the input.
pub fn gate_scores(
    scores: &[ScoredRecord],
    method: Method,
    rule: GateRule,
    calibration: Option<&[ScoredRecord]>,
) -> Result<(Vec<GateDecision>, GateSummary), CliError> {
    let values = |rs: &[ScoredRecord]| -> Result<Vec<f64>, CliError> {
        rs.iter()
            .map(|r| {
                r.scores
                    .get(&method)
                    .copied()
                    .ok_or_else(|| CliError::Config(format!("record {} has no {method} score", r.id)))
            })
            .collect()
    };
    let vals = values(scores)?;
    let threshold = match rule {
        GateRule::Threshold(t) => t,
        GateRule::Coverage(c) => threshold_for_coverage(&values(calibration.unwrap_or(scores))?, c)?,
    };
    let decisions: Vec<GateDecision> = scores
        .iter()
        .zip(&vals)
        .zip(gate(&vals, threshold))
        .map(|((r, &score), decision)| GateDecision {
            id: r.id.clone(),
            model: r.model.clone(),
            method,
            score,
            decision,
        })
        .collect();
    let executed = decisions.iter().filter(|d| d.decision == Decision::Execute).count();
    let n = decisions.len();
    let summary = GateSummary {
        method,
        threshold,
        n,
        executed,
        abstained: n - executed,
        coverage: if n == 0 { 0.0 } else { executed as f64 / n as f64 },
    };
    Ok((decisions, summary))
}

/// Writes one decision per line followed by a `{"summary": ...}` line.
#[allow(clippy::too_many_arguments)]
pub fn cmd_gate(
    config: &RunConfig,
    input: &Path,
    method: Method,
    rule: GateRule,
    calibration: Option<&Path>,
    out: &Path,
    strict: bool,
) -> Result<GateSummary, CliError> {
    let mut cfg = config.clone();
    if cfg.methods.is_empty() {
        cfg.methods = vec![MethodSpec::Exact(method)];
    }
    let (scores, _) = load_scores(&cfg, input, None, strict)?;
    let calib = match calibration {
        Some(p) => Some(load_scores(&cfg, p, None, strict)?.0),
        None => None,
    };
    let (decisions, summary) = gate_scores(&scores, method, rule, calib.as_deref())?;
    let mut body: String =
        decisions.iter().map(|d| serde_json::to_string(d).expect("decisions serialize") + "\n").collect();
    body += &serde_json::to_string(&serde_json::json!({ "summary": summary })).expect("summary serializes");
    body.push('\n');
    write(out, &body)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptLine {
    pub id: String,
    pub prompt: String,
}

/// P(true) judge prompts for every record with samples and a known task.
pub fn cmd_ptrue_prompts(tasks: &Path, outputs: &Path, out: &Path, strict: bool) -> Result<usize, CliError> {
    let tasks = ingest_tasks(tasks)?;
    let by_id: BTreeMap<&str, &Task> = tasks.values().flatten().map(|t| (t.id.as_str(), t)).collect();
    let mut records = ingest_outputs(outputs, strict)?.records;
    records.sort_by(|a, b| (&a.model, &a.id).cmp(&(&b.model, &b.id)));
    let fewshot = FewShotBundle::default();
    let mut body = String::new();
    let mut n = 0;
    for r in &records {
        let task = by_id.get(r.id.as_str()).ok_or_else(|| CliError::Config(format!("no task for record {}", r.id)))?;
        let functions = task.functions_json();
        let ctx = PromptContext { question: task.user_question(), functions: &functions };
        let prompt =
            build_ptrue_prompt(r, ctx, &fewshot).map_err(|source| CliError::Score { id: r.id.clone(), source })?;
        body += &serde_json::to_string(&PromptLine { id: r.id.clone(), prompt }).expect("prompts serialize");
        body.push('\n');
        n += 1;
    }
    write(out, &body)?;
    Ok(n)
}
