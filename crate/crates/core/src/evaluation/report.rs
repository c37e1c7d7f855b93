use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::calibration::smooth_ece;
use super::labeling::{combine_splits, ExclusionPolicy, Labeling, Recipe};
use super::metrics::{auroc, bootstrap_se, risk_coverage, CoveragePoint};
use super::{EvalError, LabeledScore};
use crate::matching::CorrectnessLabel;
use crate::model::{Method, Split};

/// One line of a score file: a record's label and all of its scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredRecord {
    pub id: String,
    pub split: Split,
    pub model: String,
    pub label: CorrectnessLabel,
    pub scores: BTreeMap<Method, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Empty means every standard recipe whose splits are all present.
    pub recipes: Vec<Recipe>,
    /// Empty means every method found in the scores.
    pub methods: Vec<Method>,
    pub policy: ExclusionPolicy,
    pub n_boot: usize,
    pub seed: u64,
    pub risk_coverage: bool,
    pub calibration: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            recipes: Vec::new(),
            methods: Vec::new(),
            policy: ExclusionPolicy::default(),
            n_boot: 1000,
            seed: 0,
            risk_coverage: true,
            calibration: true,
        }
    }
}

/// Metrics for one (model, recipe, method). `None` marks a cell that could
/// not be computed; `note` says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCell {
    pub model: String,
    pub recipe: String,
    pub method: Method,
    pub auroc: Option<f64>,
    pub auroc_se: Option<f64>,
    pub smooth_ece: Option<f64>,
    pub accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub risk_coverage: Vec<CoveragePoint>,
    pub effective_n: usize,
    pub excluded_n: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

/// Means over models for one (recipe, method), both unweighted and
/// weighted by effective sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCell {
    pub recipe: String,
    pub method: Method,
    pub models: usize,
    pub mean_auroc: f64,
    pub mean_auroc_se: f64,
    pub weighted_mean_auroc: f64,
    pub weighted_mean_auroc_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub policy: ExclusionPolicy,
    pub n_boot: usize,
    pub seed: u64,
    pub cells: Vec<ReportCell>,
    pub summary: Vec<SummaryCell>,
}

fn resolve_recipes(records: &[ScoredRecord], config: &EvalConfig) -> Result<Vec<Recipe>, EvalError> {
    let present: BTreeSet<Split> = records.iter().map(|r| r.split).collect();
    if config.recipes.is_empty() {
        return Ok(Recipe::standard().into_iter().filter(|r| r.splits.iter().all(|s| present.contains(s))).collect());
    }
    for r in &config.recipes {
        if let Some(s) = r.splits.iter().find(|s| !present.contains(s)) {
            return Err(EvalError::MissingSplit(*s));
        }
    }
    Ok(config.recipes.clone())
}

/// Computes every (model, recipe, method) cell plus the across-model summary.
pub fn evaluate(records: &[ScoredRecord], config: &EvalConfig) -> Result<EvalReport, EvalError> {
    let recipes = resolve_recipes(records, config)?;
    let methods: Vec<Method> = if config.methods.is_empty() {
        records.iter().flat_map(|r| r.scores.keys().copied()).collect::<BTreeSet<_>>().into_iter().collect()
    } else {
        config.methods.clone()
    };
    let mut by_model: BTreeMap<&str, BTreeMap<Split, Vec<&ScoredRecord>>> = BTreeMap::new();
    for r in records {
        by_model.entry(r.model.as_str()).or_default().entry(r.split).or_default().push(r);
    }

    let mut cells = Vec::new();
    for (model, splits) in &by_model {
        for recipe in &recipes {
            if recipe.splits.iter().any(|s| !splits.contains_key(s)) {
                continue;
            }
            let rows = combine_splits(splits, &recipe.splits)?;
            let labeling = Labeling::from_labels(rows.iter().map(|r| (r.id.as_str(), r.split, r.label)), config.policy);
            let correct_of: BTreeMap<&str, bool> =
                labeling.entries.iter().map(|e| (e.id.as_str(), e.correct)).collect();
            for &method in &methods {
                let scores: Vec<LabeledScore> = rows
                    .iter()
                    .filter_map(|r| {
                        let correct = *correct_of.get(r.id.as_str())?;
                        let score = *r.scores.get(&method)?;
                        Some(LabeledScore::new(r.id.clone(), method, score, correct))
                    })
                    .collect();
                cells.push(cell(model, recipe, method, &scores, &labeling, config));
            }
        }
    }
    let summary = summarize(&cells, &recipes, &methods);
    Ok(EvalReport { policy: config.policy, n_boot: config.n_boot, seed: config.seed, cells, summary })
}

fn cell(
    model: &str,
    recipe: &Recipe,
    method: Method,
    scores: &[LabeledScore],
    labeling: &Labeling,
    config: &EvalConfig,
) -> ReportCell {
    let mut note = None;
    let (auroc_v, se) = match auroc(scores) {
        Ok(a) => (Some(a), bootstrap_se(scores, config.n_boot, config.seed).ok()),
        Err(e) => {
            note = Some(e.to_string());
            (None, None)
        }
    };
    let ece = if config.calibration && !scores.is_empty() {
        let conf: Option<Vec<(f64, bool)>> =
            scores.iter().map(|s| method.confidence(s.score).map(|p| (p, s.correct))).collect();
        conf.and_then(|c| smooth_ece(&c).ok())
    } else {
        None
    };
    let accuracy =
        (!scores.is_empty()).then(|| scores.iter().filter(|s| s.correct).count() as f64 / scores.len() as f64);
    ReportCell {
        model: model.to_string(),
        recipe: recipe.name.clone(),
        method,
        auroc: auroc_v,
        auroc_se: se,
        smooth_ece: ece,
        accuracy,
        risk_coverage: if config.risk_coverage { risk_coverage(scores) } else { Vec::new() },
        effective_n: scores.len(),
        excluded_n: labeling.excluded_n,
        note,
    }
}

fn summarize(cells: &[ReportCell], recipes: &[Recipe], methods: &[Method]) -> Vec<SummaryCell> {
    let mut out = Vec::new();
    for recipe in recipes {
        for &method in methods {
            let done: Vec<(&ReportCell, f64, f64)> = cells
                .iter()
                .filter(|c| c.recipe == recipe.name && c.method == method)
                .filter_map(|c| Some((c, c.auroc?, c.auroc_se?)))
                .collect();
            if done.is_empty() {
                continue;
            }
            let n = done.len() as f64;
            let w: f64 = done.iter().map(|(c, _, _)| c.effective_n as f64).sum();
            out.push(SummaryCell {
                recipe: recipe.name.clone(),
                method,
                models: done.len(),
                mean_auroc: done.iter().map(|d| d.1).sum::<f64>() / n,
                mean_auroc_se: done.iter().map(|d| d.2).sum::<f64>() / n,
                weighted_mean_auroc: done.iter().map(|d| d.1 * d.0.effective_n as f64).sum::<f64>() / w,
                weighted_mean_auroc_se: done.iter().map(|d| d.2 * d.0.effective_n as f64).sum::<f64>() / w,
            });
        }
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "N/A".to_string(), |x| x.to_string())
}

fn csv_string<F>(header: &[&str], write_rows: F) -> String
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).and_then(|_| write_rows(&mut w)).expect("writing to memory cannot fail");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV of UTF-8 fields is UTF-8")
}

impl EvalReport {
    /// One row per (model, recipe, method).
    pub fn cells_csv(&self) -> String {
        let header =
            ["model", "recipe", "method", "auroc", "auroc_se", "smooth_ece", "accuracy", "effective_n", "excluded_n"];
        csv_string(&header, |w| {
            for c in &self.cells {
                w.write_record([
                    c.model.clone(),
                    c.recipe.clone(),
                    c.method.to_string(),
                    opt(c.auroc),
                    opt(c.auroc_se),
                    opt(c.smooth_ece),
                    opt(c.accuracy),
                    c.effective_n.to_string(),
                    c.excluded_n.to_string(),
                ])?;
            }
            Ok(())
        })
    }

    /// Recipe rows by method columns of `mean AUROC ± mean SE` over models.
    pub fn table_csv(&self) -> String {
        let mut recipes: Vec<&str> = Vec::new();
        let mut methods: Vec<Method> = Vec::new();
        let keys =
            self.summary.iter().map(|s| (&s.recipe, s.method)).chain(self.cells.iter().map(|c| (&c.recipe, c.method)));
        for (r, m) in keys {
            if !recipes.contains(&r.as_str()) {
                recipes.push(r);
            }
            if !methods.contains(&m) {
                methods.push(m);
            }
        }
        let names: Vec<String> = methods.iter().map(Method::to_string).collect();
        let header: Vec<&str> = std::iter::once("task").chain(names.iter().map(String::as_str)).collect();
        csv_string(&header, |w| {
            for r in recipes {
                let mut row = vec![r.to_string()];
                for m in &methods {
                    row.push(match self.summary.iter().find(|s| s.recipe == r && s.method == *m) {
                        Some(s) => format!("{:.3} ± {:.3}", s.mean_auroc, s.mean_auroc_se),
                        None => "N/A".to_string(),
                    });
                }
                w.write_record(&row)?;
            }
            Ok(())
        })
    }

    pub fn risk_coverage_csv(&self) -> String {
        csv_string(&["model", "recipe", "method", "coverage", "accuracy"], |w| {
            for c in &self.cells {
                for p in &c.risk_coverage {
                    w.write_record([
                        c.model.clone(),
                        c.recipe.clone(),
                        c.method.to_string(),
                        p.coverage.to_string(),
                        p.accuracy.to_string(),
                    ])?;
                }
            }
            Ok(())
        })
    }

    pub fn calibration_csv(&self) -> String {
        csv_string(&["model", "recipe", "method", "smooth_ece", "accuracy", "effective_n"], |w| {
            for c in self.cells.iter().filter(|c| c.smooth_ece.is_some()) {
                w.write_record([
                    c.model.clone(),
                    c.recipe.clone(),
                    c.method.to_string(),
                    opt(c.smooth_ece),
                    opt(c.accuracy),
                    c.effective_n.to_string(),
                ])?;
            }
            Ok(())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, model: &str, label: CorrectnessLabel, gnll: f64) -> ScoredRecord {
        ScoredRecord {
            id: id.into(),
            split: Split::from_id(id).unwrap(),
            model: model.into(),
            label,
            scores: [(Method::Gnll, gnll), (Method::SeAst, 0.0)].into(),
        }
    }

    #[test]
    fn decode_error_only_split_is_not_available() {
        let rs: Vec<_> = (0..5).map(|i| rec(&format!("simple_{i}"), "m", CorrectnessLabel::DecodeError, 1.0)).collect();
        let report = evaluate(&rs, &EvalConfig { n_boot: 10, ..Default::default() }).unwrap();
        assert!(!report.cells.is_empty());
        for c in &report.cells {
            assert_eq!(c.auroc, None);
            assert_eq!(c.excluded_n, 5);
            assert_eq!(c.effective_n, 0);
        }
        assert!(report.summary.is_empty());
        assert!(report.table_csv().contains("N/A"));
    }

    #[test]
    fn summary_weights_by_effective_n() {
        let mut rs = Vec::new();
        for i in 0..4 {
            let l = if i < 2 { CorrectnessLabel::Correct } else { CorrectnessLabel::Incorrect };
            rs.push(rec(&format!("simple_{i}"), "a", l, i as f64));
        }
        for i in 0..8 {
            let l = if i % 2 == 0 { CorrectnessLabel::Correct } else { CorrectnessLabel::Incorrect };
            rs.push(rec(&format!("simple_{i}"), "b", l, 1.0));
        }
        let cfg = EvalConfig { methods: vec![Method::Gnll], n_boot: 20, ..Default::default() };
        let report = evaluate(&rs, &cfg).unwrap();
        let s = &report.summary[0];
        assert_eq!(s.models, 2);
        assert!((s.mean_auroc - 0.75).abs() < 1e-12);
        assert!((s.weighted_mean_auroc - (4.0 * 1.0 + 8.0 * 0.5) / 12.0).abs() < 1e-12);
        // SE_AST has no confidence mapping; GNLL does.
        assert!(report.cells.iter().all(|c| c.smooth_ece.is_some()));
    }
}
