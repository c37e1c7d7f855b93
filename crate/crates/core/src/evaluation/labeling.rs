use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::ast::CallFormat;
use crate::matching::{match_ground_truth, CorrectnessLabel};
use crate::model::{Record, Split};
use crate::parser::parse;

/// What to do with answerable requests whose greedy output cannot be decoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionPolicy {
    #[default]
    ExcludeDecodeErrors,
    IncludeAsIncorrect,
}

impl FromStr for ExclusionPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "exclude_decode_errors" | "exclude" => Ok(ExclusionPolicy::ExcludeDecodeErrors),
            "include_as_incorrect" | "include" => Ok(ExclusionPolicy::IncludeAsIncorrect),
            _ => Err(format!("unknown exclusion policy `{s}`")),
        }
    }
}

/// Label of the record's greedy output.
pub fn label_record(record: &Record, format: CallFormat) -> CorrectnessLabel {
    match_ground_truth(&parse(&record.greedy.text, format), &record.ground_truth)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labeled {
    pub id: String,
    pub split: Split,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Labeling {
    pub entries: Vec<Labeled>,
    pub effective_n: usize,
    pub excluded_n: usize,
}

impl Labeling {
    /// Applies `policy` to precomputed labels.
    pub fn from_labels<'a>(
        labels: impl IntoIterator<Item = (&'a str, Split, CorrectnessLabel)>,
        policy: ExclusionPolicy,
    ) -> Self {
        let mut out = Labeling::default();
        for (id, split, label) in labels {
            let correct = match (label, policy) {
                (CorrectnessLabel::DecodeError, ExclusionPolicy::ExcludeDecodeErrors) => {
                    out.excluded_n += 1;
                    continue;
                }
                (CorrectnessLabel::Correct, _) => true,
                _ => false,
            };
            out.entries.push(Labeled { id: id.to_string(), split, correct });
        }
        out.effective_n = out.entries.len();
        out
    }

    pub fn accuracy(&self) -> Option<f64> {
        (self.effective_n > 0)
            .then(|| self.entries.iter().filter(|e| e.correct).count() as f64 / self.effective_n as f64)
    }
}

/// Labels every record and applies the exclusion policy. Refusal-expecting
/// records never carry a decode-error label, so they are never dropped.
pub fn label(records: &[Record], policy: ExclusionPolicy, format: CallFormat) -> Labeling {
    let labels: Vec<(&str, Split, CorrectnessLabel)> =
        records.iter().map(|r| (r.id.as_str(), r.split, label_record(r, format))).collect();
    Labeling::from_labels(labels, policy)
}

/// A named combination of splits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Recipe {
    pub name: String,
    pub splits: Vec<Split>,
}

impl Recipe {
    pub fn new(name: impl Into<String>, splits: Vec<Split>) -> Self {
        Recipe { name: name.into(), splits }
    }

    /// The four individual splits, the four answerable combinations, and the
    /// two combinations with irrelevance requests.
    pub fn standard() -> Vec<Recipe> {
        use Split::*;
        vec![
            Recipe::new("Simple", vec![Simple]),
            Recipe::new("Multiple", vec![Multiple]),
            Recipe::new("Parallel", vec![Parallel]),
            Recipe::new("Parallel-Multiple", vec![ParallelMultiple]),
            Recipe::new("Simple + Multiple", vec![Simple, Multiple]),
            Recipe::new("Simple + Parallel", vec![Simple, Parallel]),
            Recipe::new("Multiple + Parallel-Multiple", vec![Multiple, ParallelMultiple]),
            Recipe::new("All Combined", vec![Simple, Multiple, Parallel, ParallelMultiple]),
            Recipe::new("Simple + Irrelevance", vec![Simple, Irrelevance]),
            Recipe::new("All Combined + Irrelevance", vec![Simple, Multiple, Parallel, ParallelMultiple, Irrelevance]),
        ]
    }

    fn check(&self) -> Result<(), EvalError> {
        for (i, s) in self.splits.iter().enumerate() {
            if self.splits[..i].contains(s) {
                return Err(EvalError::DuplicateSplit(*s));
            }
        }
        Ok(())
    }
}

fn normalize(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace() && *c != '-' && *c != '_').collect::<String>().to_ascii_lowercase()
}

impl FromStr for Recipe {
    type Err = EvalError;

    /// Accepts a standard recipe name (`All Combined`, `all-combined`) or
    /// splits joined with `+` (`simple+parallel_multiple`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = normalize(s);
        if let Some(r) = Recipe::standard().into_iter().find(|r| normalize(&r.name) == key) {
            return Ok(r);
        }
        let mut splits = Vec::new();
        for part in s.split('+') {
            let part = part.trim();
            if normalize(part) == "allcombined" {
                splits.extend([Split::Simple, Split::Multiple, Split::Parallel, Split::ParallelMultiple]);
                continue;
            }
            splits.push(part.parse::<Split>().map_err(|_| EvalError::UnknownSplit(part.to_string()))?);
        }
        let name = splits.iter().map(|s| s.title()).collect::<Vec<_>>().join(" + ");
        let recipe = Recipe { name, splits };
        recipe.check()?;
        Ok(recipe)
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Concatenates the datasets named by `recipe`, in recipe order.
pub fn combine_splits<T: Clone>(datasets: &BTreeMap<Split, Vec<T>>, recipe: &[Split]) -> Result<Vec<T>, EvalError> {
    Recipe { name: String::new(), splits: recipe.to_vec() }.check()?;
    let mut out = Vec::new();
    for split in recipe {
        let items = datasets.get(split).ok_or(EvalError::MissingSplit(*split))?;
        out.extend(items.iter().cloned());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recipe_parsing() {
        assert_eq!("All Combined".parse::<Recipe>().unwrap().splits.len(), 4);
        assert_eq!("all-combined+irrelevance".parse::<Recipe>().unwrap().splits.len(), 5);
        let r: Recipe = "simple+parallel_multiple".parse().unwrap();
        assert_eq!(r.splits, vec![Split::Simple, Split::ParallelMultiple]);
        assert_eq!(r.name, "Simple + Parallel-Multiple");
        assert_eq!("simple+simple".parse::<Recipe>(), Err(EvalError::DuplicateSplit(Split::Simple)));
        assert!(matches!("simple+java".parse::<Recipe>(), Err(EvalError::UnknownSplit(_))));
        assert_eq!(Recipe::standard().len(), 10);
    }

    #[test]
    fn combine_counts() {
        let mut data = BTreeMap::new();
        data.insert(Split::Simple, vec![0; 400]);
        data.insert(Split::Multiple, vec![1; 200]);
        data.insert(Split::Parallel, vec![2; 200]);
        data.insert(Split::ParallelMultiple, vec![3; 200]);
        let all = combine_splits(&data, &[Split::Simple, Split::Multiple, Split::Parallel, Split::ParallelMultiple]);
        assert_eq!(all.unwrap().len(), 1000);
        assert_eq!(combine_splits(&data, &[Split::Multiple]).unwrap(), vec![1; 200]);
        assert_eq!(
            combine_splits(&data, &[Split::Simple, Split::Simple]),
            Err(EvalError::DuplicateSplit(Split::Simple))
        );
        assert_eq!(combine_splits(&data, &[Split::Irrelevance]), Err(EvalError::MissingSplit(Split::Irrelevance)));
    }

    #[test]
    fn policy_application() {
        use CorrectnessLabel::*;
        let labels =
            [("a", Split::Simple, Correct), ("b", Split::Simple, DecodeError), ("c", Split::Simple, Incorrect)];
        let ex = Labeling::from_labels(labels, ExclusionPolicy::ExcludeDecodeErrors);
        assert_eq!((ex.effective_n, ex.excluded_n), (2, 1));
        let inc = Labeling::from_labels(labels, ExclusionPolicy::IncludeAsIncorrect);
        assert_eq!((inc.effective_n, inc.excluded_n), (3, 0));
        assert!(!inc.entries[1].correct);
    }
}
