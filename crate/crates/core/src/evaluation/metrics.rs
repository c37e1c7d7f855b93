use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EvalError, LabeledScore};

/// Probability that a random incorrect entry has a higher uncertainty than
/// a random correct one, ties counting one half.
pub fn auroc(scores: &[LabeledScore]) -> Result<f64, EvalError> {
    let points: Vec<(f64, bool)> = scores.iter().map(|s| (s.score, s.correct)).collect();
    auroc_of(&points)
}

/// [`auroc`] over `(uncertainty, correct)` pairs, via the Mann-Whitney rank sum.
pub fn auroc_of(points: &[(f64, bool)]) -> Result<f64, EvalError> {
    let n_correct = points.iter().filter(|p| p.1).count();
    let n_incorrect = points.len() - n_correct;
    if n_correct == 0 || n_incorrect == 0 {
        return Err(EvalError::DegenerateLabels);
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].0.total_cmp(&points[b].0));
    // Average ranks over tie groups; ranks are 1-based.
    let mut rank_sum_incorrect = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && points[order[j]].0.total_cmp(&points[order[i]].0) == Ordering::Equal {
            j += 1;
        }
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        let incorrect_in_group = order[i..j].iter().filter(|&&k| !points[k].1).count();
        rank_sum_incorrect += avg_rank * incorrect_in_group as f64;
        i = j;
    }
    let n_inc = n_incorrect as f64;
    let u = rank_sum_incorrect - n_inc * (n_inc + 1.0) / 2.0;
    Ok(u / (n_inc * n_correct as f64))
}

const MAX_REDRAWS: usize = 10_000;

/// Bootstrap standard error of [`auroc`]: sample standard deviation over
/// `n_boot` resamples with replacement. Resample `b` draws from stream `b`
/// of a generator seeded with `seed`; resamples missing a class are
/// redrawn. Entries are put in record-id order first, so input order does
/// not matter.
pub fn bootstrap_se(scores: &[LabeledScore], n_boot: usize, seed: u64) -> Result<f64, EvalError> {
    let mut sorted: Vec<&LabeledScore> = scores.iter().collect();
    sorted.sort_by(|a, b| {
        a.record_id.cmp(&b.record_id).then(a.score.total_cmp(&b.score)).then(a.correct.cmp(&b.correct))
    });
    let points: Vec<(f64, bool)> = sorted.iter().map(|s| (s.score, s.correct)).collect();
    bootstrap_se_of(&points, n_boot, seed)
}

/// [`bootstrap_se`] over pairs in the given order.
pub fn bootstrap_se_of(points: &[(f64, bool)], n_boot: usize, seed: u64) -> Result<f64, EvalError> {
    auroc_of(points)?;
    let n = points.len();
    let mut values = Vec::with_capacity(n_boot);
    let mut resample = Vec::with_capacity(n);
    for b in 0..n_boot {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        let mut attempts = 0;
        loop {
            resample.clear();
            resample.extend((0..n).map(|_| points[rng.random_range(0..n)]));
            match auroc_of(&resample) {
                Ok(v) => {
                    values.push(v);
                    break;
                }
                Err(_) if attempts < MAX_REDRAWS => attempts += 1,
                Err(e) => return Err(e),
            }
        }
    }
    if values.len() < 2 {
        return Ok(0.0);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    Ok(var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoveragePoint {
    pub coverage: f64,
    pub accuracy: f64,
}

/// Accuracy among the `k` least uncertain entries for `k = 1..=n`, at
/// coverage `k / n`. Ties in uncertainty are broken by record id.
pub fn risk_coverage(scores: &[LabeledScore]) -> Vec<CoveragePoint> {
    let mut sorted: Vec<&LabeledScore> = scores.iter().collect();
    sorted.sort_by(|a, b| a.score.total_cmp(&b.score).then_with(|| a.record_id.cmp(&b.record_id)));
    let n = sorted.len();
    let mut correct = 0usize;
    sorted
        .iter()
        .enumerate()
        .map(|(i, s)| {
            correct += s.correct as usize;
            let k = i + 1;
            CoveragePoint { coverage: k as f64 / n as f64, accuracy: correct as f64 / k as f64 }
        })
        .collect()
}

fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && xs[order[j]].total_cmp(&xs[order[i]]) == Ordering::Equal {
            j += 1;
        }
        let r = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64, EvalError> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(EvalError::LengthMismatch { left: a.len(), right: b.len() });
    }
    let (ra, rb) = (average_ranks(a), average_ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - ma) * (y - mb);
        va += (x - ma).powi(2);
        vb += (y - mb).powi(2);
    }
    if va == 0.0 || vb == 0.0 {
        return Err(EvalError::ConstantInput);
    }
    Ok((cov / (va * vb).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Execute,
    Abstain,
}

/// Abstains exactly when the uncertainty exceeds `threshold`.
pub fn gate(scores: &[f64], threshold: f64) -> Vec<Decision> {
    scores.iter().map(|&s| if s > threshold { Decision::Abstain } else { Decision::Execute }).collect()
}

/// Threshold that executes a `coverage` fraction of the calibration scores
/// (rounded to the nearest count; ties may execute more).
pub fn threshold_for_coverage(calibration: &[f64], coverage: f64) -> Result<f64, EvalError> {
    if !(0.0..=1.0).contains(&coverage) {
        return Err(EvalError::OutOfRange(coverage));
    }
    let mut sorted = calibration.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = (coverage * sorted.len() as f64).round() as usize;
    Ok(if k == 0 { f64::NEG_INFINITY } else { sorted[k - 1] })
}
