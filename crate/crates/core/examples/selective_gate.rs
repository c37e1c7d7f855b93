//! Pick an abstention threshold on calibration data and apply it.

use std::collections::BTreeMap;

use fcuq::cli::{gate_scores, score_records, GateRule, MethodSpec, RunConfig};
use fcuq::evaluation::{risk_coverage, LabeledScore};
use fcuq::fixture::{generate_synthetic_fixture, ClusterProfile, FixtureSpec};
use fcuq::{CorrectnessLabel, Method};

fn main() {
    let config = RunConfig { methods: vec![MethodSpec::Exact(Method::Gnll)], j: Some(0), ..Default::default() };
    let score = |seed| {
        let records = generate_synthetic_fixture(&FixtureSpec::new(300, 0.8, 0, ClusterProfile::Uniform(1), seed))
            .expect("valid spec");
        score_records(&records, &config, &BTreeMap::new()).expect("scorable")
    };
    let (calibration, live) = (score(1), score(2));

    let (decisions, summary) =
        gate_scores(&live, Method::Gnll, GateRule::Coverage(0.75), Some(&calibration)).expect("gates");
    println!(
        "threshold {:.4}: executed {} of {} ({:.1}%)",
        summary.threshold,
        summary.executed,
        summary.n,
        100.0 * summary.coverage
    );

    let executed_correct = decisions
        .iter()
        .zip(&live)
        .filter(|(d, r)| d.decision == fcuq::evaluation::Decision::Execute && r.label == CorrectnessLabel::Correct)
        .count();
    println!("accuracy among executed: {:.3}", executed_correct as f64 / summary.executed as f64);

    let labeled: Vec<LabeledScore> = live
        .iter()
        .map(|r| {
            LabeledScore::new(r.id.clone(), Method::Gnll, r.scores[&Method::Gnll], r.label == CorrectnessLabel::Correct)
        })
        .collect();
    for p in risk_coverage(&labeled).iter().step_by(60) {
        println!("coverage {:.2}  accuracy {:.3}", p.coverage, p.accuracy);
    }
}
