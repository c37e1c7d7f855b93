use fcuq::evaluation::{
    auroc, auroc_of, bootstrap_se, gate, risk_coverage, threshold_for_coverage, Decision, LabeledScore,
};
use fcuq::fixture::{generate_synthetic_fixture, ClusterProfile, FixtureSpec};
use fcuq::model::Method;
use proptest::prelude::*;

fn points() -> impl Strategy<Value = Vec<(f64, bool)>> {
    prop::collection::vec((-50.0f64..50.0, any::<bool>()), 2..200)
        .prop_filter("both classes", |v| v.iter().any(|p| p.1) && v.iter().any(|p| !p.1))
}

fn labeled(points: &[(f64, bool)]) -> Vec<LabeledScore> {
    points.iter().enumerate().map(|(i, &(s, c))| LabeledScore::new(format!("r{i:04}"), Method::Gnll, s, c)).collect()
}

proptest! {
    #[test]
    fn auroc_is_rank_invariant(p in points(), a in 0.01f64..100.0, b in -10.0f64..10.0) {
        let base = auroc_of(&p).unwrap();
        let affine: Vec<_> = p.iter().map(|&(s, c)| (a * s + b, c)).collect();
        let cubed: Vec<_> = p.iter().map(|&(s, c)| (s.powi(3), c)).collect();
        let squashed: Vec<_> = p.iter().map(|&(s, c)| ((s / 10.0).tanh(), c)).collect();
        for q in [affine, cubed, squashed] {
            prop_assert!((auroc_of(&q).unwrap() - base).abs() < 1e-12);
        }
    }

    #[test]
    fn negated_scores_complement(p in points()) {
        let neg: Vec<_> = p.iter().map(|&(s, c)| (-s, c)).collect();
        prop_assert!((auroc_of(&p).unwrap() + auroc_of(&neg).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bootstrap_ignores_input_order(p in points(), seed in any::<u64>()) {
        let s = labeled(&p);
        let mut rev = s.clone();
        rev.reverse();
        prop_assert_eq!(bootstrap_se(&s, 50, seed).unwrap(), bootstrap_se(&rev, 50, seed).unwrap());
    }

    #[test]
    fn full_coverage_is_overall_accuracy(p in points()) {
        let s = labeled(&p);
        let overall = p.iter().filter(|x| x.1).count() as f64 / p.len() as f64;
        let rc = risk_coverage(&s);
        prop_assert_eq!(rc.len(), p.len());
        prop_assert_eq!(rc.last().unwrap().accuracy, overall);
    }

    #[test]
    fn median_threshold_covers_half(scores in prop::collection::vec(-5.0f64..5.0, 1..300)) {
        let mut sorted = scores.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[(sorted.len() - 1) / 2];
        let executed = gate(&scores, median).iter().filter(|d| **d == Decision::Execute).count();
        let coverage = executed as f64 / scores.len() as f64;
        // Continuous scores are distinct with probability one.
        prop_assert!((coverage - 0.5).abs() <= 1.0 / scores.len() as f64);
    }

    #[test]
    fn coverage_threshold_executes_requested_share(scores in prop::collection::vec(-5.0f64..5.0, 1..300), c in 0.0f64..=1.0) {
        let t = threshold_for_coverage(&scores, c).unwrap();
        let executed = gate(&scores, t).iter().filter(|d| **d == Decision::Execute).count();
        prop_assert_eq!(executed, (c * scores.len() as f64).round() as usize);
    }
}

#[test]
fn oracle_fixture_scores_perfectly() {
    let spec = FixtureSpec::new(200, 0.5, 0, ClusterProfile::Uniform(1), 3);
    let records = generate_synthetic_fixture(&spec).unwrap();
    let s: Vec<LabeledScore> = records
        .iter()
        .map(|r| {
            let correct =
                fcuq::evaluation::label_record(r, fcuq::CallFormat::Pycall) == fcuq::CorrectnessLabel::Correct;
            LabeledScore::new(r.id.clone(), Method::Gnll, -r.greedy.total_logprob(), correct)
        })
        .collect();
    assert_eq!(auroc(&s).unwrap(), 1.0);
    assert!(bootstrap_se(&s, 200, 1).unwrap() < 1e-9);
}
