//! Score one record with every method that needs no external judge.

use std::collections::BTreeMap;

use fcuq::cli::{score_record, RunConfig};
use fcuq::fixture::{generate_synthetic_fixture, ClusterProfile, FixtureSpec};

fn main() {
    let spec = FixtureSpec::new(4, 0.5, 10, ClusterProfile::Sizes(vec![6, 3, 1]), 11);
    let records = generate_synthetic_fixture(&spec).expect("valid spec");
    let config = RunConfig { j: None, ..Default::default() };

    for record in &records {
        let scored = score_record(record, &config, None).expect("scorable");
        println!("{}  {:?}  {}", record.id, scored.label, record.greedy.text);
        let line: BTreeMap<String, String> =
            scored.scores.iter().map(|(m, v)| (m.to_string(), format!("{v:.3}"))).collect();
        println!("  {line:?}");
    }
}
