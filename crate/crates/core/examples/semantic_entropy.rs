//! Exact-match vs. AST clustering of sampled outputs.

use fcuq::estimators::{cluster_samples, score_dse, score_pe, score_se, ClusterMethod, SeOptions};
use fcuq::model::{Token, TokenizedSequence};
use fcuq::CallFormat;

fn sample(text: &str, logprob: f64) -> TokenizedSequence {
    TokenizedSequence::from_tokens(vec![Token::new(text, logprob)], 1.0)
}

fn main() {
    // Three spellings of one call and one genuinely different answer.
    let samples = vec![
        sample(r#"[get_weather(city="Lima", days=2)]"#, -0.4),
        sample(r#"[get_weather(days=2, city="Lima")]"#, -0.9),
        sample(r#"[get_weather(city="Lima", days=2)]"#, -0.5),
        sample(r#"[get_weather(city="Lima", days=7)]"#, -2.3),
    ];
    println!("PE      {:.4}", score_pe(&samples).unwrap().value);
    for method in [ClusterMethod::Exm, ClusterMethod::Ast] {
        let clusters = cluster_samples(&samples, method, CallFormat::Pycall).unwrap();
        let se = score_se(&samples, &clusters, SeOptions::default()).unwrap().value;
        let dse = score_dse(&clusters).unwrap().value;
        println!("{method:?}: K={} sizes={:?} SE={se:.4} DSE={dse:.4}", clusters.k, clusters.sizes());
    }
}
