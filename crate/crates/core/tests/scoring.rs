mod common;

use fcuq::estimators::{
    cluster_samples, score_dse, score_gnll, score_pe, score_se, score_smt_variant, subsample, BaseAggregator,
    ClusterMethod, SeOptions,
};
use fcuq::model::{Token, TokenizedSequence};
use fcuq::parser::parse_pycall;
use fcuq::smt::{classify_tokens, TokenType};
use fcuq::CallFormat;
use proptest::prelude::*;

fn samples_from(ids: &[u8], logprob: f64) -> Vec<TokenizedSequence> {
    ids.iter().map(|i| common::sample(&format!("[f(a={i})]"), logprob)).collect()
}

proptest! {
    #[test]
    fn se_equals_dse_under_equal_weights(ids in prop::collection::vec(0u8..6, 1..20), lp in -20.0f64..0.0) {
        let samples = samples_from(&ids, lp);
        for method in [ClusterMethod::Exm, ClusterMethod::Ast] {
            let c = cluster_samples(&samples, method, CallFormat::Pycall).unwrap();
            let se = score_se(&samples, &c, SeOptions::default()).unwrap().value;
            let dse = score_dse(&c).unwrap().value;
            prop_assert!((se - dse).abs() < 1e-12);
            prop_assert!(dse <= (c.k as f64).ln() + 1e-12);
        }
    }

    #[test]
    fn se_survives_tiny_probabilities(ids in prop::collection::vec(0u8..4, 1..12), shift in 500.0f64..5000.0) {
        let samples = samples_from(&ids, -shift);
        let c = cluster_samples(&samples, ClusterMethod::Exm, CallFormat::Pycall).unwrap();
        let se = score_se(&samples, &c, SeOptions { length_normalized: true }).unwrap().value;
        prop_assert!(se.is_finite() && se >= 0.0);
    }

    #[test]
    fn pe_is_mean_normalized_nll(lps in prop::collection::vec(prop::collection::vec(-5.0f64..0.0, 1..8), 1..6)) {
        let samples: Vec<TokenizedSequence> = lps
            .iter()
            .map(|l| TokenizedSequence::from_tokens(l.iter().enumerate().map(|(i, &p)| Token::new(format!("x{i}"), p)).collect(), 1.0))
            .collect();
        let expected = lps.iter().map(|l| -l.iter().sum::<f64>() / l.len() as f64).sum::<f64>() / lps.len() as f64;
        prop_assert!((score_pe(&samples).unwrap().value - expected).abs() < 1e-12);
    }

    #[test]
    fn subsample_is_seeded_and_ordered(n in 1usize..30, seed in any::<u64>()) {
        let ids: Vec<u8> = (0..n as u8).collect();
        let samples = samples_from(&ids, -0.1);
        let k = (n / 2).max(1);
        let a = subsample(&samples, k, seed).unwrap();
        prop_assert_eq!(&a, &subsample(&samples, k, seed).unwrap());
        prop_assert_eq!(a.len(), k);
        let pos: Vec<usize> = a.iter().map(|s| samples.iter().position(|x| x == s).unwrap()).collect();
        prop_assert!(pos.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(subsample(&samples, n + 1, seed).is_err());
    }

    #[test]
    fn smt_gnll_never_exceeds_full(seed in any::<u64>(), lps in prop::collection::vec(-4.0f64..0.0, 200)) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let text = common::random_ast(&mut rng).to_pycall();
        let pieces = fcuq::fixture::pseudo_tokenize(&text);
        let tokens: Vec<Token> = pieces.iter().zip(lps.iter().cycle()).map(|(p, &l)| Token::new(p.clone(), l)).collect();
        let seq = TokenizedSequence::from_tokens(tokens, 0.0);
        let outcome = parse_pycall(&seq.text);
        let typed = classify_tokens(&seq, outcome.ast().unwrap()).unwrap();
        prop_assert_eq!(typed[0].kind, TokenType::Nfp);
        let smt = score_smt_variant(&seq, &outcome, BaseAggregator::Gnll).unwrap().value;
        prop_assert!(smt <= score_gnll(&seq.tokens).unwrap().value + 1e-12);
    }
}

#[test]
fn identical_samples_have_zero_entropy() {
    let samples = samples_from(&[3; 10], -0.4);
    for method in [ClusterMethod::Exm, ClusterMethod::Ast] {
        let c = cluster_samples(&samples, method, CallFormat::Pycall).unwrap();
        assert_eq!(score_se(&samples, &c, SeOptions::default()).unwrap().value, 0.0);
        assert_eq!(score_dse(&c).unwrap().value, 0.0);
    }
}

#[test]
fn unparseable_samples_cluster_by_text() {
    let samples = vec![common::sample("[f(a=", -0.1), common::sample("[f(a=", -0.2), common::sample("nope", -0.3)];
    let c = cluster_samples(&samples, ClusterMethod::Ast, CallFormat::Pycall).unwrap();
    assert_eq!(c.cluster_of, vec![0, 0, 1]);
}
