mod common;

use std::net::TcpListener;
use std::num::NonZeroUsize;
use std::time::Duration;

use common::stub_provider::{Behavior, StubProvider};
use triplecheck_core::similarity::{ExternalProvider, ExternalProviderConfig};
use triplecheck_core::{
    assemble_corpus, parse_fact_file, score_corpus, ScoringMode, SimilarityError,
    SimilarityProvider, TypeSet,
};

fn provider(url: &str, timeout_ms: u64) -> ExternalProvider {
    ExternalProvider::new(ExternalProviderConfig::new(url, Duration::from_millis(timeout_ms))).unwrap()
}

fn pairs(items: &[(&str, &str)]) -> Vec<(String, String)> {
    items.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

#[test]
fn conforming_backend_scores_in_order_and_caches() {
    let stub = StubProvider::start(Behavior::Conforming);
    let p = ExternalProvider::connect(ExternalProviderConfig::new(&stub.url, Duration::from_secs(5))).unwrap();
    let batch = pairs(&[("treats", "cures"), ("x", "x"), ("treats", "cures"), ("a b", "a b")]);
    assert_eq!(p.external_batch_similarity(&batch).unwrap(), vec![0.5, 1.0, 0.5, 1.0]);
    let after_first = stub.requests();
    // ("x","x") was already cached by the connect probe
    assert_eq!(stub.pairs_seen(), 1 + 2);
    assert_eq!(p.external_batch_similarity(&batch).unwrap(), vec![0.5, 1.0, 0.5, 1.0]);
    assert_eq!(stub.requests(), after_first);
    assert_eq!(p.score("treats", "cures").unwrap(), 0.5);
    assert_eq!(p.clamped_count(), 0);
}

#[test]
fn empty_batch_is_rejected() {
    let stub = StubProvider::start(Behavior::Conforming);
    assert!(matches!(
        provider(&stub.url, 1000).external_batch_similarity(&[]),
        Err(SimilarityError::EmptyBatch)
    ));
}

#[test]
fn out_of_range_scores_are_clamped() {
    let stub = StubProvider::start(Behavior::OutOfRange);
    let p = provider(&stub.url, 1000);
    assert_eq!(p.external_batch_similarity(&pairs(&[("a", "b"), ("c", "d")])).unwrap(), vec![1.0, 1.0]);
    assert_eq!(p.clamped_count(), 2);
}

#[test]
fn identity_violation_is_an_error() {
    let stub = StubProvider::start(Behavior::BrokenIdentity);
    let err = ExternalProvider::connect(ExternalProviderConfig::new(&stub.url, Duration::from_secs(1))).err().unwrap();
    assert!(matches!(err, SimilarityError::ContractViolation(_)));
}

#[test]
fn malformed_responses_are_errors() {
    let stub = StubProvider::start(Behavior::Garbage);
    let err = provider(&stub.url, 1000).score("a", "b").unwrap_err();
    assert!(matches!(err, SimilarityError::MalformedResponse(_)));

    let stub = StubProvider::start(Behavior::ShortResponse);
    let err = provider(&stub.url, 1000).external_batch_similarity(&pairs(&[("a", "b"), ("c", "d")])).unwrap_err();
    assert!(matches!(err, SimilarityError::MalformedResponse(_)));
}

#[test]
fn unreachable_backend_is_a_transport_failure() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let err = provider(&format!("http://127.0.0.1:{port}"), 1000).score("a", "b").unwrap_err();
    assert!(matches!(err, SimilarityError::Transport(_)), "{err}");
    assert!(err.is_provider_failure());
}

#[test]
fn slow_backend_times_out() {
    let stub = StubProvider::start(Behavior::Slow(Duration::from_millis(1500)));
    let err = provider(&stub.url, 100).score("a", "b").unwrap_err();
    assert!(matches!(err, SimilarityError::Timeout(100)), "{err}");
}

#[test]
fn corpus_scoring_through_backend_is_batched() {
    let text = r#"{"doc_id":"d1","side":"source","facts":[{"subject":{"text":"a","type":"T"},"predicate":"treats","object":"b"},{"subject":{"text":"c","type":"T"},"predicate":"visits","object":"d"}]}
{"doc_id":"d1","side":"target","model":"m1","facts":[{"subject":{"text":"a","type":"T"},"predicate":"cures","object":"b"}]}
{"doc_id":"d1","side":"target","model":"m2","facts":[{"subject":{"text":"a","type":"T"},"predicate":"treats","object":"b"},{"subject":{"text":"c","type":"T"},"predicate":"sees","object":"d"}]}"#;
    let corpus = assemble_corpus(parse_fact_file(text.as_bytes()).unwrap().fact_sets).unwrap();
    let stub = StubProvider::start(Behavior::Conforming);
    let p = provider(&stub.url, 5000);
    let types = TypeSet { types: vec!["T".into()], n: 1 };
    let reports = score_corpus(&corpus, &types, &p, ScoringMode::Literal, NonZeroUsize::new(4).unwrap()).unwrap();
    assert_eq!(stub.requests(), 1);
    assert_eq!(reports[0].model, "m1");
    assert_eq!(reports[0].tp, 0.5);
    assert_eq!(reports[1].tp, 1.5);
}
