//! Shared helpers for the integration tests: fixture access, a random
//! report generator and tiny HTTP stub servers.
#![allow(dead_code)]

use std::future::Future;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::Router;
use proptest::prelude::*;

use insightmap::assets;
use insightmap::gateway::{MockGateway, ModelGateway};
use insightmap::ingest::{
    ExampleRegistry, Extractor, FixtureOcrProvider, OcrProvider, SourceResolver,
    DEFAULT_MAX_PDF_BYTES,
};
use insightmap::model::{
    Contribution, CriticalQA, EvidenceRef, ExtractedDocument, InsightReport, NavTip,
    PrioritySignal, SectionInsight, SectionKind, SignalledBullet,
};
use insightmap::pipeline::Pipeline;
use insightmap::prompt::ProfileRegistry;

pub fn model_fixture(name: &str) -> String {
    let path = assets::assets_dir().join("fixtures/model").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn examples() -> Arc<ExampleRegistry> {
    Arc::new(ExampleRegistry::load(&assets::examples_dir()).expect("bundled examples load"))
}

pub fn example_pdf(id: &str) -> Vec<u8> {
    examples().pdf_bytes(id).expect("bundled example exists")
}

/// The recorded extraction of a bundled example.
pub async fn example_doc(id: &str) -> ExtractedDocument {
    let extractor = Extractor::new(Arc::new(FixtureOcrProvider::new(assets::ocr_fixtures_dir())));
    extractor.extract_text(&example_pdf(id)).await.expect("fixture extraction")
}

pub fn resolver() -> SourceResolver {
    SourceResolver::new(examples(), DEFAULT_MAX_PDF_BYTES, Duration::from_secs(10)).unwrap()
}

pub fn mock_gateway() -> MockGateway {
    MockGateway::from_routes_file(&assets::model_routes_path()).expect("routes load")
}

/// A pipeline over bundled fixtures with the given providers and a private
/// cache directory.
pub fn pipeline_with(
    ocr: Arc<dyn OcrProvider>,
    gateway: Arc<dyn ModelGateway>,
    cache_dir: Option<PathBuf>,
) -> Pipeline {
    let p = Pipeline::new(
        resolver(),
        Extractor::new(ocr),
        gateway,
        Arc::new(ProfileRegistry::shipped()),
    );
    match cache_dir {
        Some(dir) => p.with_cache(insightmap::cache::AnalysisCache::new(dir)),
        None => p,
    }
}

pub fn fixture_ocr() -> Arc<dyn OcrProvider> {
    Arc::new(FixtureOcrProvider::new(assets::ocr_fixtures_dir()))
}

/// Serves `app` on an ephemeral local port; returns its base URL.
pub async fn serve(app: Router) -> String {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr: SocketAddr = listener.local_addr().unwrap();
    tokio::spawn(async move {
        axum::serve(listener, app).await.unwrap();
    });
    format!("http://{addr}")
}

/// A counter shared between a stub handler and the test.
#[derive(Clone, Default)]
pub struct Hits(Arc<AtomicU32>);

impl Hits {
    pub fn bump(&self) -> u32 {
        self.0.fetch_add(1, Ordering::SeqCst) + 1
    }

    pub fn get(&self) -> u32 {
        self.0.load(Ordering::SeqCst)
    }
}

/// Runs an async block with a deadline, failing the test if it is missed.
pub async fn within<T>(limit: Duration, fut: impl Future<Output = T>) -> T {
    tokio::time::timeout(limit, fut).await.expect("deadline exceeded")
}

// ---- random reports -------------------------------------------------------

const WORDS: &[&str] = &[
    "alpha", "beta", "gamma", "delta", "model", "data", "loss", "graph", "cache", "token",
    "layer", "query", "index", "batch", "score", "encoder", "decoder", "budget", "recall", "noise",
];

fn words(min: usize, max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS), min..=max).prop_map(|w| w.join(" "))
}

fn signals() -> impl Strategy<Value = Vec<PrioritySignal>> {
    Just(PrioritySignal::ALL.to_vec())
        .prop_shuffle()
        .prop_flat_map(|all| (Just(all), 0..=3usize))
        .prop_map(|(all, n)| all[..n].to_vec())
}

fn bullet() -> impl Strategy<Value = SignalledBullet> {
    (words(1, 8), signals()).prop_map(|(text, signals)| SignalledBullet { text, signals })
}

fn label() -> impl Strategy<Value = String> {
    prop_oneof![
        (1..40u32).prop_map(|n| format!("Table {n}")),
        (1..40u32).prop_map(|n| format!("Figure {n}")),
        (1..12u32, 0..5u32).prop_map(|(a, b)| if b == 0 {
            format!("Section {a}")
        } else {
            format!("Section {a}.{b}")
        }),
        prop::sample::select(vec!['A', 'B', 'C', 'D']).prop_map(|c| format!("Appendix {c}")),
    ]
}

fn evidence() -> impl Strategy<Value = EvidenceRef> {
    (label(), prop_oneof![Just(String::new()), words(1, 6)]).prop_map(|(label, rationale)| {
        EvidenceRef {
            label,
            rationale,
            grounded: None,
        }
    })
}

fn sectional() -> impl Strategy<Value = Vec<SectionInsight>> {
    prop::sample::subsequence(SectionKind::ALL.to_vec(), 1..=4).prop_flat_map(|kinds| {
        kinds
            .into_iter()
            .map(|kind| {
                prop::collection::vec(bullet(), 0..4).prop_map(move |bullets| SectionInsight {
                    section_kind: kind,
                    bullets,
                })
            })
            .collect::<Vec<_>>()
    })
}

/// Valid reports inside the canonical grammar: sections in canonical order,
/// text from a fixed vocabulary (no signal tokens, bold markers, colons in
/// goals or arrows inside steps).
pub fn arb_report() -> impl Strategy<Value = InsightReport> {
    (
        sectional(),
        prop::collection::vec(
            (words(1, 4), prop_oneof![Just(String::new()), words(1, 8)], signals())
                .prop_map(|(title, detail, signals)| Contribution { title, detail, signals }),
            0..3,
        ),
        prop::collection::vec(bullet(), 0..3),
        prop::collection::vec(
            (words(2, 8), prop_oneof![Just(String::new()), words(1, 8)])
                .prop_map(|(question, answer)| CriticalQA { question, answer }),
            0..3,
        ),
        prop::collection::vec(evidence(), 0..4),
        prop::collection::vec(
            (words(1, 4), prop::collection::vec(words(1, 4), 1..4))
                .prop_map(|(goal, path)| NavTip { goal, path }),
            0..3,
        ),
    )
        .prop_map(
            |(sectional, key_contributions, limitations, critical_questions, evidence_refs, navigation_tips)| {
                InsightReport {
                    sectional,
                    key_contributions,
                    limitations,
                    critical_questions,
                    evidence_refs,
                    navigation_tips,
                    ..InsightReport::default()
                }
            },
        )
}
