mod common;

use proptest::prelude::*;

use insightmap::eval::{
    compare, compare_corpus, satisfied_count, score_output, structured_line_ratio, Comparison,
    Dimension, MIN_STRUCTURED_RATIO,
};
use insightmap::model::{render_report, EvidenceRef, ExtractedDocument, PageText};
use insightmap::prompt::{PromptBuilder, ProfileRegistry};

fn satisfied(scores: &[insightmap::eval::DimensionScore]) -> Vec<Dimension> {
    scores.iter().filter(|s| s.satisfied).map(|s| s.dimension).collect()
}

fn tiny_doc(text: &str) -> ExtractedDocument {
    ExtractedDocument::from_pages("t".into(), vec![PageText { page_no: 1, markdown: text.into() }])
        .unwrap()
}

#[tokio::test]
async fn guided_satisfies_every_dimension_baseline_only_contribution() {
    let doc = common::example_doc("attention").await;
    let guided = score_output(&common::model_fixture("guided_attention.md"), &doc);
    let baseline = score_output(&common::model_fixture("baseline_attention.md"), &doc);
    assert_eq!(satisfied_count(&guided), 7, "{guided:#?}");
    assert_eq!(satisfied_count(&baseline), 1, "{baseline:#?}");
    assert_eq!(satisfied(&baseline), vec![Dimension::KeyContribution]);
}

#[tokio::test]
async fn trivial_output_satisfies_nothing() {
    let doc = common::example_doc("attention").await;
    assert_eq!(satisfied_count(&score_output("ok.", &doc)), 0);
    assert_eq!(satisfied_count(&score_output("", &doc)), 0);
}

#[test]
fn structured_ratio_matches_hand_count() {
    // 4 non-blank lines: header, bullet, prose, bold line
    let raw = "## Methods\n\n- a bullet\nplain prose here\n**Bold only**\n";
    assert!((structured_line_ratio(raw) - 3.0 / 4.0).abs() < 1e-12);
    assert_eq!(structured_line_ratio("one\ntwo\nthree"), 0.0);
    assert_eq!(structured_line_ratio(""), 0.0);
    // prose with one stray bullet stays under the format threshold
    let mostly_prose = "a\nb\nc\nd\n- e";
    assert!(structured_line_ratio(mostly_prose) < MIN_STRUCTURED_RATIO);
}

#[test]
fn cue_words_need_word_boundaries() {
    let doc = tiny_doc("Table 1");
    let hit = score_output("This work proposes a thing.", &doc);
    assert!(hit[1].satisfied);
    let miss = score_output("The representations were compared.", &doc);
    assert!(!miss[1].satisfied, "\"presents\" must not match inside other words");
}

#[test]
fn identical_outputs_compare_symmetrically() {
    let doc = tiny_doc("Section 2 Methods. Table 1 shows results.");
    let raw = "## Methods\n- uses Table 1\n## Results\n- fine\n## Discussion\n- ok";
    let cmp = Comparison::from_outputs(raw, raw, &doc);
    assert_eq!(cmp.guided, cmp.baseline);
    assert_eq!(cmp.guided_count(), cmp.baseline_count());
    assert!(cmp.rows().iter().all(|r| r.guided == r.baseline));
}

#[tokio::test]
async fn attention_comparison_table() {
    let doc = common::example_doc("attention").await;
    let profiles = ProfileRegistry::shipped();
    let cmp = compare(&doc, profiles.default_profile(), &common::mock_gateway(), &PromptBuilder::default())
        .await
        .unwrap();
    assert_eq!((cmp.guided_count(), cmp.baseline_count()), (7, 1));
    let md = cmp.to_markdown();
    for d in Dimension::ALL {
        assert!(md.contains(d.label()), "missing row {}", d.label());
    }
    assert!(md.contains("7/7") && md.contains("1/7"), "{md}");
}

#[tokio::test]
async fn corpus_aggregates_per_dimension() {
    let mut docs = Vec::new();
    for id in ["attention", "graph-cache", "sparse-expansion"] {
        docs.push((id.to_owned(), common::example_doc(id).await));
    }
    let profiles = ProfileRegistry::shipped();
    let gw = common::mock_gateway();
    let builder = PromptBuilder::default();
    let report = compare_corpus(&docs, profiles.default_profile(), &gw, &builder).await.unwrap();
    assert_eq!(report.entries.len(), 3);
    let ids: Vec<_> = report.entries.iter().map(|e| e.id.as_str()).collect();
    assert_eq!(ids, ["attention", "graph-cache", "sparse-expansion"]);

    // tallies are recomputed independently from the per-entry rows
    for (i, t) in report.tallies.iter().enumerate() {
        let g = report.entries.iter().filter(|e| e.comparison.guided[i].satisfied).count();
        let b = report.entries.iter().filter(|e| e.comparison.baseline[i].satisfied).count();
        assert_eq!((t.guided, t.baseline), (g, b), "{:?}", t.dimension);
    }
    let sum_g: usize = report.tallies.iter().map(|t| t.guided).sum();
    let sum_b: usize = report.tallies.iter().map(|t| t.baseline).sum();
    assert_eq!((report.guided_total, report.baseline_total), (sum_g, sum_b));
    assert!(report.guided_total > report.baseline_total);

    let again = compare_corpus(&docs, profiles.default_profile(), &gw, &builder).await.unwrap();
    assert_eq!(report, again, "scoring is deterministic");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn adding_grounded_evidence_never_loses_a_dimension(report in common::arb_report()) {
        let doc = tiny_doc("Results are in Table 7 and Figure 3.");
        let before = score_output(&render_report(&report), &doc);

        let mut richer = report.clone();
        if !richer.evidence_refs.iter().any(|e| e.label == "Table 7") {
            richer.evidence_refs.push(EvidenceRef {
                label: "Table 7".into(),
                rationale: "headline numbers".into(),
                grounded: None,
            });
        }
        let after = score_output(&render_report(&richer), &doc);
        for (b, a) in before.iter().zip(&after) {
            prop_assert!(!b.satisfied || a.satisfied, "{:?} flipped", b.dimension);
        }
        prop_assert!(after.iter().any(|s| s.dimension == Dimension::EvidenceRefs && s.satisfied));
    }

    #[test]
    fn scoring_is_deterministic(report in common::arb_report()) {
        let doc = tiny_doc("Table 1 Figure 2 Section 3");
        let raw = render_report(&report);
        prop_assert_eq!(score_output(&raw, &doc), score_output(&raw, &doc));
    }
}
