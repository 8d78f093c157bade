//! End-to-end pipeline behavior on the bundled mini corpus.

mod common;

use forge_core::corpus::normalize_ws;
use forge_core::corpus::{chunk_sections, ingest_document, segment_sections, SectionConfig};
use forge_core::graph::compute_stats;
use forge_core::pipeline::{run_pipeline, RunPaths};
use forge_core::record::read_records;
use forge_core::relate::RelationType;

#[test]
fn mini_corpus_builds_the_expected_graph() {
    let tmp = tempfile::tempdir().unwrap();
    let config = common::mini_config_committed();
    let (graph, manifest) = run_pipeline(&config, None, tmp.path()).unwrap();

    let counts: Vec<(String, usize)> = manifest
        .stages
        .iter()
        .map(|s| (s.stage.clone(), s.count))
        .collect();
    assert_eq!(
        counts,
        vec![
            ("ingest".to_string(), 6),
            ("extract".to_string(), 10),
            ("normalize".to_string(), 10),
            ("score".to_string(), 10),
            ("fuse".to_string(), 9),
            ("relate".to_string(), 6),
            ("build".to_string(), 53),
        ]
    );

    let stats = compute_stats(&graph);
    assert_eq!(stats.evidence_count, 9);
    assert_eq!(stats.entity_count, 11);
    assert_eq!(stats.total_nodes, 20);
    assert_eq!(stats.total_edges, 33);
    assert_eq!(stats.edge_type_histogram["LINKED_TO"], 27);
    assert_eq!(stats.edge_type_histogram["SUPPORTS"], 3);
    assert_eq!(stats.edge_type_histogram["CONTRADICTS"], 1);
    assert_eq!(stats.edge_type_histogram["REPLICATES"], 1);
    assert_eq!(stats.edge_type_histogram["EXTENDS"], 1);

    let edges: Vec<(String, String, RelationType)> = graph
        .relation_edges()
        .map(|((s, t, ty), _)| (s.clone(), t.clone(), *ty))
        .collect();
    let expect = |s: &str, t: &str, ty: RelationType| {
        assert!(
            edges.contains(&(s.to_string(), t.to_string(), ty)),
            "missing edge {s} -> {t} {ty}; got {edges:?}"
        );
    };
    expect("hcc-000004", "hcc-000001", RelationType::Contradicts);
    expect("hcc-000006", "hcc-000003", RelationType::Replicates);
    expect("hcc-000007", "hcc-000003", RelationType::Supports);
    expect("hcc-000010", "hcc-000008", RelationType::Extends);

    // chronology: whenever years differ, the source is the later record
    for ((s, t, _), _) in graph.relation_edges() {
        let sy = graph.evidence_attr(s).unwrap().year.unwrap();
        let ty_ = graph.evidence_attr(t).unwrap().year.unwrap();
        assert!(sy >= ty_, "edge {s} -> {t} violates chronology");
    }
}

#[test]
fn fusion_and_metadata_flow_into_final_records() {
    let tmp = tempfile::tempdir().unwrap();
    let config = common::mini_config_committed();
    run_pipeline(&config, None, tmp.path()).unwrap();
    let records = read_records(&tmp.path().join("records_final.json")).unwrap();
    assert_eq!(records.len(), 9);

    let by_id = |id: &str| records.iter().find(|r| r.evidence_id == id).unwrap();

    // the higher-impact 2021 report absorbed its 2024 near-duplicate
    let merged = by_id("hcc-000008");
    assert_eq!(merged.version, 2);
    assert_eq!(merged.merged_from, vec!["hcc-000009"]);
    assert_eq!(merged.source.doc_id, "10.1000/forge.0005");
    assert!(records.iter().all(|r| r.evidence_id != "hcc-000009"));

    // manually curated metadata overrides the automatic record
    let corrected = by_id("hcc-000003");
    assert_eq!(
        corrected.source.journal.as_deref(),
        Some("Liver Cancer Research")
    );
    assert_eq!(
        corrected.source.quartile,
        Some(forge_core::corpus::Quartile::Q2)
    );

    // a DOI-less article gets a stable title-hash identity
    assert!(by_id("hcc-000006").source.doc_id.starts_with("t:"));

    // relation identifiers filled at build time
    assert_eq!(
        by_id("hcc-000004").evidence_relations,
        vec!["hcc-000004|hcc-000001|CONTRADICTS"]
    );

    // every record is pending review with consistent timestamps
    for r in &records {
        assert_eq!(r.review_status, forge_core::record::ReviewStatus::Pending);
        assert!(r.updated_at >= r.created_at);
        assert!(r.score.composite > 0.0 && r.score.composite < 1.0);
    }
}

#[test]
fn every_emitted_record_is_grounded_in_its_chunk() {
    let tmp = tempfile::tempdir().unwrap();
    let config = common::mini_config_committed();
    run_pipeline(&config, None, tmp.path()).unwrap();
    let records = read_records(&tmp.path().join("records_final.json")).unwrap();

    // rebuild the chunks independently and check the substring property
    let section_config = SectionConfig::default();
    let articles = common::mini_corpus_dir().join("articles");
    let mut chunks_by_doc: std::collections::BTreeMap<String, Vec<String>> = Default::default();
    for entry in std::fs::read_dir(&articles).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("txt") {
            continue;
        }
        let body = std::fs::read_to_string(&path).unwrap();
        let auto: forge_core::corpus::DocumentMeta =
            serde_json::from_str(&std::fs::read_to_string(path.with_extension("json")).unwrap())
                .unwrap();
        let manual_path = path.with_extension("manual.json");
        let manual: Option<forge_core::corpus::DocumentMeta> = manual_path.exists().then(|| {
            serde_json::from_str(&std::fs::read_to_string(&manual_path).unwrap()).unwrap()
        });
        let doc = ingest_document(&body, &auto, manual.as_ref(), &section_config).unwrap();
        let sections = segment_sections(&doc, &section_config);
        let chunks = chunk_sections(&doc.doc_id, &sections, &config.chunking).unwrap();
        chunks_by_doc.insert(doc.doc_id, chunks.into_iter().map(|c| c.text).collect());
    }

    for record in &records {
        let chunk_text = &chunks_by_doc[&record.origin.doc_id][record.origin.chunk_index];
        assert!(
            normalize_ws(chunk_text).contains(&normalize_ws(&record.source_text)),
            "record {} is not grounded in chunk {}#{}",
            record.evidence_id,
            record.origin.doc_id,
            record.origin.chunk_index
        );
    }
}

#[test]
fn stages_run_in_isolation_from_artifact_files() {
    // run each stage as a separate call over files only, mirroring separate
    // processes, and compare against the orchestrated result
    let whole = tempfile::tempdir().unwrap();
    let config = common::mini_config_committed();
    run_pipeline(&config, None, whole.path()).unwrap();

    let staged = tempfile::tempdir().unwrap();
    let paths = RunPaths::in_dir(staged.path());
    let backend = config.build_backend().unwrap();
    let encoder = config.build_encoder().unwrap();
    let prompts = forge_core::extract::PromptSet::builtin();
    forge_core::pipeline::stage_ingest(&config, &paths.documents).unwrap();
    forge_core::pipeline::stage_extract(
        &config,
        backend.as_ref(),
        &prompts,
        &paths.documents,
        &paths.candidates,
    )
    .unwrap();
    forge_core::pipeline::stage_normalize(&config, &paths.candidates, &paths.normalized).unwrap();
    forge_core::pipeline::stage_score(&config, &paths.normalized, &paths.records).unwrap();
    forge_core::pipeline::stage_fuse(
        &config,
        encoder.as_ref(),
        &paths.records,
        &paths.fused,
        &paths.merge_log,
    )
    .unwrap();
    forge_core::pipeline::stage_relate(&config, encoder.as_ref(), None, &paths.fused, &paths.edges)
        .unwrap();
    forge_core::pipeline::stage_build(
        &config,
        &paths.fused,
        &paths.edges,
        &paths.graph,
        &paths.records_final,
    )
    .unwrap();

    for name in [
        "documents.json",
        "candidates.json",
        "fused.json",
        "edges.json",
        "graph.json",
    ] {
        assert_eq!(
            std::fs::read(whole.path().join(name)).unwrap(),
            std::fs::read(staged.path().join(name)).unwrap(),
            "stage isolation broke artifact {name}"
        );
    }
}

#[test]
fn empty_corpus_yields_empty_graph_and_zero_counts() {
    let corpus = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let mut config = common::mini_config_committed();
    config.run.corpus = Some(corpus.path().to_path_buf());
    let (graph, manifest) = run_pipeline(&config, None, out.path()).unwrap();
    assert_eq!(graph.node_count(), 0);
    assert_eq!(graph.edge_count(), 0);
    assert!(manifest.stages.iter().all(|s| s.count == 0));
}

#[test]
fn invalid_config_fails_before_any_stage_runs() {
    let out = tempfile::tempdir().unwrap();
    let mut config = common::mini_config_committed();
    config.scoring.weights = [0.5, 0.25, 0.25, 0.15];
    let err = run_pipeline(&config, None, out.path()).unwrap_err();
    assert_eq!(err.stage, "config");
    assert!(!out.path().join("documents.json").exists());
}
