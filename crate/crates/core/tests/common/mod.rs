//! Shared helpers for integration tests: locate the bundled mini corpus,
//! regenerate its mock-backend fixtures, and build run configurations.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use forge_core::config::RunConfig;
use forge_core::corpus::{chunk_sections, ingest_document, segment_sections, SectionConfig};
use forge_core::extract::{write_fixture, EvidenceFilter, PromptSet};
use forge_core::graph::{EvidenceGraph, RetrievalFilter};
use forge_core::record::{EvidenceRecord, SourceMeta};
use forge_core::score::{Grade, QualityScore};

pub const MINI_DISEASE: &str = "hcc";

pub fn mini_corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/mini_corpus")
}

/// One demo QA item over the mini corpus with its canned mock answer.
pub struct QaFixture {
    pub question: &'static str,
    pub gold_class: &'static str,
    pub gold_answer: &'static str,
    pub mock_classification: &'static str,
    pub mock_explanation: &'static str,
}

pub fn demo_qa_fixtures() -> Vec<QaFixture> {
    vec![
        QaFixture {
            question: "Does sorafenib reduce cell proliferation in TP53 wild-type hepatocellular carcinoma cell lines?",
            gold_class: "yes",
            gold_answer: "Yes. Sorafenib treatment significantly reduced cell proliferation in TP53 wild-type hepatocellular carcinoma cell lines.",
            mock_classification: "YES",
            mock_explanation: "Yes. Sorafenib treatment significantly reduced cell proliferation in TP53 wild-type hepatocellular carcinoma cell lines.",
        },
        QaFixture {
            question: "Does regorafenib reduce tumour growth in hepatocellular carcinoma xenograft models?",
            gold_class: "yes",
            gold_answer: "Yes. Regorafenib administration significantly reduced tumour growth in xenograft models.",
            mock_classification: "YES",
            mock_explanation: "Yes. Regorafenib administration significantly reduced tumour growth in xenograft models.",
        },
        QaFixture {
            question: "Does lenvatinib increase angiogenesis in hepatocellular carcinoma models?",
            gold_class: "no",
            gold_answer: "No. Lenvatinib reduced VEGFA-driven angiogenesis and tumour growth in xenograft models.",
            mock_classification: "NO",
            mock_explanation: "No. Lenvatinib reduced VEGFA-driven angiogenesis and tumour growth in xenograft models.",
        },
        QaFixture {
            question: "Does hypoxia increase AKT1 phosphorylation in resistant hepatocellular carcinoma cultures?",
            gold_class: "yes",
            gold_answer: "Yes. Hypoxia activated PI3K-AKT signaling and AKT1 phosphorylation increased.",
            mock_classification: "YES",
            mock_explanation: "Yes. Hypoxia activated PI3K-AKT signaling and AKT1 phosphorylation increased.",
        },
    ]
}

/// A minimal but complete evidence record for hand-built fixtures.
pub fn make_record(id: &str, doc: &str, year: Option<i32>) -> EvidenceRecord {
    EvidenceRecord {
        evidence_id: id.to_string(),
        source: SourceMeta {
            doc_id: doc.to_string(),
            doi: None,
            title: None,
            authors: None,
            journal: None,
            year,
            citation_count: None,
            impact_factor: None,
            quartile: None,
            path: None,
        },
        pico: Default::default(),
        core_entities: vec![],
        bio_mechanism: None,
        phenotype: None,
        study_design: forge_core::extract::StudyDesign::Unknown,
        clinical_stage: forge_core::extract::ClinicalStage::Unknown,
        statistics: Default::default(),
        score: QualityScore {
            s_type: 0.2,
            s_impact: 0.5,
            s_stat: 0.5,
            s_sample: 0.3,
            llm_confidence: 0.5,
            composite: 0.5,
            grade: Grade::C,
        },
        experimental_context: String::new(),
        source_text: "quote".to_string(),
        linked_entities: vec![],
        evidence_relations: vec![],
        merged_from: vec![],
        review_status: forge_core::record::ReviewStatus::Pending,
        created_at: forge_core::record::default_run_timestamp(),
        updated_at: forge_core::record::default_run_timestamp(),
        version: 1,
        origin: forge_core::extract::Origin {
            doc_id: doc.to_string(),
            chunk_index: 0,
            section_label: forge_core::corpus::SectionLabel::Results,
        },
    }
}

/// Configuration for running the bundled mini corpus with an explicit mock
/// fixture directory.
pub fn mini_config(mock_dir: &Path) -> RunConfig {
    let base = mini_corpus_dir();
    let mut config = RunConfig::default();
    config.run.disease = MINI_DISEASE.to_string();
    config.run.corpus = Some(base.join("articles"));
    config.run.vocabulary = Some(base.join("vocab.tsv"));
    config.backend.fixtures = Some(mock_dir.to_path_buf());
    config
}

/// Configuration using the committed mock fixtures.
pub fn mini_config_committed() -> RunConfig {
    mini_config(&mini_corpus_dir().join("mock"))
}

/// Regenerate every generated fixture into `mock_out` (extraction and QA
/// mock responses) plus the future-records file. Returns the number of mock
/// files written.
pub fn generate_fixtures(mock_out: &Path, future_out: &Path, qa_out: &Path) -> usize {
    let base = mini_corpus_dir();
    let articles = base.join("articles");
    let responses = base.join("responses");
    let prompts = PromptSet::builtin();
    let section_config = SectionConfig::default();
    let chunk_config = forge_core::corpus::ChunkConfig::default();
    let filter = EvidenceFilter::default();

    std::fs::create_dir_all(mock_out).unwrap();
    let mut written = 0usize;

    let mut stems: Vec<PathBuf> = std::fs::read_dir(&articles)
        .unwrap()
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("txt"))
        .collect();
    stems.sort();
    for body_path in &stems {
        let stem = body_path
            .file_stem()
            .unwrap()
            .to_string_lossy()
            .into_owned();
        let body = std::fs::read_to_string(body_path).unwrap();
        let auto: forge_core::corpus::DocumentMeta = serde_json::from_str(
            &std::fs::read_to_string(body_path.with_extension("json")).unwrap(),
        )
        .unwrap();
        let manual_path = body_path.with_extension("manual.json");
        let manual: Option<forge_core::corpus::DocumentMeta> = manual_path.exists().then(|| {
            serde_json::from_str(&std::fs::read_to_string(&manual_path).unwrap()).unwrap()
        });
        let doc = ingest_document(&body, &auto, manual.as_ref(), &section_config).unwrap();
        let sections = segment_sections(&doc, &section_config);
        let chunks = chunk_sections(&doc.doc_id, &sections, &chunk_config).unwrap();
        for (index, chunk) in chunks.iter().enumerate() {
            if !filter.keeps(chunk) {
                continue;
            }
            let response_path = responses.join(format!("{stem}_c{index}.json"));
            let response = std::fs::read_to_string(&response_path).unwrap_or_else(|_| {
                panic!(
                    "chunk {stem}#{index} ({}) has no authored response at {}",
                    chunk.section_label,
                    response_path.display()
                )
            });
            let (system, user) = prompts.extraction(chunk, MINI_DISEASE);
            write_fixture(mock_out, &system, &user, &response).unwrap();
            written += 1;
        }
    }

    // run the pipeline on the fresh extraction fixtures to obtain the graph,
    // then derive the QA answering fixtures from its retrieval contexts
    let tmp = tempfile::tempdir().unwrap();
    let config = mini_config(mock_out);
    let (graph, _) =
        forge_core::pipeline::run_pipeline(&config, None, tmp.path()).expect("mini pipeline runs");
    written += write_qa_fixtures(&graph, mock_out, qa_out);
    write_future_records(future_out);
    written
}

fn write_qa_fixtures(graph: &EvidenceGraph, mock_out: &Path, qa_out: &Path) -> usize {
    let prompts = PromptSet::builtin();
    let encoder = forge_core::encode::HashedEncoder::default();
    let mut written = 0usize;
    let mut items = Vec::new();
    for fixture in demo_qa_fixtures() {
        let hits =
            graph.retrieve_context(fixture.question, 5, &encoder, &RetrievalFilter::default());
        let contexts: Vec<String> = hits.into_iter().map(|h| h.context).collect();
        let block = forge_core::evaluate::format_contexts(&contexts);
        let (system, user) = prompts.qa_answer(
            forge_core::extract::AnswerMode::Evidence,
            fixture.question,
            &block,
        );
        let response = format!(
            "CLASSIFICATION: {}\nEXPLANATION: {}",
            fixture.mock_classification, fixture.mock_explanation
        );
        write_fixture(mock_out, &system, &user, &response).unwrap();
        written += 1;
        items.push(serde_json::json!({
            "question": fixture.question,
            "gold_class": fixture.gold_class,
            "gold_answer": fixture.gold_answer,
        }));
    }
    std::fs::write(
        qa_out,
        forge_core::graph::canonical_json(&serde_json::Value::Array(items)),
    )
    .unwrap();
    written
}

fn write_future_records(out: &Path) {
    // hypothetical later findings: some new pairs, one already-known pair,
    // one cold-start entity
    let specs: Vec<(&str, Vec<&str>)> = vec![
        ("f-0001", vec!["D:SORAFENIB", "G:AKT1"]),
        ("f-0002", vec!["D:REGORAFENIB", "G:VEGFA", "P:ANGIOGENESIS"]),
        ("f-0003", vec!["G:TP53", "D:LENVATINIB"]),
        ("f-0004", vec!["D:BEVACIZUMAB", "G:VEGFA"]),
    ];
    let records: Vec<EvidenceRecord> = specs
        .into_iter()
        .map(|(id, entities)| {
            let mut r = make_record(id, &format!("future/{id}"), Some(2026));
            r.linked_entities = entities.into_iter().map(String::from).collect();
            r.source_text = format!("future finding {id}");
            r
        })
        .collect();
    forge_core::record::write_records(out, &records).unwrap();
}

/// Shape of one synthetic release, mirroring a published summary table.
pub struct ReleaseSpec {
    pub disease: &'static str,
    pub evidence: usize,
    pub entities: usize,
    pub linked_to: usize,
    /// (relation type name, count)
    pub relations: &'static [(&'static str, usize)],
    /// (grade, count) in A, B, C, D order
    pub grades: [(Grade, usize); 4],
    /// total absorbed duplicate ids distributed over records
    pub merged_extra: usize,
    /// records carrying version > 1
    pub version_gt1: usize,
}

pub const HCC_RELEASE: ReleaseSpec = ReleaseSpec {
    disease: "hepatocellular carcinoma",
    evidence: 7_872,
    entities: 2_456,
    linked_to: 17_849,
    relations: &[
        ("SUPPORTS", 13_861),
        ("EXTENDS", 9_263),
        ("REFINES", 6_115),
        ("CONTRADICTS", 1_111),
        ("CAUSAL_CHAIN", 856),
        ("REPLICATES", 701),
    ],
    grades: [
        (Grade::A, 60),
        (Grade::B, 1_732),
        (Grade::C, 5_886),
        (Grade::D, 194),
    ],
    merged_extra: 1_023,
    version_gt1: 2_968,
};

pub const CRC_RELEASE: ReleaseSpec = ReleaseSpec {
    disease: "colorectal cancer",
    evidence: 6_622,
    entities: 2_173,
    linked_to: 11_910,
    relations: &[
        ("SUPPORTS", 10_044),
        ("EXTENDS", 9_670),
        ("REFINES", 5_124),
        ("CONTRADICTS", 1_041),
        ("CAUSAL_CHAIN", 1_101),
        ("REPLICATES", 471),
    ],
    grades: [
        (Grade::A, 34),
        (Grade::B, 1_251),
        (Grade::C, 5_024),
        (Grade::D, 313),
    ],
    merged_extra: 1_060,
    version_gt1: 2_530,
};

/// Materialize a synthetic release (graph + record files) with exactly the
/// requested node, edge, and grade counts.
pub fn build_synthetic_release(spec: &ReleaseSpec, dir: &Path) -> (PathBuf, PathBuf) {
    use forge_core::extract::EntityType;
    use forge_core::normalize::{EntityLink, LinkMethod};
    use forge_core::relate::{EdgeOrigin, RelationEdge, RelationType};

    let metadata = forge_core::graph::GraphMetadata {
        disease: spec.disease.to_string(),
        version: "1.0".into(),
        creator: "synthetic".into(),
        updated_at: forge_core::record::default_run_timestamp(),
    };
    let mut graph = forge_core::graph::EvidenceGraph::new(metadata);

    let entity_types = [
        EntityType::Gene,
        EntityType::Drug,
        EntityType::Disease,
        EntityType::Phenotype,
        EntityType::Pathway,
    ];
    let entity_id = |i: usize| format!("t{i:05}");
    let evidence_id = |i: usize| format!("e{i:05}");

    let base = spec.linked_to / spec.evidence;
    let extra = spec.linked_to % spec.evidence;
    let mut records: Vec<EvidenceRecord> = Vec::with_capacity(spec.evidence);
    let mut grade_cursor = spec.grades.iter().flat_map(|(g, n)| {
        std::iter::repeat_n(
            (
                *g,
                match g {
                    Grade::A => 0.85,
                    Grade::B => 0.70,
                    Grade::C => 0.50,
                    Grade::D => 0.30,
                },
            ),
            *n,
        )
    });
    for i in 0..spec.evidence {
        let mut r = make_record(
            &evidence_id(i),
            &format!("doc{:05}", i / 17),
            Some(2015 + (i % 10) as i32),
        );
        let links = base + usize::from(i < extra);
        r.linked_entities = (0..links)
            .map(|k| entity_id((i * 3 + k) % spec.entities))
            .collect();
        let (grade, composite) = grade_cursor.next().expect("grade counts cover all records");
        r.score.grade = grade;
        r.score.composite = composite;
        if i < spec.merged_extra {
            r.merged_from = vec![format!("m{i:05}")];
        }
        if i < spec.version_gt1 {
            r.version = 2;
        }
        r.source_text = format!("synthetic finding number {i} with stable content");
        records.push(r);
    }

    for record in &records {
        graph.upsert_evidence(record);
    }
    for record in records.iter() {
        for concept in &record.linked_entities {
            let idx: usize = concept[1..].parse().unwrap();
            let link = EntityLink {
                raw_name: format!("entity {idx}"),
                semantic_type: entity_types[idx % entity_types.len()],
                concept_id: Some(concept.clone()),
                canonical_name: Some(format!("entity {idx}")),
                source_db: Some("synthetic".into()),
                link_score: 1.0,
                method: LinkMethod::Exact,
            };
            graph
                .upsert_entity_link(&record.evidence_id, &link)
                .unwrap();
        }
    }
    for (stride, (name, count)) in spec.relations.iter().enumerate() {
        let ty = RelationType::parse(name).unwrap();
        for j in 0..*count {
            let source = j % spec.evidence;
            let lap = j / spec.evidence;
            let target = (source + stride + 1 + 101 * lap) % spec.evidence;
            graph
                .add_relation_edge(&RelationEdge {
                    source_id: evidence_id(source),
                    target_id: evidence_id(target),
                    relation_type: ty,
                    similarity: 0.7,
                    rationale: "synthetic".into(),
                    created_at: forge_core::record::default_run_timestamp(),
                    origin: EdgeOrigin::Heuristic,
                })
                .unwrap();
        }
    }

    let graph_path = dir.join(format!("graph_{}.json", spec.disease.replace(' ', "_")));
    let records_path = dir.join(format!("records_{}.json", spec.disease.replace(' ', "_")));
    forge_core::graph::serialize(&graph, &graph_path).unwrap();
    forge_core::record::write_records(&records_path, &records).unwrap();
    (graph_path, records_path)
}

/// Compare two fixture directories file by file.
pub fn dirs_identical(a: &Path, b: &Path) -> bool {
    let list = |d: &Path| -> BTreeMap<String, Vec<u8>> {
        std::fs::read_dir(d)
            .unwrap()
            .filter_map(|e| e.ok())
            .map(|e| {
                (
                    e.file_name().to_string_lossy().into_owned(),
                    std::fs::read(e.path()).unwrap(),
                )
            })
            .collect()
    };
    list(a) == list(b)
}
