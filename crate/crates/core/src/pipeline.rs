//! Stage orchestration: ingest -> extract -> normalize -> score -> fuse ->
//! relate -> build, each stage reading the previous stage's artifact file and
//! writing its own, with a manifest of digests and counts.
//!
//! Every artifact is written in canonical JSON and all timestamps come from
//! the configured logical clock, so a rerun over identical inputs is
//! byte-identical.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::corpus::{
    chunk_sections, ingest_document, segment_sections, Document, DocumentMeta, SectionConfig,
};
use crate::extract::{
    extract_document, CandidateEvidence, EnrichContext, EvidenceFilter, ExtractionReport,
    LlmBackend, PromptSet,
};
use crate::fuse::fuse_records;
use crate::graph::{build_graph, EvidenceGraph, GraphMetadata};
use crate::normalize::{load_vocabulary, normalize_record, EntityLink};
use crate::record::{read_records, write_records, EvidenceRecord, SourceMeta};
use crate::relate::{relate_records, RelationEdge};
use crate::score::score_record;

#[derive(Debug)]
pub struct PipelineError {
    pub stage: &'static str,
    pub context: Option<String>,
    pub message: String,
}

impl std::fmt::Display for PipelineError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.context {
            Some(c) => write!(f, "stage {} failed on {c}: {}", self.stage, self.message),
            None => write!(f, "stage {} failed: {}", self.stage, self.message),
        }
    }
}

impl std::error::Error for PipelineError {}

fn stage_err(stage: &'static str, message: impl std::fmt::Display) -> PipelineError {
    PipelineError {
        stage,
        context: None,
        message: message.to_string(),
    }
}

fn stage_err_on(
    stage: &'static str,
    context: impl Into<String>,
    message: impl std::fmt::Display,
) -> PipelineError {
    PipelineError {
        stage,
        context: Some(context.into()),
        message: message.to_string(),
    }
}

/// SHA-256 of a file, hex-encoded.
pub fn file_digest(path: &Path) -> std::io::Result<String> {
    let bytes = std::fs::read(path)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// One manifest row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageSummary {
    pub stage: String,
    pub inputs: BTreeMap<String, String>,
    pub output: String,
    pub output_digest: String,
    pub count: usize,
}

/// The run manifest: config digest plus per-stage digests and counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub config_digest: String,
    pub prompt_version: String,
    pub stages: Vec<StageSummary>,
}

fn write_artifact<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let json = serde_json::to_value(value).expect("artifact serializes");
    std::fs::write(path, crate::graph::canonical_json(&json))
}

fn read_artifact<T: for<'de> Deserialize<'de>>(
    stage: &'static str,
    path: &Path,
) -> Result<T, PipelineError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| stage_err_on(stage, path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| stage_err_on(stage, path.display().to_string(), e))
}

fn summarize(
    stage: &'static str,
    inputs: &[&Path],
    output: &Path,
    count: usize,
) -> Result<StageSummary, PipelineError> {
    let mut input_digests = BTreeMap::new();
    for path in inputs {
        input_digests.insert(
            path.file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
            file_digest(path).map_err(|e| stage_err(stage, e))?,
        );
    }
    Ok(StageSummary {
        stage: stage.to_string(),
        inputs: input_digests,
        output: output
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| output.display().to_string()),
        output_digest: file_digest(output).map_err(|e| stage_err(stage, e))?,
        count,
    })
}

/// Ingest artifact: documents with their source file paths.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestArtifact {
    pub disease: String,
    pub documents: Vec<IngestedDocument>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestedDocument {
    pub document: Document,
    pub path: String,
}

/// Extraction artifact: candidates plus per-document source snapshots.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractArtifact {
    pub disease: String,
    pub sources: BTreeMap<String, SourceMeta>,
    pub candidates: Vec<CandidateEvidence>,
    pub report: ExtractionReport,
}

/// Normalization artifact: candidates with resolved entities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormalizeArtifact {
    pub disease: String,
    pub sources: BTreeMap<String, SourceMeta>,
    pub items: Vec<NormalizedCandidate>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormalizedCandidate {
    pub candidate: CandidateEvidence,
    pub core_entities: Vec<EntityLink>,
    pub linked_entities: Vec<String>,
}

/// Ingest every article in the corpus directory. Articles are `<stem>.txt`
/// bodies with `<stem>.json` metadata and optional `<stem>.manual.json`
/// overrides, processed in sorted filename order.
pub fn stage_ingest(config: &RunConfig, out: &Path) -> Result<StageSummary, PipelineError> {
    const STAGE: &str = "ingest";
    let corpus = config
        .run
        .corpus
        .as_deref()
        .ok_or_else(|| stage_err(STAGE, "run.corpus is not configured"))?;
    let section_config = SectionConfig::default();

    let mut stems: Vec<PathBuf> = std::fs::read_dir(corpus)
        .map_err(|e| stage_err_on(STAGE, corpus.display().to_string(), e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("txt"))
        .collect();
    stems.sort();

    let mut documents = Vec::new();
    for body_path in stems {
        let stem = body_path.with_extension("");
        let body = std::fs::read_to_string(&body_path)
            .map_err(|e| stage_err_on(STAGE, body_path.display().to_string(), e))?;
        let auto_path = stem.with_extension("json");
        let auto_meta: DocumentMeta = if auto_path.exists() {
            let text = std::fs::read_to_string(&auto_path)
                .map_err(|e| stage_err_on(STAGE, auto_path.display().to_string(), e))?;
            serde_json::from_str(&text)
                .map_err(|e| stage_err_on(STAGE, auto_path.display().to_string(), e))?
        } else {
            DocumentMeta::default()
        };
        let manual_path = stem.with_extension("manual.json");
        let manual_meta: Option<DocumentMeta> = if manual_path.exists() {
            let text = std::fs::read_to_string(&manual_path)
                .map_err(|e| stage_err_on(STAGE, manual_path.display().to_string(), e))?;
            Some(
                serde_json::from_str(&text)
                    .map_err(|e| stage_err_on(STAGE, manual_path.display().to_string(), e))?,
            )
        } else {
            None
        };
        let document = ingest_document(&body, &auto_meta, manual_meta.as_ref(), &section_config)
            .map_err(|e| stage_err_on(STAGE, body_path.display().to_string(), e))?;
        documents.push(IngestedDocument {
            document,
            path: body_path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
        });
    }
    let count = documents.len();
    let artifact = IngestArtifact {
        disease: config.run.disease.clone(),
        documents,
    };
    write_artifact(out, &artifact).map_err(|e| stage_err(STAGE, e))?;
    summarize(STAGE, &[], out, count)
}

/// Chunk, filter, extract, and aggregate every ingested document.
pub fn stage_extract(
    config: &RunConfig,
    backend: &dyn LlmBackend,
    prompts: &PromptSet,
    input: &Path,
    out: &Path,
) -> Result<StageSummary, PipelineError> {
    const STAGE: &str = "extract";
    let artifact: IngestArtifact = read_artifact(STAGE, input)?;
    let filter = EvidenceFilter::default();
    let section_config = SectionConfig::default();

    let mut sources = BTreeMap::new();
    let mut candidates = Vec::new();
    let mut report = ExtractionReport::default();
    for ingested in &artifact.documents {
        let doc = &ingested.document;
        let sections = segment_sections(doc, &section_config);
        let chunks = chunk_sections(&doc.doc_id, &sections, &config.chunking)
            .map_err(|e| stage_err_on(STAGE, doc.doc_id.clone(), e))?;
        let enrich = config.extraction.enrich.then(|| EnrichContext {
            backend,
            prompts,
            title: doc.meta.title.as_deref().unwrap_or(""),
            doi: doc.meta.doi.as_deref().unwrap_or(""),
        });
        let (doc_candidates, doc_report) = extract_document(
            &chunks,
            &artifact.disease,
            backend,
            prompts,
            &filter,
            enrich,
        )
        .map_err(|e| stage_err_on(STAGE, doc.doc_id.clone(), e))?;
        report.chunks_seen += doc_report.chunks_seen;
        report.chunks_extracted += doc_report.chunks_extracted;
        report.chunks_skipped += doc_report.chunks_skipped;
        report.grounding_violations += doc_report.grounding_violations;
        report.candidates += doc_report.candidates;
        candidates.extend(doc_candidates);
        sources.insert(
            doc.doc_id.clone(),
            SourceMeta::from_meta(&doc.doc_id, &doc.meta, Some(ingested.path.clone())),
        );
    }
    let count = candidates.len();
    let out_artifact = ExtractArtifact {
        disease: artifact.disease,
        sources,
        candidates,
        report,
    };
    write_artifact(out, &out_artifact).map_err(|e| stage_err(STAGE, e))?;
    summarize(STAGE, &[input], out, count)
}

/// Resolve core entities against the vocabulary.
pub fn stage_normalize(
    config: &RunConfig,
    input: &Path,
    out: &Path,
) -> Result<StageSummary, PipelineError> {
    const STAGE: &str = "normalize";
    let vocab_path = config
        .run
        .vocabulary
        .as_deref()
        .ok_or_else(|| stage_err(STAGE, "run.vocabulary is not configured"))?;
    let vocab = load_vocabulary(vocab_path)
        .map_err(|e| stage_err_on(STAGE, vocab_path.display().to_string(), e))?;
    let artifact: ExtractArtifact = read_artifact(STAGE, input)?;
    let items: Vec<NormalizedCandidate> = artifact
        .candidates
        .into_iter()
        .map(|candidate| {
            let (core_entities, linked_entities) =
                normalize_record(&candidate, &vocab, &config.fuzzy);
            NormalizedCandidate {
                candidate,
                core_entities,
                linked_entities,
            }
        })
        .collect();
    let count = items.len();
    let out_artifact = NormalizeArtifact {
        disease: artifact.disease,
        sources: artifact.sources,
        items,
    };
    write_artifact(out, &out_artifact).map_err(|e| stage_err(STAGE, e))?;
    summarize(STAGE, &[input], out, count)
}

fn disease_slug(disease: &str) -> String {
    let mut slug: String = disease
        .to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { '-' })
        .collect();
    while slug.contains("--") {
        slug = slug.replace("--", "-");
    }
    slug.trim_matches('-').to_string()
}

/// Score every normalized candidate and assemble full evidence records with
/// sequential, disease-namespaced identifiers.
pub fn stage_score(
    config: &RunConfig,
    input: &Path,
    out: &Path,
) -> Result<StageSummary, PipelineError> {
    const STAGE: &str = "score";
    let artifact: NormalizeArtifact = read_artifact(STAGE, input)?;
    let timestamp = config.timestamp();
    let slug = disease_slug(&artifact.disease);
    let mut records = Vec::with_capacity(artifact.items.len());
    for (index, item) in artifact.items.into_iter().enumerate() {
        let candidate = item.candidate;
        let source = artifact
            .sources
            .get(&candidate.origin.doc_id)
            .cloned()
            .unwrap_or_else(|| SourceMeta {
                doc_id: candidate.origin.doc_id.clone(),
                doi: None,
                title: None,
                authors: None,
                journal: None,
                year: None,
                citation_count: None,
                impact_factor: None,
                quartile: None,
                path: None,
            });
        let score = score_record(
            candidate.study_design,
            source.impact_factor,
            source.quartile,
            source.citation_count,
            candidate.p_value,
            candidate.sample_size,
            candidate.extraction_confidence,
            &config.scoring,
        )
        .map_err(|e| stage_err_on(STAGE, candidate.origin.doc_id.clone(), e))?;
        let evidence_id = format!("{slug}-{:06}", index + 1);
        records.push(EvidenceRecord::assemble(
            evidence_id,
            &candidate,
            item.core_entities,
            item.linked_entities,
            source,
            score,
            timestamp,
        ));
    }
    let count = records.len();
    write_records(out, &records).map_err(|e| stage_err(STAGE, e))?;
    summarize(STAGE, &[input], out, count)
}

/// Fuse duplicates; writes the fused records and a merge log.
pub fn stage_fuse(
    config: &RunConfig,
    encoder: &dyn crate::encode::TextEncoder,
    input: &Path,
    out: &Path,
    report_path: &Path,
) -> Result<StageSummary, PipelineError> {
    const STAGE: &str = "fuse";
    let records =
        read_records(input).map_err(|e| stage_err_on(STAGE, input.display().to_string(), e))?;
    let (fused, log) = fuse_records(records, encoder, &config.fusion, config.timestamp())
        .map_err(|e| stage_err(STAGE, e))?;
    let count = fused.len();
    write_records(out, &fused).map_err(|e| stage_err(STAGE, e))?;
    write_artifact(report_path, &log).map_err(|e| stage_err(STAGE, e))?;
    summarize(STAGE, &[input], out, count)
}

/// Induce typed relations over the fused records.
pub fn stage_relate(
    config: &RunConfig,
    encoder: &dyn crate::encode::TextEncoder,
    verifier: Option<(&dyn LlmBackend, &PromptSet)>,
    input: &Path,
    out: &Path,
) -> Result<StageSummary, PipelineError> {
    const STAGE: &str = "relate";
    let records =
        read_records(input).map_err(|e| stage_err_on(STAGE, input.display().to_string(), e))?;
    let edges = relate_records(
        &records,
        encoder,
        &config.relation.thresholds,
        verifier,
        config.timestamp(),
    )
    .map_err(|e| stage_err(STAGE, e))?;
    let count = edges.len();
    write_artifact(out, &edges).map_err(|e| stage_err(STAGE, e))?;
    summarize(STAGE, &[input], out, count)
}

/// Build the graph from fused records and relation edges; also writes the
/// final record file with relation identifiers filled in.
pub fn stage_build(
    config: &RunConfig,
    records_path: &Path,
    edges_path: &Path,
    graph_out: &Path,
    records_out: &Path,
) -> Result<StageSummary, PipelineError> {
    const STAGE: &str = "build";
    let mut records = read_records(records_path)
        .map_err(|e| stage_err_on(STAGE, records_path.display().to_string(), e))?;
    let edges: Vec<RelationEdge> = read_artifact(STAGE, edges_path)?;
    let metadata = GraphMetadata {
        disease: config.run.disease.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        creator: "forge".to_string(),
        updated_at: config.timestamp(),
    };
    let graph = build_graph(metadata, &records, &edges).map_err(|e| stage_err(STAGE, e))?;
    crate::graph::serialize(&graph, graph_out).map_err(|e| stage_err(STAGE, e))?;
    let by_source = graph.relation_identifiers_by_source();
    for record in &mut records {
        if let Some(ids) = by_source.get(&record.evidence_id) {
            record.evidence_relations = ids.clone();
        }
    }
    write_records(records_out, &records).map_err(|e| stage_err(STAGE, e))?;
    let count = graph.node_count() + graph.edge_count();
    summarize(STAGE, &[records_path, edges_path], graph_out, count)
}

/// Standard artifact file names inside a run directory.
#[derive(Debug, Clone)]
pub struct RunPaths {
    pub documents: PathBuf,
    pub candidates: PathBuf,
    pub normalized: PathBuf,
    pub records: PathBuf,
    pub fused: PathBuf,
    pub merge_log: PathBuf,
    pub edges: PathBuf,
    pub graph: PathBuf,
    pub records_final: PathBuf,
    pub manifest: PathBuf,
}

impl RunPaths {
    pub fn in_dir(dir: &Path) -> Self {
        RunPaths {
            documents: dir.join("documents.json"),
            candidates: dir.join("candidates.json"),
            normalized: dir.join("normalized.json"),
            records: dir.join("records.json"),
            fused: dir.join("fused.json"),
            merge_log: dir.join("merge_log.json"),
            edges: dir.join("edges.json"),
            graph: dir.join("graph.json"),
            records_final: dir.join("records_final.json"),
            manifest: dir.join("manifest.json"),
        }
    }
}

/// Run the whole pipeline into a directory and return the loaded graph.
pub fn run_pipeline(
    config: &RunConfig,
    config_path: Option<&Path>,
    out_dir: &Path,
) -> Result<(EvidenceGraph, Manifest), PipelineError> {
    config.validate().map_err(|e| stage_err("config", e))?;
    std::fs::create_dir_all(out_dir).map_err(|e| stage_err("config", e))?;
    let paths = RunPaths::in_dir(out_dir);
    let backend = config.build_backend().map_err(|e| stage_err("config", e))?;
    let encoder = config.build_encoder().map_err(|e| stage_err("config", e))?;
    let prompts = PromptSet::builtin();

    let mut stages = vec![stage_ingest(config, &paths.documents)?];
    stages.push(stage_extract(
        config,
        backend.as_ref(),
        &prompts,
        &paths.documents,
        &paths.candidates,
    )?);
    stages.push(stage_normalize(
        config,
        &paths.candidates,
        &paths.normalized,
    )?);
    stages.push(stage_score(config, &paths.normalized, &paths.records)?);
    stages.push(stage_fuse(
        config,
        encoder.as_ref(),
        &paths.records,
        &paths.fused,
        &paths.merge_log,
    )?);
    let verifier = config.relation.verify.then(|| (backend.as_ref(), &prompts));
    stages.push(stage_relate(
        config,
        encoder.as_ref(),
        verifier,
        &paths.fused,
        &paths.edges,
    )?);
    stages.push(stage_build(
        config,
        &paths.fused,
        &paths.edges,
        &paths.graph,
        &paths.records_final,
    )?);

    let config_digest = match config_path {
        Some(p) => file_digest(p).map_err(|e| stage_err("config", e))?,
        None => {
            let json = serde_json::to_value(config).expect("config serializes");
            let digest = Sha256::digest(crate::graph::canonical_json(&json).as_bytes());
            digest.iter().map(|b| format!("{b:02x}")).collect()
        }
    };
    let manifest = Manifest {
        config_digest,
        prompt_version: prompts.version().to_string(),
        stages,
    };
    write_artifact(&paths.manifest, &manifest).map_err(|e| stage_err("manifest", e))?;
    let graph = crate::graph::deserialize(&paths.graph).map_err(|e| stage_err("build", e))?;
    Ok((graph, manifest))
}
