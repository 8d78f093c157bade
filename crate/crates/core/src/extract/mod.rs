//! LLM-driven evidence extraction: chunk filtering, prompt round-trips,
//! strict schema validation, grounding checks, and conservative
//! document-level aggregation.

mod backend;
mod prompts;

pub use backend::{
    request_digest, write_fixture, BackendError, CommandBackend, LlmBackend, MockBackend,
};
pub use prompts::{AnswerMode, PromptSet, RelationSide, PROMPT_VERSION};

use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::corpus::{normalize_ws, Chunk, SectionLabel};

/// Semantic classes for extracted biomedical entities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityType {
    Gene,
    Drug,
    Disease,
    Phenotype,
    Pathway,
    Other,
}

impl EntityType {
    pub fn parse_lenient(s: &str) -> EntityType {
        match s.to_lowercase().as_str() {
            "gene" | "protein" => EntityType::Gene,
            "drug" | "compound" | "chemical" => EntityType::Drug,
            "disease" => EntityType::Disease,
            "phenotype" => EntityType::Phenotype,
            "pathway" => EntityType::Pathway,
            "other" => EntityType::Other,
            other => {
                log::warn!("unknown entity type {other:?}, mapping to Other");
                EntityType::Other
            }
        }
    }
}

impl std::fmt::Display for EntityType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EntityType::Gene => "Gene",
            EntityType::Drug => "Drug",
            EntityType::Disease => "Disease",
            EntityType::Phenotype => "Phenotype",
            EntityType::Pathway => "Pathway",
            EntityType::Other => "Other",
        };
        f.write_str(s)
    }
}

/// Study design vocabulary used in the released resources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StudyDesign {
    #[serde(rename = "meta-analysis")]
    MetaAnalysis,
    #[serde(rename = "rct")]
    Rct,
    #[serde(rename = "cohort")]
    Cohort,
    #[serde(rename = "case-control")]
    CaseControl,
    #[serde(rename = "in-vivo")]
    InVivo,
    #[serde(rename = "in-vitro")]
    InVitro,
    #[serde(rename = "computational")]
    Computational,
    #[serde(rename = "unknown")]
    Unknown,
}

impl StudyDesign {
    pub fn parse_lenient(s: &str) -> StudyDesign {
        match s.to_lowercase().as_str() {
            "meta-analysis" | "meta analysis" | "systematic review" => StudyDesign::MetaAnalysis,
            "rct" | "randomized controlled trial" | "randomised controlled trial" => {
                StudyDesign::Rct
            }
            "cohort" => StudyDesign::Cohort,
            "case-control" | "case control" => StudyDesign::CaseControl,
            "in-vivo" | "in vivo" => StudyDesign::InVivo,
            "in-vitro" | "in vitro" => StudyDesign::InVitro,
            "computational" => StudyDesign::Computational,
            "unknown" => StudyDesign::Unknown,
            other => {
                log::warn!("unknown study design {other:?}, mapping to unknown");
                StudyDesign::Unknown
            }
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            StudyDesign::MetaAnalysis => "meta-analysis",
            StudyDesign::Rct => "rct",
            StudyDesign::Cohort => "cohort",
            StudyDesign::CaseControl => "case-control",
            StudyDesign::InVivo => "in-vivo",
            StudyDesign::InVitro => "in-vitro",
            StudyDesign::Computational => "computational",
            StudyDesign::Unknown => "unknown",
        }
    }
}

/// Translational stage vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClinicalStage {
    #[serde(rename = "preclinical")]
    Preclinical,
    #[serde(rename = "clinical")]
    Clinical,
    #[serde(rename = "phase-i")]
    PhaseI,
    #[serde(rename = "phase-ii")]
    PhaseII,
    #[serde(rename = "phase-iii")]
    PhaseIII,
    #[serde(rename = "phase-iv")]
    PhaseIV,
    #[serde(rename = "unknown")]
    Unknown,
}

impl ClinicalStage {
    pub fn parse_lenient(s: &str) -> ClinicalStage {
        match s.to_lowercase().as_str() {
            "preclinical" => ClinicalStage::Preclinical,
            "clinical" => ClinicalStage::Clinical,
            "phase-i" | "phase i" => ClinicalStage::PhaseI,
            "phase-ii" | "phase ii" => ClinicalStage::PhaseII,
            "phase-iii" | "phase iii" => ClinicalStage::PhaseIII,
            "phase-iv" | "phase iv" => ClinicalStage::PhaseIV,
            "unknown" => ClinicalStage::Unknown,
            other => {
                log::warn!("unknown clinical stage {other:?}, mapping to unknown");
                ClinicalStage::Unknown
            }
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ClinicalStage::Preclinical => "preclinical",
            ClinicalStage::Clinical => "clinical",
            ClinicalStage::PhaseI => "phase-i",
            ClinicalStage::PhaseII => "phase-ii",
            ClinicalStage::PhaseIII => "phase-iii",
            ClinicalStage::PhaseIV => "phase-iv",
            ClinicalStage::Unknown => "unknown",
        }
    }
}

/// A raw entity mention before normalization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMention {
    pub raw_name: String,
    pub semantic_type: EntityType,
}

/// Provenance coordinates of a candidate: which chunk of which document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Origin {
    pub doc_id: String,
    pub chunk_index: usize,
    pub section_label: SectionLabel,
}

/// One structured candidate finding produced by the extraction model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateEvidence {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study_object: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervention: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome_metrics: Option<String>,
    #[serde(default)]
    pub core_entities: Vec<EntityMention>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bio_mechanism: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phenotype: Option<String>,
    pub study_design: StudyDesign,
    pub clinical_stage: ClinicalStage,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_size: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fold_change: Option<f64>,
    pub experimental_context: String,
    pub source_text: String,
    pub extraction_confidence: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conflict_note: Option<String>,
    pub origin: Origin,
}

/// A rejected item: its quoted text could not be grounded in the chunk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundingViolation {
    pub source_text: String,
    pub origin: Origin,
}

/// Result of parsing one extraction response: grounded items plus the
/// per-item grounding rejections.
#[derive(Debug, Clone, Default)]
pub struct Extraction {
    pub accepted: Vec<CandidateEvidence>,
    pub rejected: Vec<GroundingViolation>,
}

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("extraction response violates the schema: {0}")]
    SchemaViolation(String),
    #[error("aggregate_document received candidates from documents {left} and {right}")]
    MixedDocuments { left: String, right: String },
}

/// Chunk pre-filter: evidence-bearing sections plus experimental-signal
/// patterns for everything else.
#[derive(Debug, Clone)]
pub struct EvidenceFilter {
    pub sections: BTreeSet<SectionLabel>,
    pub patterns: Vec<Regex>,
}

fn default_signal_patterns() -> &'static [Regex] {
    static PATTERNS: OnceLock<Vec<Regex>> = OnceLock::new();
    PATTERNS.get_or_init(|| {
        [
            r"(?i)\bp\s*[<=\u{2264}]\s*0?\.\d+",
            r"(?i)\bn\s*=\s*\d+",
            r"(?i)\b\d+(\.\d+)?\s*-?\s*fold\b",
            r"(?i)\b(hazard|odds) ratio\b",
            r"(?i)\b95%\s*(ci|confidence interval)\b",
            r"(?i)\b(assay|western blot|immunohistochem|flow cytometry|qpcr|rt-pcr)\b",
            r"(?i)\b(knockdown|knockout|overexpress\w*|transfect\w*|xenograft)\b",
            r"(?i)\brandomi[sz]ed\b",
            r"(?i)\bkaplan-meier\b",
            r"(?i)\b(treated|administered)\s+with\b",
        ]
        .iter()
        .map(|p| Regex::new(p).expect("valid signal pattern"))
        .collect()
    })
}

impl Default for EvidenceFilter {
    fn default() -> Self {
        EvidenceFilter {
            sections: [
                SectionLabel::Methods,
                SectionLabel::Results,
                SectionLabel::Discussion,
                SectionLabel::Abstract,
            ]
            .into_iter()
            .collect(),
            patterns: default_signal_patterns().to_vec(),
        }
    }
}

impl EvidenceFilter {
    pub fn keeps(&self, chunk: &Chunk) -> bool {
        self.sections.contains(&chunk.section_label)
            || self.patterns.iter().any(|p| p.is_match(&chunk.text))
    }
}

/// Keep chunks likely to contain experimental findings, preserving order.
pub fn filter_chunks<'a>(chunks: &'a [Chunk], filter: &EvidenceFilter) -> Vec<&'a Chunk> {
    chunks.iter().filter(|c| filter.keeps(c)).collect()
}

/// Run the extraction prompt for one chunk and parse the response.
///
/// The backend is invoked exactly once; retry policy lives in
/// [`extract_document`].
pub fn extract_chunk(
    chunk: &Chunk,
    chunk_index: usize,
    disease: &str,
    backend: &dyn LlmBackend,
    prompts: &PromptSet,
) -> Result<Extraction, ExtractError> {
    let (system, user) = prompts.extraction(chunk, disease);
    let raw = backend.complete(&system, &user)?;
    parse_extraction_response(&raw, chunk, chunk_index)
}

/// Parse one extraction response against its source chunk.
///
/// A malformed response is a fatal `SchemaViolation`; an item whose
/// `source_text` is not a contiguous (whitespace-normalized) substring of the
/// chunk is rejected individually.
pub fn parse_extraction_response(
    raw: &str,
    chunk: &Chunk,
    chunk_index: usize,
) -> Result<Extraction, ExtractError> {
    let items = parse_evidence_payload(raw)?;
    let origin = Origin {
        doc_id: chunk.doc_id.clone(),
        chunk_index,
        section_label: chunk.section_label,
    };
    let normalized_chunk = normalize_ws(&chunk.text);
    let mut out = Extraction::default();
    for fields in items {
        let candidate = fields.into_candidate(origin.clone());
        if normalized_chunk.contains(&normalize_ws(&candidate.source_text)) {
            out.accepted.push(candidate);
        } else {
            log::warn!(
                "ungrounded source_text rejected from {}#{}",
                origin.doc_id,
                chunk_index
            );
            out.rejected.push(GroundingViolation {
                source_text: candidate.source_text,
                origin: origin.clone(),
            });
        }
    }
    Ok(out)
}

/// Field bag for one parsed item, before origin attachment and grounding.
#[derive(Debug, Clone)]
struct ItemFields {
    study_object: Option<String>,
    intervention: Option<String>,
    comparison: Option<String>,
    outcome_metrics: Option<String>,
    core_entities: Vec<EntityMention>,
    bio_mechanism: Option<String>,
    phenotype: Option<String>,
    study_design: StudyDesign,
    clinical_stage: ClinicalStage,
    p_value: Option<f64>,
    sample_size: Option<u64>,
    fold_change: Option<f64>,
    experimental_context: String,
    source_text: String,
    extraction_confidence: f64,
    conflict_note: Option<String>,
}

impl ItemFields {
    fn into_candidate(self, origin: Origin) -> CandidateEvidence {
        CandidateEvidence {
            study_object: self.study_object,
            intervention: self.intervention,
            comparison: self.comparison,
            outcome_metrics: self.outcome_metrics,
            core_entities: self.core_entities,
            bio_mechanism: self.bio_mechanism,
            phenotype: self.phenotype,
            study_design: self.study_design,
            clinical_stage: self.clinical_stage,
            p_value: self.p_value,
            sample_size: self.sample_size,
            fold_change: self.fold_change,
            experimental_context: self.experimental_context,
            source_text: self.source_text,
            extraction_confidence: self.extraction_confidence,
            conflict_note: self.conflict_note,
            origin,
        }
    }
}

fn schema_err(msg: impl Into<String>) -> ExtractError {
    ExtractError::SchemaViolation(msg.into())
}

fn opt_string(item: &Value, key: &str) -> Result<Option<String>, ExtractError> {
    match item.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => {
            let t = s.trim();
            Ok(if t.is_empty() {
                None
            } else {
                Some(t.to_string())
            })
        }
        Some(other) => Err(schema_err(format!(
            "field {key} must be a string, got {other}"
        ))),
    }
}

fn parse_evidence_payload(raw: &str) -> Result<Vec<ItemFields>, ExtractError> {
    let value: Value = serde_json::from_str(raw.trim())
        .map_err(|e| schema_err(format!("response is not valid JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| schema_err("response is not a JSON object"))?;
    let list = obj
        .get("evidence")
        .ok_or_else(|| schema_err("missing `evidence` key"))?
        .as_array()
        .ok_or_else(|| schema_err("`evidence` is not an array"))?;
    list.iter().map(parse_item).collect()
}

fn parse_item(item: &Value) -> Result<ItemFields, ExtractError> {
    let obj = item
        .as_object()
        .ok_or_else(|| schema_err("evidence item is not an object"))?;

    let core_entities = match obj.get("core_entities") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(entries)) => {
            let mut out = Vec::with_capacity(entries.len());
            for e in entries {
                let eo = e
                    .as_object()
                    .ok_or_else(|| schema_err("core_entities entry is not an object"))?;
                let raw_name = eo
                    .get("raw_name")
                    .and_then(Value::as_str)
                    .ok_or_else(|| schema_err("core_entities entry missing raw_name"))?
                    .trim()
                    .to_string();
                if raw_name.is_empty() {
                    return Err(schema_err("core_entities raw_name is empty"));
                }
                let semantic_type = eo
                    .get("semantic_type")
                    .and_then(Value::as_str)
                    .map(EntityType::parse_lenient)
                    .unwrap_or(EntityType::Other);
                out.push(EntityMention {
                    raw_name,
                    semantic_type,
                });
            }
            out
        }
        Some(other) => {
            return Err(schema_err(format!(
                "core_entities must be an array, got {other}"
            )))
        }
    };

    let p_value = match obj.get("p_value") {
        None | Some(Value::Null) => None,
        Some(v) => {
            let p = v
                .as_f64()
                .ok_or_else(|| schema_err(format!("p_value must be a number, got {v}")))?;
            if !(p > 0.0 && p <= 1.0) {
                return Err(schema_err(format!("p_value {p} outside (0, 1]")));
            }
            Some(p)
        }
    };

    let sample_size = match obj.get("sample_size") {
        None | Some(Value::Null) => None,
        Some(v) => {
            let n = v.as_u64().filter(|n| *n >= 1).ok_or_else(|| {
                schema_err(format!("sample_size must be a positive integer, got {v}"))
            })?;
            Some(n)
        }
    };

    let fold_change = match obj.get("fold_change") {
        None | Some(Value::Null) => None,
        Some(v) => {
            let f = v.as_f64().filter(|f| *f > 0.0).ok_or_else(|| {
                schema_err(format!("fold_change must be a positive number, got {v}"))
            })?;
            Some(f)
        }
    };

    let source_text = opt_string(item, "source_text")?
        .ok_or_else(|| schema_err("source_text is missing or empty"))?;

    let extraction_confidence = match obj.get("extraction_confidence") {
        None | Some(Value::Null) => {
            log::warn!("extraction_confidence missing, defaulting to 0.5");
            0.5
        }
        Some(v) => {
            let c = v.as_f64().ok_or_else(|| {
                schema_err(format!("extraction_confidence must be a number, got {v}"))
            })?;
            if !(0.0..=1.0).contains(&c) {
                return Err(schema_err(format!(
                    "extraction_confidence {c} outside [0, 1]"
                )));
            }
            c
        }
    };

    Ok(ItemFields {
        study_object: opt_string(item, "study_object")?,
        intervention: opt_string(item, "intervention")?,
        comparison: opt_string(item, "comparison")?,
        outcome_metrics: opt_string(item, "outcome_metrics")?,
        core_entities,
        bio_mechanism: opt_string(item, "bio_mechanism")?,
        phenotype: opt_string(item, "phenotype")?,
        study_design: opt_string(item, "study_design")?
            .map(|s| StudyDesign::parse_lenient(&s))
            .unwrap_or(StudyDesign::Unknown),
        clinical_stage: opt_string(item, "clinical_stage")?
            .map(|s| ClinicalStage::parse_lenient(&s))
            .unwrap_or(ClinicalStage::Unknown),
        p_value,
        sample_size,
        fold_change,
        experimental_context: opt_string(item, "experimental_context")?.unwrap_or_default(),
        source_text,
        extraction_confidence,
        conflict_note: opt_string(item, "conflict_note")?,
    })
}

fn dedup_key(candidate: &CandidateEvidence) -> String {
    normalize_ws(&candidate.source_text).to_lowercase()
}

/// Context for optional model-assisted enrichment during aggregation.
pub struct EnrichContext<'a> {
    pub backend: &'a dyn LlmBackend,
    pub prompts: &'a PromptSet,
    pub title: &'a str,
    pub doi: &'a str,
}

/// Document-level aggregation: remove exact duplicates only, first occurrence
/// wins; distinct experiments are never merged.
///
/// With an enrichment context the model may fill missing fields, but the
/// result is accepted only when it is a superset-preserving rewrite (same
/// item count after dedup, no source_text altered); otherwise the rule-based
/// result stands.
pub fn aggregate_document(
    per_chunk: &[Vec<CandidateEvidence>],
    enrich: Option<EnrichContext<'_>>,
) -> Result<Vec<CandidateEvidence>, ExtractError> {
    let mut doc_id: Option<&str> = None;
    for item in per_chunk.iter().flatten() {
        match doc_id {
            None => doc_id = Some(&item.origin.doc_id),
            Some(d) if d != item.origin.doc_id => {
                return Err(ExtractError::MixedDocuments {
                    left: d.to_string(),
                    right: item.origin.doc_id.clone(),
                })
            }
            _ => {}
        }
    }

    let mut seen = BTreeSet::new();
    let mut aggregated: Vec<CandidateEvidence> = Vec::new();
    for item in per_chunk.iter().flatten() {
        if seen.insert(dedup_key(item)) {
            aggregated.push(item.clone());
        }
    }

    if let Some(ctx) = enrich {
        match enrich_pass(&aggregated, &ctx) {
            Ok(Some(enriched)) => return Ok(enriched),
            Ok(None) => {}
            Err(err) => log::warn!("enrichment failed, keeping rule-based aggregation: {err}"),
        }
    }
    Ok(aggregated)
}

/// Run the enrichment prompt; `Ok(None)` means the response was rejected.
fn enrich_pass(
    aggregated: &[CandidateEvidence],
    ctx: &EnrichContext<'_>,
) -> Result<Option<Vec<CandidateEvidence>>, ExtractError> {
    if aggregated.is_empty() {
        return Ok(None);
    }
    let array: Vec<Value> = aggregated
        .iter()
        .map(|c| serde_json::to_value(c).expect("candidate serializes"))
        .collect();
    let payload = serde_json::to_string_pretty(&Value::Array(array)).expect("array serializes");
    let (system, user) = ctx.prompts.enrichment(ctx.title, ctx.doi, &payload);
    let raw = ctx.backend.complete(&system, &user)?;
    let items = parse_evidence_payload(&raw)?;

    // superset-preserving rewrite check: same count, same source texts
    if items.len() != aggregated.len() {
        log::warn!(
            "enrichment changed item count ({} -> {}), rejected",
            aggregated.len(),
            items.len()
        );
        return Ok(None);
    }
    let mut by_key: std::collections::BTreeMap<String, &CandidateEvidence> =
        aggregated.iter().map(|c| (dedup_key(c), c)).collect();
    let mut out = Vec::with_capacity(items.len());
    for fields in items {
        let key = normalize_ws(&fields.source_text).to_lowercase();
        match by_key.remove(&key) {
            Some(original) => out.push(fields.into_candidate(original.origin.clone())),
            None => {
                log::warn!("enrichment altered a source_text, rejected");
                return Ok(None);
            }
        }
    }
    Ok(Some(out))
}

/// Report from extracting one document.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
pub struct ExtractionReport {
    pub chunks_seen: usize,
    pub chunks_extracted: usize,
    pub chunks_skipped: usize,
    pub grounding_violations: usize,
    pub candidates: usize,
}

/// Extract a whole document: filter its chunks, run the backend per chunk
/// with one retry on transport failure, skip schema-invalid chunks, then
/// aggregate conservatively.
pub fn extract_document(
    chunks: &[Chunk],
    disease: &str,
    backend: &dyn LlmBackend,
    prompts: &PromptSet,
    filter: &EvidenceFilter,
    enrich: Option<EnrichContext<'_>>,
) -> Result<(Vec<CandidateEvidence>, ExtractionReport), ExtractError> {
    let mut report = ExtractionReport {
        chunks_seen: chunks.len(),
        ..Default::default()
    };
    let mut per_chunk = Vec::new();
    for (index, chunk) in chunks.iter().enumerate() {
        if !filter.keeps(chunk) {
            continue;
        }
        let extraction = match extract_chunk(chunk, index, disease, backend, prompts) {
            Ok(e) => e,
            Err(ExtractError::Backend(first)) => {
                log::warn!(
                    "transport failure on {}#{index}, retrying once: {first}",
                    chunk.doc_id
                );
                extract_chunk(chunk, index, disease, backend, prompts)?
            }
            Err(ExtractError::SchemaViolation(reason)) => {
                log::warn!(
                    "schema violation on {}#{index}, chunk skipped: {reason}",
                    chunk.doc_id
                );
                report.chunks_skipped += 1;
                continue;
            }
            Err(other) => return Err(other),
        };
        report.chunks_extracted += 1;
        report.grounding_violations += extraction.rejected.len();
        per_chunk.push(extraction.accepted);
    }
    let aggregated = aggregate_document(&per_chunk, enrich)?;
    report.candidates = aggregated.len();
    Ok((aggregated, report))
}
