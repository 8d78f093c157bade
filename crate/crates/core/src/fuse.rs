//! Duplicate detection and fusion: fingerprint matching within a source
//! article, semantic comparison across records, and canonical-record merging
//! with full provenance.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::normalize_ws;
use crate::encode::TextEncoder;
use crate::record::EvidenceRecord;

/// Stable digest of (doc_id, normalized source text).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Fingerprint(pub String);

/// Compute the duplicate fingerprint for a record: doc-scoped, whitespace-
/// normalized, lowercase.
pub fn fingerprint(record: &EvidenceRecord) -> Fingerprint {
    fingerprint_parts(&record.source.doc_id, &record.source_text)
}

pub fn fingerprint_parts(doc_id: &str, source_text: &str) -> Fingerprint {
    let normalized = normalize_ws(source_text).to_lowercase();
    let mut hasher = Sha256::new();
    hasher.update((doc_id.len() as u64).to_le_bytes());
    hasher.update(doc_id.as_bytes());
    hasher.update(normalized.as_bytes());
    let digest = hasher.finalize();
    Fingerprint(digest[..16].iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchKind {
    Fingerprint,
    Semantic,
}

/// One detected duplicate: which stored record matched and how.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DuplicateMatch {
    pub existing_id: String,
    pub match_kind: MatchKind,
    pub similarity: f64,
}

#[derive(Debug, Error)]
pub enum FuseError {
    #[error("cannot merge a record with itself: {0}")]
    SelfMerge(String),
    #[error("canonical record {canonical} does not outrank duplicate {duplicate}")]
    ScoreOrderViolation {
        canonical: String,
        duplicate: String,
    },
}

/// Fusion thresholds.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct FusionConfig {
    /// cosine similarity of combined texts required for a semantic match
    pub dup_threshold: f64,
    /// minimum Jaccard overlap of linked entities for a semantic match
    pub entity_overlap_min: f64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            dup_threshold: 0.95,
            entity_overlap_min: 0.5,
        }
    }
}

/// Jaccard overlap of two id lists.
pub fn entity_jaccard(a: &[String], b: &[String]) -> f64 {
    use std::collections::BTreeSet;
    let sa: BTreeSet<&String> = a.iter().collect();
    let sb: BTreeSet<&String> = b.iter().collect();
    let union = sa.union(&sb).count();
    if union == 0 {
        return 0.0;
    }
    sa.intersection(&sb).count() as f64 / union as f64
}

/// Find duplicates of `incoming` among `store`.
///
/// Fingerprint matches report similarity 1.0; semantic matches require both
/// the cosine and the entity-overlap gate. Results are sorted by similarity
/// descending, ties by existing id.
pub fn find_duplicates(
    incoming: &EvidenceRecord,
    store: &[EvidenceRecord],
    encoder: &dyn TextEncoder,
    cfg: &FusionConfig,
) -> Vec<DuplicateMatch> {
    let incoming_fp = fingerprint(incoming);
    let incoming_embedding = encoder.encode(&incoming.combined_text());
    let mut matches = Vec::new();
    for existing in store {
        if existing.evidence_id == incoming.evidence_id {
            continue;
        }
        if fingerprint(existing) == incoming_fp {
            matches.push(DuplicateMatch {
                existing_id: existing.evidence_id.clone(),
                match_kind: MatchKind::Fingerprint,
                similarity: 1.0,
            });
            continue;
        }
        let overlap = entity_jaccard(&incoming.linked_entities, &existing.linked_entities);
        if overlap < cfg.entity_overlap_min {
            continue;
        }
        let cosine = crate::encode::cosine(
            &incoming_embedding,
            &encoder.encode(&existing.combined_text()),
        )
        .unwrap_or(0.0);
        if cosine >= cfg.dup_threshold {
            matches.push(DuplicateMatch {
                existing_id: existing.evidence_id.clone(),
                match_kind: MatchKind::Semantic,
                similarity: cosine,
            });
        }
    }
    matches.sort_by(|a, b| {
        b.similarity
            .partial_cmp(&a.similarity)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.existing_id.cmp(&b.existing_id))
    });
    matches
}

/// Decide which of two records is canonical: higher composite score, then
/// earlier creation, then smaller evidence id.
pub fn canonical_order<'a>(
    a: &'a EvidenceRecord,
    b: &'a EvidenceRecord,
) -> (&'a EvidenceRecord, &'a EvidenceRecord) {
    let ord = a
        .score
        .composite
        .partial_cmp(&b.score.composite)
        .unwrap_or(std::cmp::Ordering::Equal)
        .reverse()
        .then_with(|| a.created_at.cmp(&b.created_at))
        .then_with(|| a.evidence_id.cmp(&b.evidence_id));
    if ord == std::cmp::Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    }
}

fn outranks(canonical: &EvidenceRecord, duplicate: &EvidenceRecord) -> bool {
    let (c, _) = canonical_order(canonical, duplicate);
    std::ptr::eq(c, canonical)
}

/// Merge a duplicate into the canonical record.
///
/// Canonical fields are preserved; fields the canonical record lacks are
/// filled from the duplicate (`unknown` enums count as absent). Provenance
/// accumulates transitively in `merged_from`, the version increments, and
/// `updated_at` is refreshed to `now`.
pub fn merge_records(
    canonical: &EvidenceRecord,
    duplicate: &EvidenceRecord,
    now: DateTime<Utc>,
) -> Result<EvidenceRecord, FuseError> {
    if canonical.evidence_id == duplicate.evidence_id {
        return Err(FuseError::SelfMerge(canonical.evidence_id.clone()));
    }
    if !outranks(canonical, duplicate) {
        return Err(FuseError::ScoreOrderViolation {
            canonical: canonical.evidence_id.clone(),
            duplicate: duplicate.evidence_id.clone(),
        });
    }
    let mut merged = canonical.clone();

    fn fill(target: &mut Option<String>, source: &Option<String>) {
        if target.is_none() {
            *target = source.clone();
        }
    }
    fill(&mut merged.pico.study_object, &duplicate.pico.study_object);
    fill(&mut merged.pico.intervention, &duplicate.pico.intervention);
    fill(&mut merged.pico.comparison, &duplicate.pico.comparison);
    fill(
        &mut merged.pico.outcome_metrics,
        &duplicate.pico.outcome_metrics,
    );
    fill(&mut merged.bio_mechanism, &duplicate.bio_mechanism);
    fill(&mut merged.phenotype, &duplicate.phenotype);
    if merged.statistics.p_value.is_none() {
        merged.statistics.p_value = duplicate.statistics.p_value;
    }
    if merged.statistics.sample_size.is_none() {
        merged.statistics.sample_size = duplicate.statistics.sample_size;
    }
    if merged.statistics.fold_change.is_none() {
        merged.statistics.fold_change = duplicate.statistics.fold_change;
    }
    if merged.study_design == crate::extract::StudyDesign::Unknown {
        merged.study_design = duplicate.study_design;
    }
    if merged.clinical_stage == crate::extract::ClinicalStage::Unknown {
        merged.clinical_stage = duplicate.clinical_stage;
    }

    let mut provenance = vec![duplicate.evidence_id.clone()];
    provenance.extend(duplicate.merged_from.iter().cloned());
    for id in provenance {
        if id != merged.evidence_id && !merged.merged_from.contains(&id) {
            merged.merged_from.push(id);
        }
    }
    merged.version += 1;
    merged.updated_at = now;
    Ok(merged)
}

/// One line of the merge log.
#[derive(Debug, Clone, Serialize)]
pub struct MergeLogEntry {
    pub canonical_id: String,
    pub absorbed_id: String,
    pub match_kind: MatchKind,
    pub similarity: f64,
}

/// Run a full fusion pass over records in order.
///
/// Each incoming record is compared against the active store and merged until
/// no duplicates remain, so a second pass over the output performs zero
/// merges. Returns the fused store and the merge log.
pub fn fuse_records(
    records: Vec<EvidenceRecord>,
    encoder: &dyn TextEncoder,
    cfg: &FusionConfig,
    now: DateTime<Utc>,
) -> Result<(Vec<EvidenceRecord>, Vec<MergeLogEntry>), FuseError> {
    let mut store: Vec<EvidenceRecord> = Vec::with_capacity(records.len());
    let mut log = Vec::new();
    for incoming in records {
        let mut current = incoming;
        loop {
            let matches = find_duplicates(&current, &store, encoder, cfg);
            let Some(best) = matches.first() else {
                break;
            };
            let pos = store
                .iter()
                .position(|r| r.evidence_id == best.existing_id)
                .expect("matched id is in store");
            let existing = store.remove(pos);
            let (canonical, duplicate) = canonical_order(&existing, &current);
            let absorbed_id = duplicate.evidence_id.clone();
            let canonical_id = canonical.evidence_id.clone();
            let merged = merge_records(canonical, duplicate, now)?;
            log.push(MergeLogEntry {
                canonical_id,
                absorbed_id,
                match_kind: best.match_kind,
                similarity: best.similarity,
            });
            current = merged;
        }
        store.push(current);
    }
    Ok((store, log))
}
