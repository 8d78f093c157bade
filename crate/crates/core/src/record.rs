//! The evidence record: one experimentally grounded finding with PICO
//! context, normalized entities, statistics, quality score, provenance, and
//! relation references. This is the record-level release format.

use chrono::{DateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use crate::corpus::{DocumentMeta, Quartile};
use crate::extract::{CandidateEvidence, ClinicalStage, Origin, StudyDesign};
use crate::normalize::EntityLink;
use crate::score::QualityScore;

/// Timestamps serialize as RFC 3339 at whole-second precision so canonical
/// files stay byte-stable.
pub mod ts {
    use chrono::{DateTime, SecondsFormat, Utc};
    use serde::{self, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(dt: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&dt.to_rfc3339_opts(SecondsFormat::Secs, true))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let raw = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(&raw)
            .map(|dt| dt.with_timezone(&Utc))
            .map_err(serde::de::Error::custom)
    }
}

/// Default logical timestamp for reproducible runs; wall-clock time never
/// enters artifacts unless configured explicitly.
pub fn default_run_timestamp() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2026, 1, 1, 0, 0, 0).unwrap()
}

/// Source provenance snapshot carried on every record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceMeta {
    pub doc_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub authors: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub journal: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub citation_count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub impact_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quartile: Option<Quartile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

impl SourceMeta {
    pub fn from_meta(doc_id: &str, meta: &DocumentMeta, path: Option<String>) -> Self {
        SourceMeta {
            doc_id: doc_id.to_string(),
            doi: meta.doi.clone(),
            title: meta.title.clone(),
            authors: meta.authors.clone(),
            journal: meta.journal.clone(),
            year: meta.year,
            citation_count: meta.citation_count,
            impact_factor: meta.impact_factor,
            quartile: meta.quartile,
            path,
        }
    }
}

/// Structured study context.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Pico {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study_object: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervention: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome_metrics: Option<String>,
}

/// Quantitative attributes as reported.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Statistics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_size: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fold_change: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence_interval: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effect_size: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReviewStatus {
    Pending,
    Approved,
    Rejected,
}

/// One released evidence record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceRecord {
    pub evidence_id: String,
    pub source: SourceMeta,
    pub pico: Pico,
    pub core_entities: Vec<EntityLink>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bio_mechanism: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phenotype: Option<String>,
    pub study_design: StudyDesign,
    pub clinical_stage: ClinicalStage,
    pub statistics: Statistics,
    pub score: QualityScore,
    pub experimental_context: String,
    pub source_text: String,
    pub linked_entities: Vec<String>,
    /// Edge identifiers (`source|target|TYPE`) of relations this record
    /// participates in as the source; filled when the graph is built.
    #[serde(default)]
    pub evidence_relations: Vec<String>,
    #[serde(default)]
    pub merged_from: Vec<String>,
    pub review_status: ReviewStatus,
    #[serde(with = "ts")]
    pub created_at: DateTime<Utc>,
    #[serde(with = "ts")]
    pub updated_at: DateTime<Utc>,
    pub version: u32,
    pub origin: Origin,
}

impl EvidenceRecord {
    /// Assemble a record from a normalized, scored candidate.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        evidence_id: String,
        candidate: &CandidateEvidence,
        core_entities: Vec<EntityLink>,
        linked_entities: Vec<String>,
        source: SourceMeta,
        score: QualityScore,
        timestamp: DateTime<Utc>,
    ) -> Self {
        EvidenceRecord {
            evidence_id,
            source,
            pico: Pico {
                study_object: candidate.study_object.clone(),
                intervention: candidate.intervention.clone(),
                comparison: candidate.comparison.clone(),
                outcome_metrics: candidate.outcome_metrics.clone(),
            },
            core_entities,
            bio_mechanism: candidate.bio_mechanism.clone(),
            phenotype: candidate.phenotype.clone(),
            study_design: candidate.study_design,
            clinical_stage: candidate.clinical_stage,
            statistics: Statistics {
                p_value: candidate.p_value,
                sample_size: candidate.sample_size,
                fold_change: candidate.fold_change,
                ..Default::default()
            },
            score,
            experimental_context: candidate.experimental_context.clone(),
            source_text: candidate.source_text.clone(),
            linked_entities,
            evidence_relations: Vec::new(),
            merged_from: Vec::new(),
            review_status: ReviewStatus::Pending,
            created_at: timestamp,
            updated_at: timestamp,
            version: 1,
            origin: candidate.origin.clone(),
        }
    }

    /// Text used for semantic comparison: intervention, mechanism, phenotype,
    /// and the grounded quote.
    pub fn combined_text(&self) -> String {
        let mut parts: Vec<&str> = Vec::with_capacity(4);
        if let Some(i) = self.pico.intervention.as_deref() {
            parts.push(i);
        }
        if let Some(m) = self.bio_mechanism.as_deref() {
            parts.push(m);
        }
        if let Some(p) = self.phenotype.as_deref() {
            parts.push(p);
        }
        parts.push(&self.source_text);
        parts.join(" ")
    }

    pub fn year(&self) -> Option<i32> {
        self.source.year
    }
}

/// Write records as a JSON array (canonical form, see [`crate::graph::canonical_json`]).
pub fn write_records(path: &std::path::Path, records: &[EvidenceRecord]) -> std::io::Result<()> {
    let value = serde_json::to_value(records).expect("records serialize");
    std::fs::write(path, crate::graph::canonical_json(&value))
}

/// Read a JSON array of evidence records; unknown extra fields are tolerated.
pub fn read_records(path: &std::path::Path) -> Result<Vec<EvidenceRecord>, std::io::Error> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::corpus::SectionLabel;
    use crate::score::{Grade, QualityScore};

    pub(crate) fn minimal_record(id: &str, doc: &str, year: Option<i32>) -> EvidenceRecord {
        EvidenceRecord {
            evidence_id: id.into(),
            source: SourceMeta {
                doc_id: doc.into(),
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
            pico: Pico::default(),
            core_entities: vec![],
            bio_mechanism: None,
            phenotype: None,
            study_design: StudyDesign::Unknown,
            clinical_stage: ClinicalStage::Unknown,
            statistics: Statistics::default(),
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
            source_text: "quote".into(),
            linked_entities: vec![],
            evidence_relations: vec![],
            merged_from: vec![],
            review_status: ReviewStatus::Pending,
            created_at: default_run_timestamp(),
            updated_at: default_run_timestamp(),
            version: 1,
            origin: Origin {
                doc_id: doc.into(),
                chunk_index: 0,
                section_label: SectionLabel::Results,
            },
        }
    }

    #[test]
    fn record_serde_round_trip_uses_release_field_names() {
        let record = minimal_record("hcc-000001", "10.1/x", Some(2021));
        let json = serde_json::to_value(&record).unwrap();
        for key in [
            "evidence_id",
            "source",
            "pico",
            "core_entities",
            "study_design",
            "clinical_stage",
            "statistics",
            "score",
            "source_text",
            "linked_entities",
            "evidence_relations",
            "merged_from",
            "review_status",
            "created_at",
            "updated_at",
            "version",
        ] {
            assert!(json.get(key).is_some(), "missing key {key}");
        }
        assert_eq!(json["review_status"], "pending");
        assert_eq!(json["created_at"], "2026-01-01T00:00:00Z");
        let back: EvidenceRecord = serde_json::from_value(json).unwrap();
        assert_eq!(back, record);
    }

    #[test]
    fn reader_tolerates_unknown_extra_fields() {
        let record = minimal_record("e1", "d1", None);
        let mut json = serde_json::to_value(&record).unwrap();
        json["future_field"] = serde_json::json!({"nested": true});
        let back: EvidenceRecord = serde_json::from_value(json).unwrap();
        assert_eq!(back, record);
    }

    #[test]
    fn combined_text_concatenates_in_fixed_order() {
        let mut record = minimal_record("e1", "d1", None);
        record.pico.intervention = Some("sorafenib".into());
        record.bio_mechanism = Some("RAF inhibition".into());
        record.phenotype = Some("reduced viability".into());
        assert_eq!(
            record.combined_text(),
            "sorafenib RAF inhibition reduced viability quote"
        );
    }
}
