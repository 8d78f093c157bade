//! Corpus ingestion: plain-text articles plus bibliographic metadata in,
//! canonical sections and overlapping fixed-window chunks out.
//!
//! All offsets and window sizes count Unicode scalar values so chunking is
//! deterministic across platforms.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use thiserror::Error;

/// Canonical scientific section labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SectionLabel {
    Abstract,
    Introduction,
    Methods,
    Results,
    Discussion,
    Conclusion,
    References,
    Other,
}

impl std::fmt::Display for SectionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SectionLabel::Abstract => "abstract",
            SectionLabel::Introduction => "introduction",
            SectionLabel::Methods => "methods",
            SectionLabel::Results => "results",
            SectionLabel::Discussion => "discussion",
            SectionLabel::Conclusion => "conclusion",
            SectionLabel::References => "references",
            SectionLabel::Other => "other",
        };
        f.write_str(s)
    }
}

/// Journal quartile rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quartile {
    Q1,
    Q2,
    Q3,
    Q4,
}

/// One contiguous section of an article body.
///
/// `heading` keeps the raw heading line (when one was detected) so sections
/// labeled `other` can still be checked against the low-information list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub label: SectionLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading: Option<String>,
    pub text: String,
}

/// Bibliographic metadata as supplied in sidecar files. All fields optional;
/// manual records override automatic ones field-wise.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DocumentMeta {
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
}

impl DocumentMeta {
    /// Field-wise merge: any field present in `manual` wins over `auto`.
    pub fn merged(auto: &DocumentMeta, manual: Option<&DocumentMeta>) -> DocumentMeta {
        let mut out = auto.clone();
        if let Some(m) = manual {
            if m.doi.is_some() {
                out.doi = m.doi.clone();
            }
            if m.title.is_some() {
                out.title = m.title.clone();
            }
            if m.authors.is_some() {
                out.authors = m.authors.clone();
            }
            if m.journal.is_some() {
                out.journal = m.journal.clone();
            }
            if m.year.is_some() {
                out.year = m.year;
            }
            if m.citation_count.is_some() {
                out.citation_count = m.citation_count;
            }
            if m.impact_factor.is_some() {
                out.impact_factor = m.impact_factor;
            }
            if m.quartile.is_some() {
                out.quartile = m.quartile;
            }
        }
        out
    }
}

/// An ingested article: merged metadata plus ordered sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    #[serde(flatten)]
    pub meta: DocumentMeta,
    pub sections: Vec<Section>,
}

/// A fixed-window chunk of one section. Offsets are per-section character
/// indexes (Unicode scalar values), `[start_offset, end_offset)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chunk {
    pub doc_id: String,
    pub section_label: SectionLabel,
    pub start_offset: usize,
    pub end_offset: usize,
    pub text: String,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("article body is empty")]
    EmptyBody,
    #[error("neither DOI nor title present; cannot derive a document identity")]
    MissingIdentity,
    #[error(
        "invalid chunk window: window {window} must be positive and greater than overlap {overlap}"
    )]
    InvalidWindow { window: usize, overlap: usize },
}

/// Configuration for section detection and exclusion.
#[derive(Debug, Clone)]
pub struct SectionConfig {
    /// heading synonym (normalized) -> canonical label
    pub synonyms: BTreeMap<String, SectionLabel>,
    /// normalized headings excluded from extraction even when labeled `other`
    pub low_information: Vec<String>,
}

impl Default for SectionConfig {
    fn default() -> Self {
        let mut synonyms = BTreeMap::new();
        let table: &[(&str, SectionLabel)] = &[
            ("abstract", SectionLabel::Abstract),
            ("summary", SectionLabel::Abstract),
            ("introduction", SectionLabel::Introduction),
            ("background", SectionLabel::Introduction),
            ("methods", SectionLabel::Methods),
            ("method", SectionLabel::Methods),
            ("materials and methods", SectionLabel::Methods),
            ("material and methods", SectionLabel::Methods),
            ("patients and methods", SectionLabel::Methods),
            ("methodology", SectionLabel::Methods),
            ("experimental procedures", SectionLabel::Methods),
            ("study design", SectionLabel::Methods),
            ("results", SectionLabel::Results),
            ("findings", SectionLabel::Results),
            ("results and discussion", SectionLabel::Results),
            ("discussion", SectionLabel::Discussion),
            ("conclusion", SectionLabel::Conclusion),
            ("conclusions", SectionLabel::Conclusion),
            ("concluding remarks", SectionLabel::Conclusion),
            ("references", SectionLabel::References),
            ("bibliography", SectionLabel::References),
            ("literature cited", SectionLabel::References),
        ];
        for (k, v) in table {
            synonyms.insert((*k).to_string(), *v);
        }
        SectionConfig {
            synonyms,
            low_information: [
                "references",
                "acknowledgements",
                "acknowledgments",
                "funding",
                "conflicts of interest",
                "conflict of interest",
                "supplementary",
                "supplementary material",
                "supplementary materials",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        }
    }
}

/// Chunking parameters, in characters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct ChunkConfig {
    pub window: usize,
    pub overlap: usize,
    pub min_len: usize,
}

impl Default for ChunkConfig {
    fn default() -> Self {
        ChunkConfig {
            window: 3000,
            overlap: 300,
            min_len: 500,
        }
    }
}

/// Ingest one article body with its metadata records.
///
/// Manual metadata overrides automatic metadata field by field. The document
/// id is the normalized DOI when present, otherwise a stable 128-bit hash of
/// the normalized title.
pub fn ingest_document(
    body: &str,
    auto_meta: &DocumentMeta,
    manual_meta: Option<&DocumentMeta>,
    sections: &SectionConfig,
) -> Result<Document, CorpusError> {
    if body.trim().is_empty() {
        return Err(CorpusError::EmptyBody);
    }
    let meta = DocumentMeta::merged(auto_meta, manual_meta);
    let doc_id = derive_doc_id(&meta)?;
    Ok(Document {
        doc_id,
        meta,
        sections: split_sections(body, sections),
    })
}

/// doc_id derivation: lowercased, trimmed DOI; else `t:` plus a 128-bit hash
/// of the whitespace-collapsed lowercase title.
pub fn derive_doc_id(meta: &DocumentMeta) -> Result<String, CorpusError> {
    if let Some(doi) = meta.doi.as_deref() {
        let doi = doi.trim().to_lowercase();
        if !doi.is_empty() {
            return Ok(doi);
        }
    }
    if let Some(title) = meta.title.as_deref() {
        let normalized = normalize_ws(title).to_lowercase();
        if !normalized.is_empty() {
            let digest = Sha256::digest(normalized.as_bytes());
            let hex: String = digest[..16].iter().map(|b| format!("{b:02x}")).collect();
            return Ok(format!("t:{hex}"));
        }
    }
    Err(CorpusError::MissingIdentity)
}

/// Collapse whitespace runs into single spaces and trim the ends.
pub fn normalize_ws(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_ws = true;
    for c in text.chars() {
        if c.is_whitespace() {
            if !in_ws {
                out.push(' ');
            }
            in_ws = true;
        } else {
            out.push(c);
            in_ws = false;
        }
    }
    if out.ends_with(' ') {
        out.pop();
    }
    out
}

fn normalize_heading(line: &str) -> String {
    let mut s = line.trim();
    // strip leading numbering ("2.", "3.1", "IV.")
    if let Some(pos) = s.find(' ') {
        let head = &s[..pos];
        let numbering = head.chars().all(|c| {
            c.is_ascii_digit()
                || c == '.'
                || c == ')'
                || matches!(c, 'i' | 'v' | 'x' | 'I' | 'V' | 'X')
        }) && head.chars().any(|c| c.is_ascii_digit() || c == '.');
        if numbering {
            s = s[pos..].trim_start();
        }
    }
    s.trim_end_matches(':').trim().to_lowercase()
}

fn looks_like_heading(line: &str, cfg: &SectionConfig) -> bool {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.chars().count() > 64 {
        return false;
    }
    let normalized = normalize_heading(trimmed);
    if cfg.synonyms.contains_key(&normalized) || cfg.low_information.contains(&normalized) {
        return true;
    }
    // Unmatched headings: short title-cased or all-caps lines with no
    // sentence punctuation become `other` sections.
    let words: Vec<&str> = trimmed.split_whitespace().collect();
    if words.len() > 5 || trimmed.chars().count() > 48 {
        return false;
    }
    if trimmed.ends_with('.') || trimmed.contains(';') || trimmed.ends_with(',') {
        return false;
    }
    let alphabetic_words: Vec<&str> = words
        .iter()
        .filter(|w| w.chars().next().map(|c| c.is_alphabetic()).unwrap_or(false))
        .copied()
        .collect();
    if alphabetic_words.is_empty() {
        return false;
    }
    let all_caps = trimmed
        .chars()
        .filter(|c| c.is_alphabetic())
        .all(|c| c.is_uppercase());
    let title_case = alphabetic_words
        .iter()
        .all(|w| w.chars().next().unwrap().is_uppercase());
    all_caps || title_case
}

/// Split an article body into labeled sections.
///
/// A line is treated as a heading when it matches the synonym table, the
/// low-information list, or the short title-case pattern. Text before the
/// first heading becomes an unlabeled `other` section. Section text is always
/// a contiguous substring of the body.
pub fn split_sections(body: &str, cfg: &SectionConfig) -> Vec<Section> {
    let mut sections: Vec<Section> = Vec::new();
    let mut current_label = SectionLabel::Other;
    let mut current_heading: Option<String> = None;
    let mut start = 0usize; // byte offset of current section text
    let mut saw_heading = false;

    let mut push = |label: SectionLabel, heading: Option<String>, text: &str| {
        let trimmed = text.trim();
        if !trimmed.is_empty() {
            sections.push(Section {
                label,
                heading,
                text: trimmed.to_string(),
            });
        }
    };

    let mut offset = 0usize;
    for line in body.split_inclusive('\n') {
        if looks_like_heading(line, cfg) {
            push(current_label, current_heading.take(), &body[start..offset]);
            let heading_text = line.trim().to_string();
            let normalized = normalize_heading(&heading_text);
            current_label = cfg
                .synonyms
                .get(&normalized)
                .copied()
                .unwrap_or(SectionLabel::Other);
            current_heading = Some(heading_text);
            start = offset + line.len();
            saw_heading = true;
        }
        offset += line.len();
    }
    push(current_label, current_heading.take(), &body[start..]);

    // A body with no headings at all is a single `other` section.
    if sections.is_empty() && !saw_heading {
        let trimmed = body.trim();
        if !trimmed.is_empty() {
            sections.push(Section {
                label: SectionLabel::Other,
                heading: None,
                text: trimmed.to_string(),
            });
        }
    }
    sections
}

/// Keep only extraction-eligible sections: drop `references` and anything
/// whose heading appears in the configured low-information list.
pub fn segment_sections(doc: &Document, cfg: &SectionConfig) -> Vec<Section> {
    doc.sections
        .iter()
        .filter(|s| {
            if s.label == SectionLabel::References {
                return false;
            }
            if let Some(h) = &s.heading {
                if cfg.low_information.contains(&normalize_heading(h)) {
                    return false;
                }
            }
            true
        })
        .cloned()
        .collect()
}

/// Split sections into overlapping fixed-window chunks.
///
/// Chunks start at offsets 0, window−overlap, 2(window−overlap), …; the last
/// chunk is truncated at the section end and chunks shorter than `min_len`
/// are dropped.
pub fn chunk_sections(
    doc_id: &str,
    sections: &[Section],
    cfg: &ChunkConfig,
) -> Result<Vec<Chunk>, CorpusError> {
    if cfg.window == 0 || cfg.overlap >= cfg.window {
        return Err(CorpusError::InvalidWindow {
            window: cfg.window,
            overlap: cfg.overlap,
        });
    }
    let stride = cfg.window - cfg.overlap;
    let mut chunks = Vec::new();
    for section in sections {
        let chars: Vec<char> = section.text.chars().collect();
        let len = chars.len();
        let mut start = 0usize;
        while start < len {
            let end = (start + cfg.window).min(len);
            if end - start >= cfg.min_len {
                chunks.push(Chunk {
                    doc_id: doc_id.to_string(),
                    section_label: section.label,
                    start_offset: start,
                    end_offset: end,
                    text: chars[start..end].iter().collect(),
                });
            }
            if end == len {
                break;
            }
            start += stride;
        }
    }
    Ok(chunks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(doi: Option<&str>, title: Option<&str>) -> DocumentMeta {
        DocumentMeta {
            doi: doi.map(String::from),
            title: title.map(String::from),
            ..Default::default()
        }
    }

    fn section(label: SectionLabel, len: usize) -> Section {
        Section {
            label,
            heading: None,
            text: "a".repeat(len),
        }
    }

    #[test]
    fn manual_meta_overrides_auto() {
        let auto = DocumentMeta {
            journal: Some("J1".into()),
            title: Some("T".into()),
            year: Some(2020),
            ..Default::default()
        };
        let manual = DocumentMeta {
            journal: Some("J2".into()),
            ..Default::default()
        };
        let doc =
            ingest_document("body text", &auto, Some(&manual), &SectionConfig::default()).unwrap();
        assert_eq!(doc.meta.journal.as_deref(), Some("J2"));
        assert_eq!(doc.meta.year, Some(2020));
    }

    #[test]
    fn absent_manual_meta_is_identity() {
        let auto = meta(Some("10.1000/X"), Some("Title"));
        let doc = ingest_document("body", &auto, None, &SectionConfig::default()).unwrap();
        assert_eq!(doc.meta, auto);
    }

    #[test]
    fn missing_identity_is_an_error() {
        let err = ingest_document(
            "x",
            &DocumentMeta::default(),
            None,
            &SectionConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, CorpusError::MissingIdentity));
    }

    #[test]
    fn empty_body_is_an_error() {
        let err = ingest_document(
            "  \n ",
            &meta(None, Some("t")),
            None,
            &SectionConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, CorpusError::EmptyBody));
    }

    #[test]
    fn doc_id_prefers_normalized_doi() {
        assert_eq!(
            derive_doc_id(&meta(Some("  10.1000/ABC "), Some("t"))).unwrap(),
            "10.1000/abc"
        );
    }

    #[test]
    fn doc_id_from_title_is_stable_and_case_insensitive() {
        let a = derive_doc_id(&meta(None, Some("Sorafenib  in HCC"))).unwrap();
        let b = derive_doc_id(&meta(None, Some("sorafenib in hcc"))).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("t:"));
        assert_eq!(a.len(), 2 + 32); // 128-bit hex
    }

    #[test]
    fn ingest_is_deterministic() {
        let body = "Abstract\nSome text here.\nResults\nMore text.";
        let m = meta(None, Some("A Title"));
        let cfg = SectionConfig::default();
        let a = ingest_document(body, &m, None, &cfg).unwrap();
        let b = ingest_document(body, &m, None, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn split_detects_synonym_headings() {
        let body = "Materials and Methods\nWe did things.\n2. Results\nIt worked.\n";
        let sections = split_sections(body, &SectionConfig::default());
        assert_eq!(sections.len(), 2);
        assert_eq!(sections[0].label, SectionLabel::Methods);
        assert_eq!(sections[0].text, "We did things.");
        assert_eq!(sections[1].label, SectionLabel::Results);
    }

    #[test]
    fn section_text_is_substring_of_body() {
        let body = "Abstract\nFirst paragraph.\n\nResults\nSecond paragraph,\nspanning lines.\n";
        for s in split_sections(body, &SectionConfig::default()) {
            assert!(body.contains(&s.text), "section not a substring: {:?}", s);
        }
    }

    #[test]
    fn preamble_before_first_heading_is_other() {
        let body = "Some untitled preamble text.\nResults\nFindings here.\n";
        let sections = split_sections(body, &SectionConfig::default());
        assert_eq!(sections[0].label, SectionLabel::Other);
        assert_eq!(sections[0].heading, None);
        assert_eq!(sections[1].label, SectionLabel::Results);
    }

    #[test]
    fn segment_drops_references_and_low_information() {
        let doc = Document {
            doc_id: "d".into(),
            meta: DocumentMeta::default(),
            sections: vec![
                section(SectionLabel::Methods, 10),
                section(SectionLabel::Results, 10),
                section(SectionLabel::References, 10),
            ],
        };
        let kept = segment_sections(&doc, &SectionConfig::default());
        assert_eq!(kept.len(), 2);
        assert_eq!(kept[0].label, SectionLabel::Methods);
        assert_eq!(kept[1].label, SectionLabel::Results);
    }

    #[test]
    fn segment_all_excluded_returns_empty() {
        let doc = Document {
            doc_id: "d".into(),
            meta: DocumentMeta::default(),
            sections: vec![section(SectionLabel::References, 10)],
        };
        assert!(segment_sections(&doc, &SectionConfig::default()).is_empty());
    }

    #[test]
    fn segment_checks_other_headings_against_low_information_set() {
        let doc = Document {
            doc_id: "d".into(),
            meta: DocumentMeta::default(),
            sections: vec![Section {
                label: SectionLabel::Other,
                heading: Some("Acknowledgements".into()),
                text: "We thank everyone.".into(),
            }],
        };
        assert!(segment_sections(&doc, &SectionConfig::default()).is_empty());
    }

    #[test]
    fn chunk_3500_chars_gives_two_stated_offsets() {
        let chunks = chunk_sections(
            "d",
            &[section(SectionLabel::Results, 3500)],
            &ChunkConfig::default(),
        )
        .unwrap();
        let spans: Vec<(usize, usize)> = chunks
            .iter()
            .map(|c| (c.start_offset, c.end_offset))
            .collect();
        assert_eq!(spans, vec![(0, 3000), (2700, 3500)]);
    }

    #[test]
    fn chunk_7000_chars_gives_three_stated_offsets() {
        let chunks = chunk_sections(
            "d",
            &[section(SectionLabel::Results, 7000)],
            &ChunkConfig::default(),
        )
        .unwrap();
        let spans: Vec<(usize, usize)> = chunks
            .iter()
            .map(|c| (c.start_offset, c.end_offset))
            .collect();
        assert_eq!(spans, vec![(0, 3000), (2700, 5700), (5400, 7000)]);
    }

    #[test]
    fn short_section_is_dropped() {
        let chunks = chunk_sections(
            "d",
            &[section(SectionLabel::Results, 400)],
            &ChunkConfig::default(),
        )
        .unwrap();
        assert!(chunks.is_empty());
    }

    #[test]
    fn invalid_window_is_an_error() {
        let cfg = ChunkConfig {
            window: 100,
            overlap: 100,
            min_len: 1,
        };
        assert!(matches!(
            chunk_sections("d", &[], &cfg),
            Err(CorpusError::InvalidWindow { .. })
        ));
    }

    #[test]
    fn chunk_text_matches_offsets_and_section_substring() {
        let text: String = ('a'..='z').cycle().take(4321).collect();
        let sec = Section {
            label: SectionLabel::Results,
            heading: None,
            text: text.clone(),
        };
        let chunks = chunk_sections("d", &[sec], &ChunkConfig::default()).unwrap();
        let chars: Vec<char> = text.chars().collect();
        for c in &chunks {
            assert_eq!(c.end_offset - c.start_offset, c.text.chars().count());
            let expected: String = chars[c.start_offset..c.end_offset].iter().collect();
            assert_eq!(c.text, expected);
            assert!(text.contains(&c.text));
        }
    }

    #[test]
    fn offsets_count_unicode_scalars_not_bytes() {
        // 600 two-byte characters: window math must use chars.
        let sec = Section {
            label: SectionLabel::Results,
            heading: None,
            text: "é".repeat(600),
        };
        let cfg = ChunkConfig {
            window: 500,
            overlap: 100,
            min_len: 100,
        };
        let chunks = chunk_sections("d", &[sec], &cfg).unwrap();
        let spans: Vec<(usize, usize)> = chunks
            .iter()
            .map(|c| (c.start_offset, c.end_offset))
            .collect();
        assert_eq!(spans, vec![(0, 500), (400, 600)]);
        assert_eq!(chunks[1].text.chars().count(), 200);
    }
}
