//! Entity normalization: resolve raw mentions to canonical vocabulary
//! concepts through a fixed cascade of exact, alias, symbol, and
//! precision-oriented fuzzy matching.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extract::{CandidateEvidence, EntityMention, EntityType};

/// One canonical concept in the linking vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabularyEntry {
    pub concept_id: String,
    pub canonical_name: String,
    pub semantic_type: EntityType,
    pub aliases: Vec<String>,
    pub source_db: String,
}

/// How a mention was resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkMethod {
    Exact,
    Alias,
    Symbol,
    Fuzzy,
    Unlinked,
}

/// A raw mention resolved (or not) to a vocabulary concept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityLink {
    pub raw_name: String,
    pub semantic_type: EntityType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concept_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub canonical_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_db: Option<String>,
    pub link_score: f64,
    pub method: LinkMethod,
}

impl EntityLink {
    pub fn is_linked(&self) -> bool {
        self.method != LinkMethod::Unlinked
    }
}

#[derive(Debug, Error)]
pub enum NormalizeError {
    #[error("vocabulary parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("duplicate concept id {0}")]
    DuplicateConcept(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Fuzzy-matching parameters: acceptance threshold on normalized edit
/// similarity and the required margin to the best competing concept.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct FuzzyConfig {
    pub threshold: f64,
    pub margin: f64,
}

impl Default for FuzzyConfig {
    fn default() -> Self {
        FuzzyConfig {
            threshold: 0.92,
            margin: 0.03,
        }
    }
}

/// In-memory vocabulary with exact-name, alias, and gene-symbol indexes.
#[derive(Debug, Default)]
pub struct Vocabulary {
    entries: BTreeMap<String, VocabularyEntry>,
    /// case-folded canonical name -> concept ids (sorted)
    exact: BTreeMap<String, Vec<String>>,
    /// case-folded alias -> concept ids (sorted)
    alias: BTreeMap<String, Vec<String>>,
    /// normalized gene symbol -> concept ids (sorted), gene entries only
    symbol: BTreeMap<String, Vec<String>>,
}

impl Vocabulary {
    pub fn from_entries(
        entries: impl IntoIterator<Item = VocabularyEntry>,
    ) -> Result<Self, NormalizeError> {
        let mut vocab = Vocabulary::default();
        for entry in entries {
            vocab.insert(entry)?;
        }
        Ok(vocab)
    }

    fn insert(&mut self, entry: VocabularyEntry) -> Result<(), NormalizeError> {
        if entry.canonical_name.is_empty() {
            return Err(NormalizeError::Parse {
                line: 0,
                reason: format!("concept {} has an empty canonical name", entry.concept_id),
            });
        }
        if self.entries.contains_key(&entry.concept_id) {
            return Err(NormalizeError::DuplicateConcept(entry.concept_id));
        }
        let id = entry.concept_id.clone();
        push_index(&mut self.exact, fold(&entry.canonical_name), &id);
        for alias in &entry.aliases {
            push_index(&mut self.alias, fold(alias), &id);
        }
        if entry.semantic_type == EntityType::Gene {
            push_index(
                &mut self.symbol,
                normalize_symbol(&entry.canonical_name),
                &id,
            );
            for alias in &entry.aliases {
                push_index(&mut self.symbol, normalize_symbol(alias), &id);
            }
        }
        self.entries.insert(id, entry);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, concept_id: &str) -> Option<&VocabularyEntry> {
        self.entries.get(concept_id)
    }

    pub fn entries(&self) -> impl Iterator<Item = &VocabularyEntry> {
        self.entries.values()
    }
}

fn push_index(index: &mut BTreeMap<String, Vec<String>>, key: String, id: &str) {
    if key.is_empty() {
        return;
    }
    let ids = index.entry(key).or_default();
    if !ids.contains(&id.to_string()) {
        ids.push(id.to_string());
        ids.sort();
    }
}

fn fold(s: &str) -> String {
    s.trim().to_lowercase()
}

/// Gene-symbol normalization: strip punctuation and hyphens, transliterate
/// Greek letters to their Latin initials, uppercase.
pub fn normalize_symbol(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        let mapped = match c {
            'α' | 'Α' => Some('A'),
            'β' | 'Β' => Some('B'),
            'γ' | 'Γ' => Some('G'),
            'δ' | 'Δ' => Some('D'),
            'ε' | 'Ε' => Some('E'),
            'κ' | 'Κ' => Some('K'),
            'λ' | 'Λ' => Some('L'),
            'μ' | 'Μ' => Some('M'),
            'σ' | 'Σ' => Some('S'),
            'τ' | 'Τ' => Some('T'),
            'ω' | 'Ω' => Some('O'),
            c if c.is_alphanumeric() => Some(c.to_ascii_uppercase()),
            _ => None,
        };
        if let Some(m) = mapped {
            out.push(m);
        }
    }
    out
}

/// Load a vocabulary from a tab-separated file with columns
/// `concept_id  canonical_name  semantic_type  aliases(|)  source_db`.
/// Lines starting with `#` are comments.
pub fn load_vocabulary(path: &Path) -> Result<Vocabulary, NormalizeError> {
    let text = std::fs::read_to_string(path)?;
    let mut vocab = Vocabulary::default();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 5 {
            return Err(NormalizeError::Parse {
                line: line_no,
                reason: format!("expected 5 tab-separated columns, got {}", cols.len()),
            });
        }
        let semantic_type = match cols[2].trim() {
            "Gene" => EntityType::Gene,
            "Drug" => EntityType::Drug,
            "Disease" => EntityType::Disease,
            "Phenotype" => EntityType::Phenotype,
            "Pathway" => EntityType::Pathway,
            "Other" => EntityType::Other,
            other => {
                return Err(NormalizeError::Parse {
                    line: line_no,
                    reason: format!("unknown semantic type {other:?}"),
                })
            }
        };
        let aliases: Vec<String> = cols[3]
            .split('|')
            .map(str::trim)
            .filter(|a| !a.is_empty())
            .map(String::from)
            .collect();
        let entry = VocabularyEntry {
            concept_id: cols[0].trim().to_string(),
            canonical_name: cols[1].trim().to_string(),
            semantic_type,
            aliases,
            source_db: cols[4].trim().to_string(),
        };
        if entry.concept_id.is_empty() {
            return Err(NormalizeError::Parse {
                line: line_no,
                reason: "empty concept_id".into(),
            });
        }
        if entry.canonical_name.is_empty() {
            return Err(NormalizeError::Parse {
                line: line_no,
                reason: "empty canonical_name".into(),
            });
        }
        vocab.insert(entry)?;
    }
    Ok(vocab)
}

/// Normalized edit similarity: 1 − levenshtein / max length.
pub fn edit_similarity(a: &str, b: &str) -> f64 {
    let max_len = a.chars().count().max(b.chars().count());
    if max_len == 0 {
        return 1.0;
    }
    1.0 - levenshtein(a, b) as f64 / max_len as f64
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let cost = usize::from(ca != cb);
            cur[j + 1] = (prev[j + 1] + 1).min(cur[j] + 1).min(prev[j] + cost);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn linked(
    mention: &EntityMention,
    entry: &VocabularyEntry,
    score: f64,
    method: LinkMethod,
) -> EntityLink {
    EntityLink {
        raw_name: mention.raw_name.clone(),
        semantic_type: mention.semantic_type,
        concept_id: Some(entry.concept_id.clone()),
        canonical_name: Some(entry.canonical_name.clone()),
        source_db: Some(entry.source_db.clone()),
        link_score: score,
        method,
    }
}

fn unlinked(mention: &EntityMention) -> EntityLink {
    EntityLink {
        raw_name: mention.raw_name.clone(),
        semantic_type: mention.semantic_type,
        concept_id: None,
        canonical_name: None,
        source_db: None,
        link_score: 0.0,
        method: LinkMethod::Unlinked,
    }
}

/// Resolve one mention through the cascade. The first successful step wins;
/// ties within a step go to the lexicographically smallest concept id.
pub fn link_entity(mention: &EntityMention, vocab: &Vocabulary, fuzzy: &FuzzyConfig) -> EntityLink {
    let folded = fold(&mention.raw_name);

    // (1) exact canonical-name match
    if let Some(ids) = vocab.exact.get(&folded) {
        let entry = &vocab.entries[&ids[0]];
        return linked(mention, entry, 1.0, LinkMethod::Exact);
    }
    // (2) curated alias match
    if let Some(ids) = vocab.alias.get(&folded) {
        let entry = &vocab.entries[&ids[0]];
        return linked(mention, entry, 1.0, LinkMethod::Alias);
    }
    // (3) symbol normalization retry, gene mentions only
    if mention.semantic_type == EntityType::Gene {
        let symbol = normalize_symbol(&mention.raw_name);
        if let Some(ids) = vocab.symbol.get(&symbol) {
            let entry = &vocab.entries[&ids[0]];
            return linked(mention, entry, 1.0, LinkMethod::Symbol);
        }
    }
    // (4) precision-oriented fuzzy match within the same semantic type
    let mut best: Option<(f64, &VocabularyEntry)> = None;
    let mut second_best_other_concept: f64 = 0.0;
    for entry in vocab.entries.values() {
        if entry.semantic_type != mention.semantic_type {
            continue;
        }
        let mut entry_score: f64 = edit_similarity(&folded, &fold(&entry.canonical_name));
        for alias in &entry.aliases {
            entry_score = entry_score.max(edit_similarity(&folded, &fold(alias)));
        }
        match &mut best {
            None => best = Some((entry_score, entry)),
            Some((best_score, best_entry)) => {
                if entry_score > *best_score
                    || (entry_score == *best_score && entry.concept_id < best_entry.concept_id)
                {
                    second_best_other_concept = second_best_other_concept.max(*best_score);
                    *best_score = entry_score;
                    *best_entry = entry;
                } else {
                    second_best_other_concept = second_best_other_concept.max(entry_score);
                }
            }
        }
    }
    if let Some((score, entry)) = best {
        if score >= fuzzy.threshold && score - second_best_other_concept >= fuzzy.margin {
            return linked(mention, entry, score, LinkMethod::Fuzzy);
        }
    }
    unlinked(mention)
}

/// Link every core entity of a candidate and collect the deduplicated
/// concept ids in first-appearance order.
pub fn normalize_record(
    candidate: &CandidateEvidence,
    vocab: &Vocabulary,
    fuzzy: &FuzzyConfig,
) -> (Vec<EntityLink>, Vec<String>) {
    let links: Vec<EntityLink> = candidate
        .core_entities
        .iter()
        .map(|m| link_entity(m, vocab, fuzzy))
        .collect();
    let mut seen = std::collections::BTreeSet::new();
    let mut linked_entities = Vec::new();
    for link in &links {
        if let Some(id) = &link.concept_id {
            if seen.insert(id.clone()) {
                linked_entities.push(id.clone());
            }
        }
    }
    (links, linked_entities)
}
