//! The directed evidence-centric graph: evidence nodes, normalized entity
//! nodes, LINKED_TO edges, and typed evidence-to-evidence relations, with
//! canonical serialization, statistics, and query operations.

mod io;
mod stats;

pub use io::{canonical_json, deserialize, serialize, to_canonical_string, write_canonical};
pub use stats::{compute_stats, record_stats, GraphStats, RecordStats};

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encode::TextEncoder;
use crate::extract::{ClinicalStage, EntityType, StudyDesign};
use crate::normalize::EntityLink;
use crate::record::EvidenceRecord;
use crate::relate::{EdgeOrigin, RelationEdge, RelationType};

/// Release-level metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphMetadata {
    pub disease: String,
    pub version: String,
    pub creator: String,
    #[serde(with = "crate::record::ts")]
    pub updated_at: DateTime<Utc>,
}

/// Flattened evidence-node attributes carried in the graph layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceNodeAttr {
    pub evidence_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub journal: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
    pub study_design: StudyDesign,
    pub clinical_stage: ClinicalStage,
    pub disease: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bio_mechanism: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phenotype: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervention: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study_object: Option<String>,
    pub linked_entities: Vec<String>,
    pub composite_score: f64,
    /// grounded quote, kept for retrieval contexts
    pub source_text: String,
}

impl EvidenceNodeAttr {
    pub fn from_record(record: &EvidenceRecord, disease: &str) -> Self {
        EvidenceNodeAttr {
            evidence_id: record.evidence_id.clone(),
            doi: record.source.doi.clone(),
            title: record.source.title.clone(),
            journal: record.source.journal.clone(),
            year: record.source.year,
            study_design: record.study_design,
            clinical_stage: record.clinical_stage,
            disease: disease.to_string(),
            bio_mechanism: record.bio_mechanism.clone(),
            phenotype: record.phenotype.clone(),
            intervention: record.pico.intervention.clone(),
            study_object: record.pico.study_object.clone(),
            linked_entities: record.linked_entities.clone(),
            composite_score: record.score.composite,
            source_text: record.source_text.clone(),
        }
    }

    /// Context text used for retrieval ranking.
    pub fn context_text(&self) -> String {
        let mut parts: Vec<&str> = Vec::with_capacity(4);
        if let Some(i) = self.intervention.as_deref() {
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
}

/// Normalized entity-node attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityNodeAttr {
    pub canonical_name: String,
    pub semantic_type: EntityType,
    pub source_db: String,
}

/// Attributes of one evidence-to-entity edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkedToAttr {
    pub entity_type: EntityType,
    pub link_score: f64,
}

/// Attributes of one evidence-to-evidence edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationAttr {
    pub similarity: f64,
    pub rationale: String,
    #[serde(with = "crate::record::ts")]
    pub created_at: DateTime<Utc>,
    pub origin: EdgeOrigin,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("evidence node {0} does not exist")]
    UnknownEvidence(String),
    #[error("entity link for {0} is unlinked; only resolved links enter the graph")]
    UnlinkedEntity(String),
    #[error("edge endpoint {0} does not exist")]
    UnknownEndpoint(String),
    #[error("self-loop on {0}")]
    SelfLoop(String),
    #[error("duplicate edge {source_id} -> {target_id} ({relation})")]
    DuplicateEdge {
        source_id: String,
        target_id: String,
        relation: RelationType,
    },
    #[error("node {0} does not exist")]
    UnknownNode(String),
    #[error("graph file parse error: {0}")]
    Parse(String),
    #[error("graph schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// In-memory evidence graph with whole-file persistence.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceGraph {
    pub metadata: GraphMetadata,
    evidence: BTreeMap<String, EvidenceNodeAttr>,
    entities: BTreeMap<String, EntityNodeAttr>,
    linked_to: BTreeMap<(String, String), LinkedToAttr>,
    relations: BTreeMap<(String, String, RelationType), RelationAttr>,
}

impl EvidenceGraph {
    pub fn new(metadata: GraphMetadata) -> Self {
        EvidenceGraph {
            metadata,
            evidence: BTreeMap::new(),
            entities: BTreeMap::new(),
            linked_to: BTreeMap::new(),
            relations: BTreeMap::new(),
        }
    }

    pub fn evidence_nodes(&self) -> impl Iterator<Item = (&String, &EvidenceNodeAttr)> {
        self.evidence.iter()
    }

    pub fn entity_nodes(&self) -> impl Iterator<Item = (&String, &EntityNodeAttr)> {
        self.entities.iter()
    }

    pub fn linked_to_edges(&self) -> impl Iterator<Item = (&(String, String), &LinkedToAttr)> {
        self.linked_to.iter()
    }

    pub fn relation_edges(
        &self,
    ) -> impl Iterator<Item = (&(String, String, RelationType), &RelationAttr)> {
        self.relations.iter()
    }

    pub fn evidence_count(&self) -> usize {
        self.evidence.len()
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn node_count(&self) -> usize {
        self.evidence.len() + self.entities.len()
    }

    pub fn edge_count(&self) -> usize {
        self.linked_to.len() + self.relations.len()
    }

    pub fn evidence_attr(&self, id: &str) -> Option<&EvidenceNodeAttr> {
        self.evidence.get(id)
    }

    pub fn entity_attr(&self, id: &str) -> Option<&EntityNodeAttr> {
        self.entities.get(id)
    }

    pub fn has_node(&self, id: &str) -> bool {
        self.evidence.contains_key(id) || self.entities.contains_key(id)
    }

    /// Add or replace an evidence node, projecting the flattened attributes.
    pub fn upsert_evidence(&mut self, record: &EvidenceRecord) {
        let disease = self.metadata.disease.clone();
        let attr = EvidenceNodeAttr::from_record(record, &disease);
        self.evidence.insert(record.evidence_id.clone(), attr);
    }

    pub fn upsert_evidence_attr(&mut self, attr: EvidenceNodeAttr) {
        self.evidence.insert(attr.evidence_id.clone(), attr);
    }

    pub fn upsert_entity_attr(&mut self, concept_id: String, attr: EntityNodeAttr) {
        self.entities.insert(concept_id, attr);
    }

    /// Connect an evidence node to a resolved entity. Creates the entity node
    /// on first sight; re-linking the same pair updates the score instead of
    /// duplicating the edge.
    pub fn upsert_entity_link(
        &mut self,
        evidence_id: &str,
        link: &EntityLink,
    ) -> Result<(), GraphError> {
        if !self.evidence.contains_key(evidence_id) {
            return Err(GraphError::UnknownEvidence(evidence_id.to_string()));
        }
        let (Some(concept_id), Some(canonical_name)) =
            (link.concept_id.as_ref(), link.canonical_name.as_ref())
        else {
            return Err(GraphError::UnlinkedEntity(link.raw_name.clone()));
        };
        if !link.is_linked() {
            return Err(GraphError::UnlinkedEntity(link.raw_name.clone()));
        }
        self.entities
            .entry(concept_id.clone())
            .or_insert_with(|| EntityNodeAttr {
                canonical_name: canonical_name.clone(),
                semantic_type: link.semantic_type,
                source_db: link.source_db.clone().unwrap_or_default(),
            });
        self.linked_to.insert(
            (evidence_id.to_string(), concept_id.clone()),
            LinkedToAttr {
                entity_type: link.semantic_type,
                link_score: link.link_score,
            },
        );
        Ok(())
    }

    /// Append a typed relation edge between two existing evidence nodes.
    pub fn add_relation_edge(&mut self, edge: &RelationEdge) -> Result<(), GraphError> {
        if edge.source_id == edge.target_id {
            return Err(GraphError::SelfLoop(edge.source_id.clone()));
        }
        for endpoint in [&edge.source_id, &edge.target_id] {
            if !self.evidence.contains_key(endpoint) {
                return Err(GraphError::UnknownEndpoint(endpoint.clone()));
            }
        }
        let key = (
            edge.source_id.clone(),
            edge.target_id.clone(),
            edge.relation_type,
        );
        if self.relations.contains_key(&key) {
            return Err(GraphError::DuplicateEdge {
                source_id: edge.source_id.clone(),
                target_id: edge.target_id.clone(),
                relation: edge.relation_type,
            });
        }
        self.relations.insert(
            key,
            RelationAttr {
                similarity: edge.similarity,
                rationale: edge.rationale.clone(),
                created_at: edge.created_at,
                origin: edge.origin,
            },
        );
        Ok(())
    }

    /// Undirected adjacency over all nodes and both edge classes.
    pub fn adjacency(&self) -> BTreeMap<&str, BTreeSet<&str>> {
        let mut adj: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for id in self.evidence.keys() {
            adj.entry(id).or_default();
        }
        for id in self.entities.keys() {
            adj.entry(id).or_default();
        }
        for (evidence, entity) in self.linked_to.keys() {
            adj.entry(evidence).or_default().insert(entity);
            adj.entry(entity).or_default().insert(evidence);
        }
        for (source, target, _) in self.relations.keys() {
            adj.entry(source).or_default().insert(target);
            adj.entry(target).or_default().insert(source);
        }
        adj
    }

    /// Nodes reachable within `depth` undirected hops, excluding the seed.
    pub fn neighborhood(
        &self,
        node_id: &str,
        depth: usize,
    ) -> Result<BTreeSet<String>, GraphError> {
        if !self.has_node(node_id) {
            return Err(GraphError::UnknownNode(node_id.to_string()));
        }
        let adj = self.adjacency();
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        let mut queue: VecDeque<(&str, usize)> = VecDeque::new();
        seen.insert(node_id);
        queue.push_back((node_id, 0));
        while let Some((node, d)) = queue.pop_front() {
            if d == depth {
                continue;
            }
            if let Some(neighbors) = adj.get(node) {
                for n in neighbors {
                    if seen.insert(n) {
                        queue.push_back((n, d + 1));
                    }
                }
            }
        }
        seen.remove(node_id);
        Ok(seen.into_iter().map(String::from).collect())
    }

    /// Neighborhood-overlap proximity: |N(a) ∩ N(b)| / |N(a) ∪ N(b)| over
    /// depth-1 undirected neighborhoods; 0 when the union is empty.
    pub fn proximity(&self, a: &str, b: &str) -> Result<f64, GraphError> {
        let na = self.neighborhood(a, 1)?;
        let nb = self.neighborhood(b, 1)?;
        let union = na.union(&nb).count();
        if union == 0 {
            return Ok(0.0);
        }
        Ok(na.intersection(&nb).count() as f64 / union as f64)
    }

    /// Rank evidence nodes against a query by context-text cosine similarity.
    /// Filters apply before ranking; ties break by evidence id.
    pub fn retrieve_context(
        &self,
        query: &str,
        k: usize,
        encoder: &dyn TextEncoder,
        filter: &RetrievalFilter,
    ) -> Vec<RetrievedContext> {
        if k == 0 {
            return Vec::new();
        }
        let query_embedding = encoder.encode(query);
        let mut scored: Vec<RetrievedContext> = self
            .evidence
            .values()
            .filter(|attr| {
                filter.min_score.is_none_or(|m| attr.composite_score >= m)
                    && filter.study_design.is_none_or(|d| attr.study_design == d)
                    && filter
                        .min_source_text_chars
                        .is_none_or(|n| attr.source_text.chars().count() > n)
            })
            .map(|attr| {
                let context = attr.context_text();
                let similarity = crate::encode::cosine(&query_embedding, &encoder.encode(&context))
                    .unwrap_or(0.0);
                RetrievedContext {
                    evidence_id: attr.evidence_id.clone(),
                    similarity,
                    context,
                }
            })
            .collect();
        scored.sort_by(|x, y| {
            y.similarity
                .partial_cmp(&x.similarity)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| x.evidence_id.cmp(&y.evidence_id))
        });
        scored.truncate(k);
        scored
    }

    /// Relation identifiers grouped by source evidence id.
    pub fn relation_identifiers_by_source(&self) -> BTreeMap<String, Vec<String>> {
        let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (source, target, ty) in self.relations.keys() {
            out.entry(source.clone())
                .or_default()
                .push(format!("{source}|{target}|{ty}"));
        }
        out
    }

    /// Referential-integrity check: every edge endpoint exists, no self
    /// loops. Used after deserialization and in tests.
    pub fn validate(&self) -> Result<(), GraphError> {
        for (evidence, entity) in self.linked_to.keys() {
            if !self.evidence.contains_key(evidence) {
                return Err(GraphError::SchemaMismatch(format!(
                    "LINKED_TO edge references missing evidence node {evidence}"
                )));
            }
            if !self.entities.contains_key(entity) {
                return Err(GraphError::SchemaMismatch(format!(
                    "LINKED_TO edge references missing entity node {entity}"
                )));
            }
        }
        for (source, target, _) in self.relations.keys() {
            if source == target {
                return Err(GraphError::SchemaMismatch(format!("self-loop on {source}")));
            }
            for endpoint in [source, target] {
                if !self.evidence.contains_key(endpoint) {
                    return Err(GraphError::SchemaMismatch(format!(
                        "relation edge references missing evidence node {endpoint}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Optional pre-ranking filters for retrieval.
#[derive(Debug, Clone, Copy, Default)]
pub struct RetrievalFilter {
    pub min_score: Option<f64>,
    pub study_design: Option<StudyDesign>,
    pub min_source_text_chars: Option<usize>,
}

/// One retrieval hit.
#[derive(Debug, Clone, Serialize)]
pub struct RetrievedContext {
    pub evidence_id: String,
    pub similarity: f64,
    pub context: String,
}

/// Build a graph from fused records and relation edges.
pub fn build_graph(
    metadata: GraphMetadata,
    records: &[EvidenceRecord],
    edges: &[RelationEdge],
) -> Result<EvidenceGraph, GraphError> {
    let mut graph = EvidenceGraph::new(metadata);
    for record in records {
        graph.upsert_evidence(record);
    }
    for record in records {
        for link in &record.core_entities {
            if link.is_linked() {
                graph.upsert_entity_link(&record.evidence_id, link)?;
            }
        }
    }
    for edge in edges {
        graph.add_relation_edge(edge)?;
    }
    Ok(graph)
}
