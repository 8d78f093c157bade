//! Core library for building and evaluating evidence-centric knowledge bases
//! from full-text biomedical articles.
//!
//! The pipeline turns plain-text articles into structured evidence records —
//! PICO context, normalized entities, quality scores, provenance — fuses
//! duplicates, induces typed evidence-to-evidence relations, and maintains
//! the resulting directed graph together with retrieval, QA, and
//! link-prediction harnesses.

pub mod config;
pub mod corpus;
pub mod encode;
pub mod evaluate;
pub mod extract;
pub mod fuse;
pub mod graph;
pub mod normalize;
pub mod pipeline;
pub mod record;
pub mod relate;
pub mod score;

pub use config::{validate_config, RunConfig};
pub use corpus::{Chunk, Document, DocumentMeta, Section, SectionLabel};
pub use encode::{cosine, Embedding, HashedEncoder, TextEncoder};
pub use extract::{CandidateEvidence, EntityType, LlmBackend, MockBackend, PromptSet};
pub use fuse::{fingerprint, Fingerprint, FusionConfig};
pub use graph::{EvidenceGraph, GraphMetadata, GraphStats};
pub use normalize::{EntityLink, Vocabulary, VocabularyEntry};
pub use record::EvidenceRecord;
pub use relate::{RelationEdge, RelationType};
pub use score::{Grade, QualityScore, ScoringConfig};
