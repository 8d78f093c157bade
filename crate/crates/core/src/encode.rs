//! Text encoding contract used for semantic similarity across fusion,
//! relation induction, retrieval, and QA scoring.
//!
//! Every similarity-consuming stage takes a [`TextEncoder`] as a parameter so
//! the whole pipeline stays encoder-agnostic. The default encoder is a
//! dependency-free feature-hashed bag of words; an external process adapter
//! implements the same contract for anyone who wants a neural encoder.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Stdio};

use thiserror::Error;

/// Dimension of the default hashed encoder.
pub const DEFAULT_DIMENSION: usize = 1024;

/// A fixed-length, L2-normalized embedding vector.
///
/// Empty or whitespace-only text encodes to the all-zero vector; every other
/// embedding has unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    values: Vec<f64>,
}

impl Embedding {
    /// Build an embedding from raw values, normalizing to unit L2 norm.
    /// An all-zero input stays the zero vector.
    pub fn normalized(mut values: Vec<f64>) -> Self {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in &mut values {
                *v /= norm;
            }
        }
        Embedding { values }
    }

    pub fn zeros(dimension: usize) -> Self {
        Embedding {
            values: vec![0.0; dimension],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("embedding dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("external encoder failed: {0}")]
    External(String),
}

/// Cosine similarity between two embeddings.
///
/// Exactly symmetric in its arguments; returns 0.0 whenever either vector is
/// zero (the empty-text convention).
pub fn cosine(a: &Embedding, b: &Embedding) -> Result<f64, EncodeError> {
    if a.dimension() != b.dimension() {
        return Err(EncodeError::DimensionMismatch {
            left: a.dimension(),
            right: b.dimension(),
        });
    }
    let mut dot = 0.0;
    let mut norm_a = 0.0;
    let mut norm_b = 0.0;
    for (x, y) in a.values().iter().zip(b.values()) {
        dot += x * y;
        norm_a += x * x;
        norm_b += y * y;
    }
    if norm_a == 0.0 || norm_b == 0.0 {
        return Ok(0.0);
    }
    Ok(dot / (norm_a.sqrt() * norm_b.sqrt()))
}

/// The sentence-encoder contract: deterministic text-to-unit-vector mapping.
pub trait TextEncoder: Send + Sync {
    fn name(&self) -> &str;
    fn dimension(&self) -> usize;
    fn encode(&self, text: &str) -> Embedding;

    /// Convenience: cosine of two encoded texts.
    fn similarity(&self, a: &str, b: &str) -> f64 {
        cosine(&self.encode(a), &self.encode(b)).unwrap_or(0.0)
    }
}

/// Default encoder: feature-hashed bag of lowercase word tokens with
/// term-frequency weights, L2-normalized.
///
/// Tokens are maximal runs of alphanumeric characters; hashing is FNV-1a so
/// the mapping is stable across platforms and runs.
#[derive(Debug, Clone)]
pub struct HashedEncoder {
    dimension: usize,
}

impl HashedEncoder {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension > 0, "encoder dimension must be positive");
        HashedEncoder { dimension }
    }

    /// The bucket a token falls into; exposed so tests can reason about
    /// collisions explicitly.
    pub fn bucket(&self, token: &str) -> usize {
        (fnv1a(token.as_bytes()) % self.dimension as u64) as usize
    }
}

impl Default for HashedEncoder {
    fn default() -> Self {
        HashedEncoder::new(DEFAULT_DIMENSION)
    }
}

impl TextEncoder for HashedEncoder {
    fn name(&self) -> &str {
        "hashed"
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn encode(&self, text: &str) -> Embedding {
        let mut counts = vec![0.0f64; self.dimension];
        let mut any = false;
        for token in tokenize(text) {
            counts[self.bucket(&token)] += 1.0;
            any = true;
        }
        if !any {
            return Embedding::zeros(self.dimension);
        }
        Embedding::normalized(counts)
    }
}

/// Lowercase word tokens: maximal alphanumeric runs.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x1000_0000_01b3);
    }
    hash
}

/// Adapter for an external encoder over a local process boundary.
///
/// The configured command is run once per call; the text goes to stdin and a
/// JSON array of numbers is expected on stdout. The output is re-normalized
/// so the unit-norm contract holds regardless of what the process emits.
pub struct ExternalEncoder {
    name: String,
    command: PathBuf,
    args: Vec<String>,
    dimension: usize,
}

impl ExternalEncoder {
    pub fn new(name: &str, command: PathBuf, args: Vec<String>, dimension: usize) -> Self {
        ExternalEncoder {
            name: name.to_string(),
            command,
            args,
            dimension,
        }
    }

    fn run(&self, text: &str) -> Result<Embedding, EncodeError> {
        let mut child = Command::new(&self.command)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| EncodeError::External(format!("spawn {:?}: {e}", self.command)))?;
        child
            .stdin
            .as_mut()
            .expect("stdin piped")
            .write_all(text.as_bytes())
            .map_err(|e| EncodeError::External(format!("write: {e}")))?;
        let out = child
            .wait_with_output()
            .map_err(|e| EncodeError::External(format!("wait: {e}")))?;
        if !out.status.success() {
            return Err(EncodeError::External(format!(
                "encoder exited with {}",
                out.status
            )));
        }
        let values: Vec<f64> = serde_json::from_slice(&out.stdout)
            .map_err(|e| EncodeError::External(format!("parse output: {e}")))?;
        if values.len() != self.dimension {
            return Err(EncodeError::External(format!(
                "expected {} values, got {}",
                self.dimension,
                values.len()
            )));
        }
        Ok(Embedding::normalized(values))
    }
}

impl TextEncoder for ExternalEncoder {
    fn name(&self) -> &str {
        &self.name
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn encode(&self, text: &str) -> Embedding {
        if text.trim().is_empty() {
            return Embedding::zeros(self.dimension);
        }
        match self.run(text) {
            Ok(e) => e,
            Err(err) => {
                log::warn!("external encoder failed, returning zero vector: {err}");
                Embedding::zeros(self.dimension)
            }
        }
    }
}
