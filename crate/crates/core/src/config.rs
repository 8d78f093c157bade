//! Declarative run configuration: one TOML file drives every pipeline stage.
//! Secrets never appear in the file; backends reference environment
//! variables instead.

use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::ChunkConfig;
use crate::encode::{ExternalEncoder, HashedEncoder, TextEncoder, DEFAULT_DIMENSION};
use crate::extract::{CommandBackend, LlmBackend, MockBackend};
use crate::fuse::FusionConfig;
use crate::normalize::FuzzyConfig;
use crate::relate::RelationConfig;
use crate::score::ScoringConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid configuration:\n{}", .0.join("\n"))]
    InvariantViolation(Vec<String>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunSection {
    pub disease: String,
    pub corpus: Option<PathBuf>,
    pub vocabulary: Option<PathBuf>,
    pub seed: u64,
    /// logical timestamp written into artifacts (RFC 3339); fixed default so
    /// reruns are byte-identical
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EncoderSection {
    pub name: String,
    pub dimension: usize,
    pub command: Option<PathBuf>,
    pub args: Vec<String>,
}

impl Default for EncoderSection {
    fn default() -> Self {
        EncoderSection {
            name: "hashed".into(),
            dimension: DEFAULT_DIMENSION,
            command: None,
            args: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendSection {
    pub name: String,
    /// fixture directory for the mock backend
    pub fixtures: Option<PathBuf>,
    pub command: Option<PathBuf>,
    pub args: Vec<String>,
    /// environment variable holding the secret, passed through to command
    /// backends; never stored in artifacts
    pub secret_env: Option<String>,
}

impl Default for BackendSection {
    fn default() -> Self {
        BackendSection {
            name: "mock".into(),
            fixtures: None,
            command: None,
            args: Vec::new(),
            secret_env: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct ExtractionSection {
    pub enrich: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RelationSection {
    #[serde(flatten)]
    pub thresholds: RelationConfig,
    pub verify: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EvaluationSection {
    pub negative_ratio: f64,
    pub node2vec: crate::evaluate::Node2VecParams,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        EvaluationSection {
            negative_ratio: 1.0,
            node2vec: crate::evaluate::Node2VecParams::default(),
        }
    }
}

/// The full resolved run configuration.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct RunConfig {
    pub run: RunSection,
    pub encoder: EncoderSection,
    pub backend: BackendSection,
    pub chunking: ChunkConfig,
    pub extraction: ExtractionSection,
    pub fuzzy: FuzzyConfig,
    pub scoring: ScoringConfig,
    pub fusion: FusionConfig,
    pub relation: RelationSection,
    pub evaluation: EvaluationSection,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            disease: "unspecified".into(),
            corpus: None,
            vocabulary: None,
            seed: 42,
            timestamp: None,
        }
    }
}

impl RunConfig {
    /// The logical timestamp for this run.
    pub fn timestamp(&self) -> DateTime<Utc> {
        self.run
            .timestamp
            .as_deref()
            .and_then(|t| DateTime::parse_from_rfc3339(t).ok())
            .map(|t| t.with_timezone(&Utc))
            .unwrap_or_else(crate::record::default_run_timestamp)
    }

    /// Instantiate the configured encoder.
    pub fn build_encoder(&self) -> Result<Box<dyn TextEncoder>, ConfigError> {
        match self.encoder.name.as_str() {
            "hashed" => Ok(Box::new(HashedEncoder::new(self.encoder.dimension))),
            "external" => {
                let command = self.encoder.command.clone().ok_or_else(|| {
                    ConfigError::InvariantViolation(vec![
                        "encoder.command is required for the external encoder".into(),
                    ])
                })?;
                Ok(Box::new(ExternalEncoder::new(
                    "external",
                    command,
                    self.encoder.args.clone(),
                    self.encoder.dimension,
                )))
            }
            other => Err(ConfigError::InvariantViolation(vec![format!(
                "unknown encoder.name {other:?}"
            )])),
        }
    }

    /// Instantiate the configured backend.
    pub fn build_backend(&self) -> Result<Box<dyn LlmBackend>, ConfigError> {
        match self.backend.name.as_str() {
            "mock" => {
                let dir = self.backend.fixtures.clone().ok_or_else(|| {
                    ConfigError::InvariantViolation(vec![
                        "backend.fixtures is required for the mock backend".into(),
                    ])
                })?;
                Ok(Box::new(MockBackend::from_dir(&dir)?))
            }
            "command" => {
                let command = self.backend.command.clone().ok_or_else(|| {
                    ConfigError::InvariantViolation(vec![
                        "backend.command is required for the command backend".into(),
                    ])
                })?;
                Ok(Box::new(CommandBackend::new(
                    "command",
                    command,
                    self.backend.args.clone(),
                    self.backend.secret_env.clone(),
                )))
            }
            other => Err(ConfigError::InvariantViolation(vec![format!(
                "unknown backend.name {other:?}"
            )])),
        }
    }

    /// Check every invariant, collecting all violations.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut violations = Vec::new();
        if let Err(e) = self.scoring.validate() {
            violations.push(e.to_string());
        }
        let mut unit = |name: &str, v: f64| {
            if !(0.0..=1.0).contains(&v) {
                violations.push(format!("{name} must lie in [0, 1], got {v}"));
            }
        };
        unit("fuzzy.threshold", self.fuzzy.threshold);
        unit("fuzzy.margin", self.fuzzy.margin);
        unit("fusion.dup_threshold", self.fusion.dup_threshold);
        unit("fusion.entity_overlap_min", self.fusion.entity_overlap_min);
        unit("relation.sim_min", self.relation.thresholds.sim_min);
        unit("relation.overlap_min", self.relation.thresholds.overlap_min);
        unit("relation.refine_cut", self.relation.thresholds.refine_cut);
        unit("relation.verify_cut", self.relation.thresholds.verify_cut);
        unit(
            "relation.high_sim_cut",
            self.relation.thresholds.high_sim_cut,
        );
        for (threshold, name) in self
            .scoring
            .grade_thresholds
            .iter()
            .zip(["grade A", "grade B", "grade C"])
        {
            if !(0.0..=1.0).contains(threshold) {
                violations.push(format!(
                    "scoring threshold {name} out of [0, 1]: {threshold}"
                ));
            }
        }
        if self.chunking.window == 0 || self.chunking.overlap >= self.chunking.window {
            violations.push(format!(
                "chunking window {} must be positive and greater than overlap {}",
                self.chunking.window, self.chunking.overlap
            ));
        }
        if self.chunking.min_len == 0 {
            violations.push("chunking.min_len must be at least 1".into());
        }
        if self.evaluation.negative_ratio <= 0.0 {
            violations.push("evaluation.negative_ratio must be positive".into());
        }
        if let Some(ts) = self.run.timestamp.as_deref() {
            if DateTime::parse_from_rfc3339(ts).is_err() {
                violations.push(format!("run.timestamp is not RFC 3339: {ts:?}"));
            }
        }
        for (name, path) in [
            ("run.corpus", &self.run.corpus),
            ("run.vocabulary", &self.run.vocabulary),
            ("backend.fixtures", &self.backend.fixtures),
        ] {
            if let Some(p) = path {
                if !p.exists() {
                    violations.push(format!("{name} path does not exist: {}", p.display()));
                }
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::InvariantViolation(violations))
        }
    }
}

const KNOWN_SECTIONS: &[(&str, &[&str])] = &[
    (
        "run",
        &["disease", "corpus", "vocabulary", "seed", "timestamp"],
    ),
    ("encoder", &["name", "dimension", "command", "args"]),
    (
        "backend",
        &["name", "fixtures", "command", "args", "secret_env"],
    ),
    ("chunking", &["window", "overlap", "min_len"]),
    ("extraction", &["enrich"]),
    ("fuzzy", &["threshold", "margin"]),
    (
        "scoring",
        &[
            "weights",
            "lambda",
            "grade_thresholds",
            "study_type_ladder",
            "impact_default",
            "impact_factor_cap",
            "citation_cap",
            "stat_default",
            "stat_ladder",
            "stat_floor",
            "sample_default",
            "sample_cap",
        ],
    ),
    ("fusion", &["dup_threshold", "entity_overlap_min"]),
    (
        "relation",
        &[
            "sim_min",
            "overlap_min",
            "refine_cut",
            "verify_cut",
            "high_sim_cut",
            "verify",
        ],
    ),
    ("evaluation", &["negative_ratio", "node2vec"]),
];

fn warn_unknown_keys(value: &toml::Value) {
    let Some(table) = value.as_table() else {
        return;
    };
    for (section, body) in table {
        match KNOWN_SECTIONS.iter().find(|(s, _)| s == section) {
            None => {
                log::warn!("unknown config section {section:?}; ignored");
            }
            Some((_, keys)) => {
                if let Some(t) = body.as_table() {
                    for key in t.keys() {
                        if !keys.contains(&key.as_str()) {
                            log::warn!("unknown config key {section}.{key}; ignored");
                        }
                    }
                }
            }
        }
    }
}

/// Parse, apply defaults, resolve relative paths against the config file's
/// directory, and check every invariant.
pub fn validate_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    let value: toml::Value = text
        .parse()
        .map_err(|e| ConfigError::Parse(format!("{e}")))?;
    warn_unknown_keys(&value);
    let mut config: RunConfig = value
        .try_into()
        .map_err(|e| ConfigError::Parse(format!("{e}")))?;

    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let resolve = |p: &mut Option<PathBuf>| {
        if let Some(inner) = p {
            if inner.is_relative() {
                *inner = base.join(&inner);
            }
        }
    };
    resolve(&mut config.run.corpus);
    resolve(&mut config.run.vocabulary);
    resolve(&mut config.backend.fixtures);
    resolve(&mut config.backend.command);
    resolve(&mut config.encoder.command);

    config.validate()?;
    Ok(config)
}
