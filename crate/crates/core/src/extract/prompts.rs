//! Versioned prompt templates with named placeholders.
//!
//! The templates ship with the crate under `prompts/<version>/` and can be
//! overridden from a directory of the same layout.

use std::collections::BTreeMap;
use std::path::Path;

use crate::corpus::Chunk;

pub const PROMPT_VERSION: &str = "v1";

const TEMPLATE_NAMES: &[&str] = &[
    "extract_system",
    "extract_user",
    "enrich_system",
    "enrich_user",
    "relation_system",
    "relation_user",
    "qa_generate_system",
    "qa_generate_user",
    "qa_answer_evidence",
    "qa_answer_combined",
    "qa_answer_fallback",
];

/// The full set of templates for one prompt version.
#[derive(Debug, Clone)]
pub struct PromptSet {
    version: String,
    templates: BTreeMap<String, String>,
}

impl PromptSet {
    /// The templates compiled into the crate.
    pub fn builtin() -> Self {
        let mut templates = BTreeMap::new();
        templates.insert(
            "extract_system".into(),
            include_str!("../../prompts/v1/extract_system.txt").to_string(),
        );
        templates.insert(
            "extract_user".into(),
            include_str!("../../prompts/v1/extract_user.txt").to_string(),
        );
        templates.insert(
            "enrich_system".into(),
            include_str!("../../prompts/v1/enrich_system.txt").to_string(),
        );
        templates.insert(
            "enrich_user".into(),
            include_str!("../../prompts/v1/enrich_user.txt").to_string(),
        );
        templates.insert(
            "relation_system".into(),
            include_str!("../../prompts/v1/relation_system.txt").to_string(),
        );
        templates.insert(
            "relation_user".into(),
            include_str!("../../prompts/v1/relation_user.txt").to_string(),
        );
        templates.insert(
            "qa_generate_system".into(),
            include_str!("../../prompts/v1/qa_generate_system.txt").to_string(),
        );
        templates.insert(
            "qa_generate_user".into(),
            include_str!("../../prompts/v1/qa_generate_user.txt").to_string(),
        );
        templates.insert(
            "qa_answer_evidence".into(),
            include_str!("../../prompts/v1/qa_answer_evidence.txt").to_string(),
        );
        templates.insert(
            "qa_answer_combined".into(),
            include_str!("../../prompts/v1/qa_answer_combined.txt").to_string(),
        );
        templates.insert(
            "qa_answer_fallback".into(),
            include_str!("../../prompts/v1/qa_answer_fallback.txt").to_string(),
        );
        PromptSet {
            version: PROMPT_VERSION.to_string(),
            templates,
        }
    }

    /// Load templates from `<dir>/<name>.txt`; every template must exist.
    pub fn from_dir(dir: &Path) -> std::io::Result<Self> {
        let mut templates = BTreeMap::new();
        for name in TEMPLATE_NAMES {
            let path = dir.join(format!("{name}.txt"));
            templates.insert((*name).to_string(), std::fs::read_to_string(&path)?);
        }
        let version = dir
            .file_name()
            .and_then(|s| s.to_str())
            .unwrap_or("custom")
            .to_string();
        Ok(PromptSet { version, templates })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    fn get(&self, name: &str) -> &str {
        self.templates
            .get(name)
            .unwrap_or_else(|| panic!("missing prompt template {name}"))
    }

    fn render(&self, name: &str, vars: &[(&str, &str)]) -> String {
        let mut text = self.get(name).to_string();
        for (placeholder, value) in vars {
            text = text.replace(placeholder, value);
        }
        text
    }

    /// Chunk-level evidence extraction prompt: (system, user).
    pub fn extraction(&self, chunk: &Chunk, disease: &str) -> (String, String) {
        let section = chunk.section_label.to_string();
        let user = self.render(
            "extract_user",
            &[
                ("<SECTION>", section.as_str()),
                ("<DISEASE>", disease),
                ("<TEXT CHUNK>", chunk.text.as_str()),
            ],
        );
        (self.get("extract_system").to_string(), user)
    }

    /// Intra-document aggregation and enrichment prompt.
    pub fn enrichment(&self, title: &str, doi: &str, evidence_json: &str) -> (String, String) {
        let user = self.render(
            "enrich_user",
            &[
                ("<TITLE>", title),
                ("<DOI>", doi),
                ("<EVIDENCE JSON ARRAY>", evidence_json),
            ],
        );
        (self.get("enrich_system").to_string(), user)
    }

    /// Evidence-pair relation verification prompt.
    #[allow(clippy::too_many_arguments)]
    pub fn relation(
        &self,
        a: &RelationSide<'_>,
        b: &RelationSide<'_>,
        rule_relation: &str,
    ) -> (String, String) {
        let a_year = a.year.map(|y| y.to_string()).unwrap_or_default();
        let b_year = b.year.map(|y| y.to_string()).unwrap_or_default();
        let user = self.render(
            "relation_user",
            &[
                ("<A_INTERVENTION>", a.intervention),
                ("<A_MECHANISM>", a.mechanism),
                ("<A_PHENOTYPE>", a.phenotype),
                ("<A_DESIGN>", a.design),
                ("<A_YEAR>", a_year.as_str()),
                ("<A_ENTITIES>", a.entities),
                ("<B_INTERVENTION>", b.intervention),
                ("<B_MECHANISM>", b.mechanism),
                ("<B_PHENOTYPE>", b.phenotype),
                ("<B_DESIGN>", b.design),
                ("<B_YEAR>", b_year.as_str()),
                ("<B_ENTITIES>", b.entities),
                ("<RULE_RELATION>", rule_relation),
            ],
        );
        (self.get("relation_system").to_string(), user)
    }

    /// Yes/no QA generation prompt from one evidence record.
    pub fn qa_generation(
        &self,
        source_text: &str,
        intervention: &str,
        outcome: &str,
        mechanism: &str,
    ) -> (String, String) {
        let user = self.render(
            "qa_generate_user",
            &[
                ("<SOURCE_TEXT>", source_text),
                ("<INTERVENTION>", intervention),
                ("<OUTCOME>", outcome),
                ("<MECHANISM>", mechanism),
            ],
        );
        (self.get("qa_generate_system").to_string(), user)
    }

    /// Retrieval-augmented answering prompt, one variant per mode.
    pub fn qa_answer(&self, mode: AnswerMode, question: &str, context: &str) -> (String, String) {
        let user = match mode {
            AnswerMode::Baseline => self.render("qa_answer_fallback", &[("<QUESTION>", question)]),
            AnswerMode::Evidence => self.render(
                "qa_answer_evidence",
                &[("<EVIDENCE CONTEXT>", context), ("<QUESTION>", question)],
            ),
            AnswerMode::EvidenceBackground => self.render(
                "qa_answer_combined",
                &[("<COMBINED_CONTEXT>", context), ("<QUESTION>", question)],
            ),
        };
        (String::new(), user)
    }
}

/// One side of a relation-verification prompt.
pub struct RelationSide<'a> {
    pub intervention: &'a str,
    pub mechanism: &'a str,
    pub phenotype: &'a str,
    pub design: &'a str,
    pub year: Option<i32>,
    pub entities: &'a str,
}

/// Answering mode for the QA harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnswerMode {
    Baseline,
    Evidence,
    EvidenceBackground,
}

impl std::str::FromStr for AnswerMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(AnswerMode::Baseline),
            "evidence" => Ok(AnswerMode::Evidence),
            "evidence+background" => Ok(AnswerMode::EvidenceBackground),
            other => Err(format!("unknown answer mode: {other}")),
        }
    }
}

impl std::fmt::Display for AnswerMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AnswerMode::Baseline => f.write_str("baseline"),
            AnswerMode::Evidence => f.write_str("evidence"),
            AnswerMode::EvidenceBackground => f.write_str("evidence+background"),
        }
    }
}
