//! QA harness: yes/no question generation from evidence records, the
//! retrieval-augmented answering protocol, and the accuracy / semantic-
//! similarity metrics.

use serde::{Deserialize, Serialize};

use crate::encode::TextEncoder;
use crate::extract::{AnswerMode, LlmBackend, PromptSet};
use crate::record::EvidenceRecord;

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum YesNo {
    Yes,
    No,
}

impl YesNo {
    fn parse(s: &str) -> Option<YesNo> {
        match s.trim().to_lowercase().as_str() {
            "yes" => Some(YesNo::Yes),
            "no" => Some(YesNo::No),
            _ => None,
        }
    }
}

/// One yes/no QA item with optional predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaItem {
    pub question: String,
    pub gold_class: YesNo,
    pub gold_answer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_class: Option<YesNo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_answer: Option<String>,
}

/// Sampling filter for question generation: composite score above 0.4 and a
/// grounded quote longer than 30 characters.
pub fn qa_eligible(record: &EvidenceRecord) -> bool {
    record.score.composite > 0.4 && record.source_text.chars().count() > 30
}

/// Generate one yes/no question from an eligible evidence record.
pub fn generate_qa(
    record: &EvidenceRecord,
    backend: &dyn LlmBackend,
    prompts: &PromptSet,
) -> Result<QaItem, EvalError> {
    if !qa_eligible(record) {
        return Err(EvalError::IneligibleRecord {
            evidence_id: record.evidence_id.clone(),
        });
    }
    let (system, user) = prompts.qa_generation(
        &record.source_text,
        record.pico.intervention.as_deref().unwrap_or(""),
        record.pico.outcome_metrics.as_deref().unwrap_or(""),
        record.bio_mechanism.as_deref().unwrap_or(""),
    );
    let raw = backend.complete(&system, &user)?;
    let value: serde_json::Value = serde_json::from_str(raw.trim())
        .map_err(|e| EvalError::SchemaViolation(format!("QA generation response: {e}")))?;
    let question = value
        .get("question")
        .and_then(serde_json::Value::as_str)
        .filter(|q| !q.trim().is_empty())
        .ok_or_else(|| EvalError::SchemaViolation("missing question".into()))?;
    let gold_class = value
        .get("class")
        .and_then(serde_json::Value::as_str)
        .and_then(YesNo::parse)
        .ok_or_else(|| EvalError::SchemaViolation("missing or invalid class".into()))?;
    let gold_answer = value
        .get("answer")
        .and_then(serde_json::Value::as_str)
        .ok_or_else(|| EvalError::SchemaViolation("missing answer".into()))?;
    Ok(QaItem {
        question: question.trim().to_string(),
        gold_class,
        gold_answer: gold_answer.trim().to_string(),
        predicted_class: None,
        predicted_answer: None,
    })
}

/// Join retrieved contexts into the numbered block the answering prompt
/// expects.
pub fn format_contexts(contexts: &[String]) -> String {
    contexts
        .iter()
        .enumerate()
        .map(|(i, c)| format!("[{}] {}", i + 1, c))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Answer one question under the given mode. Baseline mode must come with no
/// contexts, retrieval modes with at least one.
pub fn answer_question(
    item: &QaItem,
    contexts: &[String],
    mode: AnswerMode,
    backend: &dyn LlmBackend,
    prompts: &PromptSet,
) -> Result<QaItem, EvalError> {
    if contexts.is_empty() != (mode == AnswerMode::Baseline) {
        return Err(EvalError::ContextModeMismatch {
            mode: mode.to_string(),
            contexts: contexts.len(),
        });
    }
    let block = format_contexts(contexts);
    let (system, user) = prompts.qa_answer(mode, &item.question, &block);
    let raw = backend.complete(&system, &user)?;
    let (class, explanation) = parse_answer(&raw)?;
    Ok(QaItem {
        predicted_class: Some(class),
        predicted_answer: Some(explanation),
        ..item.clone()
    })
}

/// Parse the `CLASSIFICATION: [YES/NO]` line and capture the explanation.
pub fn parse_answer(raw: &str) -> Result<(YesNo, String), EvalError> {
    let mut class: Option<YesNo> = None;
    for line in raw.lines() {
        let upper = line.trim().to_uppercase();
        if let Some(rest) = upper.strip_prefix("CLASSIFICATION") {
            let yes = rest.find("YES");
            let no = rest.find("NO");
            class = match (yes, no) {
                (Some(y), Some(n)) => Some(if y < n { YesNo::Yes } else { YesNo::No }),
                (Some(_), None) => Some(YesNo::Yes),
                (None, Some(_)) => Some(YesNo::No),
                (None, None) => None,
            };
            if class.is_some() {
                break;
            }
        }
    }
    let class = class.ok_or(EvalError::UnparseableAnswer)?;
    let explanation = raw
        .split_once("EXPLANATION:")
        .map(|(_, rest)| rest.trim().to_string())
        .unwrap_or_default();
    Ok((class, explanation))
}

/// Exact-match accuracy and mean semantic similarity of predicted vs gold
/// answers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QaMetrics {
    pub accuracy: f64,
    pub semantic_similarity: f64,
    pub n: usize,
}

pub fn qa_metrics(items: &[QaItem], encoder: &dyn TextEncoder) -> Result<QaMetrics, EvalError> {
    if items.is_empty() {
        return Err(EvalError::EmptySet);
    }
    let mut correct = 0usize;
    let mut similarity_sum = 0.0f64;
    for (index, item) in items.iter().enumerate() {
        let (Some(class), Some(answer)) = (item.predicted_class, item.predicted_answer.as_ref())
        else {
            return Err(EvalError::MissingPrediction { index });
        };
        if class == item.gold_class {
            correct += 1;
        }
        similarity_sum += encoder.similarity(answer, &item.gold_answer);
    }
    Ok(QaMetrics {
        accuracy: correct as f64 / items.len() as f64,
        semantic_similarity: similarity_sum / items.len() as f64,
        n: items.len(),
    })
}

/// Read a JSON array of QA items.
pub fn read_qa_items(path: &std::path::Path) -> Result<Vec<QaItem>, std::io::Error> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::HashedEncoder;
    use crate::extract::MockBackend;
    use crate::record::tests::minimal_record;

    fn eligible_record() -> EvidenceRecord {
        let mut r = minimal_record("e1", "d1", Some(2021));
        r.score.composite = 0.55;
        r.source_text = "Sorafenib significantly reduced tumour cell viability in vitro.".into();
        r.pico.intervention = Some("sorafenib".into());
        r.pico.outcome_metrics = Some("viability".into());
        r
    }

    #[test]
    fn generate_qa_round_trips_a_fixture() {
        let prompts = PromptSet::builtin();
        let record = eligible_record();
        let (system, user) =
            prompts.qa_generation(&record.source_text, "sorafenib", "viability", "");
        let response = r#"{"question": "Does sorafenib reduce tumour cell viability?", "class": "yes", "answer": "Yes. Viability dropped under treatment."}"#;
        let mock = MockBackend::from_pairs([(system.as_str(), user.as_str(), response)]);
        let item = generate_qa(&record, &mock, &prompts).unwrap();
        assert_eq!(item.gold_class, YesNo::Yes);
        assert!(item.question.starts_with("Does sorafenib"));
    }

    #[test]
    fn short_source_text_violates_the_sampling_filter() {
        let prompts = PromptSet::builtin();
        let mut record = eligible_record();
        record.source_text = "Twenty characters!!".into();
        let err = generate_qa(&record, &MockBackend::new(), &prompts).unwrap_err();
        assert!(matches!(err, EvalError::IneligibleRecord { .. }));
        let mut low = eligible_record();
        low.score.composite = 0.4;
        assert!(matches!(
            generate_qa(&low, &MockBackend::new(), &prompts),
            Err(EvalError::IneligibleRecord { .. })
        ));
    }

    #[test]
    fn generation_response_missing_class_is_schema_violation() {
        let prompts = PromptSet::builtin();
        let record = eligible_record();
        let (system, user) =
            prompts.qa_generation(&record.source_text, "sorafenib", "viability", "");
        let mock = MockBackend::from_pairs([(
            system.as_str(),
            user.as_str(),
            r#"{"question": "Q?", "answer": "A."}"#,
        )]);
        assert!(matches!(
            generate_qa(&record, &mock, &prompts),
            Err(EvalError::SchemaViolation(_))
        ));
    }

    fn item() -> QaItem {
        QaItem {
            question: "Does sorafenib reduce viability?".into(),
            gold_class: YesNo::Yes,
            gold_answer: "Yes. Viability dropped.".into(),
            predicted_class: None,
            predicted_answer: None,
        }
    }

    #[test]
    fn answer_parses_classification_and_explanation() {
        let (class, explanation) =
            parse_answer("CLASSIFICATION: YES\nEXPLANATION: The evidence shows a drop.").unwrap();
        assert_eq!(class, YesNo::Yes);
        assert_eq!(explanation, "The evidence shows a drop.");
        let (class, _) = parse_answer("classification: no\nexplanation: none").unwrap();
        assert_eq!(class, YesNo::No);
    }

    #[test]
    fn answer_without_marker_line_is_unparseable() {
        assert!(matches!(
            parse_answer("I think the answer is yes."),
            Err(EvalError::UnparseableAnswer)
        ));
    }

    #[test]
    fn baseline_mode_requires_empty_contexts() {
        let prompts = PromptSet::builtin();
        let mock = MockBackend::new();
        let err = answer_question(
            &item(),
            &["ctx".into()],
            AnswerMode::Baseline,
            &mock,
            &prompts,
        )
        .unwrap_err();
        assert!(matches!(err, EvalError::ContextModeMismatch { .. }));
        let err = answer_question(&item(), &[], AnswerMode::Evidence, &mock, &prompts).unwrap_err();
        assert!(matches!(err, EvalError::ContextModeMismatch { .. }));
    }

    #[test]
    fn baseline_mode_uses_the_fallback_prompt() {
        let prompts = PromptSet::builtin();
        let q = item();
        let (system, user) = prompts.qa_answer(AnswerMode::Baseline, &q.question, "");
        assert!(user.contains("rely entirely on internal knowledge"));
        let mock = MockBackend::from_pairs([(
            system.as_str(),
            user.as_str(),
            "CLASSIFICATION: YES\nEXPLANATION: general knowledge.",
        )]);
        let answered = answer_question(&q, &[], AnswerMode::Baseline, &mock, &prompts).unwrap();
        assert_eq!(answered.predicted_class, Some(YesNo::Yes));
    }

    #[test]
    fn metrics_match_hand_counts() {
        let enc = HashedEncoder::default();
        let mut items = Vec::new();
        for i in 0..4 {
            let mut q = item();
            q.predicted_class = Some(if i < 2 { YesNo::Yes } else { YesNo::No });
            q.predicted_answer = Some(q.gold_answer.clone());
            items.push(q);
        }
        let m = qa_metrics(&items, &enc).unwrap();
        assert_eq!(m.accuracy, 0.5);
        assert!((m.semantic_similarity - 1.0).abs() < 1e-9);
    }

    #[test]
    fn metrics_reject_empty_and_unpredicted() {
        let enc = HashedEncoder::default();
        assert!(matches!(qa_metrics(&[], &enc), Err(EvalError::EmptySet)));
        assert!(matches!(
            qa_metrics(&[item()], &enc),
            Err(EvalError::MissingPrediction { index: 0 })
        ));
    }
}
