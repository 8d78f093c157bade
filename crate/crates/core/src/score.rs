//! Evidence quality scoring: component scores, the weighted composite, and
//! the letter grade.
//!
//! The weights, blend factor, and grade thresholds are fixed by the scoring
//! scheme; every component ladder and default is configurable.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extract::StudyDesign;

/// Letter grade bands over the composite score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Grade {
    A,
    B,
    C,
    D,
}

impl std::fmt::Display for Grade {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Grade::A => f.write_str("A"),
            Grade::B => f.write_str("B"),
            Grade::C => f.write_str("C"),
            Grade::D => f.write_str("D"),
        }
    }
}

/// Full quality assessment for one evidence record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityScore {
    pub s_type: f64,
    pub s_impact: f64,
    pub s_stat: f64,
    pub s_sample: f64,
    pub llm_confidence: f64,
    pub composite: f64,
    pub grade: Grade,
}

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("{field} out of range: {value}")]
    OutOfRange { field: &'static str, value: f64 },
    #[error("score weights must sum to 1 (got {0})")]
    BadWeights(f64),
}

/// Scoring configuration: weights, blend factor, grade thresholds, component
/// ladders, and neutral priors for missing fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoringConfig {
    /// weights for (type, impact, stat, sample)
    pub weights: [f64; 4],
    /// blend factor toward extraction confidence
    pub lambda: f64,
    /// inclusive lower bounds for grades A, B, C
    pub grade_thresholds: [f64; 3],
    pub study_type_ladder: StudyTypeLadder,
    /// neutral prior when no impact signal is available
    pub impact_default: f64,
    /// impact-factor cap for normalization
    pub impact_factor_cap: f64,
    /// citation count mapped by log1p(c)/log1p(cap)
    pub citation_cap: f64,
    /// neutral prior when no p-value is reported
    pub stat_default: f64,
    /// p-value ladder: (upper bound, score), evaluated in order
    pub stat_ladder: Vec<(f64, f64)>,
    /// score when the p-value exceeds every ladder bound
    pub stat_floor: f64,
    /// prior when no sample size is reported
    pub sample_default: f64,
    /// sample size mapped by log1p(n)/log1p(cap)
    pub sample_cap: f64,
}

/// Prior scores per study design, strictly decreasing from meta-analysis to
/// unknown.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyTypeLadder {
    pub meta_analysis: f64,
    pub rct: f64,
    pub cohort: f64,
    pub case_control: f64,
    pub in_vivo: f64,
    pub in_vitro: f64,
    pub computational: f64,
    pub unknown: f64,
}

impl Default for StudyTypeLadder {
    fn default() -> Self {
        StudyTypeLadder {
            meta_analysis: 1.0,
            rct: 0.9,
            cohort: 0.75,
            case_control: 0.65,
            in_vivo: 0.5,
            in_vitro: 0.4,
            computational: 0.3,
            unknown: 0.2,
        }
    }
}

impl Default for ScoringConfig {
    fn default() -> Self {
        ScoringConfig {
            weights: [0.35, 0.25, 0.25, 0.15],
            lambda: 0.15,
            grade_thresholds: [0.8, 0.6, 0.4],
            study_type_ladder: StudyTypeLadder::default(),
            impact_default: 0.5,
            impact_factor_cap: 30.0,
            citation_cap: 1000.0,
            stat_default: 0.5,
            stat_ladder: vec![(0.001, 1.0), (0.01, 0.85), (0.05, 0.7), (0.1, 0.4)],
            stat_floor: 0.2,
            sample_default: 0.3,
            sample_cap: 10000.0,
        }
    }
}

impl ScoringConfig {
    pub fn validate(&self) -> Result<(), ScoreError> {
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(ScoreError::BadWeights(sum));
        }
        for (name, v) in [("lambda", self.lambda)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ScoreError::OutOfRange {
                    field: name,
                    value: v,
                });
            }
        }
        Ok(())
    }
}

/// Study-design prior from the configured ladder.
pub fn score_study_type(design: StudyDesign, cfg: &ScoringConfig) -> f64 {
    let l = &cfg.study_type_ladder;
    match design {
        StudyDesign::MetaAnalysis => l.meta_analysis,
        StudyDesign::Rct => l.rct,
        StudyDesign::Cohort => l.cohort,
        StudyDesign::CaseControl => l.case_control,
        StudyDesign::InVivo => l.in_vivo,
        StudyDesign::InVitro => l.in_vitro,
        StudyDesign::Computational => l.computational,
        StudyDesign::Unknown => l.unknown,
    }
}

/// Average of the available journal- and citation-level signals; neutral
/// prior when none is present.
pub fn score_impact(
    impact_factor: Option<f64>,
    quartile: Option<crate::corpus::Quartile>,
    citation_count: Option<u64>,
    cfg: &ScoringConfig,
) -> f64 {
    let mut signals = Vec::with_capacity(3);
    if let Some(q) = quartile {
        signals.push(match q {
            crate::corpus::Quartile::Q1 => 1.0,
            crate::corpus::Quartile::Q2 => 0.75,
            crate::corpus::Quartile::Q3 => 0.5,
            crate::corpus::Quartile::Q4 => 0.25,
        });
    }
    if let Some(f) = impact_factor {
        signals.push(f.min(cfg.impact_factor_cap).max(0.0) / cfg.impact_factor_cap);
    }
    if let Some(c) = citation_count {
        signals.push(((c as f64).ln_1p() / cfg.citation_cap.ln_1p()).min(1.0));
    }
    if signals.is_empty() {
        cfg.impact_default
    } else {
        signals.iter().sum::<f64>() / signals.len() as f64
    }
}

/// Piecewise ladder over the reported p-value; neutral prior when absent.
pub fn score_statistics(p_value: Option<f64>, cfg: &ScoringConfig) -> Result<f64, ScoreError> {
    match p_value {
        None => Ok(cfg.stat_default),
        Some(p) => {
            if !(p > 0.0 && p <= 1.0) {
                return Err(ScoreError::OutOfRange {
                    field: "p_value",
                    value: p,
                });
            }
            for (bound, score) in &cfg.stat_ladder {
                if p <= *bound {
                    return Ok(*score);
                }
            }
            Ok(cfg.stat_floor)
        }
    }
}

/// Log-normalized sample size, capped at 1; default prior when absent.
pub fn score_sample(sample_size: Option<u64>, cfg: &ScoringConfig) -> Result<f64, ScoreError> {
    match sample_size {
        None => Ok(cfg.sample_default),
        Some(0) => Err(ScoreError::OutOfRange {
            field: "sample_size",
            value: 0.0,
        }),
        Some(n) => Ok(((n as f64).ln_1p() / cfg.sample_cap.ln_1p()).min(1.0)),
    }
}

/// Blend the component scores into the composite and assign the grade.
///
/// composite = (w1·s_type + w2·s_impact + w3·s_stat + w4·s_sample)·(1−λ) + λ·confidence
pub fn composite_score(
    s_type: f64,
    s_impact: f64,
    s_stat: f64,
    s_sample: f64,
    llm_confidence: f64,
    cfg: &ScoringConfig,
) -> Result<QualityScore, ScoreError> {
    for (name, v) in [
        ("s_type", s_type),
        ("s_impact", s_impact),
        ("s_stat", s_stat),
        ("s_sample", s_sample),
        ("llm_confidence", llm_confidence),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(ScoreError::OutOfRange {
                field: name,
                value: v,
            });
        }
    }
    let [w1, w2, w3, w4] = cfg.weights;
    let base = w1 * s_type + w2 * s_impact + w3 * s_stat + w4 * s_sample;
    let composite = base * (1.0 - cfg.lambda) + cfg.lambda * llm_confidence;
    Ok(QualityScore {
        s_type,
        s_impact,
        s_stat,
        s_sample,
        llm_confidence,
        composite,
        grade: grade_for(composite, cfg),
    })
}

/// Grade bands with inclusive lower bounds.
pub fn grade_for(composite: f64, cfg: &ScoringConfig) -> Grade {
    let [a, b, c] = cfg.grade_thresholds;
    if composite >= a {
        Grade::A
    } else if composite >= b {
        Grade::B
    } else if composite >= c {
        Grade::C
    } else {
        Grade::D
    }
}

/// Score a record end to end from its fields.
#[allow(clippy::too_many_arguments)]
pub fn score_record(
    design: StudyDesign,
    impact_factor: Option<f64>,
    quartile: Option<crate::corpus::Quartile>,
    citation_count: Option<u64>,
    p_value: Option<f64>,
    sample_size: Option<u64>,
    llm_confidence: f64,
    cfg: &ScoringConfig,
) -> Result<QualityScore, ScoreError> {
    let s_type = score_study_type(design, cfg);
    let s_impact = score_impact(impact_factor, quartile, citation_count, cfg);
    let s_stat = score_statistics(p_value, cfg)?;
    let s_sample = score_sample(sample_size, cfg)?;
    composite_score(s_type, s_impact, s_stat, s_sample, llm_confidence, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Quartile;

    fn cfg() -> ScoringConfig {
        ScoringConfig::default()
    }

    #[test]
    fn study_type_ladder_endpoints() {
        assert_eq!(score_study_type(StudyDesign::MetaAnalysis, &cfg()), 1.0);
        assert_eq!(score_study_type(StudyDesign::Unknown, &cfg()), 0.2);
    }

    #[test]
    fn study_type_ladder_is_strictly_decreasing() {
        let order = [
            StudyDesign::MetaAnalysis,
            StudyDesign::Rct,
            StudyDesign::Cohort,
            StudyDesign::CaseControl,
            StudyDesign::InVivo,
            StudyDesign::InVitro,
            StudyDesign::Computational,
            StudyDesign::Unknown,
        ];
        for pair in order.windows(2) {
            assert!(
                score_study_type(pair[0], &cfg()) > score_study_type(pair[1], &cfg()),
                "{:?} should outrank {:?}",
                pair[0],
                pair[1]
            );
        }
    }

    #[test]
    fn impact_all_absent_is_neutral() {
        assert_eq!(score_impact(None, None, None, &cfg()), 0.5);
    }

    #[test]
    fn impact_q1_only_is_one() {
        assert_eq!(score_impact(None, Some(Quartile::Q1), None, &cfg()), 1.0);
    }

    #[test]
    fn impact_zero_citations_only_is_zero() {
        assert_eq!(score_impact(None, None, Some(0), &cfg()), 0.0);
    }

    #[test]
    fn impact_averages_available_signals() {
        // Q1 (1.0) and IF 15 (0.5) average to 0.75
        let s = score_impact(Some(15.0), Some(Quartile::Q1), None, &cfg());
        assert!((s - 0.75).abs() < 1e-12);
    }

    #[test]
    fn statistics_ladder_buckets() {
        assert_eq!(score_statistics(Some(0.04), &cfg()).unwrap(), 0.7);
        assert_eq!(score_statistics(Some(0.5), &cfg()).unwrap(), 0.2);
        assert_eq!(score_statistics(Some(0.001), &cfg()).unwrap(), 1.0);
        assert_eq!(score_statistics(None, &cfg()).unwrap(), 0.5);
    }

    #[test]
    fn statistics_out_of_range() {
        assert!(score_statistics(Some(1.5), &cfg()).is_err());
        assert!(score_statistics(Some(0.0), &cfg()).is_err());
    }

    #[test]
    fn sample_values() {
        assert_eq!(score_sample(Some(10_000), &cfg()).unwrap(), 1.0);
        let one = score_sample(Some(1), &cfg()).unwrap();
        assert!((one - 2f64.ln() / 10_001f64.ln()).abs() < 1e-12);
        assert!((one - 0.0753).abs() < 5e-4);
        assert_eq!(score_sample(None, &cfg()).unwrap(), 0.3);
        assert!(score_sample(Some(0), &cfg()).is_err());
    }

    #[test]
    fn composite_all_ones_is_one_grade_a() {
        let q = composite_score(1.0, 1.0, 1.0, 1.0, 1.0, &cfg()).unwrap();
        assert!((q.composite - 1.0).abs() < 1e-12);
        assert_eq!(q.grade, Grade::A);
    }

    #[test]
    fn composite_worked_example() {
        // base 0.64, then 0.64*0.85 + 0.15*0.8 = 0.664
        let q = composite_score(0.9, 0.5, 0.5, 0.5, 0.8, &cfg()).unwrap();
        assert!((q.composite - 0.664).abs() < 1e-12);
        assert_eq!(q.grade, Grade::B);
    }

    #[test]
    fn grade_boundaries_are_inclusive() {
        let c = cfg();
        assert_eq!(grade_for(0.8, &c), Grade::A);
        assert_eq!(grade_for(0.6, &c), Grade::B);
        assert_eq!(grade_for(0.4, &c), Grade::C);
        assert_eq!(grade_for(0.39999999, &c), Grade::D);
    }

    #[test]
    fn composite_rejects_out_of_range_inputs() {
        assert!(composite_score(1.1, 0.5, 0.5, 0.5, 0.5, &cfg()).is_err());
        assert!(composite_score(0.5, 0.5, 0.5, 0.5, -0.1, &cfg()).is_err());
    }

    #[test]
    fn weights_must_sum_to_one() {
        let mut c = cfg();
        c.weights = [0.5, 0.25, 0.25, 0.15];
        assert!(matches!(c.validate(), Err(ScoreError::BadWeights(_))));
        assert!(cfg().validate().is_ok());
    }

    #[test]
    fn composite_is_monotone_in_each_component() {
        let c = cfg();
        let base = composite_score(0.5, 0.5, 0.5, 0.5, 0.5, &c)
            .unwrap()
            .composite;
        for i in 0..5 {
            let mut v = [0.5; 5];
            v[i] = 0.9;
            let up = composite_score(v[0], v[1], v[2], v[3], v[4], &c)
                .unwrap()
                .composite;
            assert!(up > base, "component {i} not monotone");
        }
    }
}
