//! Temporal hold-out construction for future-link prediction: positives are
//! entity pairs co-linked in future records but absent from the training
//! graph; negatives are seeded random unseen pairs.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::graph::EvidenceGraph;
use crate::record::EvidenceRecord;

use super::linkgraph::UndirectedGraph;
use super::EvalError;

/// Canonically ordered entity pair (left < right).
pub type EntityPair = (String, String);

fn ordered(a: &str, b: &str) -> EntityPair {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

/// Train/test positives plus sampled negatives.
#[derive(Debug, Clone, Serialize)]
pub struct HoldoutSet {
    pub train_positive: BTreeSet<EntityPair>,
    pub test_positive: BTreeSet<EntityPair>,
    pub negatives: BTreeSet<EntityPair>,
    /// future pairs skipped because an endpoint is absent from the train graph
    pub cold_start_skipped: usize,
}

impl HoldoutSet {
    /// Hygiene check: no test positive or negative overlaps the train set,
    /// and negatives avoid both positive sets.
    pub fn is_hygienic(&self) -> bool {
        self.test_positive.is_disjoint(&self.train_positive)
            && self.negatives.is_disjoint(&self.train_positive)
            && self.negatives.is_disjoint(&self.test_positive)
    }
}

/// Build a temporal hold-out from a training graph and future records.
///
/// Test positives are co-mention pairs inside one future record's linked
/// entities whose pair is new to the training graph but whose endpoints
/// already exist in it; endpoint misses count as cold-start skips. Negatives
/// are sampled uniformly (seeded) from unseen endpoint pairs at
/// `negative_ratio` per positive.
pub fn build_temporal_holdout(
    train_graph: &EvidenceGraph,
    future_records: &[EvidenceRecord],
    negative_ratio: f64,
    seed: u64,
) -> Result<HoldoutSet, EvalError> {
    let projection = UndirectedGraph::from_co_mentions(train_graph);
    let train_positive: BTreeSet<EntityPair> = projection
        .edges()
        .into_iter()
        .map(|(u, v)| ordered(projection.id(u), projection.id(v)))
        .collect();

    let mut test_positive = BTreeSet::new();
    let mut cold_start_skipped = 0usize;
    for record in future_records {
        let linked = &record.linked_entities;
        for i in 0..linked.len() {
            for j in (i + 1)..linked.len() {
                if linked[i] == linked[j] {
                    continue;
                }
                let in_graph = projection.index_of(&linked[i]).is_some()
                    && projection.index_of(&linked[j]).is_some();
                if !in_graph {
                    cold_start_skipped += 1;
                    continue;
                }
                let pair = ordered(&linked[i], &linked[j]);
                if !train_positive.contains(&pair) {
                    test_positive.insert(pair);
                }
            }
        }
    }
    if test_positive.is_empty() {
        return Err(EvalError::NoEligiblePairs);
    }

    let target = (test_positive.len() as f64 * negative_ratio).round() as usize;
    let mut negatives = BTreeSet::new();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n = projection.len();
    let mut attempts = 0usize;
    let max_attempts = target.saturating_mul(1000).max(10_000);
    while negatives.len() < target && attempts < max_attempts {
        attempts += 1;
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v {
            continue;
        }
        let pair = ordered(projection.id(u), projection.id(v));
        if train_positive.contains(&pair) || test_positive.contains(&pair) {
            continue;
        }
        negatives.insert(pair);
    }
    if negatives.len() < target {
        log::warn!(
            "negative sampling exhausted at {}/{} pairs",
            negatives.len(),
            target
        );
    }

    Ok(HoldoutSet {
        train_positive,
        test_positive,
        negatives,
        cold_start_skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::EntityType;
    use crate::graph::tests::{link, metadata};
    use crate::record::tests::minimal_record;

    fn train_graph() -> EvidenceGraph {
        let mut g = EvidenceGraph::new(metadata());
        // e1 links A,B ; e2 links B,C ; e3 links C,D -> train pairs AB, BC, CD
        for (e, entities) in [
            ("e1", ["T:A", "T:B"]),
            ("e2", ["T:B", "T:C"]),
            ("e3", ["T:C", "T:D"]),
        ] {
            g.upsert_evidence(&minimal_record(e, e, Some(2020)));
            for c in entities {
                g.upsert_entity_link(e, &link(c, c, EntityType::Gene))
                    .unwrap();
            }
        }
        g
    }

    fn future_record(id: &str, entities: &[&str]) -> EvidenceRecord {
        let mut r = minimal_record(id, id, Some(2026));
        r.linked_entities = entities.iter().map(|s| s.to_string()).collect();
        r
    }

    #[test]
    fn new_pair_with_known_endpoints_is_a_test_positive() {
        let g = train_graph();
        let future = vec![future_record("f1", &["T:A", "T:D"])];
        let h = build_temporal_holdout(&g, &future, 1.0, 7).unwrap();
        assert!(h.test_positive.contains(&("T:A".into(), "T:D".into())));
        assert_eq!(h.cold_start_skipped, 0);
        assert!(h.is_hygienic());
    }

    #[test]
    fn pair_already_in_training_contributes_nothing() {
        let g = train_graph();
        let future = vec![
            future_record("f1", &["T:A", "T:B"]), // already co-mentioned
            future_record("f2", &["T:A", "T:C"]), // new
        ];
        let h = build_temporal_holdout(&g, &future, 1.0, 7).unwrap();
        assert_eq!(h.test_positive.len(), 1);
        assert!(h.test_positive.contains(&("T:A".into(), "T:C".into())));
    }

    #[test]
    fn unknown_endpoint_counts_as_cold_start() {
        let g = train_graph();
        let future = vec![
            future_record("f1", &["T:A", "T:NEW"]),
            future_record("f2", &["T:A", "T:D"]),
        ];
        let h = build_temporal_holdout(&g, &future, 1.0, 7).unwrap();
        assert_eq!(h.cold_start_skipped, 1);
        assert_eq!(h.test_positive.len(), 1);
    }

    #[test]
    fn all_cold_start_is_no_eligible_pairs() {
        let g = train_graph();
        let future = vec![future_record("f1", &["T:X", "T:Y"])];
        assert!(matches!(
            build_temporal_holdout(&g, &future, 1.0, 7),
            Err(EvalError::NoEligiblePairs)
        ));
    }

    #[test]
    fn seeded_runs_are_identical() {
        let g = train_graph();
        let future = vec![future_record("f1", &["T:A", "T:C", "T:D"])];
        let a = build_temporal_holdout(&g, &future, 1.0, 42).unwrap();
        let b = build_temporal_holdout(&g, &future, 1.0, 42).unwrap();
        assert_eq!(a.test_positive, b.test_positive);
        assert_eq!(a.negatives, b.negatives);
        let c = build_temporal_holdout(&g, &future, 1.0, 43).unwrap();
        assert!(c.is_hygienic());
    }
}
