//! Release statistics over the evidence graph.

use std::collections::BTreeMap;

use serde::Serialize;

use super::EvidenceGraph;

/// Scale, density, and composition statistics for one graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphStats {
    pub evidence_count: usize,
    pub entity_count: usize,
    pub total_nodes: usize,
    pub total_edges: usize,
    pub density: f64,
    pub edge_type_histogram: BTreeMap<String, usize>,
    pub average_linked_entities: f64,
    pub median_linked_entities: f64,
    pub entity_type_histogram: BTreeMap<String, usize>,
}

/// Compute stats: density is `E / (N·(N−1))` for the directed simple graph,
/// zero for graphs with fewer than two nodes.
pub fn compute_stats(graph: &EvidenceGraph) -> GraphStats {
    let evidence_count = graph.evidence_count();
    let entity_count = graph.entity_count();
    let total_nodes = graph.node_count();
    let total_edges = graph.edge_count();
    let density = if total_nodes > 1 {
        total_edges as f64 / (total_nodes as f64 * (total_nodes as f64 - 1.0))
    } else {
        0.0
    };

    let mut edge_type_histogram = BTreeMap::new();
    if graph.linked_to_edges().count() > 0 {
        edge_type_histogram.insert("LINKED_TO".to_string(), graph.linked_to_edges().count());
    }
    for ((_, _, ty), _) in graph.relation_edges() {
        *edge_type_histogram
            .entry(ty.as_str().to_string())
            .or_insert(0) += 1;
    }

    let mut linked_counts: Vec<usize> = graph
        .evidence_nodes()
        .map(|(_, attr)| attr.linked_entities.len())
        .collect();
    linked_counts.sort_unstable();
    let average_linked_entities = if linked_counts.is_empty() {
        0.0
    } else {
        linked_counts.iter().sum::<usize>() as f64 / linked_counts.len() as f64
    };
    let median_linked_entities = median(&linked_counts);

    let mut entity_type_histogram = BTreeMap::new();
    for (_, attr) in graph.entity_nodes() {
        *entity_type_histogram
            .entry(attr.semantic_type.to_string())
            .or_insert(0) += 1;
    }

    GraphStats {
        evidence_count,
        entity_count,
        total_nodes,
        total_edges,
        density,
        edge_type_histogram,
        average_linked_entities,
        median_linked_entities,
        entity_type_histogram,
    }
}

/// Release-level summary over a record collection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordStats {
    pub records: usize,
    pub grade_histogram: BTreeMap<String, usize>,
    /// mean of 1 + |merged_from| per record
    pub average_merged_records: f64,
    /// share of records with version > 1, in percent
    pub version_gt1_pct: f64,
}

pub fn record_stats(records: &[crate::record::EvidenceRecord]) -> RecordStats {
    let mut grade_histogram = BTreeMap::new();
    let mut merged_total = 0usize;
    let mut version_gt1 = 0usize;
    for r in records {
        *grade_histogram
            .entry(r.score.grade.to_string())
            .or_insert(0) += 1;
        merged_total += 1 + r.merged_from.len();
        if r.version > 1 {
            version_gt1 += 1;
        }
    }
    let n = records.len();
    RecordStats {
        records: n,
        grade_histogram,
        average_merged_records: if n == 0 {
            0.0
        } else {
            merged_total as f64 / n as f64
        },
        version_gt1_pct: if n == 0 {
            0.0
        } else {
            version_gt1 as f64 * 100.0 / n as f64
        },
    }
}

fn median(sorted: &[usize]) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid] as f64
    } else {
        (sorted[mid - 1] + sorted[mid]) as f64 / 2.0
    }
}

impl GraphStats {
    /// Two-column table for terminal output.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let mut row = |k: &str, v: String| {
            out.push_str(&format!("{k:<28} {v}\n"));
        };
        row("evidence records", self.evidence_count.to_string());
        row("entity nodes", self.entity_count.to_string());
        row("total nodes", self.total_nodes.to_string());
        row("total edges", self.total_edges.to_string());
        row("graph density", format!("{:.6}", self.density));
        row(
            "average linked entities",
            format!("{:.2}", self.average_linked_entities),
        );
        row(
            "median linked entities",
            format!("{:.2}", self.median_linked_entities),
        );
        for (ty, count) in &self.edge_type_histogram {
            row(&format!("edges[{ty}]"), count.to_string());
        }
        for (ty, count) in &self.entity_type_histogram {
            row(&format!("entities[{ty}]"), count.to_string());
        }
        out
    }

    /// `metric,value` CSV rows for machine consumption.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,value\n");
        let mut row = |k: String, v: String| {
            out.push_str(&format!("{k},{v}\n"));
        };
        row("evidence_count".into(), self.evidence_count.to_string());
        row("entity_count".into(), self.entity_count.to_string());
        row("total_nodes".into(), self.total_nodes.to_string());
        row("total_edges".into(), self.total_edges.to_string());
        row("density".into(), format!("{:.6}", self.density));
        row(
            "average_linked_entities".into(),
            format!("{:.4}", self.average_linked_entities),
        );
        row(
            "median_linked_entities".into(),
            format!("{:.4}", self.median_linked_entities),
        );
        for (ty, count) in &self.edge_type_histogram {
            row(format!("edges_{ty}"), count.to_string());
        }
        for (ty, count) in &self.entity_type_histogram {
            row(format!("entities_{ty}"), count.to_string());
        }
        out
    }
}
