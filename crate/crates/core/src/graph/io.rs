//! Canonical graph serialization: sorted keys, stable float formatting,
//! newline-terminated. Identical graphs always produce byte-identical files,
//! and a reader that tolerates (and reports) unknown extra fields.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{
    EntityNodeAttr, EvidenceGraph, EvidenceNodeAttr, GraphError, GraphMetadata, LinkedToAttr,
    RelationAttr,
};
use crate::relate::RelationType;

const KNOWN_TOP_LEVEL: &[&str] = &[
    "metadata",
    "evi_node_attr",
    "ent_node_attr",
    "evi_ent_edges",
    "evi_evi_edges",
];

#[derive(Debug, Serialize, Deserialize)]
struct EviEntEdge {
    source: String,
    target: String,
    #[serde(flatten)]
    attr: LinkedToAttr,
}

#[derive(Debug, Serialize, Deserialize)]
struct EviEviEdge {
    source: String,
    target: String,
    relation_type: String,
    #[serde(flatten)]
    attr: RelationAttr,
}

/// Render any JSON value canonically: objects with sorted keys, two-space
/// indentation, shortest round-trip float formatting, trailing newline.
pub fn canonical_json(value: &Value) -> String {
    // serde_json maps are BTree-backed, so a Value round-trip sorts keys.
    let mut out = serde_json::to_string_pretty(value).expect("valid JSON value");
    out.push('\n');
    out
}

fn graph_to_value(graph: &EvidenceGraph) -> Value {
    let evi_ent: Vec<Value> = graph
        .linked_to
        .iter()
        .map(|((source, target), attr)| {
            serde_json::to_value(EviEntEdge {
                source: source.clone(),
                target: target.clone(),
                attr: attr.clone(),
            })
            .expect("edge serializes")
        })
        .collect();
    let evi_evi: Vec<Value> = graph
        .relations
        .iter()
        .map(|((source, target, ty), attr)| {
            serde_json::to_value(EviEviEdge {
                source: source.clone(),
                target: target.clone(),
                relation_type: ty.as_str().to_string(),
                attr: attr.clone(),
            })
            .expect("edge serializes")
        })
        .collect();
    serde_json::json!({
        "metadata": graph.metadata,
        "evi_node_attr": graph.evidence,
        "ent_node_attr": graph.entities,
        "evi_ent_edges": evi_ent,
        "evi_evi_edges": evi_evi,
    })
}

/// Serialize a graph to its canonical byte form.
pub fn to_canonical_string(graph: &EvidenceGraph) -> String {
    canonical_json(&graph_to_value(graph))
}

/// Write the canonical form to a file.
pub fn serialize(graph: &EvidenceGraph, path: &Path) -> Result<(), GraphError> {
    write_canonical(path, &graph_to_value(graph))?;
    Ok(())
}

/// Write any serializable value in canonical JSON form.
pub fn write_canonical(path: &Path, value: &Value) -> std::io::Result<()> {
    std::fs::write(path, canonical_json(value))
}

/// Read a graph file, tolerating unknown extra fields (reported via log) and
/// rejecting structural violations.
pub fn deserialize(path: &Path) -> Result<EvidenceGraph, GraphError> {
    let text = std::fs::read_to_string(path)?;
    from_str(&text)
}

pub fn from_str(text: &str) -> Result<EvidenceGraph, GraphError> {
    let value: Value = serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| GraphError::Parse("graph file is not a JSON object".into()))?;
    for key in obj.keys() {
        if !KNOWN_TOP_LEVEL.contains(&key.as_str()) {
            log::warn!("graph file carries unknown top-level field {key:?}; ignored");
        }
    }

    let metadata: GraphMetadata = field(obj, "metadata")?;
    let mut graph = EvidenceGraph::new(metadata);

    let evidence: std::collections::BTreeMap<String, EvidenceNodeAttr> =
        field(obj, "evi_node_attr")?;
    for (id, mut attr) in evidence {
        attr.evidence_id = id.clone();
        graph.evidence.insert(id, attr);
    }
    let entities: std::collections::BTreeMap<String, EntityNodeAttr> = field(obj, "ent_node_attr")?;
    graph.entities = entities;

    let evi_ent: Vec<EviEntEdge> = field(obj, "evi_ent_edges")?;
    for edge in evi_ent {
        if !graph.evidence.contains_key(&edge.source) {
            return Err(GraphError::SchemaMismatch(format!(
                "evi_ent edge references missing evidence node {}",
                edge.source
            )));
        }
        if !graph.entities.contains_key(&edge.target) {
            return Err(GraphError::SchemaMismatch(format!(
                "evi_ent edge references missing entity node {}",
                edge.target
            )));
        }
        graph
            .linked_to
            .insert((edge.source, edge.target), edge.attr);
    }

    let evi_evi: Vec<EviEviEdge> = field(obj, "evi_evi_edges")?;
    for edge in evi_evi {
        let ty = RelationType::parse(&edge.relation_type).ok_or_else(|| {
            GraphError::SchemaMismatch(format!("unknown relation type {:?}", edge.relation_type))
        })?;
        if edge.source == edge.target {
            return Err(GraphError::SchemaMismatch(format!(
                "self-loop on {}",
                edge.source
            )));
        }
        for endpoint in [&edge.source, &edge.target] {
            if !graph.evidence.contains_key(endpoint) {
                return Err(GraphError::SchemaMismatch(format!(
                    "evi_evi edge references missing evidence node {endpoint}"
                )));
            }
        }
        graph
            .relations
            .insert((edge.source, edge.target, ty), edge.attr);
    }
    Ok(graph)
}

fn field<T: serde::de::DeserializeOwned>(
    obj: &serde_json::Map<String, Value>,
    key: &str,
) -> Result<T, GraphError> {
    let value = obj
        .get(key)
        .ok_or_else(|| GraphError::Parse(format!("missing top-level field {key:?}")))?;
    serde_json::from_value(value.clone())
        .map_err(|e| GraphError::Parse(format!("field {key:?}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::super::tests::{link, metadata, relation};
    use super::*;
    use crate::extract::EntityType;
    use crate::record::tests::minimal_record;
    use crate::relate::RelationType;

    fn sample_graph() -> EvidenceGraph {
        let mut g = EvidenceGraph::new(metadata());
        g.upsert_evidence(&minimal_record("e1", "d1", Some(2020)));
        g.upsert_evidence(&minimal_record("e2", "d2", Some(2021)));
        g.upsert_entity_link("e1", &link("D:SORA", "sorafenib", EntityType::Drug))
            .unwrap();
        g.upsert_entity_link("e2", &link("D:SORA", "sorafenib", EntityType::Drug))
            .unwrap();
        g.add_relation_edge(&relation("e2", "e1", RelationType::Supports))
            .unwrap();
        g
    }

    #[test]
    fn empty_graph_round_trips() {
        let g = EvidenceGraph::new(metadata());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("graph.json");
        serialize(&g, &path).unwrap();
        let back = deserialize(&path).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn round_trip_is_identity_and_bytes_are_stable() {
        let g = sample_graph();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("graph.json");
        serialize(&g, &path).unwrap();
        let first = std::fs::read(&path).unwrap();
        let back = deserialize(&path).unwrap();
        assert_eq!(back, g);
        serialize(&back, &path).unwrap();
        let second = std::fs::read(&path).unwrap();
        assert_eq!(first, second, "second serialization must be byte-identical");
        assert!(first.ends_with(b"\n"));
    }

    #[test]
    fn unknown_relation_type_is_a_schema_mismatch() {
        let g = sample_graph();
        let text = to_canonical_string(&g).replace("SUPPORTS", "LIKES");
        let err = from_str(&text).unwrap_err();
        assert!(matches!(err, GraphError::SchemaMismatch(_)), "{err}");
    }

    #[test]
    fn dangling_endpoint_is_a_schema_mismatch() {
        let g = sample_graph();
        let text = to_canonical_string(&g).replace("\"target\": \"e1\"", "\"target\": \"ghost\"");
        let err = from_str(&text).unwrap_err();
        assert!(matches!(err, GraphError::SchemaMismatch(_)), "{err}");
    }

    #[test]
    fn unknown_extra_fields_are_tolerated() {
        let g = sample_graph();
        let mut value: Value = serde_json::from_str(&to_canonical_string(&g)).unwrap();
        value["provenance_blob"] = serde_json::json!("extra");
        value["evi_node_attr"]["e1"]["novel_attr"] = serde_json::json!(42);
        let back = from_str(&canonical_json(&value)).unwrap();
        assert_eq!(back.evidence_count(), 2);
    }

    #[test]
    fn non_json_input_is_a_parse_error() {
        assert!(matches!(from_str("not json"), Err(GraphError::Parse(_))));
    }
}
