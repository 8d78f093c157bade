//! The entity co-mention projection used for link prediction: two entities
//! are adjacent when at least one evidence record links them both. Also the
//! per-pair topological features and the shortest-path baseline.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::encode::TextEncoder;
use crate::graph::EvidenceGraph;

use super::EvalError;

/// A small undirected graph with stable node indexing.
#[derive(Debug, Clone)]
pub struct UndirectedGraph {
    ids: Vec<String>,
    names: Vec<String>,
    index: BTreeMap<String, usize>,
    adjacency: Vec<BTreeSet<usize>>,
}

impl UndirectedGraph {
    /// Build from explicit nodes and edges; node order is sorted by id.
    pub fn from_edges<I, E>(nodes: I, edges: E) -> Self
    where
        I: IntoIterator<Item = String>,
        E: IntoIterator<Item = (String, String)>,
    {
        let mut ids: Vec<String> = nodes.into_iter().collect();
        ids.sort();
        ids.dedup();
        let index: BTreeMap<String, usize> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        let names = ids.clone();
        let mut adjacency = vec![BTreeSet::new(); ids.len()];
        let mut graph = UndirectedGraph {
            ids,
            names,
            index,
            adjacency: Vec::new(),
        };
        for (a, b) in edges {
            let (Some(&u), Some(&v)) = (graph.index.get(&a), graph.index.get(&b)) else {
                continue;
            };
            if u == v {
                continue;
            }
            adjacency[u].insert(v);
            adjacency[v].insert(u);
        }
        graph.adjacency = adjacency;
        graph
    }

    /// Project an evidence graph onto its entities: an edge per entity pair
    /// co-linked by at least one evidence record.
    pub fn from_co_mentions(graph: &EvidenceGraph) -> Self {
        let mut ids: Vec<String> = graph.entity_nodes().map(|(id, _)| id.clone()).collect();
        ids.sort();
        let index: BTreeMap<String, usize> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        let names: Vec<String> = ids
            .iter()
            .map(|id| {
                graph
                    .entity_attr(id)
                    .map(|a| a.canonical_name.clone())
                    .unwrap_or_else(|| id.clone())
            })
            .collect();
        let mut adjacency = vec![BTreeSet::new(); ids.len()];
        let mut by_evidence: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for ((evidence, entity), _) in graph.linked_to_edges() {
            if let Some(&i) = index.get(entity) {
                by_evidence.entry(evidence.as_str()).or_default().push(i);
            }
        }
        for linked in by_evidence.values() {
            for (k, &u) in linked.iter().enumerate() {
                for &v in &linked[k + 1..] {
                    if u != v {
                        adjacency[u].insert(v);
                        adjacency[v].insert(u);
                    }
                }
            }
        }
        UndirectedGraph {
            ids,
            names,
            index,
            adjacency,
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, node: usize) -> &str {
        &self.ids[node]
    }

    pub fn name(&self, node: usize) -> &str {
        &self.names[node]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn require(&self, id: &str) -> Result<usize, EvalError> {
        self.index_of(id)
            .ok_or_else(|| EvalError::UnknownNode(id.to_string()))
    }

    pub fn neighbors(&self, node: usize) -> &BTreeSet<usize> {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].contains(&v)
    }

    /// Undirected edges, each once with u < v.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, neighbors) in self.adjacency.iter().enumerate() {
            for &v in neighbors {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// BFS hop distance; `None` when unreachable.
    pub fn hop_distance(&self, from: usize, to: usize) -> Option<usize> {
        self.hop_distance_without(from, to, (usize::MAX, usize::MAX))
    }

    /// BFS hop distance ignoring one undirected edge.
    pub fn hop_distance_without(
        &self,
        from: usize,
        to: usize,
        skip: (usize, usize),
    ) -> Option<usize> {
        if from == to {
            return Some(0);
        }
        let blocked =
            |a: usize, b: usize| (a == skip.0 && b == skip.1) || (a == skip.1 && b == skip.0);
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::new();
        seen[from] = true;
        queue.push_back((from, 0usize));
        while let Some((node, d)) = queue.pop_front() {
            for &n in &self.adjacency[node] {
                if blocked(node, n) {
                    continue;
                }
                if n == to {
                    return Some(d + 1);
                }
                if !seen[n] {
                    seen[n] = true;
                    queue.push_back((n, d + 1));
                }
            }
        }
        None
    }
}

/// Shortest-path heuristic score: 1/(1+d) for hop distance d, 0 when
/// unreachable.
pub fn shortest_path_score(graph: &UndirectedGraph, u: &str, v: &str) -> Result<f64, EvalError> {
    let ui = graph.require(u)?;
    let vi = graph.require(v)?;
    Ok(match graph.hop_distance(ui, vi) {
        Some(d) => 1.0 / (1.0 + d as f64),
        None => 0.0,
    })
}

/// Number of features produced by [`pair_features`].
pub const PAIR_FEATURE_COUNT: usize = 6;

/// Feature names in output order.
pub const PAIR_FEATURE_NAMES: [&str; PAIR_FEATURE_COUNT] = [
    "name_cosine",
    "degree_product",
    "common_neighbors",
    "jaccard",
    "adamic_adar",
    "shortest_path",
];

/// Fixed-order structural and semantic features for one entity pair:
/// name-embedding cosine, degree product (preferential attachment), common
/// neighbor count, neighborhood Jaccard, Adamic–Adar, and the inverse
/// shortest-path score.
pub fn pair_features(
    graph: &UndirectedGraph,
    u: &str,
    v: &str,
    encoder: &dyn TextEncoder,
) -> Result<[f64; PAIR_FEATURE_COUNT], EvalError> {
    features_inner(graph, u, v, encoder, false)
}

/// Features with the direct u–v edge masked out, as if the pair were not yet
/// linked. Used when building training examples from existing edges so their
/// feature distribution matches that of genuinely unseen pairs.
pub fn pair_features_masked(
    graph: &UndirectedGraph,
    u: &str,
    v: &str,
    encoder: &dyn TextEncoder,
) -> Result<[f64; PAIR_FEATURE_COUNT], EvalError> {
    features_inner(graph, u, v, encoder, true)
}

fn features_inner(
    graph: &UndirectedGraph,
    u: &str,
    v: &str,
    encoder: &dyn TextEncoder,
    mask_direct_edge: bool,
) -> Result<[f64; PAIR_FEATURE_COUNT], EvalError> {
    let ui = graph.require(u)?;
    let vi = graph.require(v)?;
    let masked = mask_direct_edge && graph.has_edge(ui, vi);
    let name_cosine = encoder.similarity(graph.name(ui), graph.name(vi));
    let mut nu = graph.neighbors(ui).clone();
    let mut nv = graph.neighbors(vi).clone();
    if masked {
        nu.remove(&vi);
        nv.remove(&ui);
    }
    let common: Vec<usize> = nu.intersection(&nv).copied().collect();
    let union = nu.union(&nv).count();
    let jaccard = if union == 0 {
        0.0
    } else {
        common.len() as f64 / union as f64
    };
    let adamic_adar: f64 = common
        .iter()
        .map(|&w| {
            let d = graph.degree(w) as f64;
            if d > 1.0 {
                1.0 / d.ln()
            } else {
                0.0
            }
        })
        .sum();
    let sp = if masked {
        match graph.hop_distance_without(ui, vi, (ui, vi)) {
            Some(d) => 1.0 / (1.0 + d as f64),
            None => 0.0,
        }
    } else {
        match graph.hop_distance(ui, vi) {
            Some(d) => 1.0 / (1.0 + d as f64),
            None => 0.0,
        }
    };
    Ok([
        name_cosine,
        (nu.len() * nv.len()) as f64,
        common.len() as f64,
        jaccard,
        adamic_adar,
        sp,
    ])
}
