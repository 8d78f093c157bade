//! Validation harnesses: QA generation/answering with metrics, temporal
//! future-link prediction with three scoring methods, and rank metrics
//! backed by a brute-force oracle.

mod classify;
mod holdout;
mod linkgraph;
mod metrics;
mod node2vec;
mod qa;
mod synthetic;

pub use classify::{train_classifier, ClassifierKind, ForestModel, LogisticModel, Model};
pub use holdout::{build_temporal_holdout, EntityPair, HoldoutSet};
pub use linkgraph::{
    pair_features, pair_features_masked, shortest_path_score, UndirectedGraph, PAIR_FEATURE_COUNT,
    PAIR_FEATURE_NAMES,
};
pub use metrics::{brute_force_auc, rank_metrics, RankResult};
pub use node2vec::{node2vec_embed, Node2VecParams, NodeEmbeddings};
pub use qa::{
    answer_question, format_contexts, generate_qa, parse_answer, qa_eligible, qa_metrics,
    read_qa_items, QaItem, QaMetrics, YesNo,
};
pub use synthetic::{
    clustered_attachment_edges, preferential_attachment_edges, preferential_attachment_graph,
};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use thiserror::Error;

use crate::encode::TextEncoder;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("both classes are required: {n_pos} positives, {n_neg} negatives")]
    DegenerateLabels { n_pos: usize, n_neg: usize },
    #[error("scores and labels differ in length: {scores} vs {labels}")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("empty evaluation set")]
    EmptySet,
    #[error("item {index} has no prediction")]
    MissingPrediction { index: usize },
    #[error("node {0} does not exist")]
    UnknownNode(String),
    #[error("no eligible future pairs; holdout would be empty")]
    NoEligiblePairs,
    #[error("record {evidence_id} fails the QA sampling filter")]
    IneligibleRecord { evidence_id: String },
    #[error("response violates the schema: {0}")]
    SchemaViolation(String),
    #[error("no CLASSIFICATION line in the answer")]
    UnparseableAnswer,
    #[error("mode {mode} is incompatible with {contexts} retrieved contexts")]
    ContextModeMismatch { mode: String, contexts: usize },
    #[error(transparent)]
    Backend(#[from] crate::extract::BackendError),
}

/// Link-prediction scoring method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkPredMethod {
    /// shortest-path heuristic baseline
    Sp,
    /// random forest over structural and semantic pair features
    Feat,
    /// node2vec embeddings plus logistic regression
    N2v,
}

impl std::str::FromStr for LinkPredMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sp" => Ok(LinkPredMethod::Sp),
            "feat" => Ok(LinkPredMethod::Feat),
            "n2v" => Ok(LinkPredMethod::N2v),
            other => Err(format!("unknown link-prediction method: {other}")),
        }
    }
}

impl std::fmt::Display for LinkPredMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LinkPredMethod::Sp => f.write_str("sp"),
            LinkPredMethod::Feat => f.write_str("feat"),
            LinkPredMethod::N2v => f.write_str("n2v"),
        }
    }
}

/// Sample `count` non-edges of the graph, excluding `avoid`, with a seeded
/// generator. Pairs come back in canonical (smaller id first) order.
pub fn sample_non_edges(
    graph: &UndirectedGraph,
    count: usize,
    avoid: &std::collections::BTreeSet<EntityPair>,
    seed: u64,
) -> Vec<EntityPair> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = std::collections::BTreeSet::new();
    let n = graph.len();
    let mut attempts = 0usize;
    let max_attempts = count.saturating_mul(1000).max(10_000);
    while out.len() < count && attempts < max_attempts {
        attempts += 1;
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v || graph.has_edge(u, v) {
            continue;
        }
        let pair = if graph.id(u) <= graph.id(v) {
            (graph.id(u).to_string(), graph.id(v).to_string())
        } else {
            (graph.id(v).to_string(), graph.id(u).to_string())
        };
        if avoid.contains(&pair) {
            continue;
        }
        out.insert(pair);
    }
    out.into_iter().collect()
}

/// Score pairs by the shortest-path heuristic.
pub fn score_pairs_shortest_path(
    graph: &UndirectedGraph,
    pairs: &[EntityPair],
) -> Result<Vec<f64>, EvalError> {
    pairs
        .iter()
        .map(|(a, b)| shortest_path_score(graph, a, b))
        .collect()
}

/// A trained link-prediction model bound to its representation.
pub enum LinkModel {
    Features(Model),
    Node2Vec {
        embeddings: NodeEmbeddings,
        model: Model,
    },
}

impl LinkModel {
    pub fn feature_importances(&self) -> Option<&[f64]> {
        match self {
            LinkModel::Features(m) => m.feature_importances(),
            LinkModel::Node2Vec { model, .. } => model.feature_importances(),
        }
    }
}

/// Train a link model on the graph's own edges (positives) against seeded
/// non-edge negatives.
pub fn train_link_model(
    graph: &UndirectedGraph,
    method: LinkPredMethod,
    encoder: &dyn TextEncoder,
    n2v_params: &Node2VecParams,
    seed: u64,
    max_train_positives: usize,
) -> Result<LinkModel, EvalError> {
    let mut positives: Vec<EntityPair> = graph
        .edges()
        .into_iter()
        .map(|(u, v)| (graph.id(u).to_string(), graph.id(v).to_string()))
        .collect();
    if positives.len() > max_train_positives {
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x5eed);
        for i in (1..positives.len()).rev() {
            let j = rng.gen_range(0..=i);
            positives.swap(i, j);
        }
        positives.truncate(max_train_positives);
        positives.sort();
    }
    let avoid: std::collections::BTreeSet<EntityPair> = positives.iter().cloned().collect();
    let negatives = sample_non_edges(graph, positives.len(), &avoid, seed ^ 0x7a57);

    let mut labels: Vec<bool> = Vec::with_capacity(positives.len() + negatives.len());
    let mut pairs: Vec<&EntityPair> = Vec::with_capacity(labels.capacity());
    for p in &positives {
        pairs.push(p);
        labels.push(true);
    }
    for n in &negatives {
        pairs.push(n);
        labels.push(false);
    }

    match method {
        LinkPredMethod::Sp => unreachable!("shortest path needs no training"),
        LinkPredMethod::Feat => {
            // positives are existing edges: mask each one out of its own
            // feature computation so training matches the unseen-pair setting
            let features: Vec<Vec<f64>> = pairs
                .iter()
                .map(|(a, b)| pair_features_masked(graph, a, b, encoder).map(|f| f.to_vec()))
                .collect::<Result<_, _>>()?;
            let model = train_classifier(&features, &labels, ClassifierKind::Forest, seed)?;
            Ok(LinkModel::Features(model))
        }
        LinkPredMethod::N2v => {
            let embeddings = node2vec_embed(graph, n2v_params, seed);
            let features: Vec<Vec<f64>> = pairs
                .iter()
                .map(|(a, b)| embeddings.pair_product(a, b))
                .collect();
            let model = train_classifier(&features, &labels, ClassifierKind::Logistic, seed)?;
            Ok(LinkModel::Node2Vec { embeddings, model })
        }
    }
}

/// Score evaluation pairs under a trained model.
pub fn score_pairs_with_model(
    graph: &UndirectedGraph,
    link_model: &LinkModel,
    encoder: &dyn TextEncoder,
    pairs: &[EntityPair],
) -> Result<Vec<f64>, EvalError> {
    match link_model {
        LinkModel::Features(model) => pairs
            .iter()
            .map(|(a, b)| pair_features(graph, a, b, encoder).map(|f| model.score(&f)))
            .collect(),
        LinkModel::Node2Vec { embeddings, model } => Ok(pairs
            .iter()
            .map(|(a, b)| model.score(&embeddings.pair_product(a, b)))
            .collect()),
    }
}

/// One link-prediction evaluation run.
#[derive(Debug, Serialize)]
pub struct LinkPredReport {
    pub method: LinkPredMethod,
    pub result: RankResult,
    pub cold_start_skipped: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feature_importances: Option<Vec<(String, f64)>>,
}

impl LinkPredReport {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{:.6},{:.6},{},{}",
            self.method, self.result.auc, self.result.ap, self.result.n_pos, self.result.n_neg
        )
    }

    pub fn csv_header() -> &'static str {
        "method,auc,ap,n_pos,n_neg"
    }
}

/// Run one method over a prepared holdout on the training graph's entity
/// co-mention projection.
pub fn evaluate_link_prediction(
    train_graph: &crate::graph::EvidenceGraph,
    holdout: &HoldoutSet,
    method: LinkPredMethod,
    encoder: &dyn TextEncoder,
    n2v_params: &Node2VecParams,
    seed: u64,
) -> Result<LinkPredReport, EvalError> {
    let projection = UndirectedGraph::from_co_mentions(train_graph);
    evaluate_link_prediction_on(&projection, holdout, method, encoder, n2v_params, seed)
}

/// The same evaluation over an explicit projection; lets synthetic benchmarks
/// reuse the exact production path.
pub fn evaluate_link_prediction_on(
    projection: &UndirectedGraph,
    holdout: &HoldoutSet,
    method: LinkPredMethod,
    encoder: &dyn TextEncoder,
    n2v_params: &Node2VecParams,
    seed: u64,
) -> Result<LinkPredReport, EvalError> {
    // one canonically ordered pair list so tie handling cannot favor a class
    let mut labeled: Vec<(EntityPair, bool)> = holdout
        .test_positive
        .iter()
        .map(|p| (p.clone(), true))
        .chain(holdout.negatives.iter().map(|n| (n.clone(), false)))
        .collect();
    labeled.sort();
    let (pairs, labels): (Vec<EntityPair>, Vec<bool>) = labeled.into_iter().unzip();

    let (scores, importances) = match method {
        LinkPredMethod::Sp => (score_pairs_shortest_path(projection, &pairs)?, None),
        _ => {
            let model = train_link_model(projection, method, encoder, n2v_params, seed, 2000)?;
            let scores = score_pairs_with_model(projection, &model, encoder, &pairs)?;
            let importances = model.feature_importances().map(|imp| {
                imp.iter()
                    .enumerate()
                    .map(|(i, v)| {
                        let name = PAIR_FEATURE_NAMES
                            .get(i)
                            .map(|n| n.to_string())
                            .unwrap_or_else(|| format!("f{i}"));
                        (name, *v)
                    })
                    .collect::<Vec<_>>()
            });
            (scores, importances)
        }
    };
    let result = rank_metrics(&scores, &labels)?;
    Ok(LinkPredReport {
        method,
        result,
        cold_start_skipped: holdout.cold_start_skipped,
        feature_importances: importances,
    })
}
