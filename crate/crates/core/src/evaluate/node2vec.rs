//! node2vec: biased second-order random walks plus negative-sampling
//! skip-gram, seeded end to end for bit-reproducible embeddings.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::linkgraph::UndirectedGraph;

/// node2vec hyperparameters. `p` is the return parameter, `q` the in-out
/// parameter of the second-order walk bias.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct Node2VecParams {
    pub dims: usize,
    pub walk_len: usize,
    pub walks_per_node: usize,
    pub p: f64,
    pub q: f64,
    pub window: usize,
    pub epochs: usize,
    pub negative_samples: usize,
    pub learning_rate: f64,
}

impl Default for Node2VecParams {
    fn default() -> Self {
        Node2VecParams {
            dims: 64,
            walk_len: 20,
            walks_per_node: 10,
            p: 1.0,
            q: 1.0,
            window: 5,
            epochs: 3,
            negative_samples: 5,
            learning_rate: 0.025,
        }
    }
}

/// Trained node embeddings keyed by node id.
#[derive(Debug, Clone)]
pub struct NodeEmbeddings {
    pub dims: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl NodeEmbeddings {
    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.vectors.get(id).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Cosine similarity of two node vectors; 0 when either is missing.
    pub fn cosine(&self, a: &str, b: &str) -> f64 {
        let (Some(va), Some(vb)) = (self.get(a), self.get(b)) else {
            return 0.0;
        };
        let dot: f64 = va.iter().zip(vb).map(|(x, y)| x * y).sum();
        let na: f64 = va.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = vb.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            return 0.0;
        }
        dot / (na * nb)
    }

    /// Elementwise product of the endpoint vectors (the pair representation
    /// fed to the downstream classifier); zeros when a node is missing.
    pub fn pair_product(&self, a: &str, b: &str) -> Vec<f64> {
        match (self.get(a), self.get(b)) {
            (Some(va), Some(vb)) => va.iter().zip(vb).map(|(x, y)| x * y).collect(),
            _ => vec![0.0; self.dims],
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Generate the biased walk corpus.
fn generate_walks(
    graph: &UndirectedGraph,
    params: &Node2VecParams,
    rng: &mut ChaCha12Rng,
) -> Vec<Vec<usize>> {
    let mut walks = Vec::with_capacity(graph.len() * params.walks_per_node);
    for _ in 0..params.walks_per_node {
        for start in 0..graph.len() {
            let mut walk = Vec::with_capacity(params.walk_len);
            walk.push(start);
            while walk.len() < params.walk_len {
                let current = *walk.last().unwrap();
                let neighbors: Vec<usize> = graph.neighbors(current).iter().copied().collect();
                if neighbors.is_empty() {
                    break;
                }
                let next = if walk.len() == 1 {
                    neighbors[rng.gen_range(0..neighbors.len())]
                } else {
                    let previous = walk[walk.len() - 2];
                    let weights: Vec<f64> = neighbors
                        .iter()
                        .map(|&x| {
                            if x == previous {
                                1.0 / params.p
                            } else if graph.has_edge(previous, x) {
                                1.0
                            } else {
                                1.0 / params.q
                            }
                        })
                        .collect();
                    let total: f64 = weights.iter().sum();
                    let mut draw = rng.gen_range(0.0..total);
                    let mut chosen = neighbors[neighbors.len() - 1];
                    for (i, w) in weights.iter().enumerate() {
                        if draw < *w {
                            chosen = neighbors[i];
                            break;
                        }
                        draw -= w;
                    }
                    chosen
                };
                walk.push(next);
            }
            walks.push(walk);
        }
    }
    walks
}

/// Degree^0.75 negative-sampling table.
fn negative_table(graph: &UndirectedGraph) -> Vec<f64> {
    let mut cumulative = Vec::with_capacity(graph.len());
    let mut total = 0.0;
    for node in 0..graph.len() {
        total += (graph.degree(node) as f64).max(1.0).powf(0.75);
        cumulative.push(total);
    }
    cumulative
}

fn sample_negative(cumulative: &[f64], rng: &mut ChaCha12Rng) -> usize {
    let total = *cumulative.last().unwrap();
    let draw = rng.gen_range(0.0..total);
    cumulative.partition_point(|c| *c <= draw)
}

/// Train node embeddings over the walk corpus with skip-gram negative
/// sampling. Single-threaded and fully seeded: identical inputs produce
/// identical embeddings.
pub fn node2vec_embed(
    graph: &UndirectedGraph,
    params: &Node2VecParams,
    seed: u64,
) -> NodeEmbeddings {
    let n = graph.len();
    let dims = params.dims;
    if n == 0 {
        return NodeEmbeddings {
            dims,
            vectors: BTreeMap::new(),
        };
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let walks = generate_walks(graph, params, &mut rng);
    let cumulative = negative_table(graph);

    let mut input = vec![0.0f64; n * dims];
    let mut output = vec![0.0f64; n * dims];
    for value in input.iter_mut() {
        *value = (rng.gen::<f64>() - 0.5) / dims as f64;
    }

    let mut gradient = vec![0.0f64; dims];
    for _ in 0..params.epochs {
        for walk in &walks {
            for (center_pos, &center) in walk.iter().enumerate() {
                let lo = center_pos.saturating_sub(params.window);
                let hi = (center_pos + params.window + 1).min(walk.len());
                for (context_pos, &context) in walk.iter().enumerate().take(hi).skip(lo) {
                    if context_pos == center_pos {
                        continue;
                    }
                    gradient.iter_mut().for_each(|g| *g = 0.0);
                    // positive pair plus negative draws
                    for k in 0..=params.negative_samples {
                        let (target, label) = if k == 0 {
                            (context, 1.0)
                        } else {
                            (sample_negative(&cumulative, &mut rng), 0.0)
                        };
                        if k > 0 && target == context {
                            continue;
                        }
                        let in_row = &input[center * dims..(center + 1) * dims];
                        let out_row = &output[target * dims..(target + 1) * dims];
                        let z: f64 = in_row.iter().zip(out_row).map(|(a, b)| a * b).sum();
                        let g = (label - sigmoid(z)) * params.learning_rate;
                        for d in 0..dims {
                            gradient[d] += g * output[target * dims + d];
                            output[target * dims + d] += g * input[center * dims + d];
                        }
                    }
                    for d in 0..dims {
                        input[center * dims + d] += gradient[d];
                    }
                }
            }
        }
    }

    let vectors = (0..n)
        .map(|node| {
            (
                graph.id(node).to_string(),
                input[node * dims..(node + 1) * dims].to_vec(),
            )
        })
        .collect();
    NodeEmbeddings { dims, vectors }
}
