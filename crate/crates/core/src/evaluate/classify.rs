//! Seeded pair classifiers: gradient-descent logistic regression and a
//! bagged random forest with gini splits and feature importances.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Logistic,
    Forest,
}

impl std::str::FromStr for ClassifierKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "logistic" => Ok(ClassifierKind::Logistic),
            "forest" => Ok(ClassifierKind::Forest),
            other => Err(format!("unknown classifier kind: {other}")),
        }
    }
}

/// A trained binary classifier scoring feature vectors into [0, 1].
#[derive(Debug, Clone)]
pub enum Model {
    Logistic(LogisticModel),
    Forest(ForestModel),
}

impl Model {
    pub fn score(&self, features: &[f64]) -> f64 {
        match self {
            Model::Logistic(m) => m.score(features),
            Model::Forest(m) => m.score(features),
        }
    }

    /// Normalized feature importances; only forests expose them.
    pub fn feature_importances(&self) -> Option<&[f64]> {
        match self {
            Model::Logistic(_) => None,
            Model::Forest(m) => Some(&m.feature_importances),
        }
    }
}

/// Train a classifier of the requested kind. Both paths are seeded and
/// deterministic.
pub fn train_classifier(
    features: &[Vec<f64>],
    labels: &[bool],
    kind: ClassifierKind,
    seed: u64,
) -> Result<Model, EvalError> {
    validate_training_set(features, labels)?;
    match kind {
        ClassifierKind::Logistic => train_logistic(features, labels).map(Model::Logistic),
        ClassifierKind::Forest => {
            train_forest(features, labels, &ForestParams::default(), seed).map(Model::Forest)
        }
    }
}

fn validate_training_set(features: &[Vec<f64>], labels: &[bool]) -> Result<(), EvalError> {
    if features.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            scores: features.len(),
            labels: labels.len(),
        });
    }
    let n_pos = labels.iter().filter(|l| **l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::DegenerateLabels { n_pos, n_neg });
    }
    Ok(())
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Linear model with sigmoid output, trained by full-batch gradient descent
/// on standardized features.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    means: Vec<f64>,
    scales: Vec<f64>,
}

impl LogisticModel {
    pub fn score(&self, features: &[f64]) -> f64 {
        let z: f64 = features
            .iter()
            .zip(&self.means)
            .zip(&self.scales)
            .zip(&self.weights)
            .map(|(((x, m), s), w)| w * ((x - m) / s))
            .sum::<f64>()
            + self.bias;
        sigmoid(z)
    }
}

fn train_logistic(features: &[Vec<f64>], labels: &[bool]) -> Result<LogisticModel, EvalError> {
    let n = features.len();
    let dims = features[0].len();
    let mut means = vec![0.0; dims];
    for row in features {
        for (d, x) in row.iter().enumerate() {
            means[d] += x;
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }
    let mut scales = vec![0.0; dims];
    for row in features {
        for (d, x) in row.iter().enumerate() {
            scales[d] += (x - means[d]).powi(2);
        }
    }
    for s in &mut scales {
        *s = (*s / n as f64).sqrt();
        if *s < 1e-12 {
            *s = 1.0;
        }
    }

    let standardized: Vec<Vec<f64>> = features
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(d, x)| (x - means[d]) / scales[d])
                .collect()
        })
        .collect();

    let mut weights = vec![0.0f64; dims];
    let mut bias = 0.0f64;
    let learning_rate = 0.5;
    let epochs = 500;
    for _ in 0..epochs {
        let mut grad_w = vec![0.0f64; dims];
        let mut grad_b = 0.0f64;
        for (row, &label) in standardized.iter().zip(labels) {
            let z: f64 = row.iter().zip(&weights).map(|(x, w)| x * w).sum::<f64>() + bias;
            let err = f64::from(label) - sigmoid(z);
            for (g, x) in grad_w.iter_mut().zip(row) {
                *g += err * x;
            }
            grad_b += err;
        }
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w += learning_rate * g / n as f64;
        }
        bias += learning_rate * grad_b / n as f64;
    }
    Ok(LogisticModel {
        weights,
        bias,
        means,
        scales,
    })
}

/// Random-forest hyperparameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: 6,
            min_leaf: 2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
enum Node {
    Leaf {
        probability: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn score(&self, features: &[f64]) -> f64 {
        let mut node = 0usize;
        loop {
            match &self.nodes[node] {
                Node::Leaf { probability } => return *probability,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if features[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }
}

/// Bagged randomized trees; probability output is the mean positive-leaf
/// fraction across trees.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestModel {
    trees: Vec<Tree>,
    /// gini-decrease importances, normalized to sum 1
    pub feature_importances: Vec<f64>,
}

impl ForestModel {
    pub fn score(&self, features: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.score(features)).sum::<f64>() / self.trees.len() as f64
    }
}

fn gini(pos: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

struct TreeBuilder<'a> {
    features: &'a [Vec<f64>],
    labels: &'a [bool],
    params: &'a ForestParams,
    nodes: Vec<Node>,
    importances: Vec<f64>,
}

impl<'a> TreeBuilder<'a> {
    fn build(&mut self, rows: Vec<usize>, depth: usize, rng: &mut ChaCha12Rng) -> usize {
        let pos = rows.iter().filter(|&&r| self.labels[r]).count();
        let total = rows.len();
        let make_leaf = total < 2 * self.params.min_leaf
            || depth >= self.params.max_depth
            || pos == 0
            || pos == total;
        if !make_leaf {
            if let Some((feature, threshold, gain, left_rows, right_rows)) =
                self.best_split(&rows, rng)
            {
                if gain > 1e-12 {
                    self.importances[feature] += gain * total as f64;
                    let index = self.nodes.len();
                    self.nodes.push(Node::Leaf { probability: 0.0 }); // placeholder
                    let left = self.build(left_rows, depth + 1, rng);
                    let right = self.build(right_rows, depth + 1, rng);
                    self.nodes[index] = Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    };
                    return index;
                }
            }
        }
        let index = self.nodes.len();
        self.nodes.push(Node::Leaf {
            probability: if total == 0 {
                0.5
            } else {
                pos as f64 / total as f64
            },
        });
        index
    }

    #[allow(clippy::type_complexity)]
    fn best_split(
        &self,
        rows: &[usize],
        rng: &mut ChaCha12Rng,
    ) -> Option<(usize, f64, f64, Vec<usize>, Vec<usize>)> {
        let dims = self.features[0].len();
        let mut candidates: Vec<usize> = (0..dims).collect();
        // draw a random feature subset of size ~sqrt(dims)
        for i in (1..candidates.len()).rev() {
            let j = rng.gen_range(0..=i);
            candidates.swap(i, j);
        }
        candidates.truncate(((dims as f64).sqrt().ceil() as usize).max(1));
        candidates.sort_unstable();

        let total = rows.len();
        let total_pos = rows.iter().filter(|&&r| self.labels[r]).count();
        let parent_gini = gini(total_pos, total);
        let mut best: Option<(usize, f64, f64)> = None;
        for &feature in &candidates {
            let mut values: Vec<(f64, bool)> = rows
                .iter()
                .map(|&r| (self.features[r][feature], self.labels[r]))
                .collect();
            values.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
            let mut left_pos = 0usize;
            for i in 0..total.saturating_sub(1) {
                if values[i].1 {
                    left_pos += 1;
                }
                if values[i].0 == values[i + 1].0 {
                    continue;
                }
                let left_total = i + 1;
                let right_total = total - left_total;
                if left_total < self.params.min_leaf || right_total < self.params.min_leaf {
                    continue;
                }
                let right_pos = total_pos - left_pos;
                let weighted = (left_total as f64 * gini(left_pos, left_total)
                    + right_total as f64 * gini(right_pos, right_total))
                    / total as f64;
                let gain = parent_gini - weighted;
                let threshold = (values[i].0 + values[i + 1].0) / 2.0;
                if best.is_none_or(|(_, _, g)| gain > g) {
                    best = Some((feature, threshold, gain));
                }
            }
        }
        best.map(|(feature, threshold, gain)| {
            let mut left_rows = Vec::new();
            let mut right_rows = Vec::new();
            for &r in rows {
                if self.features[r][feature] <= threshold {
                    left_rows.push(r);
                } else {
                    right_rows.push(r);
                }
            }
            (feature, threshold, gain, left_rows, right_rows)
        })
    }
}

fn train_forest(
    features: &[Vec<f64>],
    labels: &[bool],
    params: &ForestParams,
    seed: u64,
) -> Result<ForestModel, EvalError> {
    let n = features.len();
    let dims = features[0].len();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut trees = Vec::with_capacity(params.n_trees);
    let mut importances = vec![0.0f64; dims];
    for _ in 0..params.n_trees {
        let rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        let mut builder = TreeBuilder {
            features,
            labels,
            params,
            nodes: Vec::new(),
            importances: vec![0.0; dims],
        };
        builder.build(rows, 0, &mut rng);
        for (acc, imp) in importances.iter_mut().zip(&builder.importances) {
            *acc += imp;
        }
        trees.push(Tree {
            nodes: builder.nodes,
        });
    }
    let total: f64 = importances.iter().sum();
    if total > 0.0 {
        for imp in &mut importances {
            *imp /= total;
        }
    }
    Ok(ForestModel {
        trees,
        feature_importances: importances,
    })
}
