//! Ranking metrics: AUC with half-credit for ties and step-interpolated
//! average precision.

use serde::Serialize;

use super::EvalError;

/// AUC and AP for one ranking run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankResult {
    pub auc: f64,
    pub ap: f64,
    pub n_pos: usize,
    pub n_neg: usize,
}

/// Compute AUC and AP over scored binary labels.
///
/// AUC is the probability that a random positive outscores a random negative,
/// ties counted one half — computed via tie-averaged ranks, which matches the
/// brute-force pairwise definition exactly. AP sums precision at each
/// positive in the ranked list, ties broken by stable input order.
pub fn rank_metrics(scores: &[f64], labels: &[bool]) -> Result<RankResult, EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            scores: scores.len(),
            labels: labels.len(),
        });
    }
    let n_pos = labels.iter().filter(|l| **l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::DegenerateLabels { n_pos, n_neg });
    }

    // ascending rank with averaged ties
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[a]
            .partial_cmp(&scores[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut rank = vec![0.0f64; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share the average
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for k in i..=j {
            rank[order[k]] = avg;
        }
        i = j + 1;
    }
    let positive_rank_sum: f64 = labels
        .iter()
        .zip(&rank)
        .filter(|(l, _)| **l)
        .map(|(_, r)| *r)
        .sum();
    let auc =
        (positive_rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0) / (n_pos as f64 * n_neg as f64);

    // descending order, stable so ties keep input order
    let mut desc: Vec<usize> = (0..scores.len()).collect();
    desc.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut hits = 0usize;
    let mut ap_sum = 0.0f64;
    for (position, &idx) in desc.iter().enumerate() {
        if labels[idx] {
            hits += 1;
            ap_sum += hits as f64 / (position + 1) as f64;
        }
    }
    let ap = ap_sum / n_pos as f64;

    Ok(RankResult {
        auc,
        ap,
        n_pos,
        n_neg,
    })
}

/// Brute-force pairwise AUC: concordant pairs plus half credit for ties,
/// over all positive-negative pairs. The independent oracle for
/// [`rank_metrics`]; quadratic, so only suitable for small sets.
pub fn brute_force_auc(scores: &[f64], labels: &[bool]) -> Result<f64, EvalError> {
    let positives: Vec<f64> = scores
        .iter()
        .zip(labels)
        .filter(|(_, l)| **l)
        .map(|(s, _)| *s)
        .collect();
    let negatives: Vec<f64> = scores
        .iter()
        .zip(labels)
        .filter(|(_, l)| !**l)
        .map(|(s, _)| *s)
        .collect();
    if positives.is_empty() || negatives.is_empty() {
        return Err(EvalError::DegenerateLabels {
            n_pos: positives.len(),
            n_neg: negatives.len(),
        });
    }
    let mut credit = 0.0f64;
    for p in &positives {
        for n in &negatives {
            if p > n {
                credit += 1.0;
            } else if p == n {
                credit += 0.5;
            }
        }
    }
    Ok(credit / (positives.len() as f64 * negatives.len() as f64))
}
