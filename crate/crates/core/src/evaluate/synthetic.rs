//! Seeded synthetic graph generation for structure-recovery checks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use super::linkgraph::UndirectedGraph;

/// Barabási–Albert preferential attachment: each new node attaches `m` edges
/// to existing nodes sampled proportionally to degree. Returns undirected
/// edges over node indexes `0..n`.
pub fn preferential_attachment_edges(n: usize, m: usize, seed: u64) -> Vec<(usize, usize)> {
    assert!(m >= 1 && n > m, "need n > m >= 1");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    // endpoint pool: each edge contributes both endpoints, so sampling from
    // the pool is degree-proportional
    let mut pool: Vec<usize> = Vec::new();

    // seed clique over the first m+1 nodes
    for u in 0..=m {
        for v in (u + 1)..=m {
            edges.push((u, v));
            pool.push(u);
            pool.push(v);
        }
    }
    for node in (m + 1)..n {
        let mut targets = std::collections::BTreeSet::new();
        let mut guard = 0;
        while targets.len() < m && guard < 10_000 {
            guard += 1;
            let t = pool[rng.gen_range(0..pool.len())];
            if t != node {
                targets.insert(t);
            }
        }
        for t in targets {
            edges.push((node, t));
            pool.push(node);
            pool.push(t);
        }
    }
    edges
}

/// Preferential attachment with triad formation: after each preferential
/// step, each remaining edge of the joining node closes a triangle with
/// probability `p_triad` by attaching to a neighbor of the previous target.
/// High `p_triad` yields the clustered scale-free topology typical of
/// entity co-mention graphs.
pub fn clustered_attachment_edges(
    n: usize,
    m: usize,
    p_triad: f64,
    seed: u64,
) -> Vec<(usize, usize)> {
    assert!(m >= 1 && n > m, "need n > m >= 1");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut pool: Vec<usize> = Vec::new();
    let mut adjacency: Vec<std::collections::BTreeSet<usize>> = vec![Default::default(); n];
    let connect = |edges: &mut Vec<(usize, usize)>,
                   pool: &mut Vec<usize>,
                   adjacency: &mut Vec<std::collections::BTreeSet<usize>>,
                   u: usize,
                   v: usize| {
        edges.push((u, v));
        pool.push(u);
        pool.push(v);
        adjacency[u].insert(v);
        adjacency[v].insert(u);
    };

    for u in 0..=m {
        for v in (u + 1)..=m {
            connect(&mut edges, &mut pool, &mut adjacency, u, v);
        }
    }
    for node in (m + 1)..n {
        let mut targets = std::collections::BTreeSet::new();
        let mut previous: Option<usize> = None;
        let mut guard = 0;
        while targets.len() < m && guard < 10_000 {
            guard += 1;
            let candidate = match previous {
                Some(prev) if rng.gen_bool(p_triad) => {
                    // triad formation: a random neighbor of the last target
                    let neighbors: Vec<usize> = adjacency[prev]
                        .iter()
                        .copied()
                        .filter(|x| *x != node && !targets.contains(x))
                        .collect();
                    if neighbors.is_empty() {
                        pool[rng.gen_range(0..pool.len())]
                    } else {
                        neighbors[rng.gen_range(0..neighbors.len())]
                    }
                }
                _ => pool[rng.gen_range(0..pool.len())],
            };
            if candidate != node && targets.insert(candidate) {
                previous = Some(candidate);
            }
        }
        for t in targets {
            connect(&mut edges, &mut pool, &mut adjacency, node, t);
        }
    }
    edges
}

/// The same generator materialized as an [`UndirectedGraph`] with readable
/// node ids.
pub fn preferential_attachment_graph(n: usize, m: usize, seed: u64) -> UndirectedGraph {
    let edges = preferential_attachment_edges(n, m, seed);
    UndirectedGraph::from_edges(
        (0..n).map(node_id),
        edges.into_iter().map(|(u, v)| (node_id(u), node_id(v))),
    )
}

pub fn node_id(index: usize) -> String {
    format!("n{index:04}")
}
