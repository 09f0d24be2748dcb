//! Random graph generators and brute-force oracles shared by the
//! integration tests. Nothing here calls the triangle enumerator or the
//! two-path table.

#![allow(dead_code)]

use std::path::PathBuf;

use balance_attack::{BalanceDegree, Sign, SignedGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Erdős–Rényi graph with independent edge signs.
pub fn random_graph(seed: u64, n: usize, edge_prob: f64, positive_prob: f64) -> SignedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(edge_prob) {
                let sign = if rng.gen_bool(positive_prob) {
                    Sign::Positive
                } else {
                    Sign::Negative
                };
                edges.push((u, v, sign));
            }
        }
    }
    SignedGraph::with_nodes(n, edges).unwrap()
}

/// Two factions: positive inside, negative across, then a fraction of signs
/// flipped as noise. Highly balanced and triangle-rich.
pub fn factional_graph(seed: u64, n: usize, edge_prob: f64, noise: f64) -> SignedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(edge_prob) {
                let mut positive = side[u] == side[v];
                if rng.gen_bool(noise) {
                    positive = !positive;
                }
                let sign = if positive { Sign::Positive } else { Sign::Negative };
                edges.push((u, v, sign));
            }
        }
    }
    SignedGraph::with_nodes(n, edges).unwrap()
}

pub fn dense(g: &SignedGraph) -> Vec<Vec<i64>> {
    let n = g.node_count();
    let mut a = vec![vec![0i64; n]; n];
    for e in g.edges() {
        a[e.u][e.v] = e.sign.value();
        a[e.v][e.u] = e.sign.value();
    }
    a
}

fn matmul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    let mut c = vec![vec![0i64; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] != 0 {
                for j in 0..n {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
    }
    c
}

/// `Tr(A^3)` by dense matrix multiplication.
pub fn dense_trace_a3(g: &SignedGraph) -> i64 {
    let a = dense(g);
    let a3 = matmul(&matmul(&a, &a), &a);
    (0..a.len()).map(|i| a3[i][i]).sum()
}

/// `Tr(|A|^3)` by dense matrix multiplication.
pub fn dense_trace_abs_a3(g: &SignedGraph) -> i64 {
    let a: Vec<Vec<i64>> = dense(g)
        .into_iter()
        .map(|row| row.into_iter().map(i64::abs).collect())
        .collect();
    let a3 = matmul(&matmul(&a, &a), &a);
    (0..a.len()).map(|i| a3[i][i]).sum()
}

/// `(A^2)_uv` for every edge, in edge-id order.
pub fn dense_two_paths(g: &SignedGraph) -> Vec<i64> {
    let a = dense(g);
    let n = a.len();
    g.edges()
        .iter()
        .map(|e| (0..n).map(|w| a[e.u][w] * a[w][e.v]).sum())
        .collect()
}

/// Balanced/unbalanced triangle counts over all node triples.
pub fn brute_force_counts(g: &SignedGraph) -> (u64, u64) {
    let a = dense(g);
    let n = a.len();
    let (mut balanced, mut unbalanced) = (0, 0);
    for i in 0..n {
        for j in (i + 1)..n {
            if a[i][j] == 0 {
                continue;
            }
            for k in (j + 1)..n {
                let product = a[i][j] * a[j][k] * a[i][k];
                if product > 0 {
                    balanced += 1;
                } else if product < 0 {
                    unbalanced += 1;
                }
            }
        }
    }
    (balanced, unbalanced)
}

pub fn brute_force_d3(g: &SignedGraph) -> BalanceDegree {
    let (b, u) = brute_force_counts(g);
    BalanceDegree::from_counts(b, u)
}

/// Location of the Bitcoin-Alpha rating CSV (`BITCOIN_ALPHA_CSV`, or
/// `data/soc-sign-bitcoinalpha.csv` at the workspace root).
pub fn bitcoin_alpha_path() -> Option<PathBuf> {
    if let Ok(p) = std::env::var("BITCOIN_ALPHA_CSV") {
        let p = PathBuf::from(p);
        return p.is_file().then_some(p);
    }
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..");
    ["data/soc-sign-bitcoinalpha.csv", "data/bitcoin-alpha.csv"]
        .iter()
        .map(|rel| root.join(rel))
        .find(|p| p.is_file())
}
