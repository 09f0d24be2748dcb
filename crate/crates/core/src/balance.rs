//! Balance degree and the two-path table.
//!
//! With `A` the signed adjacency matrix, `Tr(A^3) = 6(b - u)` and
//! `Tr(|A|^3) = 6(b + u)` where `b` and `u` count balanced and unbalanced
//! triangles, so the balance degree `(Tr(A^3) + Tr(|A|^3)) / (2 Tr(|A|^3))`
//! is exactly `b / (b + u)`. Everything here is integer arithmetic; the
//! ratio is kept as a pair of counts and only turned into a float for
//! reporting.
//!
//! A sign flip leaves `|A|` alone, so the only moving part of the balance
//! degree is `Tr(A^3)`. Flipping `a_uv` changes it by `-12 a_uv p_uv`, where
//! `p_uv = (A^2)_uv` is the signed number of two-paths between the endpoints.
//! [`TwoPathTable`] stores `p_uv` for every edge and is kept exact across
//! flips in `O(deg u + deg v)`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, NodeId, Sign, SignedGraph};

/// Fraction of balanced triangles, or undefined for a triangle-free graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BalanceDegree {
    Undefined,
    Ratio { balanced: u64, total: u64 },
}

impl BalanceDegree {
    pub fn from_counts(balanced: u64, unbalanced: u64) -> Self {
        let total = balanced + unbalanced;
        if total == 0 {
            BalanceDegree::Undefined
        } else {
            BalanceDegree::Ratio { balanced, total }
        }
    }

    pub fn is_undefined(self) -> bool {
        matches!(self, BalanceDegree::Undefined)
    }

    pub fn to_f64(self) -> Option<f64> {
        match self {
            BalanceDegree::Undefined => None,
            BalanceDegree::Ratio { balanced, total } => Some(balanced as f64 / total as f64),
        }
    }

    /// Exact comparison of two defined values; `None` if either is undefined.
    pub fn cmp_exact(self, other: BalanceDegree) -> Option<Ordering> {
        match (self, other) {
            (
                BalanceDegree::Ratio {
                    balanced: b1,
                    total: t1,
                },
                BalanceDegree::Ratio {
                    balanced: b2,
                    total: t2,
                },
            ) => Some((b1 as u128 * t2 as u128).cmp(&(b2 as u128 * t1 as u128))),
            _ => None,
        }
    }
}

impl PartialOrd for BalanceDegree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.cmp_exact(*other)
    }
}

impl fmt::Display for BalanceDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_f64() {
            None => f.write_str("undefined"),
            Some(x) => write!(f, "{x:?}"),
        }
    }
}

impl Serialize for BalanceDegree {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self.to_f64() {
            Some(x) => serializer.serialize_f64(x),
            None => serializer.serialize_str("undefined"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BalanceReport {
    pub n: usize,
    pub m: usize,
    pub pos_edges: usize,
    pub neg_edges: usize,
    pub balanced: u64,
    pub unbalanced: u64,
    #[serde(skip)]
    pub trace_a3: i64,
    #[serde(skip)]
    pub trace_abs_a3: i64,
    pub d3: BalanceDegree,
}

impl BalanceReport {
    pub fn triangles(&self) -> u64 {
        self.balanced + self.unbalanced
    }

    pub const CSV_HEADER: &'static str = "n,m,pos_edges,neg_edges,balanced,unbalanced,d3";

    pub fn csv_record(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.n, self.m, self.pos_edges, self.neg_edges, self.balanced, self.unbalanced, self.d3
        )
    }
}

/// Counts balanced and unbalanced triangles with the forward algorithm.
///
/// Nodes are ranked by `(degree, id)` and each node keeps only its
/// higher-ranked neighbors, so every triangle is found exactly once, from
/// its lowest-ranked corner.
pub fn count_signed_triangles(g: &SignedGraph) -> BalanceReport {
    let n = g.node_count();
    let mut order: Vec<NodeId> = (0..n).collect();
    order.sort_unstable_by_key(|&v| (g.degree(v), v));
    let mut rank = vec![0usize; n];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }

    // forward[v]: (rank, sign) of higher-ranked neighbors, sorted by rank
    let forward: Vec<Vec<(usize, i64)>> = (0..n)
        .map(|v| {
            let mut out: Vec<(usize, i64)> = g
                .neighbors(v)
                .iter()
                .filter(|&&(w, _)| rank[w] > rank[v])
                .map(|&(w, e)| (rank[w], g.edge(e).sign.value()))
                .collect();
            out.sort_unstable();
            out
        })
        .collect();

    let mut balanced = 0u64;
    let mut unbalanced = 0u64;
    for &u in &order {
        let fu = &forward[u];
        for &(rv, a_uv) in fu {
            let fv = &forward[order[rv]];
            let (mut i, mut j) = (0, 0);
            while i < fu.len() && j < fv.len() {
                match fu[i].0.cmp(&fv[j].0) {
                    Ordering::Less => i += 1,
                    Ordering::Greater => j += 1,
                    Ordering::Equal => {
                        if a_uv * fu[i].1 * fv[j].1 > 0 {
                            balanced += 1;
                        } else {
                            unbalanced += 1;
                        }
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
    }

    let pos_edges = g.positive_edge_count();
    BalanceReport {
        n,
        m: g.edge_count(),
        pos_edges,
        neg_edges: g.edge_count() - pos_edges,
        balanced,
        unbalanced,
        trace_a3: 6 * (balanced as i64 - unbalanced as i64),
        trace_abs_a3: 6 * (balanced + unbalanced) as i64,
        d3: BalanceDegree::from_counts(balanced, unbalanced),
    }
}

pub fn balance_degree(g: &SignedGraph) -> BalanceDegree {
    count_signed_triangles(g).d3
}

/// `p_uv = (A^2)_uv` for every edge, indexed by edge id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoPathTable {
    values: Vec<i64>,
}

impl TwoPathTable {
    pub fn build(g: &SignedGraph) -> Self {
        let values = g
            .edges()
            .iter()
            .map(|e| {
                g.common_neighbors(e.u, e.v)
                    .map(|(_, eu, ev)| g.edge(eu).sign.value() * g.edge(ev).sign.value())
                    .sum()
            })
            .collect();
        TwoPathTable { values }
    }

    pub fn get(&self, edge: EdgeId) -> i64 {
        self.values[edge]
    }

    pub fn get_pair(&self, g: &SignedGraph, u: NodeId, v: NodeId) -> Option<i64> {
        g.edge_id(u, v).map(|e| self.values[e])
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Change in `Tr(A^3)` if `edge` were flipped now.
    pub fn delta_for(&self, g: &SignedGraph, edge: EdgeId) -> i64 {
        -12 * g.edge(edge).sign.value() * self.values[edge]
    }

    /// Brings the table in line with `g` after `{u, v}` was flipped away
    /// from `old_sign`. Only entries on edges that close a triangle with
    /// `{u, v}` move; `p_uv` itself does not depend on `a_uv`.
    pub fn apply_flip(&mut self, g: &SignedGraph, u: NodeId, v: NodeId, old_sign: Sign) -> Result<()> {
        let edge = g.edge_id(u, v).ok_or(Error::NotAnEdge { u, v })?;
        if self.values.len() != g.edge_count() || g.edge(edge).sign != old_sign.negated() {
            return Err(Error::InconsistentTable { u, v });
        }
        let step = -2 * old_sign.value();
        for (_, e_uw, e_vw) in g.common_neighbors(u, v) {
            let a_wu = g.edge(e_uw).sign.value();
            let a_wv = g.edge(e_vw).sign.value();
            self.values[e_vw] += step * a_wu;
            self.values[e_uw] += step * a_wv;
        }
        Ok(())
    }

    /// Full consistency check against a rebuild; `O(sum deg^2)`.
    pub fn validate(&self, g: &SignedGraph) -> Result<()> {
        let fresh = TwoPathTable::build(g);
        if fresh.values.len() != self.values.len() {
            return Err(Error::InconsistentTable { u: 0, v: 0 });
        }
        match fresh.values.iter().zip(&self.values).position(|(a, b)| a != b) {
            None => Ok(()),
            Some(e) => {
                let edge = g.edge(e);
                Err(Error::InconsistentTable { u: edge.u, v: edge.v })
            }
        }
    }
}

pub fn build_two_path_table(g: &SignedGraph) -> TwoPathTable {
    TwoPathTable::build(g)
}

/// Change in `Tr(A^3)` from flipping `{u, v}`: `-12 a_uv p_uv`.
/// `Tr(|A|^3)` does not change.
pub fn flip_delta(g: &SignedGraph, table: &TwoPathTable, u: NodeId, v: NodeId) -> Result<i64> {
    let edge = g.edge_id(u, v).ok_or(Error::NotAnEdge { u, v })?;
    Ok(table.delta_for(g, edge))
}

/// Call right after `g.flip_edge(u, v)` returned `old_sign`.
pub fn update_table_after_flip(
    g: &SignedGraph,
    table: &mut TwoPathTable,
    u: NodeId,
    v: NodeId,
    old_sign: Sign,
) -> Result<()> {
    table.apply_flip(g, u, v, old_sign)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Sign::{Negative as N, Positive as P};

    fn k3(signs: [Sign; 3]) -> SignedGraph {
        SignedGraph::with_nodes(3, [(0, 1, signs[0]), (0, 2, signs[1]), (1, 2, signs[2])]).unwrap()
    }

    fn star() -> SignedGraph {
        SignedGraph::with_nodes(5, [(0, 1, P), (0, 2, N), (0, 3, P), (0, 4, N)]).unwrap()
    }

    #[test]
    fn all_positive_triangle() {
        let r = count_signed_triangles(&k3([P, P, P]));
        assert_eq!((r.balanced, r.unbalanced), (1, 0));
        assert_eq!((r.trace_a3, r.trace_abs_a3), (6, 6));
        assert_eq!(r.d3.to_f64(), Some(1.0));
    }

    #[test]
    fn one_negative_edge_triangle() {
        let r = count_signed_triangles(&k3([P, P, N]));
        assert_eq!((r.balanced, r.unbalanced), (0, 1));
        assert_eq!(r.trace_a3, -6);
        assert_eq!(r.d3.to_f64(), Some(0.0));
    }

    #[test]
    fn two_triangles_half_balanced() {
        // nodes 1..4 mapped to 0..3: 12:+ 13:+ 23:+ 14:- 24:+
        let g = SignedGraph::with_nodes(4, [(0, 1, P), (0, 2, P), (1, 2, P), (0, 3, N), (1, 3, P)])
            .unwrap();
        let r = count_signed_triangles(&g);
        assert_eq!((r.balanced, r.unbalanced), (1, 1));
        assert_eq!(r.d3, BalanceDegree::Ratio { balanced: 1, total: 2 });
        assert_eq!(r.d3.to_f64(), Some(0.5));
    }

    #[test]
    fn triangle_free_is_undefined() {
        let path = SignedGraph::with_nodes(3, [(0, 1, P), (1, 2, P)]).unwrap();
        assert!(balance_degree(&path).is_undefined());
        assert_eq!(balance_degree(&path).to_string(), "undefined");
        assert_eq!(balance_degree(&path).to_f64(), None);
    }

    #[test]
    fn two_path_values_on_triangles() {
        let t = build_two_path_table(&k3([P, P, P]));
        assert_eq!(t.values(), [1, 1, 1]);

        // a_01 = -1: p_02 = a_01 * a_12 = -1
        let g = k3([N, P, P]);
        let t = build_two_path_table(&g);
        assert_eq!(t.get_pair(&g, 0, 2), Some(-1));
        assert_eq!(t.get_pair(&g, 1, 2), Some(-1));
        assert_eq!(t.get_pair(&g, 0, 1), Some(1));
    }

    #[test]
    fn star_has_no_two_paths_on_edges() {
        let g = star();
        assert!(build_two_path_table(&g).values().iter().all(|&p| p == 0));
    }

    #[test]
    fn flip_delta_on_k3() {
        let mut g = k3([P, P, P]);
        let mut t = build_two_path_table(&g);
        let d1 = flip_delta(&g, &t, 0, 1).unwrap();
        assert_eq!(d1, -12);
        let old = g.flip_edge(0, 1).unwrap();
        update_table_after_flip(&g, &mut t, 0, 1, old).unwrap();
        assert_eq!(count_signed_triangles(&g).trace_a3, 6 + d1);
        let d2 = flip_delta(&g, &t, 0, 1).unwrap();
        assert_eq!(d1 + d2, 0);
        assert!(flip_delta(&g, &t, 0, 5).is_err());
    }

    #[test]
    fn incremental_update_on_k3() {
        let mut g = k3([P, P, P]);
        let mut t = build_two_path_table(&g);
        let old = g.flip_edge(0, 1).unwrap();
        update_table_after_flip(&g, &mut t, 0, 1, old).unwrap();
        assert_eq!(t.get_pair(&g, 0, 2), Some(-1));
        assert_eq!(t.get_pair(&g, 1, 2), Some(-1));
        assert_eq!(t.get_pair(&g, 0, 1), Some(1));
        assert_eq!(t, build_two_path_table(&g));
    }

    #[test]
    fn incremental_update_on_star_is_noop() {
        let mut g = star();
        let mut t = build_two_path_table(&g);
        let old = g.flip_edge(0, 3).unwrap();
        update_table_after_flip(&g, &mut t, 0, 3, old).unwrap();
        assert!(t.values().iter().all(|&p| p == 0));
    }

    #[test]
    fn stale_sign_is_detected() {
        let g = k3([P, P, P]);
        let mut t = build_two_path_table(&g);
        // graph was never flipped, so claiming old sign P is inconsistent
        assert!(matches!(
            update_table_after_flip(&g, &mut t, 0, 1, P),
            Err(Error::InconsistentTable { .. })
        ));
        let mut other = t.clone();
        other.values[2] = 7;
        assert!(other.validate(&g).is_err());
        assert!(t.validate(&g).is_ok());
    }

    #[test]
    fn exact_ordering() {
        let a = BalanceDegree::from_counts(1, 2);
        let b = BalanceDegree::from_counts(2, 4);
        let c = BalanceDegree::from_counts(1, 1);
        assert_eq!(a.partial_cmp(&b), Some(Ordering::Equal));
        assert!(a < c);
        assert_eq!(a.partial_cmp(&BalanceDegree::Undefined), None);
    }

    #[test]
    fn report_serializes() {
        let r = count_signed_triangles(&k3([P, P, P]));
        assert_eq!(r.csv_record(), "3,3,3,0,1,0,1.0");
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(
            json,
            r#"{"n":3,"m":3,"pos_edges":3,"neg_edges":0,"balanced":1,"unbalanced":0,"d3":1.0}"#
        );
    }
}
