//! Undirected signed graphs with contiguous node ids.
//!
//! Edges are stored once, as `u < v`, in lexicographic order. Each node keeps
//! a neighbor list sorted by neighbor id that points back into the edge
//! vector, so sign lookups are a binary search and common-neighbor scans are
//! a linear merge. The only mutation after construction is a sign flip,
//! which leaves the support and the degree sequence untouched.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }

    pub fn negated(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }

    /// Sign of a nonzero number; `None` for zero and NaN.
    pub fn of(x: f64) -> Option<Sign> {
        if x > 0.0 {
            Some(Sign::Positive)
        } else if x < 0.0 {
            Some(Sign::Negative)
        } else {
            None
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Positive => f.write_str("+1"),
            Sign::Negative => f.write_str("-1"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub sign: Sign,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedGraph {
    labels: Vec<String>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(NodeId, EdgeId)>>,
}

impl SignedGraph {
    /// Builds a graph over `labels.len()` nodes.
    ///
    /// Pairs may be given in either orientation. A repeated pair with the
    /// same sign is merged; a repeated pair with a different sign, a
    /// self-loop, or an out-of-range node is rejected.
    pub fn from_edges<I>(labels: Vec<String>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId, Sign)>,
    {
        let n = labels.len();
        let mut list = Vec::new();
        for (a, b, sign) in edges {
            if a >= n {
                return Err(Error::UnknownNode(a));
            }
            if b >= n {
                return Err(Error::UnknownNode(b));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop on node {a}")));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            list.push(Edge { u, v, sign });
        }
        list.sort_by_key(|e| (e.u, e.v));

        let mut edges: Vec<Edge> = Vec::with_capacity(list.len());
        for e in list {
            match edges.last() {
                Some(prev) if prev.u == e.u && prev.v == e.v => {
                    if prev.sign != e.sign {
                        return Err(Error::InvalidGraph(format!(
                            "conflicting signs on {{{}, {}}}",
                            e.u, e.v
                        )));
                    }
                }
                _ => edges.push(e),
            }
        }

        let mut adjacency = vec![Vec::new(); n];
        for (id, e) in edges.iter().enumerate() {
            adjacency[e.u].push((e.v, id));
            adjacency[e.v].push((e.u, id));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }

        Ok(SignedGraph {
            labels,
            edges,
            adjacency,
        })
    }

    /// Nodes labelled by their own index.
    pub fn with_nodes<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId, Sign)>,
    {
        Self::from_edges(default_labels(node_count), edges)
    }

    /// A graph on the same nodes, keeping only the given edges.
    pub fn with_same_nodes<I>(&self, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId, Sign)>,
    {
        Self::from_edges(self.labels.clone(), edges)
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> Edge {
        self.edges[id]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, node: NodeId) -> &str {
        &self.labels[node]
    }

    pub fn positive_edge_count(&self) -> usize {
        self.edges
            .iter()
            .filter(|e| e.sign == Sign::Positive)
            .count()
    }

    pub fn negative_edge_count(&self) -> usize {
        self.edge_count() - self.positive_edge_count()
    }

    /// Neighbors of `node` with the id of the connecting edge, sorted by neighbor.
    pub fn neighbors(&self, node: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node].len()
    }

    pub fn edge_id(&self, u: NodeId, v: NodeId) -> Option<EdgeId> {
        if u >= self.node_count() || v >= self.node_count() {
            return None;
        }
        let (small, large) = if self.degree(u) <= self.degree(v) {
            (u, v)
        } else {
            (v, u)
        };
        let list = &self.adjacency[small];
        list.binary_search_by(|&(w, _)| w.cmp(&large))
            .ok()
            .map(|i| list[i].1)
    }

    pub fn sign(&self, u: NodeId, v: NodeId) -> Option<Sign> {
        self.edge_id(u, v).map(|id| self.edges[id].sign)
    }

    /// Signed adjacency entry: +1, -1, or 0 for a non-edge.
    pub fn entry(&self, u: NodeId, v: NodeId) -> i64 {
        self.sign(u, v).map_or(0, Sign::value)
    }

    /// Negates the sign of `{u, v}` and returns the sign it had before.
    pub fn flip_edge(&mut self, u: NodeId, v: NodeId) -> Result<Sign> {
        let id = self.edge_id(u, v).ok_or(Error::NotAnEdge { u, v })?;
        Ok(self.flip_edge_id(id))
    }

    pub fn flip_edge_id(&mut self, id: EdgeId) -> Sign {
        let old = self.edges[id].sign;
        self.edges[id].sign = old.negated();
        old
    }

    /// Unsigned degrees, sorted ascending.
    pub fn degree_sequence(&self) -> Vec<usize> {
        let mut degrees: Vec<usize> = self.adjacency.iter().map(Vec::len).collect();
        degrees.sort_unstable();
        degrees
    }

    /// Common neighbors `w` of `u` and `v`, yielded as `(w, edge{u,w}, edge{v,w})`.
    pub fn common_neighbors(&self, u: NodeId, v: NodeId) -> CommonNeighbors<'_> {
        CommonNeighbors {
            left: &self.adjacency[u],
            right: &self.adjacency[v],
        }
    }

    /// Every sign negated; used to check the odd symmetry of the trace.
    pub fn negated(&self) -> SignedGraph {
        let mut g = self.clone();
        for e in &mut g.edges {
            e.sign = e.sign.negated();
        }
        g
    }
}

pub(crate) fn default_labels(node_count: usize) -> Vec<String> {
    (0..node_count).map(|i| i.to_string()).collect()
}

pub struct CommonNeighbors<'a> {
    left: &'a [(NodeId, EdgeId)],
    right: &'a [(NodeId, EdgeId)],
}

impl Iterator for CommonNeighbors<'_> {
    type Item = (NodeId, EdgeId, EdgeId);

    fn next(&mut self) -> Option<Self::Item> {
        while let (Some(&(a, ea)), Some(&(b, eb))) = (self.left.first(), self.right.first()) {
            match a.cmp(&b) {
                Ordering::Less => self.left = &self.left[1..],
                Ordering::Greater => self.right = &self.right[1..],
                Ordering::Equal => {
                    self.left = &self.left[1..];
                    self.right = &self.right[1..];
                    return Some((a, ea, eb));
                }
            }
        }
        None
    }
}
