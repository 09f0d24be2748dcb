//! Dataset loaders and the canonical edge-list format.
//!
//! Rating CSVs (`source,target,rating[,time]`) are directed; they are folded
//! into an undirected graph by merging both directions of each pair under a
//! [`ConflictPolicy`]. The canonical edge list is a `# nodes=<n>` header
//! followed by one `u v s` line per edge with `u < v`, sorted.

use std::collections::HashMap;
use std::io::{BufRead, Read, Write};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, Sign, SignedGraph};

/// How the ratings of one unordered pair collapse to a single sign.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConflictPolicy {
    /// Sum every rating on the pair (both directions); the edge takes the
    /// sign of the sum and is dropped when the sum is exactly zero.
    #[default]
    SumRatings,
    /// Any negative rating makes the edge negative.
    NegativeWins,
    /// Pairs that received both positive and negative ratings are dropped.
    DropConflicts,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadOptions {
    pub conflict_policy: ConflictPolicy,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadStats {
    /// Data rows parsed (header excluded).
    pub rows_read: usize,
    pub header_skipped: bool,
    pub positive_rows: usize,
    pub negative_rows: usize,
    pub zero_rating_rows: usize,
    pub self_loop_rows: usize,
    /// Rows folded into a pair that an earlier row had already opened.
    pub merged_rows: usize,
    /// Pairs rated both positively and negatively.
    pub conflicting_pairs: usize,
    /// Pairs removed by the conflict policy (zero sum, or conflict dropped).
    pub dropped_pairs: usize,
}

impl LoadStats {
    pub fn dropped_rows(&self) -> usize {
        self.zero_rating_rows + self.self_loop_rows
    }
}

#[derive(Default)]
struct PairAccumulator {
    sum: f64,
    has_positive: bool,
    has_negative: bool,
}

/// Reads a directed rating CSV into an undirected signed graph.
///
/// A first row whose rating field is not numeric is treated as a header.
/// External ids are compacted to `0..n` in order of first appearance among
/// the pairs that survive merging, so nodes seen only in dropped rows do not
/// appear in the graph.
pub fn load_rating_csv<R: Read>(
    input: R,
    options: &LoadOptions,
) -> Result<(SignedGraph, LoadStats)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);

    let mut stats = LoadStats::default();
    let mut pairs: IndexMap<(String, String), PairAccumulator> = IndexMap::new();
    let mut first = true;

    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() < 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected source,target,rating but found {} field(s)", record.len()),
            });
        }
        let rating_field = &record[2];
        let rating = match rating_field.parse::<f64>() {
            Ok(r) if r.is_finite() => r,
            _ if first => {
                first = false;
                stats.header_skipped = true;
                continue;
            }
            _ => {
                return Err(Error::Parse {
                    line,
                    message: format!("non-numeric rating `{rating_field}`"),
                })
            }
        };
        first = false;
        stats.rows_read += 1;

        let (source, target) = (&record[0], &record[1]);
        if source.is_empty() || target.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty node id".into(),
            });
        }
        if rating == 0.0 {
            stats.zero_rating_rows += 1;
            continue;
        }
        if rating > 0.0 {
            stats.positive_rows += 1;
        } else {
            stats.negative_rows += 1;
        }
        if source == target {
            stats.self_loop_rows += 1;
            continue;
        }
        let key = if source <= target {
            (source.to_owned(), target.to_owned())
        } else {
            (target.to_owned(), source.to_owned())
        };
        let acc = match pairs.get_mut(&key) {
            Some(acc) => {
                stats.merged_rows += 1;
                acc
            }
            None => pairs.entry(key).or_default(),
        };
        acc.sum += rating;
        if rating > 0.0 {
            acc.has_positive = true;
        } else {
            acc.has_negative = true;
        }
    }

    if stats.rows_read == 0 {
        return Err(Error::EmptyInput);
    }

    let mut ids: IndexMap<String, NodeId> = IndexMap::new();
    let mut edges = Vec::with_capacity(pairs.len());
    for ((a, b), acc) in pairs {
        let conflicted = acc.has_positive && acc.has_negative;
        if conflicted {
            stats.conflicting_pairs += 1;
        }
        let sign = match options.conflict_policy {
            ConflictPolicy::SumRatings => Sign::of(acc.sum),
            ConflictPolicy::NegativeWins if acc.has_negative => Some(Sign::Negative),
            ConflictPolicy::NegativeWins => Some(Sign::Positive),
            ConflictPolicy::DropConflicts if conflicted => None,
            ConflictPolicy::DropConflicts => Sign::of(acc.sum),
        };
        let Some(sign) = sign else {
            stats.dropped_pairs += 1;
            continue;
        };
        let next = ids.len();
        let u = *ids.entry(a).or_insert(next);
        let next = ids.len();
        let v = *ids.entry(b).or_insert(next);
        edges.push((u, v, sign));
    }

    let labels = ids.into_keys().collect();
    let graph = SignedGraph::from_edges(labels, edges)?;
    Ok((graph, stats))
}

fn parse_sign(token: &str, line: usize) -> Result<Sign> {
    match token {
        "+1" | "1" | "+" => Ok(Sign::Positive),
        "-1" | "-" | "\u{2212}1" | "\u{2212}" => Ok(Sign::Negative),
        _ => Err(Error::InvalidSign {
            line,
            token: token.to_owned(),
        }),
    }
}

fn parse_node(token: &str, line: usize) -> Result<NodeId> {
    token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid node id `{token}`"),
    })
}

/// Reads a whitespace-separated `u v s` edge list with integer node ids.
///
/// An optional `# nodes=<n>` line fixes the node count (so isolated nodes
/// survive a round trip); otherwise it is one more than the largest id.
pub fn load_edge_list<R: BufRead>(input: R) -> Result<SignedGraph> {
    let mut declared_nodes: Option<usize> = None;
    let mut seen: HashMap<(NodeId, NodeId), (Sign, usize)> = HashMap::new();
    let mut edges = Vec::new();
    let mut max_id: Option<NodeId> = None;

    for (index, line) in input.lines().enumerate() {
        let line_no = index + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if let Some(comment) = text.strip_prefix('#') {
            if let Some(count) = comment.trim().strip_prefix("nodes=") {
                let n = count.trim().parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid node count `{}`", count.trim()),
                })?;
                declared_nodes = Some(n);
            }
            continue;
        }

        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected `u v s` but found {} field(s)", fields.len()),
            });
        }
        let a = parse_node(fields[0], line_no)?;
        let b = parse_node(fields[1], line_no)?;
        let sign = parse_sign(fields[2], line_no)?;
        if a == b {
            return Err(Error::SelfLoop {
                line: line_no,
                node: a.to_string(),
            });
        }
        let key = (a.min(b), a.max(b));
        match seen.get(&key) {
            Some(&(existing, _)) if existing != sign => {
                return Err(Error::ConflictingDuplicate {
                    line: line_no,
                    u: key.0.to_string(),
                    v: key.1.to_string(),
                })
            }
            Some(_) => continue,
            None => {
                seen.insert(key, (sign, line_no));
            }
        }
        max_id = Some(max_id.map_or(key.1, |m: NodeId| m.max(key.1)));
        edges.push((key.0, key.1, sign));
    }

    let implied = max_id.map_or(0, |m| m + 1);
    let node_count = match declared_nodes {
        Some(n) if n < implied => {
            return Err(Error::Parse {
                line: 0,
                message: format!("node id {} out of range for declared nodes={n}", implied - 1),
            })
        }
        Some(n) => n,
        None if edges.is_empty() => return Err(Error::EmptyInput),
        None => implied,
    };
    SignedGraph::with_nodes(node_count, edges)
}

/// Writes the canonical edge list. Node ids are internal indices.
pub fn write_edge_list<W: Write>(graph: &SignedGraph, mut out: W) -> Result<()> {
    writeln!(out, "# nodes={}", graph.node_count())?;
    for e in graph.edges() {
        writeln!(out, "{} {} {}", e.u, e.v, e.sign)?;
    }
    out.flush()?;
    Ok(())
}

pub fn edge_list_string(graph: &SignedGraph) -> String {
    let mut buf = Vec::new();
    write_edge_list(graph, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("edge list is ASCII")
}

/// `internal_id,external_id` lines for mapping results back to dataset ids.
pub fn write_node_labels<W: Write>(graph: &SignedGraph, out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["node", "label"])?;
    for (id, label) in graph.labels().iter().enumerate() {
        writer.write_record([id.to_string().as_str(), label.as_str()])?;
    }
    writer.flush()?;
    Ok(())
}
