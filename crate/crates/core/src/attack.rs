//! Greedy sign-flip attacks that push the balance degree down.
//!
//! The gradient of the balance degree with respect to an existing entry
//! `a_uv` is proportional to `p_uv = (A^2)_uv`, with a positive constant
//! because `Tr(|A|^3)` does not move under sign flips. An edge is a
//! candidate when `a_uv` and `p_uv` have the same sign; flipping it lowers
//! `Tr(A^3)` by `12 |p_uv|`. The sequential attack takes the candidate with
//! the largest `|p_uv|` (smallest `(u, v)` on ties) and updates the table
//! after every flip. The batched attack ranks once per epoch and flips the
//! top `batch_size` candidates before looking again.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::balance::{count_signed_triangles, BalanceDegree, TwoPathTable};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, NodeId, Sign, SignedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackMode {
    BalanceSequential,
    BalanceBatched,
    Random,
}

impl AttackMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AttackMode::BalanceSequential => "balance",
            AttackMode::BalanceBatched => "balance-batched",
            AttackMode::Random => "random",
        }
    }

    pub fn is_balance(self) -> bool {
        !matches!(self, AttackMode::Random)
    }
}

impl fmt::Display for AttackMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AttackMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "balance" | "balance-sequential" => Ok(AttackMode::BalanceSequential),
            "balance-batched" => Ok(AttackMode::BalanceBatched),
            "random" => Ok(AttackMode::Random),
            other => Err(Error::InvalidConfig(format!("unknown attack mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    /// Fraction of undirected edges that may be flipped, in `(0, 1]`.
    pub budget_fraction: f64,
    pub mode: AttackMode,
    /// Flips per epoch in batched mode.
    pub batch_size: usize,
    /// Seeds the random attack.
    pub seed: u64,
    /// Record the balance degree every `trace_every` flips (and on the last).
    pub trace_every: usize,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            budget_fraction: 0.05,
            mode: AttackMode::BalanceSequential,
            batch_size: 10,
            seed: 0,
            trace_every: 1,
        }
    }
}

impl AttackConfig {
    pub fn new(mode: AttackMode, budget_fraction: f64) -> Self {
        AttackConfig {
            mode,
            budget_fraction,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.budget_fraction > 0.0 && self.budget_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "budget fraction {} is outside (0, 1]",
                self.budget_fraction
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch size must be at least 1".into()));
        }
        if self.trace_every == 0 {
            return Err(Error::InvalidConfig("trace_every must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of edges that may be flipped: `round(fraction * edges)`, at least 1.
    pub fn budget(&self, edge_count: usize) -> Result<usize> {
        self.validate()?;
        if edge_count == 0 {
            return Err(Error::NoEdges);
        }
        Ok(budget_for(self.budget_fraction, edge_count))
    }
}

pub(crate) fn budget_for(fraction: f64, edge_count: usize) -> usize {
    ((fraction * edge_count as f64).round() as usize).clamp(1, edge_count)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalStatus {
    BudgetExhausted,
    /// Candidates ran out part-way through the budget.
    NoCandidates,
    /// There was nothing to flip from the start.
    AlreadyMinimal,
}

impl fmt::Display for TerminalStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TerminalStatus::BudgetExhausted => "budget_exhausted",
            TerminalStatus::NoCandidates => "no_candidates",
            TerminalStatus::AlreadyMinimal => "already_minimal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipRecord {
    /// 1-based.
    pub step: usize,
    pub u: NodeId,
    pub v: NodeId,
    pub old_sign: Sign,
    /// Two-path sum when the edge was selected.
    pub p_uv: i64,
    /// Change in `Tr(A^3)` caused by this flip.
    pub delta_trace: i64,
    /// Balance degree after the flip; only on sampled steps.
    #[serde(skip)]
    pub d3: Option<BalanceDegree>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackTrace {
    pub mode: AttackMode,
    pub budget: usize,
    pub initial_d3: BalanceDegree,
    pub records: Vec<FlipRecord>,
    pub status: TerminalStatus,
}

impl AttackTrace {
    pub const CSV_SCHEMA: &'static str = "# balance-attack trace v1";
    pub const CSV_HEADER: &'static str = "step,u,v,old_sign,p_uv,delta_trace,d3";

    pub fn flips(&self) -> usize {
        self.records.len()
    }

    /// Balance degree after the last flip (or of the input if none).
    pub fn final_d3(&self) -> BalanceDegree {
        self.records
            .last()
            .and_then(|r| r.d3)
            .unwrap_or(self.initial_d3)
    }

    /// Balance degree after the first `k` flips, if it was recorded.
    pub fn d3_after(&self, k: usize) -> Option<BalanceDegree> {
        if k == 0 {
            return Some(self.initial_d3);
        }
        self.records.get(k - 1).and_then(|r| r.d3)
    }

    /// `original` with the first `k` flips of this trace applied.
    pub fn replay_prefix(&self, original: &SignedGraph, k: usize) -> Result<SignedGraph> {
        let mut g = original.clone();
        for r in self.records.iter().take(k) {
            let old = g.flip_edge(r.u, r.v)?;
            if old != r.old_sign {
                return Err(Error::InvalidConfig(format!(
                    "trace step {} expects sign {} on {{{}, {}}}",
                    r.step, r.old_sign, r.u, r.v
                )));
            }
        }
        Ok(g)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", Self::CSV_SCHEMA)?;
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for r in &self.records {
            let d3 = r.d3.map(|d| d.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.step, r.u, r.v, r.old_sign, r.p_uv, r.delta_trace, d3
            )?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Live balanced-triangle count. A flip of `a_uv` turns `a_uv p_uv` net
/// balanced triangles the other way, so `b` moves by `-a_uv p_uv`.
struct BalanceTracker {
    balanced: u64,
    total: u64,
}

impl BalanceTracker {
    fn new(g: &SignedGraph) -> Self {
        let report = count_signed_triangles(g);
        BalanceTracker {
            balanced: report.balanced,
            total: report.triangles(),
        }
    }

    fn d3(&self) -> BalanceDegree {
        BalanceDegree::from_counts(self.balanced, self.total - self.balanced)
    }

    fn apply(&mut self, old_sign: Sign, p_uv: i64) {
        let change = -old_sign.value() * p_uv;
        self.balanced = (self.balanced as i64 + change) as u64;
    }
}

/// Working state for one attack run: the graph being poisoned, its exact
/// two-path table, and the trace so far.
struct FlipSession {
    graph: SignedGraph,
    table: TwoPathTable,
    tracker: BalanceTracker,
    records: Vec<FlipRecord>,
    trace_every: usize,
}

impl FlipSession {
    fn new(g: &SignedGraph, trace_every: usize) -> Self {
        FlipSession {
            graph: g.clone(),
            table: TwoPathTable::build(g),
            tracker: BalanceTracker::new(g),
            records: Vec::new(),
            trace_every,
        }
    }

    fn flip(&mut self, edge: EdgeId, p_at_selection: i64) -> Result<()> {
        let e = self.graph.edge(edge);
        let p_now = self.table.get(edge);
        let delta_trace = self.table.delta_for(&self.graph, edge);
        let old = self.graph.flip_edge_id(edge);
        self.table.apply_flip(&self.graph, e.u, e.v, old)?;
        self.tracker.apply(old, p_now);
        let step = self.records.len() + 1;
        self.records.push(FlipRecord {
            step,
            u: e.u,
            v: e.v,
            old_sign: old,
            p_uv: p_at_selection,
            delta_trace,
            d3: (step.is_multiple_of(self.trace_every)).then(|| self.tracker.d3()),
        });
        Ok(())
    }

    fn finish(mut self, mode: AttackMode, budget: usize, initial_d3: BalanceDegree, status: TerminalStatus) -> (SignedGraph, AttackTrace) {
        if let Some(last) = self.records.last_mut() {
            last.d3 = Some(self.tracker.d3());
        }
        let trace = AttackTrace {
            mode,
            budget,
            initial_d3,
            records: self.records,
            status,
        };
        (self.graph, trace)
    }
}

/// Edges whose sign agrees with the sign of their two-path sum (`a_uv p_uv > 0`).
pub fn select_candidates(g: &SignedGraph, table: &TwoPathTable) -> Vec<EdgeId> {
    (0..g.edge_count())
        .filter(|&e| g.edge(e).sign.value() * table.get(e) > 0)
        .collect()
}

/// The candidate with the largest `|p_uv|`; ties go to the smallest `(u, v)`,
/// which is the lowest edge id.
fn best_candidate(g: &SignedGraph, table: &TwoPathTable) -> Option<EdgeId> {
    let mut best: Option<(EdgeId, i64)> = None;
    for e in 0..g.edge_count() {
        let gain = g.edge(e).sign.value() * table.get(e);
        if gain > 0 && best.is_none_or(|(_, top)| gain > top) {
            best = Some((e, gain));
        }
    }
    best.map(|(e, _)| e)
}

fn empty_status(flips: usize) -> TerminalStatus {
    if flips == 0 {
        TerminalStatus::AlreadyMinimal
    } else {
        TerminalStatus::NoCandidates
    }
}

/// Greedy balance attack with an explicit flip budget.
pub fn balance_attack_with_budget(
    g: &SignedGraph,
    mode: AttackMode,
    budget: usize,
    batch_size: usize,
    trace_every: usize,
) -> Result<(SignedGraph, AttackTrace)> {
    if g.edge_count() == 0 {
        return Err(Error::NoEdges);
    }
    if budget > g.edge_count() {
        return Err(Error::BudgetExceedsEdges {
            budget,
            edges: g.edge_count(),
        });
    }
    if batch_size == 0 || trace_every == 0 {
        return Err(Error::InvalidConfig("batch size and trace interval must be positive".into()));
    }

    let mut session = FlipSession::new(g, trace_every);
    let initial_d3 = session.tracker.d3();
    let status = match mode {
        AttackMode::BalanceSequential => loop {
            if session.records.len() >= budget {
                break TerminalStatus::BudgetExhausted;
            }
            let Some(edge) = best_candidate(&session.graph, &session.table) else {
                break empty_status(session.records.len());
            };
            let p = session.table.get(edge);
            session.flip(edge, p)?;
        },
        AttackMode::BalanceBatched => loop {
            let remaining = budget - session.records.len();
            if remaining == 0 {
                break TerminalStatus::BudgetExhausted;
            }
            let mut ranked: Vec<(EdgeId, i64)> = select_candidates(&session.graph, &session.table)
                .into_iter()
                .map(|e| (e, session.table.get(e)))
                .collect();
            if ranked.is_empty() {
                break empty_status(session.records.len());
            }
            ranked.sort_by_key(|&(e, p)| (std::cmp::Reverse(p.abs()), e));
            ranked.truncate(batch_size.min(remaining));
            for (edge, p) in ranked {
                session.flip(edge, p)?;
            }
        },
        AttackMode::Random => {
            return Err(Error::InvalidConfig(
                "random mode is not a balance attack".into(),
            ))
        }
    };
    Ok(session.finish(mode, budget, initial_d3, status))
}

/// Runs the greedy balance attack (sequential or batched, per `cfg.mode`).
pub fn run_balance_attack(g: &SignedGraph, cfg: &AttackConfig) -> Result<(SignedGraph, AttackTrace)> {
    let budget = cfg.budget(g.edge_count())?;
    balance_attack_with_budget(g, cfg.mode, budget, cfg.batch_size, cfg.trace_every)
}

/// Flips a uniformly random `budget`-subset of edges.
pub fn random_attack_with_budget(
    g: &SignedGraph,
    budget: usize,
    seed: u64,
    trace_every: usize,
) -> Result<(SignedGraph, AttackTrace)> {
    if g.edge_count() == 0 {
        return Err(Error::NoEdges);
    }
    if budget > g.edge_count() {
        return Err(Error::BudgetExceedsEdges {
            budget,
            edges: g.edge_count(),
        });
    }
    if trace_every == 0 {
        return Err(Error::InvalidConfig("trace_every must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen = index::sample(&mut rng, g.edge_count(), budget);

    let mut session = FlipSession::new(g, trace_every);
    let initial_d3 = session.tracker.d3();
    for edge in chosen.iter() {
        let p = session.table.get(edge);
        session.flip(edge, p)?;
    }
    Ok(session.finish(AttackMode::Random, budget, initial_d3, TerminalStatus::BudgetExhausted))
}

pub fn run_random_attack(g: &SignedGraph, cfg: &AttackConfig) -> Result<(SignedGraph, AttackTrace)> {
    if cfg.mode != AttackMode::Random {
        return Err(Error::InvalidConfig(format!(
            "random attack called with mode {}",
            cfg.mode
        )));
    }
    let budget = cfg.budget(g.edge_count())?;
    random_attack_with_budget(g, budget, cfg.seed, cfg.trace_every)
}

/// Dispatches on `cfg.mode`.
pub fn run_attack(g: &SignedGraph, cfg: &AttackConfig) -> Result<(SignedGraph, AttackTrace)> {
    match cfg.mode {
        AttackMode::Random => run_random_attack(g, cfg),
        _ => run_balance_attack(g, cfg),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PerturbationReport {
    pub budget: usize,
    pub identical_support: bool,
    pub identical_degree_sequence: bool,
    pub sign_differences: usize,
    pub within_budget: bool,
}

impl PerturbationReport {
    pub fn passed(&self) -> bool {
        self.identical_support && self.identical_degree_sequence && self.within_budget
    }
}

impl fmt::Display for PerturbationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |ok: bool| if ok { "ok" } else { "FAIL" };
        writeln!(f, "edge support identical: {}", mark(self.identical_support))?;
        writeln!(f, "degree sequence identical: {}", mark(self.identical_degree_sequence))?;
        write!(
            f,
            "sign differences: {} (budget {}): {}",
            self.sign_differences,
            self.budget,
            mark(self.within_budget)
        )
    }
}

/// Checks that `attacked` is a permissible perturbation of `original`:
/// same edges, same degrees, at most `budget` signs changed.
pub fn verify_perturbation(
    original: &SignedGraph,
    attacked: &SignedGraph,
    budget: usize,
) -> Result<PerturbationReport> {
    if original.node_count() != attacked.node_count() {
        return Err(Error::NodeSetMismatch {
            left: original.node_count(),
            right: attacked.node_count(),
        });
    }
    let identical_support = original.edge_count() == attacked.edge_count()
        && original
            .edges()
            .iter()
            .zip(attacked.edges())
            .all(|(a, b)| (a.u, a.v) == (b.u, b.v));
    let sign_differences = if identical_support {
        original
            .edges()
            .iter()
            .zip(attacked.edges())
            .filter(|(a, b)| a.sign != b.sign)
            .count()
    } else {
        original
            .edges()
            .iter()
            .filter(|e| attacked.sign(e.u, e.v).is_some_and(|s| s != e.sign))
            .count()
    };
    Ok(PerturbationReport {
        budget,
        identical_support,
        identical_degree_sequence: original.degree_sequence() == attacked.degree_sequence(),
        sign_differences,
        within_budget: sign_differences <= budget,
    })
}
