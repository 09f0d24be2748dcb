//! Link sign prediction on poisoned graphs.
//!
//! Edges are split into train and test sets; only the training graph is
//! attacked. A triad-vote predictor built on the (possibly poisoned)
//! training graph labels the clean test edges, and the result is scored
//! with micro, binary (positive class) and macro F1.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::attack::{balance_attack_with_budget, budget_for, random_attack_with_budget, AttackMode};
use crate::balance::{balance_degree, BalanceDegree};
use crate::error::{Error, Result};
use crate::graph::{Edge, NodeId, Sign, SignedGraph};

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSplit {
    pub train: Vec<Edge>,
    pub test: Vec<Edge>,
    pub split_seed: u64,
    pub train_fraction: f64,
}

impl EdgeSplit {
    /// The training edges over the full node set of `g`.
    pub fn train_graph(&self, g: &SignedGraph) -> Result<SignedGraph> {
        g.with_same_nodes(self.train.iter().map(|e| (e.u, e.v, e.sign)))
    }

    pub fn test_labels(&self) -> Vec<Sign> {
        self.test.iter().map(|e| e.sign).collect()
    }
}

/// Random train/test split with `round(fraction * |E|)` training edges.
pub fn split_edges(g: &SignedGraph, fraction: f64, seed: u64) -> Result<EdgeSplit> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train fraction {fraction} is outside (0, 1)"
        )));
    }
    let m = g.edge_count();
    let train_len = (fraction * m as f64).round() as usize;
    if train_len == 0 || train_len >= m {
        return Err(Error::SplitTooSmall { edges: m, fraction });
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (train_ids, test_ids) = order.split_at_mut(train_len);
    train_ids.sort_unstable();
    test_ids.sort_unstable();
    Ok(EdgeSplit {
        train: train_ids.iter().map(|&e| g.edge(e)).collect(),
        test: test_ids.iter().map(|&e| g.edge(e)).collect(),
        split_seed: seed,
        train_fraction: fraction,
    })
}

/// Predicts a sign from the balanced completion of common-neighbor wedges.
pub struct TriadVotePredictor<'a> {
    graph: &'a SignedGraph,
    majority: Sign,
}

impl<'a> TriadVotePredictor<'a> {
    pub fn new(train: &'a SignedGraph) -> Self {
        let majority = if train.positive_edge_count() >= train.negative_edge_count() {
            Sign::Positive
        } else {
            Sign::Negative
        };
        TriadVotePredictor {
            graph: train,
            majority,
        }
    }

    pub fn majority(&self) -> Sign {
        self.majority
    }

    /// `sum over common neighbors w of A_uw A_wv`.
    pub fn score(&self, u: NodeId, v: NodeId) -> Result<i64> {
        let n = self.graph.node_count();
        for node in [u, v] {
            if node >= n {
                return Err(Error::UnknownNode(node));
            }
        }
        Ok(self
            .graph
            .common_neighbors(u, v)
            .map(|(_, eu, ev)| self.graph.edge(eu).sign.value() * self.graph.edge(ev).sign.value())
            .sum())
    }

    pub fn predict(&self, u: NodeId, v: NodeId) -> Result<Sign> {
        let score = self.score(u, v)?;
        Ok(match score.signum() {
            1 => Sign::Positive,
            -1 => Sign::Negative,
            _ => self.majority,
        })
    }
}

pub fn triad_vote_predict(train: &SignedGraph, u: NodeId, v: NodeId) -> Result<Sign> {
    TriadVotePredictor::new(train).predict(u, v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalReport {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub micro_f1: f64,
    pub binary_f1: f64,
    pub macro_f1: f64,
}

impl EvalReport {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// F1 from integer counts; zero when the class never occurs.
fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        (2 * tp) as f64 / denom as f64
    }
}

/// Confusion counts (positive class = `+1`) and the three F1 scores.
pub fn evaluate(predictions: &[Sign], labels: &[Sign]) -> Result<EvalReport> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    if labels.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (&p, &l) in predictions.iter().zip(labels) {
        match (p, l) {
            (Sign::Positive, Sign::Positive) => tp += 1,
            (Sign::Positive, Sign::Negative) => fp += 1,
            (Sign::Negative, Sign::Negative) => tn += 1,
            (Sign::Negative, Sign::Positive) => fn_ += 1,
        }
    }
    let positive = f1(tp, fp, fn_);
    let negative = f1(tn, fn_, fp);
    Ok(EvalReport {
        tp,
        fp,
        tn,
        fn_,
        micro_f1: (tp + tn) as f64 / labels.len() as f64,
        binary_f1: positive,
        macro_f1: (positive + negative) / 2.0,
    })
}

/// Scores the triad-vote predictor built on `train` against `test`.
pub fn evaluate_triad_vote(train: &SignedGraph, test: &[Edge]) -> Result<EvalReport> {
    let predictor = TriadVotePredictor::new(train);
    let predictions = test
        .iter()
        .map(|e| predictor.predict(e.u, e.v))
        .collect::<Result<Vec<_>>>()?;
    let labels: Vec<Sign> = test.iter().map(|e| e.sign).collect();
    evaluate(&predictions, &labels)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub dataset: String,
    pub modes: Vec<AttackMode>,
    /// Fractions of training edges; `0` gives the clean baseline.
    pub budgets: Vec<f64>,
    pub batch_size: usize,
    pub train_fraction: f64,
    pub split_seed: u64,
    /// One random-attack run per seed; balance modes use only the first.
    pub attack_seeds: Vec<u64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            dataset: "dataset".into(),
            modes: vec![AttackMode::BalanceSequential, AttackMode::Random],
            budgets: vec![0.0, 0.05, 0.10, 0.15, 0.20],
            batch_size: 10,
            train_fraction: 0.8,
            split_seed: 0,
            attack_seeds: vec![0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineRow {
    pub dataset: String,
    pub mode: AttackMode,
    pub budget_frac: f64,
    /// Balance degree of the poisoned training graph.
    pub d3: BalanceDegree,
    pub report: EvalReport,
    pub split_seed: u64,
    pub attack_seed: u64,
}

pub const PIPELINE_CSV_SCHEMA: &str = "# balance-attack eval v1";
pub const PIPELINE_CSV_HEADER: &str =
    "dataset,mode,budget_frac,d3,micro_f1,binary_f1,macro_f1,split_seed,attack_seed";

pub fn write_pipeline_csv<W: Write>(rows: &[PipelineRow], mut out: W) -> Result<()> {
    writeln!(out, "{PIPELINE_CSV_SCHEMA}")?;
    writeln!(out, "{PIPELINE_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.dataset,
            r.mode,
            r.budget_frac,
            r.d3,
            r.report.micro_f1,
            r.report.binary_f1,
            r.report.macro_f1,
            r.split_seed,
            r.attack_seed
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Poisons the training graph at every `(mode, budget)` and scores the
/// predictor on the untouched test edges.
///
/// Balance modes run once at the largest budget; smaller budgets replay a
/// prefix of that trace, which is exactly the graph a standalone run at the
/// smaller budget would produce.
pub fn attack_eval_pipeline(g: &SignedGraph, cfg: &PipelineConfig) -> Result<Vec<PipelineRow>> {
    if cfg.modes.is_empty() || cfg.budgets.is_empty() {
        return Err(Error::InvalidConfig("need at least one mode and one budget".into()));
    }
    if let Some(bad) = cfg.budgets.iter().find(|b| !(**b >= 0.0 && **b <= 1.0)) {
        return Err(Error::InvalidConfig(format!("budget fraction {bad} is outside [0, 1]")));
    }
    if cfg.attack_seeds.is_empty() {
        return Err(Error::InvalidConfig("need at least one attack seed".into()));
    }

    let split = split_edges(g, cfg.train_fraction, cfg.split_seed)?;
    let train = split.train_graph(g)?;
    let m = train.edge_count();
    let clean_report = evaluate_triad_vote(&train, &split.test)?;
    let clean_d3 = balance_degree(&train);
    let flips_for = |frac: f64| if frac == 0.0 { 0 } else { budget_for(frac, m) };

    let mut rows = Vec::new();
    let mut push = |mode, frac, d3, report, seed| {
        rows.push(PipelineRow {
            dataset: cfg.dataset.clone(),
            mode,
            budget_frac: frac,
            d3,
            report,
            split_seed: cfg.split_seed,
            attack_seed: seed,
        })
    };

    for &mode in &cfg.modes {
        if mode.is_balance() {
            let seed = cfg.attack_seeds[0];
            let max_flips = cfg.budgets.iter().map(|&b| flips_for(b)).max().unwrap_or(0);
            let trace = if max_flips > 0 {
                Some(balance_attack_with_budget(&train, mode, max_flips, cfg.batch_size, 1)?.1)
            } else {
                None
            };
            for &frac in &cfg.budgets {
                let k = flips_for(frac);
                match &trace {
                    Some(trace) if k > 0 => {
                        let poisoned = trace.replay_prefix(&train, k.min(trace.flips()))?;
                        let report = evaluate_triad_vote(&poisoned, &split.test)?;
                        push(mode, frac, balance_degree(&poisoned), report, seed);
                    }
                    _ => push(mode, frac, clean_d3, clean_report, seed),
                }
            }
        } else {
            for &frac in &cfg.budgets {
                for &seed in &cfg.attack_seeds {
                    let k = flips_for(frac);
                    if k == 0 {
                        push(mode, frac, clean_d3, clean_report, seed);
                        continue;
                    }
                    let (poisoned, trace) = random_attack_with_budget(&train, k, seed, 1)?;
                    let report = evaluate_triad_vote(&poisoned, &split.test)?;
                    push(mode, frac, trace.final_d3(), report, seed);
                }
            }
        }
    }
    Ok(rows)
}
