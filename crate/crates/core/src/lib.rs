//! Balance degree of signed graphs and budgeted sign-flip poisoning attacks.
//!
//! - [`graph`]: undirected signed graphs and sign flips
//! - [`io`]: rating-CSV and edge-list loaders, canonical writer
//! - [`balance`]: signed triangle counts, balance degree, two-path table
//! - [`attack`]: greedy balance attack, random baseline, constraint checks
//! - [`eval`]: train/test split, triad-vote predictor, F1 scoring pipeline

pub mod attack;
pub mod cli;
pub mod balance;
pub mod error;
pub mod eval;
pub mod graph;
pub mod io;

pub use attack::{
    run_attack, run_balance_attack, run_random_attack, select_candidates, verify_perturbation,
    AttackConfig, AttackMode, AttackTrace, FlipRecord, PerturbationReport, TerminalStatus,
};
pub use balance::{
    balance_degree, build_two_path_table, count_signed_triangles, flip_delta,
    update_table_after_flip, BalanceDegree, BalanceReport, TwoPathTable,
};
pub use error::{Error, Result};
pub use eval::{
    attack_eval_pipeline, evaluate, split_edges, triad_vote_predict, EdgeSplit, EvalReport,
    PipelineConfig, PipelineRow,
};
pub use graph::{Edge, EdgeId, NodeId, Sign, SignedGraph};
pub use io::{load_edge_list, load_rating_csv, write_edge_list, ConflictPolicy, LoadOptions, LoadStats};
