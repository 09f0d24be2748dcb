mod common;

use std::collections::HashMap;

use balance_attack::attack::{balance_attack_with_budget, random_attack_with_budget};
use balance_attack::io::edge_list_string;
use balance_attack::*;
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn graph_strategy() -> impl Strategy<Value = SignedGraph> {
    (any::<u64>(), 3usize..24, 0.1f64..0.9, 0.0f64..1.0)
        .prop_map(|(seed, n, p, q)| random_graph(seed, n, p, q))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn triangle_counts_match_oracles(g in graph_strategy()) {
        let report = count_signed_triangles(&g);
        prop_assert_eq!((report.balanced, report.unbalanced), brute_force_counts(&g));
        prop_assert_eq!(report.trace_a3, dense_trace_a3(&g));
        prop_assert_eq!(report.trace_abs_a3, dense_trace_abs_a3(&g));
        match report.d3.to_f64() {
            None => prop_assert_eq!(report.triangles(), 0),
            Some(x) => prop_assert!((0.0..=1.0).contains(&x)),
        }
        prop_assert_eq!(count_signed_triangles(&g.negated()).trace_a3, -report.trace_a3);
    }

    #[test]
    fn two_path_table_invariants(g in graph_strategy()) {
        let table = build_two_path_table(&g);
        let expected = dense_two_paths(&g);
        prop_assert_eq!(table.values(), expected.as_slice());
        let a = dense(&g);
        let n = g.node_count();
        for (id, e) in g.edges().iter().enumerate() {
            let p = table.get(id);
            prop_assert_eq!(Some(p), table.get_pair(&g, e.v, e.u));
            prop_assert!(p.unsigned_abs() as usize <= g.degree(e.u).min(g.degree(e.v)));
            let through: i64 = (0..n).map(|w| a[e.u][e.v] * a[e.u][w] * a[w][e.v]).sum();
            prop_assert_eq!(e.sign.value() * p, through);
        }
    }

    #[test]
    fn flip_delta_is_exact(g in graph_strategy()) {
        let table = build_two_path_table(&g);
        let before = dense_trace_a3(&g);
        let abs_before = dense_trace_abs_a3(&g);
        for e in g.edges() {
            let delta = flip_delta(&g, &table, e.u, e.v).unwrap();
            let mut flipped = g.clone();
            flipped.flip_edge(e.u, e.v).unwrap();
            prop_assert_eq!(dense_trace_a3(&flipped), before + delta);
            prop_assert_eq!(dense_trace_abs_a3(&flipped), abs_before);
        }
    }

    #[test]
    fn incremental_table_tracks_rebuild(g in graph_strategy(), seed in any::<u64>()) {
        prop_assume!(g.edge_count() > 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut graph = g.clone();
        let mut table = build_two_path_table(&graph);
        for _ in 0..40 {
            let e = graph.edge(rng.gen_range(0..graph.edge_count()));
            let old = graph.flip_edge(e.u, e.v).unwrap();
            update_table_after_flip(&graph, &mut table, e.u, e.v, old).unwrap();
            prop_assert_eq!(&table, &build_two_path_table(&graph));
        }
    }

    #[test]
    fn flips_preserve_structure(g in graph_strategy(), picks in proptest::collection::vec(any::<usize>(), 1..20)) {
        prop_assume!(g.edge_count() > 0);
        let mut graph = g.clone();
        for &pick in &picks {
            let e = graph.edge(pick % graph.edge_count());
            graph.flip_edge(e.u, e.v).unwrap();
            prop_assert_eq!(graph.degree_sequence(), g.degree_sequence());
        }
        let e = g.edge(picks[0] % g.edge_count());
        let mut twice = g.clone();
        twice.flip_edge(e.u, e.v).unwrap();
        twice.flip_edge(e.v, e.u).unwrap();
        prop_assert_eq!(twice, g);
    }

    #[test]
    fn edge_list_round_trip(g in graph_strategy()) {
        let text = edge_list_string(&g);
        let loaded = load_edge_list(text.as_bytes()).unwrap();
        prop_assert_eq!(&loaded, &g);
        prop_assert_eq!(edge_list_string(&loaded), text);
    }

    #[test]
    fn rating_loader_matches_merge_oracle(
        rows in proptest::collection::vec((0u8..12, 0u8..12, -3i32..4), 1..80)
    ) {
        let text: String = rows.iter().map(|(s, t, r)| format!("n{s},n{t},{r},0\n")).collect();
        let (g, stats) = load_rating_csv(text.as_bytes(), &LoadOptions::default()).unwrap();
        prop_assert_eq!(stats.rows_read, rows.len());

        let mut sums: HashMap<(String, String), i32> = HashMap::new();
        for (s, t, r) in &rows {
            if s == t || *r == 0 {
                continue;
            }
            let (a, b) = (format!("n{}", s.min(t)), format!("n{}", s.max(t)));
            // ids compare as strings in the loader; normalize the same way
            let key = if a <= b { (a, b) } else { (b, a) };
            *sums.entry(key).or_default() += r;
        }
        let expected: HashMap<(String, String), Sign> = sums
            .into_iter()
            .filter(|(_, s)| *s != 0)
            .map(|(k, s)| (k, if s > 0 { Sign::Positive } else { Sign::Negative }))
            .collect();

        prop_assert_eq!(g.edge_count(), expected.len());
        for e in g.edges() {
            prop_assert!(e.u != e.v);
            let (a, b) = (g.label(e.u).to_owned(), g.label(e.v).to_owned());
            let key = if a <= b { (a, b) } else { (b, a) };
            prop_assert_eq!(expected.get(&key), Some(&e.sign));
        }
        prop_assert!((0..g.node_count()).all(|v| g.degree(v) > 0));
    }

    #[test]
    fn sequential_attack_is_monotone_and_honest(g in graph_strategy(), frac in 0.05f64..1.0) {
        prop_assume!(g.edge_count() > 0);
        let cfg = AttackConfig::new(AttackMode::BalanceSequential, frac);
        let (attacked, trace) = run_balance_attack(&g, &cfg).unwrap();
        prop_assert!(trace.flips() <= trace.budget);
        let mut graph = g.clone();
        let mut previous = trace.initial_d3;
        for r in &trace.records {
            prop_assert!(r.old_sign.value() * r.p_uv > 0);
            let before = dense_trace_a3(&graph);
            graph.flip_edge(r.u, r.v).unwrap();
            prop_assert_eq!(dense_trace_a3(&graph), before + r.delta_trace);
            prop_assert!(r.delta_trace < 0);
            let d3 = r.d3.unwrap();
            prop_assert_eq!(d3, brute_force_d3(&graph));
            prop_assert_eq!(d3.partial_cmp(&previous), Some(std::cmp::Ordering::Less));
            previous = d3;
        }
        prop_assert_eq!(&graph, &attacked);
        prop_assert!(verify_perturbation(&g, &attacked, trace.budget).unwrap().passed());
        if trace.status != TerminalStatus::BudgetExhausted {
            prop_assert!(select_candidates(&attacked, &build_two_path_table(&attacked)).is_empty());
        }
    }

    #[test]
    fn batch_of_one_equals_sequential(g in graph_strategy(), budget in 1usize..30) {
        prop_assume!(g.edge_count() > 0);
        let budget = budget.min(g.edge_count());
        let seq = balance_attack_with_budget(&g, AttackMode::BalanceSequential, budget, 1, 1).unwrap();
        let batched = balance_attack_with_budget(&g, AttackMode::BalanceBatched, budget, 1, 1).unwrap();
        prop_assert_eq!(&seq.0, &batched.0);
        prop_assert_eq!(&seq.1.records, &batched.1.records);
        prop_assert_eq!(seq.1.status, batched.1.status);
    }

    #[test]
    fn every_mode_respects_the_budget(g in graph_strategy(), frac in 0.01f64..1.0, seed in any::<u64>(), batch in 1usize..12) {
        prop_assume!(g.edge_count() > 0);
        for mode in [AttackMode::BalanceSequential, AttackMode::BalanceBatched, AttackMode::Random] {
            let cfg = AttackConfig { budget_fraction: frac, mode, batch_size: batch, seed, trace_every: 1 };
            let (attacked, trace) = run_attack(&g, &cfg).unwrap();
            let report = verify_perturbation(&g, &attacked, trace.budget).unwrap();
            prop_assert!(report.passed(), "{}", report);
            prop_assert!(trace.flips() <= trace.budget);
            // the live counter must agree with a recount
            prop_assert_eq!(trace.final_d3(), brute_force_d3(&attacked));
        }
    }

    #[test]
    fn f1_matches_confusion_oracle(pairs in proptest::collection::vec((any::<bool>(), any::<bool>()), 1..60)) {
        let sign = |b: bool| if b { Sign::Positive } else { Sign::Negative };
        let predictions: Vec<Sign> = pairs.iter().map(|p| sign(p.0)).collect();
        let labels: Vec<Sign> = pairs.iter().map(|p| sign(p.1)).collect();
        let r = evaluate(&predictions, &labels).unwrap();
        let count = |p: bool, l: bool| pairs.iter().filter(|x| **x == (p, l)).count() as f64;
        let (tp, fp, tn, fn_) = (count(true, true), count(true, false), count(false, false), count(false, true));
        let f1 = |t: f64, f_p: f64, f_n: f64| if t + f_p + f_n == 0.0 { 0.0 } else { 2.0 * t / (2.0 * t + f_p + f_n) };
        prop_assert_eq!(r.total(), pairs.len());
        prop_assert!((r.micro_f1 - (tp + tn) / pairs.len() as f64).abs() < 1e-12);
        prop_assert!((r.binary_f1 - f1(tp, fp, fn_)).abs() < 1e-12);
        prop_assert!((r.macro_f1 - (f1(tp, fp, fn_) + f1(tn, fn_, fp)) / 2.0).abs() < 1e-12);
    }
}

#[test]
fn random_attack_picks_edges_uniformly() {
    let g = SignedGraph::with_nodes(6, [
        (0, 1, Sign::Positive),
        (1, 2, Sign::Positive),
        (2, 3, Sign::Negative),
        (3, 4, Sign::Positive),
        (4, 5, Sign::Negative),
    ])
    .unwrap();
    let mut hits = [0usize; 5];
    let runs = 10_000;
    for seed in 0..runs {
        let (_, trace) = random_attack_with_budget(&g, 1, seed, 1).unwrap();
        let r = trace.records[0];
        hits[g.edge_id(r.u, r.v).unwrap()] += 1;
    }
    for h in hits {
        let freq = h as f64 / runs as f64;
        assert!((freq - 0.2).abs() <= 0.02, "frequency {freq}");
    }
}

#[test]
fn single_triangle_any_balanced_signing_takes_one_flip() {
    use Sign::{Negative as N, Positive as P};
    for signs in [[P, P, P], [P, N, N], [N, P, N], [N, N, P]] {
        let g = SignedGraph::with_nodes(3, [(0, 1, signs[0]), (0, 2, signs[1]), (1, 2, signs[2])]).unwrap();
        let (_, trace) = balance_attack_with_budget(&g, AttackMode::BalanceSequential, 3, 1, 1).unwrap();
        assert_eq!(trace.flips(), 1);
        assert_eq!(trace.final_d3().to_f64(), Some(0.0));
        assert_eq!(trace.status, TerminalStatus::NoCandidates);
    }
}

#[test]
fn factional_graph_attack_drives_balance_down() {
    // a stand-in for a trust network: strongly balanced, triangle rich
    let g = factional_graph(11, 120, 0.12, 0.03);
    let clean = balance_degree(&g).to_f64().unwrap();
    assert!(clean > 0.85, "clean {clean}");
    let (_, seq) = run_balance_attack(&g, &AttackConfig::new(AttackMode::BalanceSequential, 0.2)).unwrap();
    let (_, rnd) = run_random_attack(&g, &AttackConfig::new(AttackMode::Random, 0.2)).unwrap();
    let (_, batched) = run_balance_attack(&g, &AttackConfig::new(AttackMode::BalanceBatched, 0.2)).unwrap();
    let seq_d3 = seq.final_d3().to_f64().unwrap();
    let rnd_d3 = rnd.final_d3().to_f64().unwrap();
    let batched_d3 = batched.final_d3().to_f64().unwrap();
    assert!(seq_d3 < rnd_d3, "sequential {seq_d3} random {rnd_d3}");
    assert!(batched_d3 < rnd_d3, "batched {batched_d3} random {rnd_d3}");
    assert!(seq_d3 < 0.5, "sequential {seq_d3}");
}
