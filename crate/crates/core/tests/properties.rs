mod common;

use common::*;
use deltascreen::community::{gain, gain_table, modularity};
use deltascreen::engine::{coarsen, run_multilevel};
use deltascreen::metrics::nmi;
use deltascreen::screening::screen;
use deltascreen::stream_io::{
    dedup, normalize_and_bin, BinningSpec, BinningStrategy, TemporalEdgeRecord,
};
use deltascreen::{
    run_stream, DeltaBatch, DynamicGraph, EngineConfig, Error, EvalSet, Mode, Partition, StepInput,
};
use proptest::prelude::*;

/// Simple undirected graph on `n` vertices with weights in (0, 2].
fn arb_graph(max_n: usize) -> impl Strategy<Value = (usize, Vec<Edge>)> {
    (2..=max_n).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        let len = pairs.len();
        (
            Just(n),
            proptest::collection::vec((any::<bool>(), 0.01f64..=2.0), len).prop_map(move |picks| {
                pairs
                    .iter()
                    .zip(picks)
                    .filter(|(_, (keep, _))| *keep)
                    .map(|(&(u, v), (_, w))| (u, v, w))
                    .collect::<Vec<_>>()
            }),
        )
    })
}

fn arb_graph_with_labels(max_n: usize) -> impl Strategy<Value = (usize, Vec<Edge>, Vec<usize>)> {
    arb_graph(max_n).prop_flat_map(|(n, edges)| {
        let labels = proptest::collection::vec(0..n, n);
        (Just(n), Just(edges), labels)
    })
}

fn build(n: usize, edges: &[Edge]) -> DynamicGraph {
    DynamicGraph::from_edges(n, edges.iter().copied()).unwrap()
}

fn arb_records() -> impl Strategy<Value = Vec<TemporalEdgeRecord>> {
    proptest::collection::vec((0u8..12, 0u8..12, 0i64..500), 1..120).prop_map(|raw| {
        raw.into_iter()
            .filter(|(a, b, _)| a != b)
            .map(|(a, b, ts)| TemporalEdgeRecord {
                src: format!("v{a}"),
                dst: format!("v{b}"),
                timestamp: ts,
                weight: 1.0,
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn degrees_sum_to_twice_the_weight((n, edges) in arb_graph(25), cut in 0usize..100) {
        let split = if edges.is_empty() { 0 } else { cut % (edges.len() + 1) };
        let mut g = build(n, &edges[..split]);
        g.apply_batch(&DeltaBatch::from_edges(edges[split..].iter().copied()), 0).unwrap();
        let sum: f64 = g.weighted_degrees().iter().sum();
        prop_assert!((sum - 2.0 * g.total_weight()).abs() < 1e-9);
        prop_assert_eq!(g.num_edges(), edges.len());
    }

    #[test]
    fn batch_order_does_not_matter((n, edges) in arb_graph(20), cut in 0usize..100) {
        let split = if edges.is_empty() { 0 } else { cut % (edges.len() + 1) };
        let (a, b) = edges.split_at(split);
        let mut one = DynamicGraph::new(n);
        one.apply_batch(&DeltaBatch::from_edges(a.iter().copied()), 0).unwrap();
        one.apply_batch(&DeltaBatch::from_edges(b.iter().copied()), 0).unwrap();
        let mut two = DynamicGraph::new(n);
        two.apply_batch(&DeltaBatch::from_edges(b.iter().rev().copied()), 0).unwrap();
        two.apply_batch(&DeltaBatch::from_edges(a.iter().rev().copied()), 0).unwrap();
        prop_assert_eq!(one.edges().collect::<Vec<_>>(), two.edges().collect::<Vec<_>>());
        // degrees are sums, so only the summation order differs
        for (a, b) in one.weighted_degrees().iter().zip(two.weighted_degrees()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn modularity_matches_oracle((n, edges, labels) in arb_graph_with_labels(20)) {
        prop_assume!(!edges.is_empty());
        let g = build(n, &edges);
        let p = Partition::from_labels(&g, labels.clone()).unwrap();
        prop_assert!((modularity(&g, &p).unwrap() - oracle_modularity(n, &edges, &labels)).abs() < 1e-10);
    }

    #[test]
    fn scaling_weights_preserves_q_and_argmax((n, edges, labels) in arb_graph_with_labels(15), c in 0.1f64..10.0) {
        prop_assume!(!edges.is_empty());
        let scaled: Vec<Edge> = edges.iter().map(|&(u, v, w)| (u, v, w * c)).collect();
        let g = build(n, &edges);
        let gs = build(n, &scaled);
        let p = Partition::from_labels(&g, labels.clone()).unwrap();
        let ps = Partition::from_labels(&gs, labels).unwrap();
        prop_assert!((modularity(&g, &p).unwrap() - modularity(&gs, &ps).unwrap()).abs() < 1e-10);
        for i in 0..n {
            let (t, ts) = (gain_table(&g, &p, i), gain_table(&gs, &ps, i));
            let gains: Vec<f64> = (0..p.label_capacity()).map(|c| gain(&g, &p, i, c, &t).unwrap()).collect();
            let scaled_gains: Vec<f64> = (0..p.label_capacity()).map(|c| gain(&gs, &ps, i, c, &ts).unwrap()).collect();
            let best = gains.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let best_scaled = scaled_gains.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            // argmax set is the same up to rounding
            for (a, b) in gains.iter().zip(&scaled_gains) {
                prop_assert_eq!(best - a < 1e-12, best_scaled - b < 1e-12);
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn coarsening_preserves_q((n, edges, labels) in arb_graph_with_labels(25)) {
        prop_assume!(!edges.is_empty());
        let g = build(n, &edges);
        let p = Partition::from_labels(&g, labels.clone()).unwrap();
        let (c, map) = coarsen(&g, &p);
        let singles = Partition::singletons(&c);
        prop_assert!((modularity(&c, &singles).unwrap() - oracle_modularity(n, &edges, &labels)).abs() < 1e-10);
        prop_assert!((c.total_weight() - g.total_weight()).abs() < 1e-9);
        for u in 0..n {
            for v in 0..n {
                prop_assert_eq!(labels[u] == labels[v], map[u] == map[v]);
            }
        }
    }

    #[test]
    fn multilevel_never_lowers_q((n, edges, labels) in arb_graph_with_labels(25)) {
        prop_assume!(!edges.is_empty());
        let g = build(n, &edges);
        let p = Partition::from_labels(&g, labels.clone()).unwrap();
        let before = oracle_modularity(n, &edges, &labels);
        let (out, _) = run_multilevel(&g, p, EvalSet::All, &EngineConfig::default());
        prop_assert!(oracle_modularity(n, &edges, out.labels()) >= before - 1e-12);
    }

    #[test]
    fn empty_eval_set_on_converged_output_is_a_fixed_point((n, edges) in arb_graph(25)) {
        prop_assume!(!edges.is_empty());
        let g = build(n, &edges);
        let cfg = EngineConfig::default();
        let (first, _) = run_multilevel(&g, Partition::singletons(&g), EvalSet::All, &cfg);
        let labels = first.labels().to_vec();
        let (again, _) = run_multilevel(&g, first, EvalSet::Only(&[]), &cfg);
        prop_assert_eq!(again.labels(), &labels[..]);
    }

    #[test]
    fn nmi_is_bounded_and_label_invariant(
        ab in proptest::collection::vec((0usize..5, 0usize..4), 1..40),
    ) {
        let (a, b): (Vec<usize>, Vec<usize>) = ab.into_iter().unzip();
        let v = nmi(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        let perm = [3usize, 7, 1, 9, 4];
        let a2: Vec<usize> = a.iter().map(|&x| perm[x]).collect();
        prop_assert!((nmi(&a2, &b).unwrap() - v).abs() < 1e-12);
        prop_assert!((nmi(&b, &a).unwrap() - v).abs() < 1e-12);
        prop_assert!((nmi(&a, &a2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dedup_is_idempotent(records in arb_records()) {
        let once = dedup(&records);
        let twice = dedup(&once.to_records());
        prop_assert_eq!(&once.edges, &twice.edges);
        prop_assert_eq!(twice.duplicates, 0);
        prop_assert_eq!(once.edges.len() + once.duplicates, records.len());
    }

    #[test]
    fn bins_nest_across_resolutions(records in arb_records(), t in 1usize..6, k in 2usize..4, by_count in any::<bool>()) {
        prop_assume!(!records.is_empty());
        let strategy = if by_count { BinningStrategy::EqualCount } else { BinningStrategy::EqualTime };
        let fine = normalize_and_bin(&records, BinningSpec { bins: t * k, strategy });
        // too few edges or a single timestamp cannot be cut that finely
        prop_assume!(!matches!(fine, Err(Error::Binning(_))));
        let fine = fine.unwrap();
        let coarse = normalize_and_bin(&records, BinningSpec { bins: t, strategy }).unwrap();
        for s in 1..=t {
            prop_assert_eq!(coarse.cumulative_edge_set(s), fine.cumulative_edge_set(s * k));
        }
    }

    #[test]
    fn cumulative_counts_are_consistent(records in arb_records(), t in 1usize..8) {
        prop_assume!(!records.is_empty());
        let s = normalize_and_bin(&records, BinningSpec { bins: t, strategy: BinningStrategy::EqualTime });
        prop_assume!(!matches!(s, Err(Error::Binning(_))));
        let s = s.unwrap();
        prop_assert_eq!(s.steps.len(), t);
        let mut total = 0;
        for (i, step) in s.steps.iter().enumerate() {
            total += step.batch.num_edges();
            prop_assert_eq!(s.cumulative_edges[i], total);
            prop_assert_eq!(s.cumulative_edge_set(i + 1).len(), total);
        }
        prop_assert_eq!(total, dedup(&records).edges.len());
        let vertices: usize = s.steps.iter().map(|st| st.new_vertices).sum();
        prop_assert_eq!(vertices, s.id_map.len());
    }

    #[test]
    fn screening_ignores_pair_order(
        (n, edges, labels) in arb_graph_with_labels(20),
        cut in 0usize..100,
        shuffle_seed in any::<u64>(),
    ) {
        prop_assume!(edges.len() >= 2);
        let split = 1 + cut % (edges.len() - 1);
        let (old, new) = edges.split_at(split);
        let mut g = build(n, old);
        let batch = DeltaBatch::from_edges(new.iter().copied());
        g.apply_batch(&batch, 0).unwrap();
        let p = Partition::from_labels(&g, labels).unwrap();
        let mut pairs: Vec<_> = new.iter().flat_map(|&(u, v, w)| [(u, v, w), (v, u, w)]).collect();
        // deterministic shuffle from the seed
        let mut state = shuffle_seed;
        for i in (1..pairs.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            pairs.swap(i, (state >> 33) as usize % (i + 1));
        }
        let permuted = DeltaBatch::from_ordered_pairs(pairs).unwrap();
        let a = screen(&g, &p, &batch).unwrap();
        let b = screen(&g, &p, &permuted).unwrap();
        prop_assert_eq!(a.members(), b.members());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reported_q_matches_final_labels((n, edges) in arb_graph(30), parts in 1usize..4) {
        prop_assume!(!edges.is_empty());
        let chunk = edges.len().div_ceil(parts);
        let steps: Vec<StepInput> = edges
            .chunks(chunk)
            .enumerate()
            .map(|(i, c)| StepInput {
                new_vertices: if i == 0 { n } else { 0 },
                batch: DeltaBatch::from_edges(c.iter().copied()),
            })
            .collect();
        for mode in Mode::ALL {
            let run = run_stream(&steps, mode, &EngineConfig::default()).unwrap();
            let last = run.labels.last().unwrap();
            let q = run.reports.last().unwrap().q;
            prop_assert!((q - oracle_modularity(n, &edges, last)).abs() < 1e-10);
            // labels are dense after compaction
            let max = last.iter().max().copied().unwrap_or(0);
            let mut used = vec![false; max + 1];
            for &c in last {
                used[c] = true;
            }
            prop_assert!(used.into_iter().all(|u| u));
        }
    }
}
