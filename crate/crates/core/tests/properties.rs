//! Property tests for the invariants each module promises, checked against the
//! brute-force oracles in `common`.

mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;

use twdecomp::conductance::{decompose_high_conductance, trim_after_removal_unchecked, ConductanceConfig};
use twdecomp::cuts::{balanced_cut, min_conductance_cut, ratio, sparsest_cut, Rational, SolverConfig};
use twdecomp::decompose::{run_thm1, run_thm2, PipelineConfig};
use twdecomp::expander::{cut_matching_game, route_matchings_short_paths, split_vertices, ExpansionMode, RandomMatching, RouteConfig};
use twdecomp::flow::{max_flow, CapacityMode};
use twdecomp::generators;
use twdecomp::graph::{contract_clustering, ClusterMode};
use twdecomp::io::{parse_graph, write_graph, Format};
use twdecomp::partition::balanced_integer_partition;
use twdecomp::report::{verify_report, Outcome, RunReport};
use twdecomp::treewidth::{decompose_or_certify, exact_treewidth, heuristic_treewidth, treewidth_branch_and_bound, Heuristic, TwOutcome};
use twdecomp::well_linked::{check_alpha_good, find_well_linked_set, VerificationMode};
use twdecomp::{Graph, VertexId, VertexSet};

use common::*;

/// Graph on `lo..=hi` vertices; parallel edges kept when `multi`.
fn graph(lo: usize, hi: usize, multi: bool) -> impl Strategy<Value = Graph> {
    (lo..=hi).prop_flat_map(move |n| {
        prop::collection::vec((0..n, 0..n), 0..=(n * (n - 1) / 2).min(40)).prop_map(move |pairs| {
            let mut edges: Vec<(usize, usize)> = pairs.into_iter().filter(|(u, v)| u != v).map(|(u, v)| (u.min(v), u.max(v))).collect();
            if !multi {
                edges.sort();
                edges.dedup();
            }
            Graph::from_edges(n, &edges).unwrap()
        })
    })
}

fn with_mask(g: impl Strategy<Value = Graph>) -> impl Strategy<Value = (Graph, u32)> {
    g.prop_flat_map(|g| {
        let n = g.n();
        (Just(g), 0u32..(1 << n))
    })
}

fn set_of(g: &Graph, mask: u32) -> VertexSet {
    (0..g.n()).filter(|&i| mask >> i & 1 == 1).map(|i| g.id(i)).collect()
}

fn connected(lo: usize, hi: usize, seed_range: std::ops::Range<u64>) -> impl Strategy<Value = Graph> {
    (lo..=hi, 0.15f64..0.6, seed_range).prop_map(|(n, p, seed)| generators::connected_gnp(n, p, &mut generators::rng(seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn boundary_counted_from_both_sides((g, mask) in with_mask(graph(1, 12, true))) {
        let a = set_of(&g, mask);
        let b = set_of(&g, !mask & ((1 << g.n()) - 1));
        let crossing = g.edges().iter().filter(|&&(u, v)| (mask >> u & 1) != (mask >> v & 1)).count();
        prop_assert_eq!(g.out_edges(&a).unwrap().len(), crossing);
        prop_assert_eq!(g.out_edges(&b).unwrap().len(), crossing);
        prop_assert_eq!(g.edges_between(&a, &b).unwrap(), crossing);
    }

    #[test]
    fn contraction_degrees_sum_to_twice_phi(g in graph(1, 12, true), labels in prop::collection::vec(0usize..4, 12)) {
        let mut clusters: BTreeMap<usize, VertexSet> = BTreeMap::new();
        for i in 0..g.n() {
            clusters.entry(labels[i]).or_default().insert(g.id(i));
        }
        let clusters: Vec<VertexSet> = clusters.into_values().collect();
        let c = contract_clustering(&g, &clusters, ClusterMode::WellLinked).unwrap();
        let degree_sum: usize = (0..c.graph.n()).map(|i| c.graph.degree(i)).sum();
        prop_assert_eq!(degree_sum, 2 * c.phi());
        let between = g.edges().iter().filter(|&&(u, v)| labels[u] != labels[v]).count();
        prop_assert_eq!(c.phi(), between);
    }

    #[test]
    fn round_trip_keeps_multiplicities(g in graph(1, 12, true), zero in any::<bool>()) {
        for format in [Format::Dimacs, Format::Edgelist { zero_indexed: zero }] {
            let back = parse_graph(&write_graph(&g, format).unwrap(), format).unwrap();
            prop_assert_eq!(back.n(), g.n());
            prop_assert_eq!(back.sorted_edge_ids(), g.sorted_edge_ids());
        }
    }

    #[test]
    fn exact_sparsest_cut_matches_enumeration((g, tmask) in with_mask(graph(2, 12, true))) {
        let t = set_of(&g, tmask);
        prop_assume!(t.len() >= 2);
        let cut = sparsest_cut(&g, &t, &SolverConfig::exact()).unwrap();
        prop_assert!(cut.exact);
        prop_assert_eq!(cut.sparsity, oracle_sparsity(&g, &t));
        prop_assert!(cut.replays(&g, Some(&t)).unwrap());
    }

    #[test]
    fn max_flow_equals_min_cut(g in graph(2, 12, true), picks in prop::collection::vec(0u8..3, 12)) {
        let (mut a, mut b) = (0u32, 0u32);
        for i in 0..g.n() {
            match picks[i] {
                1 => a |= 1 << i,
                2 => b |= 1 << i,
                _ => {}
            }
        }
        prop_assume!(a != 0 && b != 0);
        let f = max_flow(&g, &set_of(&g, a), &set_of(&g, b), CapacityMode::Edge).unwrap();
        prop_assert_eq!(f.value, oracle_min_cut(&g, a, b));
    }

    #[test]
    fn exact_conductance_matches_enumeration(g in graph(2, 12, true)) {
        let want = oracle_conductance(&g);
        match min_conductance_cut(&g, &SolverConfig::exact()) {
            Ok(cut) => {
                prop_assert_eq!(cut.conductance, want);
                prop_assert!(cut.replays(&g, None).unwrap());
            }
            Err(_) => prop_assert_eq!(want, None),
        }
    }

    #[test]
    fn exact_treewidth_agrees_with_branch_and_bound(g in graph(1, 10, false)) {
        let (w, td) = exact_treewidth(&g).unwrap();
        prop_assert_eq!(w, oracle_treewidth(&g));
        prop_assert_eq!(treewidth_branch_and_bound(&g).unwrap(), w);
        prop_assert!(decomposition_valid(&g, &td));
        prop_assert_eq!(td.width, w);
    }

    #[test]
    fn heuristic_decompositions_are_valid(g in graph(1, 16, true), fill in any::<bool>()) {
        let h = if fill { Heuristic::MinFill } else { Heuristic::MinDegree };
        let (w, td) = heuristic_treewidth(&g, h);
        prop_assert!(decomposition_valid(&g, &td));
        prop_assert_eq!(td.width, w);
        if g.n() <= 12 {
            prop_assert!(w >= oracle_treewidth(&g.simple()));
        }
    }

    #[test]
    fn alpha_good_matches_enumeration((g, smask) in with_mask(graph(2, 9, true)), a in 1u64..=6) {
        let s = set_of(&g, smask);
        prop_assume!(!s.is_empty());
        let alpha = ratio(a, 4);
        let violation = check_alpha_good(&g, &s, alpha, &SolverConfig::exact()).unwrap();
        let good = oracle_goodness(&g, &s).is_none_or(|x| x >= alpha);
        prop_assert_eq!(violation.is_none(), good);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 10_000, max_global_rejects: 100_000, ..ProptestConfig::default() })]

    #[test]
    fn balanced_partition_meets_third(xs in prop::collection::vec(0u64..1000, 2..12)) {
        let total: u64 = xs.iter().sum();
        prop_assume!(xs.iter().all(|&x| 3 * x <= 2 * total));
        let (a, b) = balanced_integer_partition(&xs).unwrap();
        let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
        all.sort();
        prop_assert_eq!(all, (0..xs.len()).collect::<Vec<_>>());
        let sa: u64 = a.iter().map(|&i| xs[i]).sum();
        let sb: u64 = b.iter().map(|&i| xs[i]).sum();
        prop_assert!(3 * sa >= total && 3 * sb >= total, "{sa} + {sb} of {total}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn heuristic_cuts_replay_and_are_feasible((g, tmask) in with_mask(graph(4, 24, true)), seed in any::<u64>()) {
        let cfg = SolverConfig::heuristic().with_seed(seed);
        let t = set_of(&g, tmask);
        if t.len() >= 2 {
            let cut = sparsest_cut(&g, &t, &cfg).unwrap();
            prop_assert!(cut.replays(&g, Some(&t)).unwrap());
            prop_assert!(cut.side_a.iter().any(|v| t.contains(v)) && cut.side_b.iter().any(|v| t.contains(v)));
        }
        if let Ok(cut) = min_conductance_cut(&g, &cfg) {
            prop_assert!(cut.replays(&g, None).unwrap());
            prop_assert!(cut.conductance.is_some());
        }
        let s = g.vertex_set();
        if let Ok(cut) = balanced_cut(&g, &s, &t, &cfg) {
            let need = (t.len() as u64).div_ceil(4);
            let ma = cut.side_a.iter().filter(|v| t.contains(v)).count() as u64;
            let mb = cut.side_b.iter().filter(|v| t.contains(v)).count() as u64;
            prop_assert!(ma >= need && mb >= need, "{ma} | {mb} of {}", t.len());
            prop_assert!(cut.replays(&g, Some(&t)).unwrap());
        }
    }

    #[test]
    fn decompose_or_certify_is_one_sided(g in graph(1, 14, true), w in 1usize..4) {
        let cfg = SolverConfig::default();
        match decompose_or_certify(&g, w, &cfg) {
            Ok(TwOutcome::Decomposition(td)) => {
                prop_assert!(decomposition_valid(&g, &td));
                prop_assert!(td.width <= 4 * w);
            }
            Ok(TwOutcome::Certificate(proof)) => {
                prop_assert!(proof.replay(&g, &cfg).unwrap());
                prop_assert!(proof.lower_bound() > w);
                prop_assert!(oracle_treewidth(&g.simple()) > w);
            }
            Err(e) => prop_assert!(false, "undecided: {e}"),
        }
    }

    #[test]
    fn found_well_linked_alpha_is_confirmed(g in connected(3, 12, 0..10_000)) {
        let cfg = SolverConfig::exact();
        let cert = find_well_linked_set(&g, &cfg).unwrap();
        prop_assert!(cert.replay(&g, &cfg).unwrap());
        let truth = oracle_sparsity(&g, &cert.terminal_set).map_or(Rational::new(1, 1), |x| x.min(Rational::new(1, 1)));
        prop_assert!(cert.alpha <= truth);
        if cert.mode == VerificationMode::Exhaustive {
            prop_assert_eq!(cert.alpha, truth);
        }
    }

    #[test]
    fn game_witness_replays(half in 2usize..=8, seed in 0u64..1000) {
        let n = 2 * half;
        let res = cut_matching_game(n, 2 * n, &mut RandomMatching::new(seed), seed).unwrap();
        let w = &res.witness;
        prop_assert!(w.replay());
        let truth = oracle_expansion(&w.graph);
        prop_assert!(w.expansion <= truth);
        if w.mode == ExpansionMode::Exhaustive {
            prop_assert_eq!(w.expansion, truth);
        }
        let total: usize = res.matchings.iter().map(|m| m.len()).sum();
        prop_assert_eq!(total, w.graph.m());
    }

    #[test]
    fn splitting_keeps_each_original_edge_once(g in connected(3, 12, 0..10_000), seed in any::<u64>()) {
        let s = split_vertices(&g, ratio(1, 5), seed).unwrap();
        prop_assert!(s.graph.max_degree() <= 4);
        prop_assert_eq!(s.edge_image.len(), g.m());
        let mut images = s.edge_image.clone();
        images.sort();
        images.dedup();
        prop_assert_eq!(images.len(), g.m());
        for (e, &img) in s.edge_image.iter().enumerate() {
            let (u, v) = g.edge_ids(e);
            let (a, b) = s.graph.edge_ids(img);
            let (oa, ob) = (s.origin[a.0 as usize], s.origin[b.0 as usize]);
            prop_assert!((oa, ob) == (u, v) || (oa, ob) == (v, u));
        }
        let inter = (0..s.graph.m()).filter(|&e| {
            let (a, b) = s.graph.edge_ids(e);
            s.origin[a.0 as usize] != s.origin[b.0 as usize]
        }).count();
        prop_assert_eq!(inter, g.m());
    }

    #[test]
    fn routing_fields_match_recount(half in 2usize..=8, seed in 0u64..1000) {
        let n = 2 * half;
        let host = cut_matching_game(n, n, &mut RandomMatching::new(seed), seed).unwrap().witness;
        let demand = cut_matching_game(n, 3, &mut RandomMatching::new(seed + 1), seed + 1).unwrap().matchings;
        let r = route_matchings_short_paths(&host, &demand, &RouteConfig::default()).unwrap();
        let mut edge_load: BTreeMap<(VertexId, VertexId), usize> = BTreeMap::new();
        let mut vertex_load: BTreeMap<VertexId, usize> = BTreeMap::new();
        let mut longest = 0;
        for (_, p) in &r.paths {
            longest = longest.max(p.len() - 1);
            for w in p.windows(2) {
                *edge_load.entry((w[0].min(w[1]), w[0].max(w[1]))).or_default() += 1;
            }
            for v in p {
                *vertex_load.entry(*v).or_default() += 1;
            }
        }
        prop_assert_eq!(r.max_length, longest);
        prop_assert_eq!(r.edge_congestion, edge_load.values().copied().max().unwrap_or(0));
        prop_assert_eq!(r.vertex_congestion, vertex_load.values().copied().max().unwrap_or(0));
        let pairs: usize = demand.iter().map(|m| m.len()).sum();
        prop_assert_eq!(r.paths.len(), pairs);
    }

    #[test]
    fn conductance_parts_checked_exactly(g in graph(2, 14, false), d in 2u64..=16) {
        prop_assume!(g.m() > 0);
        let threshold = ratio(1, d);
        let p = decompose_high_conductance(&g, &ConductanceConfig::explicit(threshold)).unwrap();
        prop_assert!(p.replays(&g).unwrap());
        if p.success {
            prop_assert!(10 * p.boundary_total <= g.m());
        }
        for (part, check) in p.parts.iter().zip(&p.checks) {
            if part.len() <= 14 {
                let truth = oracle_conductance(&g.induced(part).unwrap());
                prop_assert!(check.exact);
                prop_assert_eq!(check.conductance, truth);
            }
        }
    }

    #[test]
    fn trimmed_remainder_has_conductance((g, rmask) in with_mask(graph(3, 14, false)), d in 1u64..=10) {
        let gamma = ratio(1, d);
        let removed = set_of(&g, rmask);
        let t = trim_after_removal_unchecked(&g, &removed, gamma, &SolverConfig::exact()).unwrap();
        prop_assert!(t.kept.is_disjoint(&removed));
        let mut covered: VertexSet = t.kept.union(&removed).copied().collect();
        for p in &t.peeled {
            prop_assert!(p.is_disjoint(&covered));
            covered.extend(p.iter().copied());
        }
        prop_assert_eq!(covered, g.vertex_set());
        let lost = g.edges().iter().filter(|&&(u, v)| rmask >> u & 1 == 1 || rmask >> v & 1 == 1).count();
        prop_assert_eq!(t.removed_edges, lost);
        prop_assert!(t.charge >= lost);
        if let Some(x) = oracle_conductance(&g.induced(&t.kept).unwrap()) {
            prop_assert!(x >= gamma / 4, "{x} below {}", gamma / 4);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn pipelines_return_disjoint_certified_subgraphs(g in connected(24, 48, 0..1000), seed in 0u64..100, second in any::<bool>()) {
        let cfg = PipelineConfig::default().with_seed(seed);
        let run = if second { run_thm2(&g, 2, 2, &cfg) } else { run_thm1(&g, 2, 2, &cfg) };
        prop_assert!(run.trace.phi.windows(2).all(|w| w[1] < w[0]));
        prop_assert!(run.trace.iterations.len() <= g.m());
        for it in &run.trace.iterations {
            if let Some(after) = it.phi_after {
                prop_assert!(after < it.phi);
            }
        }
        if let Ok(res) = run.result {
            let mut seen = VertexSet::new();
            for s in &res.subgraphs {
                prop_assert!(s.iter().all(|v| seen.insert(*v)));
                prop_assert!(induces_cycle(&g, s));
            }
            let report = RunReport::new("decompose", None, Some(g.clone()), seed, serde_json::json!({}), serde_json::to_value(&cfg).unwrap(), Outcome::Decomposition { result: res }).seal();
            let back = RunReport::from_json(&report.to_json()).unwrap();
            prop_assert_eq!(&back, &report);
            prop_assert!(verify_report(&back, &SolverConfig::default()).unwrap().ok());
        }
    }
}
