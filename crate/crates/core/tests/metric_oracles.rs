mod common;

use htlocate::metrics::{
    betweenness_centrality, closeness_centrality, degree_centrality, density, eigenvector_centrality, k_core, pagerank,
    BetweennessMode, DegreeMode, PageRankParams,
};
use htlocate::LineGraph;
use proptest::prelude::*;

use common::*;

const TOL: f64 = 1e-8;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dag_metrics_match_oracles((n, arcs) in dag_strategy(12)) {
        let g = LineGraph::anonymous(n, &arcs);
        prop_assert!(close(&degree_centrality(&g, DegreeMode::Normalized), &degree_oracle(&g), TOL));
        prop_assert!(close(&closeness_centrality(&g), &closeness_oracle(&g), TOL));
        prop_assert!(close(&betweenness_centrality(&g, BetweennessMode::Fractional), &betweenness_oracle(&g, false), TOL));
        prop_assert!(close(&betweenness_centrality(&g, BetweennessMode::Indicator), &betweenness_oracle(&g, true), TOL));
        let pr = pagerank(&g, PageRankParams::default()).unwrap();
        prop_assert!(close(&pr, &pagerank_oracle(&g, 0.85), TOL));
        let evc = eigenvector_centrality(&g);
        prop_assert!(evc.degenerate);
        prop_assert!(nilpotent(&g));
    }

    #[test]
    fn cyclic_metrics_match_oracles((n, arcs) in digraph_strategy(9)) {
        let g = LineGraph::anonymous(n, &arcs);
        prop_assert!(close(&closeness_centrality(&g), &closeness_oracle(&g), TOL));
        prop_assert!(close(&betweenness_centrality(&g, BetweennessMode::Fractional), &betweenness_oracle(&g, false), TOL));
        let pr = pagerank(&g, PageRankParams::default()).unwrap();
        prop_assert!(close(&pr, &pagerank_oracle(&g, 0.85), TOL));
        if strongly_connected(&g) {
            let evc = eigenvector_centrality(&g);
            prop_assert!(!evc.degenerate);
            prop_assert!((evc.eigenvalue - spectral_radius(&g)).abs() < 1e-6);
            prop_assert!(close(&evc.values, &perron_oracle(&g), 1e-6), "{:?} vs {:?}", evc.values, perron_oracle(&g));
        }
    }

    #[test]
    fn pagerank_is_a_distribution((n, arcs) in digraph_strategy(12), d in 0.05f64..0.95) {
        let g = LineGraph::anonymous(n, &arcs);
        let pr = pagerank(&g, PageRankParams { damping: d, ..PageRankParams::default() }).unwrap();
        prop_assert!(pr.iter().all(|&x| x >= 0.0));
        prop_assert!((pr.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn betweenness_order_ignores_normalization((n, arcs) in dag_strategy(12)) {
        let g = LineGraph::anonymous(n, &arcs);
        let scale = (n * n.saturating_sub(1)) as f64;
        let bc = betweenness_centrality(&g, BetweennessMode::Fractional);
        let raw: Vec<f64> = betweenness_oracle(&g, false).iter().map(|v| v * scale).collect();
        let order = |v: Vec<f64>| {
            let v: Vec<i64> = v.iter().map(|x| (x * 1e6).round() as i64).collect();
            let mut idx: Vec<usize> = (0..v.len()).collect();
            idx.sort_by(|&a, &b| v[b].cmp(&v[a]).then(a.cmp(&b)));
            idx
        };
        prop_assert_eq!(order(bc.iter().map(|v| v * scale).collect()), order(raw));
    }

    #[test]
    fn k_core_matches_oracle_and_nests((n, arcs) in digraph_strategy(10)) {
        let g = LineGraph::anonymous(n, &arcs);
        for k in 0..=2 * n {
            let core = k_core(&g, k);
            prop_assert_eq!(&core, &k_core_oracle(&g, k), "k = {}", k);
            let next = k_core(&g, k + 1);
            prop_assert!(next.iter().all(|v| core.contains(v)));
        }
    }

    #[test]
    fn density_matches_and_ignores_relabeling((n, arcs) in dag_strategy(12), perm in Just((0..12).collect::<Vec<usize>>()).prop_shuffle()) {
        let g = LineGraph::anonymous(n, &arcs);
        prop_assert_eq!(density(&g), density_oracle(n, arcs.len()));
        let perm: Vec<usize> = perm.into_iter().filter(|&p| p < n).collect();
        let moved: Vec<(usize, usize)> = arcs.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        prop_assert_eq!(density(&LineGraph::anonymous(n, &moved)), density(&g));
    }

    #[test]
    fn row_sum_degree_mode((n, arcs) in dag_strategy(12)) {
        let g = LineGraph::anonymous(n, &arcs);
        let c = degree_centrality(&g, DegreeMode::RowSum);
        for (i, v) in c.iter().enumerate() {
            let out = arcs.iter().filter(|a| a.0 == i).count();
            let want = if arcs.is_empty() { 0.0 } else { out as f64 / arcs.len() as f64 };
            prop_assert!((v - want).abs() < 1e-12);
        }
    }
}

#[test]
fn line_graphs_of_random_circuits_match_oracles() {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::TestRunner;
    let mut runner = TestRunner::deterministic();
    let strat = netlist_strategy(4, 10);
    let mut checked = 0;
    while checked < 100 {
        let n = strat.new_tree(&mut runner).unwrap().current();
        let g = htlocate::line_graph(&htlocate::prune_periphery(&htlocate::build_dag(&n)));
        if g.is_empty() || g.len() > 12 {
            continue;
        }
        checked += 1;
        assert!(close(&closeness_centrality(&g), &closeness_oracle(&g), TOL));
        assert!(close(&betweenness_centrality(&g, BetweennessMode::Fractional), &betweenness_oracle(&g, false), TOL));
        assert!(close(&pagerank(&g, PageRankParams::default()).unwrap(), &pagerank_oracle(&g, 0.85), TOL));
    }
}
