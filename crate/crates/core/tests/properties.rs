mod common;

use std::f64::consts::TAU;
use std::path::Path;

use kpin::centrality::{betweenness_scores, functionability_scores, reduced_laplacian_min_eig};
use kpin::dynamics::{control_signal, order_parameter, ControlConfig, OscillatorSystem};
use kpin::generators::criss_cross_reshuffle;
use kpin::graph::UNREACHABLE;
use kpin::io::{format_edge_list, parse_edge_list_str};
use kpin::{Graph, NodeSet, RngStream};
use nalgebra::SymmetricEigen;
use proptest::prelude::*;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n, 0.0..0.8f64, any::<u64>()).prop_map(|(n, p, seed)| common::random_graph(n, p, &mut common::rng(seed)))
}

fn connected_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n, 0.0..0.6f64, any::<u64>())
        .prop_map(|(n, p, seed)| common::random_connected_graph(n, p, &mut common::rng(seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn edge_list_round_trip(g in graph_strategy(20)) {
        prop_assume!(g.n_edges() > 0);
        let text = format_edge_list(&g, None);
        let el = parse_edge_list_str(&text, Path::new("mem")).unwrap();
        // Map parsed indices back to the original ones through the labels.
        let back: Vec<usize> = el.labels.iter().map(|l| l.parse().unwrap()).collect();
        let mut edges: Vec<(usize, usize)> = el
            .graph
            .edges()
            .iter()
            .map(|&(u, v)| (back[u].min(back[v]), back[u].max(back[v])))
            .collect();
        edges.sort_unstable();
        prop_assert_eq!(edges.as_slice(), g.edges());
        // Emitting the parsed graph again is a fixed point.
        let again = parse_edge_list_str(&format_edge_list(&el.graph, Some(&el.labels)), Path::new("mem")).unwrap();
        prop_assert_eq!(again.graph.n_edges(), el.graph.n_edges());
        let relabel: Vec<usize> = again.labels.iter().map(|l| el.labels.iter().position(|x| x == l).unwrap()).collect();
        for &(u, v) in again.graph.edges() {
            prop_assert!(el.graph.has_edge(relabel[u], relabel[v]));
        }
    }

    #[test]
    fn degree_sum_is_twice_edges(g in graph_strategy(30)) {
        prop_assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.n_edges());
    }

    #[test]
    fn hop_distance_triangle_inequality(g in graph_strategy(15)) {
        let n = g.n_nodes();
        let d: Vec<Vec<usize>> = (0..n).map(|s| g.bfs_distances(s)).collect();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if d[a][b] != UNREACHABLE && d[b][c] != UNREACHABLE {
                        prop_assert!(d[a][c] <= d[a][b] + d[b][c]);
                    }
                }
            }
        }
    }

    #[test]
    fn laplacian_has_constant_null_vector(g in graph_strategy(20)) {
        let l = g.laplacian();
        let ones = nalgebra::DVector::from_element(g.n_nodes(), 1.0);
        prop_assert!((&l * &ones).amax() < 1e-12);
        let eig = SymmetricEigen::new(l);
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!(min.abs() < 1e-9);
    }

    #[test]
    fn reduced_laplacian_grows_with_controller_set(g in connected_strategy(20), seed in any::<u64>()) {
        let n = g.n_nodes();
        prop_assume!(n >= 3);
        let mut r = common::rng(seed);
        let mut order: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut r);
        let mut last = 0.0;
        for m in 1..n {
            let mut set = order[..m].to_vec();
            set.sort_unstable();
            let lam = reduced_laplacian_min_eig(&g, &NodeSet::new(set, n).unwrap()).unwrap();
            prop_assert!(lam > 0.0);
            prop_assert!(lam >= last - 1e-10);
            last = lam;
        }
    }

    #[test]
    fn functionability_is_permutation_equivariant(g in connected_strategy(8), seed in any::<u64>()) {
        let n = g.n_nodes();
        let mut perm: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut common::rng(seed));
        let h = g.permuted(&perm).unwrap();
        let f = functionability_scores(&g, 0.5).unwrap().values;
        let fh = functionability_scores(&h, 0.5).unwrap().values;
        for v in 0..n {
            prop_assert!((f[v] - fh[perm[v]]).abs() <= 1e-10 * f[v].abs().max(1e-300));
        }
    }

    #[test]
    fn tree_leaves_have_zero_betweenness(n in 2usize..30, seed in any::<u64>()) {
        let tree = common::random_connected_graph(n, 0.0, &mut common::rng(seed));
        let b = betweenness_scores(&tree).values;
        for v in 0..n {
            if tree.degree(v) == 1 {
                prop_assert_eq!(b[v], 0.0);
            }
        }
    }

    #[test]
    fn order_parameter_bounded_and_rotation_invariant(
        phases in prop::collection::vec(0.0..TAU, 1..40),
        shift in -10.0..10.0f64,
    ) {
        let op = order_parameter(&phases);
        prop_assert!((0.0..=1.0).contains(&op.r));
        prop_assert!((0.0..TAU).contains(&op.psi));
        let rotated: Vec<f64> = phases.iter().map(|p| p + shift).collect();
        let rot = order_parameter(&rotated);
        prop_assert!((rot.r - op.r).abs() < 1e-12);
        if op.r > 1e-6 {
            prop_assert!(common::angle_gap(rot.psi, op.psi + shift) < 1e-9);
        }
    }

    #[test]
    fn control_signal_scales_linearly_in_c_and_quadratically_in_k(
        g in connected_strategy(12),
        seed in any::<u64>(),
        c in 0.01..3.0f64,
        k in 0.1..20.0f64,
    ) {
        let n = g.n_nodes();
        prop_assume!(n >= 3);
        let mut r = common::rng(seed);
        let phases: Vec<f64> = (0..n).map(|_| rand::Rng::random_range(&mut r, 0.0..TAU)).collect();
        // Well-separated frequencies.
        let omegas: Vec<f64> = (0..n).map(|i| 1.0 + 0.05 * i as f64).collect();
        let ctl_nodes = NodeSet::new(vec![0, n - 1], n).unwrap();
        let signal = |strength: f64, coupling: f64| {
            let sys = OscillatorSystem::new(&g, phases.clone(), omegas.clone(), coupling).unwrap();
            control_signal(&sys, &ControlConfig::new(ctl_nodes.clone(), strength)).unwrap()
        };
        let base = signal(c, k);
        let doubled_c = signal(2.0 * c, k);
        let doubled_k = signal(c, 2.0 * k);
        let scale = base.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        for i in 0..n {
            prop_assert!((doubled_c[i] - 2.0 * base[i]).abs() <= 1e-12 * scale * 2.0);
            prop_assert!((doubled_k[i] - 4.0 * base[i]).abs() <= 1e-12 * scale * 4.0);
        }
    }

    #[test]
    fn criss_cross_keeps_degrees(g in graph_strategy(25), swaps in 0usize..15, seed in any::<u64>()) {
        prop_assume!(g.n_edges() >= 2);
        match criss_cross_reshuffle(&g, swaps, RngStream::new(seed, 0)) {
            Ok(h) => {
                prop_assert_eq!(h.degrees(), g.degrees());
                prop_assert_eq!(h.n_edges(), g.n_edges());
            }
            // Some small graphs admit no valid switch at all.
            Err(kpin::Error::Reshuffle { .. }) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}
