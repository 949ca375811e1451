mod common;

use proptest::prelude::*;
use walklab::electrical::*;
use walklab::expander::{expander_report, random_regular};
use walklab::graph::edgelist::{parse_edge_list, to_edge_list};
use walklab::graph::{comb_product, cycle_graph, path_graph, Comb, IntegerLine, WalkSpace};

use common::connected_graph;

fn pair(n: usize, a: u64, b: u64) -> (usize, usize) {
    let x = a as usize % n;
    let y = (x + 1 + b as usize % (n - 1)) % n;
    (x, y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn commute_time_identity(g in connected_graph(12, true), a in any::<u64>(), b in any::<u64>()) {
        prop_assume!(g.n_vertices() >= 2);
        let (x, y) = pair(g.n_vertices(), a, b);
        let net = Network::unit(&g);
        let r = effective_resistance(&net, &[x], &[y]).unwrap();
        let res = commute_identity_residual(&net, x, y).unwrap();
        prop_assert!(res <= 1e-9 * net.total_weight() * r, "{res}");
    }

    #[test]
    fn unit_potential_is_lipschitz_and_conserves_flow(g in connected_graph(12, true), a in any::<u64>(), b in any::<u64>()) {
        prop_assume!(g.n_vertices() >= 2);
        let (x, y) = pair(g.n_vertices(), a, b);
        let net = Network::unit(&g);
        let p = solve_potential(&net, &[x], &[y]).unwrap();
        prop_assert!(p.lipschitz_margin(&g) <= 1.0 + 1e-10);
        prop_assert!(p.harmonic_residual(&net) <= 1e-10);
        let flow = p.flow(&net);
        prop_assert!(flow.conservation_error(g.n_vertices()) <= 1e-9);
        prop_assert!(flow.antisymmetry_error() <= 1e-12);
        prop_assert!((flow.source_strength() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn resistance_is_a_metric(g in connected_graph(9, false), a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        prop_assume!(g.n_vertices() >= 3);
        let n = g.n_vertices();
        let net = Network::unit(&g);
        let (x, y) = pair(n, a, b);
        let z = c as usize % n;
        prop_assume!(z != x && z != y);
        let r = |u, w| effective_resistance(&net, &[u], &[w]).unwrap();
        prop_assert!((r(x, y) - r(y, x)).abs() <= 1e-10);
        prop_assert!(r(x, y) <= r(x, z) + r(z, y) + 1e-10);
        prop_assert!(r(x, y) <= g.distances_from(x)[y] as f64 + 1e-10);
    }

    #[test]
    fn edge_list_round_trip(g in connected_graph(14, true)) {
        let back = parse_edge_list(&to_edge_list(&g), "rt").unwrap();
        prop_assert!(back.same_structure(&g));
    }
}

#[test]
fn series_and_parallel_resistances() {
    let p = path_graph(7).unwrap();
    let r = effective_resistance(&Network::unit(&p), &[0], &[6]).unwrap();
    assert!((r - 6.0).abs() < 1e-12);
    let c = cycle_graph(8).unwrap();
    let r = effective_resistance(&Network::unit(&c), &[0], &[4]).unwrap();
    assert!((r - 2.0).abs() < 1e-12);
    // two arms of length 3 and 5 in parallel
    let r = effective_resistance(&Network::unit(&c), &[0], &[3]).unwrap();
    assert!((r - 15.0 / 8.0).abs() < 1e-12);
}

#[test]
fn escape_probability_on_path() {
    let p = path_graph(5).unwrap();
    // two arms of resistance 2 in parallel give R = 1, so 1 / (2 * 1)
    let e = escape_probability(&Network::unit(&p), 2, &[0, 4]).unwrap();
    assert!((e - 0.5).abs() < 1e-12, "{e}");
}

#[test]
fn comb_product_counts() {
    let base = cycle_graph(5).unwrap();
    let tooth = path_graph(4).unwrap();
    let comb = comb_product(&base, &tooth, 0).unwrap();
    assert_eq!(comb.n_vertices(), 25);
    assert_eq!(comb.n_edges(), 5 * tooth.n_edges() + base.n_edges());
    assert!(comb.is_connected());
    assert_eq!(comb.degree(0), base.degree(0) + tooth.degree(0));
}

#[test]
fn implicit_comb_matches_explicit_neighborhoods() {
    // base path 0..8 matches the integer line away from its ends
    let tooth = path_graph(4).unwrap();
    let explicit = comb_product(&path_graph(9).unwrap(), &tooth, 0).unwrap();
    let comb = Comb::new(&IntegerLine, &tooth, 0);
    for x in 1..8i64 {
        for w in 0..tooth.n_vertices() {
            let s = (x, w);
            let id = x as usize * tooth.n_vertices() + w;
            assert_eq!(comb.degree(s), explicit.degree(id));
            let mut a: Vec<usize> = (0..comb.degree(s))
                .map(|k| {
                    let (y, z) = comb.neighbor(s, k);
                    y as usize * tooth.n_vertices() + z
                })
                .collect();
            let mut b = explicit.neighbors(id).to_vec();
            a.sort_unstable();
            b.sort_unstable();
            assert_eq!(a, b, "state {s:?}");
        }
    }
}

#[test]
fn random_regular_properties() {
    for seed in 0..5 {
        let g = random_regular(64, 3, seed).unwrap();
        assert_eq!(g.regular_degree(), Some(3));
        assert!(g.is_connected());
        assert!(g.edges().iter().all(|&(u, w)| u != w));
        let rep = expander_report(&g, 2000, 8, seed).unwrap();
        assert!(rep.lambda2_abs < 0.98, "{rep:?}");
    }
    assert!(random_regular(7, 3, 0).is_err());
}
