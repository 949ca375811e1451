#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;
use walklab::Graph;

/// Connected graph on `n` vertices: a random tree plus extra edges and
/// loops. Ordinary duplicate edges are dropped; loops may repeat.
pub fn assemble(n: usize, parents: &[u32], extra: &[(u32, u32)], loops: &[u32]) -> Graph {
    let mut edges = BTreeSet::new();
    for i in 1..n {
        let p = parents[i - 1] as usize % i;
        edges.insert((p, i));
    }
    for &(a, b) in extra {
        let (a, b) = (a as usize % n, b as usize % n);
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let mut list: Vec<(usize, usize)> = edges.into_iter().collect();
    for &l in loops {
        let v = l as usize % n;
        list.push((v, v));
    }
    Graph::from_edges(n, &list, "random").expect("assembled graph is valid")
}

pub fn connected_graph(max_n: usize, with_loops: bool) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(move |n| {
        (
            Just(n),
            prop::collection::vec(any::<u32>(), n - 1),
            prop::collection::vec((any::<u32>(), any::<u32>()), 0..2 * n),
            prop::collection::vec(any::<u32>(), 0..if with_loops { 3 } else { 1 }),
        )
            .prop_map(move |(n, p, e, l)| assemble(n, &p, &e, if with_loops { &l } else { &[] }))
    })
}

/// Deterministic pseudo-random graph for seed-driven corpora.
pub fn seeded_graph(seed: u64, n: usize, density: f64, loops: bool) -> Graph {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let parents: Vec<u32> = (1..n).map(|_| rng.gen()).collect();
    let mut extra = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(density) {
                extra.push((a as u32, b as u32));
            }
        }
    }
    let l: Vec<u32> = if loops && rng.gen_bool(0.3) { vec![rng.gen()] } else { vec![] };
    assemble(n, &parents, &extra, &l)
}
