mod common;

use std::collections::BTreeMap;

use common::{edge_set, erdos_renyi, oracle_degrees, random_m_edges};
use taxnet::nullmodel::{generate_ensemble, generate_sample, shuffle_weights, EnsembleConfig, Rewirer};

fn histogram(w: &[u64]) -> BTreeMap<u64, usize> {
    let mut h = BTreeMap::new();
    for &x in w {
        *h.entry(x).or_insert(0) += 1;
    }
    h
}

#[test]
fn thousand_swaps_preserve_degrees() {
    let g = random_m_edges(50, 120, 9, 3);
    let before = oracle_degrees(&g);
    let mut rw = Rewirer::new(g);
    let mut rng = common::rng(4);
    let accepted = (0..1000).filter(|_| rw.double_edge_swap(&mut rng).unwrap()).count();
    assert!(accepted > 0);
    assert_eq!(oracle_degrees(rw.graph()), before);
    let g = rw.into_graph();
    assert_eq!(edge_set(&g).len(), g.edge_count());
    assert!(g.edges().iter().all(|e| e.u < e.v));
}

#[test]
fn weight_histogram_survives_shuffle() {
    let mut g = random_m_edges(40, 100, 12, 8);
    let before = histogram(&g.sorted_weights());
    shuffle_weights(&mut g, &mut common::rng(1));
    let w: Vec<u64> = g.edges().iter().map(|e| e.weight).collect();
    assert_eq!(histogram(&w), before);
}

#[test]
fn every_sample_keeps_degree_sequence() {
    let g = erdos_renyi(30, 0.2, 6, 12);
    let cfg = EnsembleConfig {
        n_samples: 100,
        swaps_per_edge: 10,
        master_seed: 2,
    };
    let deg = oracle_degrees(&g);
    let ensemble = generate_ensemble(&g, &cfg).unwrap();
    assert_eq!(ensemble.len(), 100);
    for (i, s) in ensemble.iter().enumerate() {
        assert_eq!(s.sample_index, i);
        assert_eq!(oracle_degrees(&s.graph), deg);
        assert_eq!(s.graph.sorted_weights(), g.sorted_weights());
        assert_eq!(edge_set(&s.graph).len(), s.graph.edge_count());
    }
}

#[test]
fn swaps_mix_the_edge_set() {
    let g = erdos_renyi(100, 0.05, 1, 21);
    let cfg = EnsembleConfig {
        n_samples: 100,
        swaps_per_edge: 10,
        master_seed: 99,
    };
    let src = edge_set(&g);
    let mean: f64 = generate_ensemble(&g, &cfg)
        .unwrap()
        .iter()
        .map(|s| {
            let e = edge_set(&s.graph);
            src.intersection(&e).count() as f64 / src.union(&e).count() as f64
        })
        .sum::<f64>()
        / 100.0;
    assert!(mean < 0.5, "mean Jaccard {mean}");
}

#[test]
fn thread_count_does_not_change_ensemble() {
    let g = random_m_edges(60, 150, 7, 5);
    let cfg = EnsembleConfig {
        n_samples: 24,
        swaps_per_edge: 5,
        master_seed: 123,
    };
    let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    let one = pool(1).install(|| generate_ensemble(&g, &cfg).unwrap());
    let many = pool(4).install(|| generate_ensemble(&g, &cfg).unwrap());
    assert_eq!(one, many);
    let serial: Vec<_> = (0..24).map(|i| generate_sample(&g, &cfg, i).unwrap()).collect();
    assert_eq!(one, serial);
}
