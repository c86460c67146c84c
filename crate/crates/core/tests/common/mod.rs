//! Graph generators and brute-force oracles shared by the integration tests.
//! Oracles here deliberately avoid the crate's own degree and club code.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taxnet::{CountryCode, CountryNetwork, UndirectedGraph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `i`-th code in `AAA, AAB, ..., ZZZ`.
pub fn code(i: usize) -> CountryCode {
    assert!(i < 26 * 26 * 26);
    let b = [(i / 676) as u8 + b'A', ((i / 26) % 26) as u8 + b'A', (i % 26) as u8 + b'A'];
    CountryCode::new(std::str::from_utf8(&b).unwrap()).unwrap()
}

pub fn cc(s: &str) -> CountryCode {
    CountryCode::new(s).unwrap()
}

/// G(n, p) with weights uniform in `1..=max_w`.
pub fn erdos_renyi(n: usize, p: f64, max_w: u64, seed: u64) -> UndirectedGraph {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for i in 0..n as u32 {
        for j in i + 1..n as u32 {
            if r.random_bool(p) {
                edges.push((i, j, r.random_range(1..=max_w)));
            }
        }
    }
    UndirectedGraph::from_edges(n, edges).unwrap()
}

/// Exactly `m` distinct random edges on `n` nodes.
pub fn random_m_edges(n: usize, m: usize, max_w: u64, seed: u64) -> UndirectedGraph {
    let mut r = rng(seed);
    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::new();
    while edges.len() < m {
        let a = r.random_range(0..n as u32);
        let b = r.random_range(0..n as u32);
        if a == b || !seen.insert((a.min(b), a.max(b))) {
            continue;
        }
        edges.push((a, b, r.random_range(1..=max_w)));
    }
    UndirectedGraph::from_edges(n, edges).unwrap()
}

pub struct Planted {
    pub graph: UndirectedGraph,
    /// Nodes `0..clique` form the clique.
    pub clique: usize,
    pub periphery_max_degree: usize,
    pub clique_min_degree: usize,
}

/// A `clique`-node clique wired into a sparse `periphery`-node random graph;
/// every clique node also links to `links` distinct periphery nodes.
pub fn planted_club(clique: usize, periphery: usize, links: usize, seed: u64) -> Planted {
    let mut r = rng(seed);
    let n = clique + periphery;
    let mut edges = std::collections::BTreeSet::new();
    for i in 0..clique as u32 {
        for j in i + 1..clique as u32 {
            edges.insert((i, j));
        }
    }
    let p = 2.0 / periphery as f64;
    for i in clique as u32..n as u32 {
        for j in i + 1..n as u32 {
            if r.random_bool(p) {
                edges.insert((i, j));
            }
        }
    }
    for i in 0..clique as u32 {
        let mut added = 0;
        while added < links {
            let j = r.random_range(clique as u32..n as u32);
            if edges.insert((i, j)) {
                added += 1;
            }
        }
    }
    let graph = UndirectedGraph::from_edges(
        n,
        edges.into_iter().map(|(a, b)| (a, b, r.random_range(1..=5))),
    )
    .unwrap();
    let deg = oracle_degrees(&graph);
    Planted {
        periphery_max_degree: deg[clique..].iter().copied().max().unwrap(),
        clique_min_degree: deg[..clique].iter().copied().min().unwrap(),
        graph,
        clique,
    }
}

/// Labels an index graph with generated codes, one directed edge per
/// undirected edge.
pub fn to_network(g: &UndirectedGraph) -> CountryNetwork {
    let mut net = CountryNetwork::new();
    for i in 0..g.node_count() {
        net.add_node(code(i));
    }
    for e in g.edges() {
        net.accumulate_edge(code(e.u as usize), code(e.v as usize), e.weight)
            .unwrap();
    }
    net
}

/// Degrees from a dense adjacency matrix.
pub fn oracle_degrees(g: &UndirectedGraph) -> Vec<usize> {
    let n = g.node_count();
    let mut adj = vec![vec![false; n]; n];
    for e in g.edges() {
        adj[e.u as usize][e.v as usize] = true;
        adj[e.v as usize][e.u as usize] = true;
    }
    adj.iter().map(|row| row.iter().filter(|&&x| x).count()).collect()
}

/// Rich-club estimator by explicit club filtering and pair enumeration.
/// Returns `(2E, N(N-1))`, or `None` when fewer than two nodes qualify.
pub fn oracle_phi(g: &UndirectedGraph, k: usize) -> Option<(u64, u64)> {
    let n = g.node_count();
    let deg = oracle_degrees(g);
    let mut adj = vec![vec![false; n]; n];
    for e in g.edges() {
        adj[e.u as usize][e.v as usize] = true;
        adj[e.v as usize][e.u as usize] = true;
    }
    let club: Vec<usize> = (0..n).filter(|&i| deg[i] > k).collect();
    if club.len() < 2 {
        return None;
    }
    let mut e = 0u64;
    for (x, &i) in club.iter().enumerate() {
        for &j in &club[x + 1..] {
            if adj[i][j] {
                e += 1;
            }
        }
    }
    Some((2 * e, (club.len() * (club.len() - 1)) as u64))
}

/// Weighted estimator by enumeration: the club is the size-`r` subset with
/// the lexicographically greatest (strength desc, index asc) profile, and
/// the denominator is the maximum weight over all `E`-edge subsets.
pub fn oracle_phi_weighted(g: &UndirectedGraph, r: usize) -> Option<(u64, u64)> {
    let n = g.node_count();
    if r < 2 || r > n || n > 16 || g.edge_count() > 16 {
        return None;
    }
    let mut strength = vec![0u64; n];
    for e in g.edges() {
        strength[e.u as usize] += e.weight;
        strength[e.v as usize] += e.weight;
    }
    // key of a subset: its members sorted by (strength desc, index asc)
    let key = |mask: u32| {
        let mut m: Vec<(std::cmp::Reverse<u64>, usize)> = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| (std::cmp::Reverse(strength[i]), i))
            .collect();
        m.sort();
        m
    };
    let best = (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == r)
        .min_by(|&a, &b| key(a).cmp(&key(b)))
        .unwrap();
    let internal: Vec<u64> = g
        .edges()
        .iter()
        .filter(|e| best >> e.u & 1 == 1 && best >> e.v & 1 == 1)
        .map(|e| e.weight)
        .collect();
    if internal.is_empty() {
        return None;
    }
    let m = g.edge_count();
    let top = (0u32..1 << m)
        .filter(|s| s.count_ones() as usize == internal.len())
        .map(|s| {
            (0..m)
                .filter(|i| s >> i & 1 == 1)
                .map(|i| g.edges()[i].weight)
                .sum::<u64>()
        })
        .max()
        .unwrap();
    Some((internal.iter().sum(), top))
}

pub fn edge_set(g: &UndirectedGraph) -> std::collections::HashSet<(u32, u32)> {
    g.edges().iter().map(|e| (e.u, e.v)).collect()
}
