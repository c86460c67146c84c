//! Degree- and weight-preserving null ensemble.
//!
//! Each sample is a fresh copy of the source graph rewired by repeated
//! double-edge swaps (per-node degree is invariant under a swap) followed by
//! one global permutation of the edge weights (the weight multiset is
//! invariant under a permutation). Sample `i` draws from its own RNG stream
//! seeded by `(master_seed, i)`, so the ensemble does not depend on how many
//! threads generate it.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{UndirectedGraph, WeightedEdge};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NullModelError {
    #[error("null model needs at least 2 edges, graph has {0}")]
    TooFewEdges(usize),
    #[error("invalid ensemble configuration: {0}")]
    InvalidConfig(&'static str),
}

pub const DEFAULT_SAMPLES: usize = 1000;
pub const DEFAULT_SWAPS_PER_EDGE: usize = 10;
pub const DEFAULT_SEED: u64 = 20_160_509;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EnsembleConfig {
    pub n_samples: usize,
    pub swaps_per_edge: usize,
    pub master_seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            n_samples: DEFAULT_SAMPLES,
            swaps_per_edge: DEFAULT_SWAPS_PER_EDGE,
            master_seed: DEFAULT_SEED,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<(), NullModelError> {
        if self.n_samples == 0 {
            return Err(NullModelError::InvalidConfig("n_samples must be at least 1"));
        }
        if self.swaps_per_edge == 0 {
            return Err(NullModelError::InvalidConfig("swaps_per_edge must be at least 1"));
        }
        Ok(())
    }

    /// Seed of the RNG stream for sample `index`.
    pub fn sample_seed(&self, index: usize) -> u64 {
        splitmix64(self.master_seed ^ splitmix64(index as u64))
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NullSample {
    pub graph: UndirectedGraph,
    pub sample_index: usize,
    pub seed_used: u64,
}

fn key(a: u32, b: u32) -> u64 {
    let (u, v) = if a < b { (a, b) } else { (b, a) };
    ((u as u64) << 32) | v as u64
}

/// A graph under rewiring, with an edge index for O(1) duplicate checks.
pub struct Rewirer {
    graph: UndirectedGraph,
    present: HashSet<u64>,
}

impl Rewirer {
    pub fn new(graph: UndirectedGraph) -> Self {
        let present = graph.edges().iter().map(|e| key(e.u, e.v)).collect();
        Rewirer { graph, present }
    }

    pub fn graph(&self) -> &UndirectedGraph {
        &self.graph
    }

    pub fn into_graph(self) -> UndirectedGraph {
        self.graph
    }

    /// Attempts to rewire edges `i = {a,b}` and `j = {c,d}` into `{a,c},{b,d}`
    /// (or `{a,d},{b,c}` when `flip`). Edges keep their weights. Returns
    /// whether the swap was applied; it is rejected if it would create a
    /// self-loop or an edge that already exists.
    pub fn try_swap(&mut self, i: usize, j: usize, flip: bool) -> bool {
        if i == j {
            return false;
        }
        let WeightedEdge { u: a, v: b, weight: wi } = self.graph.edges()[i];
        let WeightedEdge { u: c, v: d, weight: wj } = self.graph.edges()[j];
        let (c, d) = if flip { (d, c) } else { (c, d) };
        if a == c || b == d {
            return false;
        }
        let (k1, k2) = (key(a, c), key(b, d));
        if self.present.contains(&k1) || self.present.contains(&k2) {
            return false;
        }
        self.present.remove(&key(a, b));
        self.present.remove(&key(c, d));
        self.present.insert(k1);
        self.present.insert(k2);
        let edges = self.graph.edges_mut();
        edges[i] = WeightedEdge::new(a, c, wi);
        edges[j] = WeightedEdge::new(b, d, wj);
        true
    }

    /// One attempted swap on two distinct edges chosen uniformly at random.
    pub fn double_edge_swap<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<bool, NullModelError> {
        let m = self.graph.edge_count();
        if m < 2 {
            return Err(NullModelError::TooFewEdges(m));
        }
        let i = rng.random_range(0..m);
        let mut j = rng.random_range(0..m - 1);
        if j >= i {
            j += 1;
        }
        let flip = rng.random_bool(0.5);
        Ok(self.try_swap(i, j, flip))
    }
}

/// Applies one attempted double-edge swap to `graph`. Returns whether it was
/// accepted. Prefer [`Rewirer`] for repeated swaps.
pub fn double_edge_swap<R: Rng + ?Sized>(
    graph: &mut UndirectedGraph,
    rng: &mut R,
) -> Result<bool, NullModelError> {
    let mut rw = Rewirer::new(std::mem::replace(graph, UndirectedGraph::from_parts(0, Vec::new())));
    let out = rw.double_edge_swap(rng);
    *graph = rw.into_graph();
    out
}

/// Randomly permutes the weights across the existing edges.
pub fn shuffle_weights<R: Rng + ?Sized>(graph: &mut UndirectedGraph, rng: &mut R) {
    let mut weights: Vec<u64> = graph.edges().iter().map(|e| e.weight).collect();
    weights.shuffle(rng);
    for (e, w) in graph.edges_mut().iter_mut().zip(weights) {
        e.weight = w;
    }
}

/// Builds sample `index` of the ensemble defined by `(source, cfg)`.
pub fn generate_sample(
    source: &UndirectedGraph,
    cfg: &EnsembleConfig,
    index: usize,
) -> Result<NullSample, NullModelError> {
    let m = source.edge_count();
    if m < 2 {
        return Err(NullModelError::TooFewEdges(m));
    }
    let seed_used = cfg.sample_seed(index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed_used);
    let mut rw = Rewirer::new(source.clone());
    for _ in 0..cfg.swaps_per_edge * m {
        rw.double_edge_swap(&mut rng)?;
    }
    let mut graph = rw.into_graph();
    shuffle_weights(&mut graph, &mut rng);
    Ok(NullSample {
        graph,
        sample_index: index,
        seed_used,
    })
}

/// All `cfg.n_samples` samples, in index order. Generated in parallel.
pub fn generate_ensemble(
    source: &UndirectedGraph,
    cfg: &EnsembleConfig,
) -> Result<Vec<NullSample>, NullModelError> {
    cfg.validate()?;
    if source.edge_count() < 2 {
        return Err(NullModelError::TooFewEdges(source.edge_count()));
    }
    (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| generate_sample(source, cfg, i))
        .collect()
}
