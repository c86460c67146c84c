//! Rich-club estimators and their null-normalized coefficient.
//!
//! The topological estimator at threshold `k` is the edge density among
//! nodes of degree `> k`:
//!
//! ```text
//! phi(k) = 2 E_k / (N_k (N_k - 1))
//! ```
//!
//! The weighted estimator ranks nodes by strength, takes the `r` strongest as
//! the club, and divides the weight on the club's `E_r` internal edges by the
//! sum of the `E_r` heaviest weights in the whole graph. On a degree grid it
//! uses `r = N_k`, so both estimators share the same `k` axis.
//!
//! `rho(k)` divides the observed value by its mean over the null ensemble.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::UndirectedGraph;
use crate::nullmodel::{generate_sample, EnsembleConfig, NullModelError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RichClubError {
    #[error("club has {0} members, need at least 2")]
    ClubTooSmall(usize),
    #[error("club has no internal edges")]
    InsufficientEdges,
    #[error(transparent)]
    NullModel(#[from] NullModelError),
    #[error("unknown estimator {0:?}")]
    UnknownEstimator(String),
}

/// Number of nodes with degree `> k`, for every `k in 0..k_end`.
fn nodes_above(degrees: &[usize], k_end: usize) -> Vec<usize> {
    let mut hist = vec![0usize; k_end + 1];
    for &d in degrees {
        hist[d.min(k_end)] += 1;
    }
    suffix_above(&hist, k_end)
}

/// `out[k] = sum(hist[k+1..])`, with the last bucket holding everything `>= k_end`.
fn suffix_above(hist: &[usize], k_end: usize) -> Vec<usize> {
    let mut out = vec![0usize; k_end];
    let mut acc = hist[k_end];
    for k in (0..k_end).rev() {
        out[k] = acc;
        acc += hist[k];
    }
    out
}

/// Topological rich-club estimator at threshold `k`.
pub fn phi(graph: &UndirectedGraph, k: usize) -> Result<f64, RichClubError> {
    phi_with_degrees(graph, &graph.degrees(), k)
}

/// [`phi`] with club membership taken from `degrees` instead of `graph`.
pub fn phi_with_degrees(
    graph: &UndirectedGraph,
    degrees: &[usize],
    k: usize,
) -> Result<f64, RichClubError> {
    let n = degrees.iter().filter(|&&d| d > k).count();
    if n < 2 {
        return Err(RichClubError::ClubTooSmall(n));
    }
    let e = graph
        .edges()
        .iter()
        .filter(|e| degrees[e.u as usize] > k && degrees[e.v as usize] > k)
        .count();
    Ok(density(e, n))
}

fn density(edges: usize, nodes: usize) -> f64 {
    density_ratio(edges, nodes).value()
}

fn density_ratio(edges: usize, nodes: usize) -> Ratio {
    Ratio {
        num: 2 * edges as u64,
        den: (nodes * (nodes - 1)) as u64,
    }
}

/// An estimator value kept as an integer fraction so that ensemble means
/// can be formed from exact totals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// Nodes ordered by strength, strongest first; ties by ascending index.
pub fn strength_order(graph: &UndirectedGraph) -> Vec<u32> {
    let s = graph.strengths();
    let mut order: Vec<u32> = (0..graph.node_count() as u32).collect();
    order.sort_by(|&a, &b| s[b as usize].cmp(&s[a as usize]).then(a.cmp(&b)));
    order
}

/// Weighted rich-club estimator with the `r` strongest nodes as the club.
pub fn phi_weighted(graph: &UndirectedGraph, r: usize) -> Result<f64, RichClubError> {
    if r < 2 || r > graph.node_count() {
        return Err(RichClubError::ClubTooSmall(r.min(graph.node_count())));
    }
    let mut in_club = vec![false; graph.node_count()];
    for &v in &strength_order(graph)[..r] {
        in_club[v as usize] = true;
    }
    let (mut e, mut w) = (0usize, 0u64);
    for edge in graph.edges() {
        if in_club[edge.u as usize] && in_club[edge.v as usize] {
            e += 1;
            w += edge.weight;
        }
    }
    if e == 0 {
        return Err(RichClubError::InsufficientEdges);
    }
    let mut weights = graph.sorted_weights();
    weights.reverse();
    let top: u64 = weights[..e].iter().sum();
    Ok(Ratio { num: w, den: top }.value())
}

/// A rich-club estimator evaluated over a degree-threshold grid.
pub trait ClubEstimator: Send + Sync {
    /// Registry key, as accepted by `--estimator`.
    fn name(&self) -> &'static str;

    fn is_weighted(&self) -> bool;

    /// Value at every `k in 0..k_end`, `None` where undefined. Club
    /// membership uses `degrees`, which for a null sample are the source
    /// graph's degrees.
    fn curve(&self, graph: &UndirectedGraph, degrees: &[usize], k_end: usize) -> Vec<Option<Ratio>>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct Topological;

impl ClubEstimator for Topological {
    fn name(&self) -> &'static str {
        "topological"
    }

    fn is_weighted(&self) -> bool {
        false
    }

    fn curve(&self, graph: &UndirectedGraph, degrees: &[usize], k_end: usize) -> Vec<Option<Ratio>> {
        if k_end == 0 {
            return Vec::new();
        }
        let n_above = nodes_above(degrees, k_end);
        // An edge is internal to the club at k iff its lower endpoint degree exceeds k.
        let mut hist = vec![0usize; k_end + 1];
        for e in graph.edges() {
            let m = degrees[e.u as usize].min(degrees[e.v as usize]);
            hist[m.min(k_end)] += 1;
        }
        let e_above = suffix_above(&hist, k_end);
        (0..k_end)
            .map(|k| (n_above[k] >= 2).then(|| density_ratio(e_above[k], n_above[k])))
            .collect()
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct Weighted;

impl ClubEstimator for Weighted {
    fn name(&self) -> &'static str {
        "weighted"
    }

    fn is_weighted(&self) -> bool {
        true
    }

    fn curve(&self, graph: &UndirectedGraph, degrees: &[usize], k_end: usize) -> Vec<Option<Ratio>> {
        if k_end == 0 {
            return Vec::new();
        }
        let n = graph.node_count();
        let adj = graph.adjacency();
        let order = strength_order(graph);
        // internal[r] = (edges, weight) among the r strongest nodes.
        let mut internal = vec![(0usize, 0u64); n + 1];
        let mut in_club = vec![false; n];
        for (i, &v) in order.iter().enumerate() {
            let (mut e, mut w) = internal[i];
            for &(nb, wt) in &adj[v as usize] {
                if in_club[nb as usize] {
                    e += 1;
                    w += wt;
                }
            }
            in_club[v as usize] = true;
            internal[i + 1] = (e, w);
        }
        let mut weights = graph.sorted_weights();
        weights.reverse();
        let mut top = vec![0u64; weights.len() + 1];
        for (i, w) in weights.iter().enumerate() {
            top[i + 1] = top[i] + w;
        }
        let n_above = nodes_above(degrees, k_end);
        (0..k_end)
            .map(|k| {
                let r = n_above[k];
                if r < 2 {
                    return None;
                }
                let (e, w) = internal[r];
                (e > 0).then_some(Ratio { num: w, den: top[e] })
            })
            .collect()
    }
}

pub fn estimator_registry() -> Vec<Box<dyn ClubEstimator>> {
    vec![Box::new(Topological), Box::new(Weighted)]
}

pub fn estimator_by_name(name: &str) -> Result<Box<dyn ClubEstimator>, RichClubError> {
    estimator_registry()
        .into_iter()
        .find(|e| e.name() == name)
        .ok_or_else(|| RichClubError::UnknownEstimator(name.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RichClubPoint {
    pub k: usize,
    pub n_above: usize,
    pub phi: f64,
    pub phi_null_mean: Option<f64>,
    pub phi_null_sd: Option<f64>,
    pub phi_null_p05: Option<f64>,
    pub phi_null_p95: Option<f64>,
    pub rho: Option<f64>,
    pub null_excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RichClubCurve {
    pub points: Vec<RichClubPoint>,
    pub ensemble_config: EnsembleConfig,
    pub weighted_variant: bool,
}

impl RichClubCurve {
    pub fn point(&self, k: usize) -> Option<&RichClubPoint> {
        self.points.iter().find(|p| p.k == k)
    }

    pub fn max_rho(&self) -> Option<f64> {
        self.points.iter().filter_map(|p| p.rho).reduce(f64::max)
    }
}

/// Linear-interpolation percentile of an ascending slice, `q` in `[0, 1]`.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

struct NullStats {
    mean: f64,
    sd: f64,
    p05: f64,
    p95: f64,
}

/// `observed / mean(values)`, computed from integer totals when every
/// value shares one denominator.
fn null_stats(observed: Ratio, values: &[Ratio]) -> Option<(NullStats, Option<f64>)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let den = values[0].den;
    let (mean, rho) = if values.iter().all(|r| r.den == den) {
        let total: u128 = values.iter().map(|r| r.num as u128).sum();
        let mean = total as f64 / (den as u128 * values.len() as u128) as f64;
        // observed / (total / (den * n)) = observed.num * den * n / (observed.den * total)
        let rho = (total > 0).then(|| {
            (observed.num as u128 * den as u128 * values.len() as u128) as f64
                / (observed.den as u128 * total) as f64
        });
        (mean, rho)
    } else {
        let mean = values.iter().map(|r| r.value()).sum::<f64>() / n;
        (mean, (mean > 0.0).then(|| observed.value() / mean))
    };
    let values: Vec<f64> = values.iter().map(|r| r.value()).collect();
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = values;
    sorted.sort_by(f64::total_cmp);
    Some((
        NullStats {
            mean,
            sd,
            p05: percentile(&sorted, 0.05),
            p95: percentile(&sorted, 0.95),
        },
        rho,
    ))
}

/// Observed estimator, null statistics and `rho` for every `k` from 0 to
/// max degree - 1 at which the observed club is defined.
pub fn rho_curve(
    graph: &UndirectedGraph,
    cfg: &EnsembleConfig,
    estimator: &dyn ClubEstimator,
) -> Result<RichClubCurve, RichClubError> {
    cfg.validate()?;
    if graph.edge_count() < 2 {
        return Err(NullModelError::TooFewEdges(graph.edge_count()).into());
    }
    let degrees = graph.degrees();
    let k_end = degrees.iter().copied().max().unwrap_or(0);
    let observed = estimator.curve(graph, &degrees, k_end);
    let n_above = nodes_above(&degrees, k_end);

    // Per-sample curves are collected in index order, so every reduction
    // below runs in the same order whatever the thread count.
    let null_curves: Vec<Vec<Option<Ratio>>> = (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| {
            generate_sample(graph, cfg, i).map(|s| estimator.curve(&s.graph, &degrees, k_end))
        })
        .collect::<Result<_, _>>()?;

    let mut points = Vec::new();
    for (k, obs) in observed.iter().enumerate() {
        let Some(observed) = *obs else { continue };
        let values: Vec<Ratio> = null_curves.iter().filter_map(|c| c[k]).collect();
        let null_excluded = null_curves.len() - values.len();
        let (stats, rho) = match null_stats(observed, &values) {
            Some((s, rho)) => (Some(s), rho),
            None => (None, None),
        };
        points.push(RichClubPoint {
            k,
            n_above: n_above[k],
            phi: observed.value(),
            phi_null_mean: stats.as_ref().map(|s| s.mean),
            phi_null_sd: stats.as_ref().map(|s| s.sd),
            phi_null_p05: stats.as_ref().map(|s| s.p05),
            phi_null_p95: stats.as_ref().map(|s| s.p95),
            rho,
            null_excluded,
        });
    }
    Ok(RichClubCurve {
        points,
        ensemble_config: *cfg,
        weighted_variant: estimator.is_weighted(),
    })
}
