//! Weighted directed country network and its undirected projection.
//!
//! A [`CountryNetwork`] stores directed entity-count weights between
//! countries. Every structural statistic (degree, club membership, null
//! rewiring) runs on the symmetrized [`UndirectedView`], whose edge weight
//! between two countries is the sum of both directed weights.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop rejected for {0}")]
    SelfLoopRejected(CountryCode),
    #[error("unknown node {0}")]
    UnknownNode(CountryCode),
    #[error("edge delta must be at least 1")]
    ZeroDelta,
    #[error("invalid country code {0:?}: expected three letters A-Z")]
    InvalidCountryCode(String),
}

/// ISO-3166 alpha-3 code, e.g. `VGB`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountryCode([u8; 3]);

impl CountryCode {
    pub fn new(code: &str) -> Result<Self, GraphError> {
        let bytes = code.as_bytes();
        if bytes.len() != 3 || !bytes.iter().all(u8::is_ascii_uppercase) {
            return Err(GraphError::InvalidCountryCode(code.to_string()));
        }
        Ok(CountryCode([bytes[0], bytes[1], bytes[2]]))
    }

    pub fn as_str(&self) -> &str {
        // Only ASCII uppercase bytes are ever stored.
        std::str::from_utf8(&self.0).expect("country code is ASCII")
    }
}

impl FromStr for CountryCode {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CountryCode::new(s)
    }
}

impl fmt::Display for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CountryCode({})", self.as_str())
    }
}

impl Serialize for CountryCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for CountryCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        CountryCode::new(&s).map_err(serde::de::Error::custom)
    }
}

/// Directed weighted network over countries.
///
/// Invariants: no self-loops, every stored weight is at least 1, and every
/// edge endpoint is a member of the node set. Nodes may be isolated.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountryNetwork {
    nodes: BTreeSet<CountryCode>,
    edges: BTreeMap<(CountryCode, CountryCode), u64>,
}

impl CountryNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, c: CountryCode) {
        self.nodes.insert(c);
    }

    /// Adds `delta` to the weight of `src -> dst`, creating the edge and its
    /// endpoints if needed.
    pub fn accumulate_edge(
        &mut self,
        src: CountryCode,
        dst: CountryCode,
        delta: u64,
    ) -> Result<(), GraphError> {
        if src == dst {
            return Err(GraphError::SelfLoopRejected(src));
        }
        if delta == 0 {
            return Err(GraphError::ZeroDelta);
        }
        self.nodes.insert(src);
        self.nodes.insert(dst);
        *self.edges.entry((src, dst)).or_insert(0) += delta;
        Ok(())
    }

    pub fn contains(&self, c: CountryCode) -> bool {
        self.nodes.contains(&c)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = CountryCode> + '_ {
        self.nodes.iter().copied()
    }

    /// Directed edges in `(src, dst)` order.
    pub fn edges(&self) -> impl Iterator<Item = (CountryCode, CountryCode, u64)> + '_ {
        self.edges.iter().map(|(&(s, d), &w)| (s, d, w))
    }

    pub fn weight(&self, src: CountryCode, dst: CountryCode) -> u64 {
        self.edges.get(&(src, dst)).copied().unwrap_or(0)
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().sum()
    }

    /// Number of distinct neighbours in the undirected view.
    pub fn degree(&self, c: CountryCode) -> Result<usize, GraphError> {
        if !self.contains(c) {
            return Err(GraphError::UnknownNode(c));
        }
        let neighbours: BTreeSet<CountryCode> = self
            .edges
            .keys()
            .filter_map(|&(s, d)| match (s == c, d == c) {
                (true, _) => Some(d),
                (_, true) => Some(s),
                _ => None,
            })
            .collect();
        Ok(neighbours.len())
    }

    /// Degree of every node, computed in one pass.
    pub fn degrees(&self) -> BTreeMap<CountryCode, usize> {
        let mut neighbours: BTreeMap<CountryCode, BTreeSet<CountryCode>> =
            self.nodes.iter().map(|&c| (c, BTreeSet::new())).collect();
        for &(s, d) in self.edges.keys() {
            neighbours.get_mut(&s).expect("endpoint in nodes").insert(d);
            neighbours.get_mut(&d).expect("endpoint in nodes").insert(s);
        }
        neighbours.into_iter().map(|(c, n)| (c, n.len())).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().values().copied().max().unwrap_or(0)
    }

    /// Sum of all outgoing and incoming weights.
    pub fn strength(&self, c: CountryCode) -> Result<u64, GraphError> {
        let (inn, out) = self.in_out_strength(c)?;
        Ok(inn + out)
    }

    /// `(in_strength, out_strength)` of a node.
    pub fn in_out_strength(&self, c: CountryCode) -> Result<(u64, u64), GraphError> {
        if !self.contains(c) {
            return Err(GraphError::UnknownNode(c));
        }
        let mut inn = 0;
        let mut out = 0;
        for (&(s, d), &w) in &self.edges {
            if s == c {
                out += w;
            }
            if d == c {
                inn += w;
            }
        }
        Ok((inn, out))
    }

    /// `(in_strength, out_strength)` for every node.
    pub fn in_out_strengths(&self) -> BTreeMap<CountryCode, (u64, u64)> {
        let mut acc: BTreeMap<CountryCode, (u64, u64)> =
            self.nodes.iter().map(|&c| (c, (0, 0))).collect();
        for (&(s, d), &w) in &self.edges {
            acc.get_mut(&s).expect("endpoint in nodes").1 += w;
            acc.get_mut(&d).expect("endpoint in nodes").0 += w;
        }
        acc
    }

    /// Induced subnetwork on the given node set.
    pub fn induced(&self, keep: &BTreeSet<CountryCode>) -> CountryNetwork {
        let nodes = self.nodes.intersection(keep).copied().collect();
        let edges = self
            .edges
            .iter()
            .filter(|(&(s, d), _)| keep.contains(&s) && keep.contains(&d))
            .map(|(&k, &w)| (k, w))
            .collect();
        CountryNetwork { nodes, edges }
    }

    /// Nodes whose degree in this network is strictly greater than `k`.
    pub fn nodes_above_degree(&self, k: usize) -> BTreeSet<CountryCode> {
        self.degrees()
            .into_iter()
            .filter(|&(_, deg)| deg > k)
            .map(|(c, _)| c)
            .collect()
    }

    /// Induced subnetwork on nodes with degree `> k`. Degrees are measured on
    /// `self`, not recomputed on the shrinking subgraph.
    pub fn subgraph_above_degree(&self, k: usize) -> CountryNetwork {
        self.induced(&self.nodes_above_degree(k))
    }

    /// Copy of the network with `c` and its incident edges removed.
    pub fn without_node(&self, c: CountryCode) -> Result<CountryNetwork, GraphError> {
        if !self.contains(c) {
            return Err(GraphError::UnknownNode(c));
        }
        let mut keep = self.nodes.clone();
        keep.remove(&c);
        Ok(self.induced(&keep))
    }

    pub fn undirected(&self) -> UndirectedView {
        UndirectedView::from_network(self)
    }
}

/// One undirected edge with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeightedEdge {
    pub u: u32,
    pub v: u32,
    pub weight: u64,
}

impl WeightedEdge {
    pub fn new(a: u32, b: u32, weight: u64) -> Self {
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        WeightedEdge { u, v, weight }
    }
}

/// Index-based simple undirected weighted graph.
///
/// This is the working type for null-model rewiring and rich-club
/// estimators. Edge order is significant only for reproducibility; two
/// graphs with the same edges in a different order describe the same graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    node_count: usize,
    edges: Vec<WeightedEdge>,
}

impl UndirectedGraph {
    /// Builds a graph from `(a, b, weight)` triples. Returns `None` when an
    /// endpoint is out of range, a self-loop or duplicate pair is present, or
    /// a weight is zero.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Option<Self>
    where
        I: IntoIterator<Item = (u32, u32, u64)>,
    {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for (a, b, w) in edges {
            if a == b || w == 0 || a as usize >= node_count || b as usize >= node_count {
                return None;
            }
            let e = WeightedEdge::new(a, b, w);
            if !seen.insert((e.u, e.v)) {
                return None;
            }
            out.push(e);
        }
        Some(UndirectedGraph {
            node_count,
            edges: out,
        })
    }

    pub(crate) fn from_parts(node_count: usize, edges: Vec<WeightedEdge>) -> Self {
        UndirectedGraph { node_count, edges }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[WeightedEdge] {
        &self.edges
    }

    pub(crate) fn edges_mut(&mut self) -> &mut [WeightedEdge] {
        &mut self.edges
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.node_count];
        for e in &self.edges {
            deg[e.u as usize] += 1;
            deg[e.v as usize] += 1;
        }
        deg
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Sum of incident edge weights per node.
    pub fn strengths(&self) -> Vec<u64> {
        let mut s = vec![0; self.node_count];
        for e in &self.edges {
            s[e.u as usize] += e.weight;
            s[e.v as usize] += e.weight;
        }
        s
    }

    pub fn adjacency(&self) -> Vec<Vec<(u32, u64)>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for e in &self.edges {
            adj[e.u as usize].push((e.v, e.weight));
            adj[e.v as usize].push((e.u, e.weight));
        }
        adj
    }

    pub fn sorted_weights(&self) -> Vec<u64> {
        let mut w: Vec<u64> = self.edges.iter().map(|e| e.weight).collect();
        w.sort_unstable();
        w
    }

    /// Edges as `(u, v, weight)` sorted by `(u, v)`.
    pub fn canonical_edges(&self) -> Vec<(u32, u32, u64)> {
        let mut e: Vec<_> = self.edges.iter().map(|e| (e.u, e.v, e.weight)).collect();
        e.sort_unstable();
        e
    }
}

/// Symmetrized country network: node `i` of `graph` is `labels[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedView {
    labels: Vec<CountryCode>,
    graph: UndirectedGraph,
}

impl UndirectedView {
    pub fn from_network(net: &CountryNetwork) -> Self {
        let labels: Vec<CountryCode> = net.nodes().collect();
        let index: BTreeMap<CountryCode, u32> = labels
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i as u32))
            .collect();
        let mut pairs: BTreeMap<(u32, u32), u64> = BTreeMap::new();
        for (s, d, w) in net.edges() {
            let e = WeightedEdge::new(index[&s], index[&d], w);
            *pairs.entry((e.u, e.v)).or_insert(0) += w;
        }
        let edges = pairs
            .into_iter()
            .map(|((u, v), weight)| WeightedEdge { u, v, weight })
            .collect();
        UndirectedView {
            labels,
            graph: UndirectedGraph::from_parts(net.node_count(), edges),
        }
    }

    pub fn labels(&self) -> &[CountryCode] {
        &self.labels
    }

    pub fn graph(&self) -> &UndirectedGraph {
        &self.graph
    }

    pub fn into_graph(self) -> UndirectedGraph {
        self.graph
    }

    /// Undirected weight between two countries, 0 when not adjacent.
    pub fn weight(&self, a: CountryCode, b: CountryCode) -> u64 {
        let (Ok(i), Ok(j)) = (self.labels.binary_search(&a), self.labels.binary_search(&b)) else {
            return 0;
        };
        let e = WeightedEdge::new(i as u32, j as u32, 0);
        self.graph
            .edges
            .binary_search_by(|x| (x.u, x.v).cmp(&(e.u, e.v)))
            .map(|pos| self.graph.edges[pos].weight)
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cc(s: &str) -> CountryCode {
        CountryCode::new(s).unwrap()
    }

    fn fixture() -> CountryNetwork {
        let mut net = CountryNetwork::new();
        net.accumulate_edge(cc("AAA"), cc("BBB"), 1).unwrap();
        net.accumulate_edge(cc("BBB"), cc("AAA"), 2).unwrap();
        net.accumulate_edge(cc("AAA"), cc("CCC"), 1).unwrap();
        net
    }

    /// Degrees a:3, b:3, c:3, d:4, e:2, f:1.
    fn six_node() -> CountryNetwork {
        let mut net = CountryNetwork::new();
        for (s, d) in [
            ("AAA", "BBB"),
            ("AAA", "CCC"),
            ("AAA", "DDD"),
            ("BBB", "CCC"),
            ("BBB", "DDD"),
            ("CCC", "DDD"),
            ("DDD", "EEE"),
            ("EEE", "FFF"),
        ] {
            net.accumulate_edge(cc(s), cc(d), 1).unwrap();
        }
        net
    }

    #[test]
    fn country_code_validation() {
        assert!(CountryCode::new("VGB").is_ok());
        assert!(CountryCode::new("vgb").is_err());
        assert!(CountryCode::new("VG").is_err());
        assert!(CountryCode::new("VGBR").is_err());
        assert!(CountryCode::new("V1B").is_err());
        assert_eq!(cc("VGB").to_string(), "VGB");
    }

    #[test]
    fn accumulate_adds_counts() {
        let mut net = CountryNetwork::new();
        net.accumulate_edge(cc("RUS"), cc("VGB"), 1).unwrap();
        net.accumulate_edge(cc("RUS"), cc("VGB"), 1).unwrap();
        assert_eq!(net.weight(cc("RUS"), cc("VGB")), 2);
        assert_eq!(net.weight(cc("VGB"), cc("RUS")), 0);
    }

    #[test]
    fn accumulate_rejects_self_loop() {
        let mut net = CountryNetwork::new();
        assert_eq!(
            net.accumulate_edge(cc("CHN"), cc("CHN"), 1),
            Err(GraphError::SelfLoopRejected(cc("CHN")))
        );
        assert!(net.is_empty());
        assert_eq!(
            net.accumulate_edge(cc("CHN"), cc("HKG"), 0),
            Err(GraphError::ZeroDelta)
        );
    }

    #[test]
    fn fixture_weights_degrees_strengths() {
        let net = fixture();
        assert_eq!(net.weight(cc("AAA"), cc("BBB")), 1);
        assert_eq!(net.weight(cc("BBB"), cc("AAA")), 2);
        assert_eq!(net.weight(cc("AAA"), cc("CCC")), 1);
        assert_eq!(net.edge_count(), 3);
        assert_eq!(net.undirected().weight(cc("AAA"), cc("BBB")), 3);
        assert_eq!(net.undirected().weight(cc("BBB"), cc("AAA")), 3);
        assert_eq!(net.degree(cc("AAA")).unwrap(), 2);
        assert_eq!(net.strength(cc("AAA")).unwrap(), 4);
    }

    #[test]
    fn star_and_isolated() {
        let mut net = CountryNetwork::new();
        for leaf in ["AAA", "BBB", "CCC", "DDD", "EEE"] {
            net.accumulate_edge(cc("HUB"), cc(leaf), 1).unwrap();
        }
        net.add_node(cc("ISO"));
        assert_eq!(net.degree(cc("HUB")).unwrap(), 5);
        assert_eq!(net.degree(cc("ISO")).unwrap(), 0);
        assert_eq!(net.strength(cc("ISO")).unwrap(), 0);
        assert_eq!(
            net.degree(cc("ZZZ")),
            Err(GraphError::UnknownNode(cc("ZZZ")))
        );
        assert_eq!(
            net.strength(cc("ZZZ")),
            Err(GraphError::UnknownNode(cc("ZZZ")))
        );
    }

    #[test]
    fn strength_counts_in_and_out() {
        let mut net = CountryNetwork::new();
        net.accumulate_edge(cc("XXA"), cc("OUT"), 5).unwrap();
        net.accumulate_edge(cc("INA"), cc("XXA"), 2).unwrap();
        net.accumulate_edge(cc("INB"), cc("XXA"), 3).unwrap();
        assert_eq!(net.strength(cc("XXA")).unwrap(), 10);
        assert_eq!(net.in_out_strength(cc("XXA")).unwrap(), (5, 5));
    }

    #[test]
    fn subgraph_thresholds() {
        let net = six_node();
        let sub = net.subgraph_above_degree(2);
        let kept: Vec<_> = sub.nodes().map(|c| c.to_string()).collect();
        assert_eq!(kept, ["AAA", "BBB", "CCC", "DDD"]);
        assert_eq!(sub.edge_count(), 6);
        assert!(net.subgraph_above_degree(net.max_degree()).is_empty());

        let mut k5 = CountryNetwork::new();
        let names = ["AAA", "BBB", "CCC", "DDD", "EEE"];
        for i in 0..5 {
            for j in i + 1..5 {
                k5.accumulate_edge(cc(names[i]), cc(names[j]), 1).unwrap();
            }
        }
        assert_eq!(k5.subgraph_above_degree(3), k5);
    }

    #[test]
    fn without_node_drops_incident_edges() {
        let net = fixture();
        let reduced = net.without_node(cc("AAA")).unwrap();
        assert_eq!(reduced.node_count(), 2);
        assert_eq!(reduced.edge_count(), 0);
        assert_eq!(net.edge_count(), 3);
        assert!(net.without_node(cc("QQQ")).is_err());
    }

    #[test]
    fn undirected_graph_rejects_bad_edges() {
        assert!(UndirectedGraph::from_edges(3, [(0, 1, 1), (1, 2, 1)]).is_some());
        assert!(UndirectedGraph::from_edges(3, [(0, 0, 1)]).is_none());
        assert!(UndirectedGraph::from_edges(3, [(0, 1, 1), (1, 0, 2)]).is_none());
        assert!(UndirectedGraph::from_edges(3, [(0, 3, 1)]).is_none());
        assert!(UndirectedGraph::from_edges(3, [(0, 1, 0)]).is_none());
    }
}
