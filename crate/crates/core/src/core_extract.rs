//! Strength ranking, degree-threshold core extraction and node-removal
//! perturbation.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{CountryCode, CountryNetwork, GraphError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoreError {
    #[error("network is empty")]
    EmptyNetwork,
    #[error("no node has degree above {0}")]
    EmptyCore(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub const DEFAULT_CORE_K: usize = 80;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankedCountry {
    pub rank: usize,
    pub country: CountryCode,
    pub strength: u64,
    pub in_strength: u64,
    pub out_strength: u64,
}

/// Countries by strength descending, ties by ascending code.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct StrengthRanking {
    pub rows: Vec<RankedCountry>,
}

impl StrengthRanking {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn top(&self) -> Option<CountryCode> {
        self.rows.first().map(|r| r.country)
    }

    pub fn order(&self) -> Vec<CountryCode> {
        self.rows.iter().map(|r| r.country).collect()
    }

    pub fn rank_of(&self, c: CountryCode) -> Option<usize> {
        self.rows.iter().find(|r| r.country == c).map(|r| r.rank)
    }
}

fn ranking_of(net: &CountryNetwork) -> StrengthRanking {
    let mut rows: Vec<RankedCountry> = net
        .in_out_strengths()
        .into_iter()
        .map(|(country, (in_strength, out_strength))| RankedCountry {
            rank: 0,
            country,
            strength: in_strength + out_strength,
            in_strength,
            out_strength,
        })
        .collect();
    rows.sort_by(|a, b| b.strength.cmp(&a.strength).then(a.country.cmp(&b.country)));
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    StrengthRanking { rows }
}

pub fn rank_by_strength(net: &CountryNetwork) -> Result<StrengthRanking, CoreError> {
    if net.is_empty() {
        return Err(CoreError::EmptyNetwork);
    }
    Ok(ranking_of(net))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Flow {
    pub src: CountryCode,
    pub dst: CountryCode,
    pub weight: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoreReport {
    pub k_used: usize,
    /// Rows of the full-network ranking whose country is in the core; `rank`
    /// is the global rank.
    pub members: StrengthRanking,
    /// Directed flows among members, heaviest first.
    pub internal_flows: Vec<Flow>,
    /// Share of total network weight carried by `internal_flows`.
    pub coverage: f64,
}

impl CoreReport {
    pub fn member_set(&self) -> BTreeSet<CountryCode> {
        self.members.rows.iter().map(|r| r.country).collect()
    }
}

/// Core at threshold `k`: the subnetwork on countries with degree `> k`.
pub fn extract_core(net: &CountryNetwork, k: usize) -> Result<CoreReport, CoreError> {
    if net.is_empty() {
        return Err(CoreError::EmptyNetwork);
    }
    let core = net.subgraph_above_degree(k);
    if core.is_empty() {
        return Err(CoreError::EmptyCore(k));
    }
    let ranking = ranking_of(net);
    let members = StrengthRanking {
        rows: ranking
            .rows
            .into_iter()
            .filter(|r| core.contains(r.country))
            .collect(),
    };
    let mut internal_flows: Vec<Flow> = core
        .edges()
        .map(|(src, dst, weight)| Flow { src, dst, weight })
        .collect();
    internal_flows.sort_by(|a, b| {
        b.weight
            .cmp(&a.weight)
            .then(a.src.cmp(&b.src))
            .then(a.dst.cmp(&b.dst))
    });
    let total = net.total_weight();
    let coverage = if total == 0 {
        0.0
    } else {
        core.total_weight() as f64 / total as f64
    };
    Ok(CoreReport {
        k_used: k,
        members,
        internal_flows,
        coverage,
    })
}

pub fn jaccard(a: &BTreeSet<CountryCode>, b: &BTreeSet<CountryCode>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityScan {
    pub cores: Vec<(usize, BTreeSet<CountryCode>)>,
    /// `jaccard[i]` compares `cores[i]` with `cores[i + 1]`.
    pub jaccard: Vec<f64>,
}

impl StabilityScan {
    /// 1.0 for a scan with fewer than two thresholds.
    pub fn mean_jaccard(&self) -> f64 {
        if self.jaccard.is_empty() {
            return 1.0;
        }
        self.jaccard.iter().sum::<f64>() / self.jaccard.len() as f64
    }
}

/// Core membership for each `k in k_min..=k_max`. Empty when `k_min > k_max`.
pub fn stability_scan(net: &CountryNetwork, k_min: usize, k_max: usize) -> StabilityScan {
    let degrees = net.degrees();
    let cores: Vec<(usize, BTreeSet<CountryCode>)> = (k_min..=k_max)
        .map(|k| {
            let members = degrees
                .iter()
                .filter(|&(_, &d)| d > k)
                .map(|(&c, _)| c)
                .collect();
            (k, members)
        })
        .collect();
    let jaccard = cores.windows(2).map(|w| jaccard(&w[0].1, &w[1].1)).collect();
    StabilityScan { cores, jaccard }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub removed: CountryCode,
    pub reduced: CountryNetwork,
    pub ranking: StrengthRanking,
    /// `None` when no node of the reduced network exceeds `k`.
    pub core: Option<CoreReport>,
}

/// Deletes `removed` with its incident edges, then re-ranks and re-extracts
/// the core at the same `k`. `net` is left untouched.
pub fn remove_and_rerank(
    net: &CountryNetwork,
    removed: CountryCode,
    k: usize,
) -> Result<Perturbation, CoreError> {
    let reduced = net.without_node(removed)?;
    let ranking = ranking_of(&reduced);
    let core = match extract_core(&reduced, k) {
        Ok(core) => Some(core),
        Err(CoreError::EmptyCore(_) | CoreError::EmptyNetwork) => None,
        Err(e) => return Err(e),
    };
    Ok(Perturbation {
        removed,
        reduced,
        ranking,
        core,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankChange {
    pub country: CountryCode,
    pub before: usize,
    pub after: Option<usize>,
}

/// Countries whose rank differs between `before` and `after`; a country
/// missing from `after` has `after: None`.
pub fn rank_changes(before: &StrengthRanking, after: &StrengthRanking) -> Vec<RankChange> {
    before
        .rows
        .iter()
        .filter_map(|r| {
            let new = after.rank_of(r.country);
            (new != Some(r.rank)).then_some(RankChange {
                country: r.country,
                before: r.rank,
                after: new,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cc(s: &str) -> CountryCode {
        CountryCode::new(s).unwrap()
    }

    fn triangle() -> CountryNetwork {
        let mut net = CountryNetwork::new();
        net.accumulate_edge(cc("AAA"), cc("BBB"), 5).unwrap();
        net.accumulate_edge(cc("BBB"), cc("CCC"), 2).unwrap();
        net.accumulate_edge(cc("CCC"), cc("AAA"), 1).unwrap();
        net
    }

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
    fn ranks_triangle() {
        let r = rank_by_strength(&triangle()).unwrap();
        let got: Vec<_> = r.rows.iter().map(|r| (r.country.to_string(), r.strength)).collect();
        assert_eq!(
            got,
            [("BBB".to_string(), 7), ("AAA".to_string(), 6), ("CCC".to_string(), 3)]
        );
        for row in &r.rows {
            assert_eq!(row.in_strength + row.out_strength, row.strength);
        }
        assert_eq!(r.rows[0].rank, 1);
    }

    #[test]
    fn ties_break_by_code() {
        let mut net = CountryNetwork::new();
        net.accumulate_edge(cc("BBB"), cc("AAA"), 4).unwrap();
        let r = rank_by_strength(&net).unwrap();
        assert_eq!(r.order(), vec![cc("AAA"), cc("BBB")]);
    }

    #[test]
    fn empty_network_errors() {
        assert_eq!(
            rank_by_strength(&CountryNetwork::new()),
            Err(CoreError::EmptyNetwork)
        );
        assert_eq!(
            extract_core(&CountryNetwork::new(), 0),
            Err(CoreError::EmptyNetwork)
        );
    }

    #[test]
    fn six_node_core() {
        let net = six_node();
        let core = extract_core(&net, 2).unwrap();
        let members: Vec<_> = core.member_set().into_iter().map(|c| c.to_string()).collect();
        assert_eq!(members, ["AAA", "BBB", "CCC", "DDD"]);
        assert_eq!(core.internal_flows.len(), 6);
        assert!((core.coverage - 6.0 / 8.0).abs() < 1e-15);
        assert_eq!(extract_core(&net, 4), Err(CoreError::EmptyCore(4)));
    }

    #[test]
    fn flows_sorted_heaviest_first() {
        let core = extract_core(&triangle(), 1).unwrap();
        let w: Vec<_> = core.internal_flows.iter().map(|f| f.weight).collect();
        assert_eq!(w, vec![5, 2, 1]);
        assert_eq!(core.coverage, 1.0);
    }

    #[test]
    fn scan_beyond_max_degree() {
        let net = six_node();
        let max = net.max_degree();
        let scan = stability_scan(&net, max, max + 3);
        assert_eq!(scan.cores.len(), 4);
        assert!(scan.cores.iter().all(|(_, s)| s.is_empty()));
        assert_eq!(scan.jaccard, vec![1.0; 3]);
        assert_eq!(scan.mean_jaccard(), 1.0);
    }

    #[test]
    fn remove_b_from_triangle() {
        let net = triangle();
        let p = remove_and_rerank(&net, cc("BBB"), 0).unwrap();
        let got: Vec<_> = p.ranking.rows.iter().map(|r| (r.country.to_string(), r.strength)).collect();
        assert_eq!(got, [("AAA".to_string(), 1), ("CCC".to_string(), 1)]);
        assert_eq!(net, triangle());
        let changes = rank_changes(&rank_by_strength(&net).unwrap(), &p.ranking);
        assert_eq!(changes.len(), 3);
        assert_eq!(
            changes[0],
            RankChange {
                country: cc("BBB"),
                before: 1,
                after: None
            }
        );
    }

    #[test]
    fn remove_sole_node() {
        let mut net = CountryNetwork::new();
        net.add_node(cc("ONE"));
        let p = remove_and_rerank(&net, cc("ONE"), 0).unwrap();
        assert!(p.ranking.is_empty());
        assert!(p.core.is_none());
        assert!(matches!(
            remove_and_rerank(&net, cc("TWO"), 0),
            Err(CoreError::Graph(GraphError::UnknownNode(_)))
        ));
    }
}
