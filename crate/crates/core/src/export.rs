//! File formats: weighted edge lists, rich-club curves, core reports, chord
//! ribbons, rankings and perturbation diffs.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core_extract::{rank_changes, CoreReport, Flow, Perturbation, RankChange, StrengthRanking};
use crate::graph::{CountryCode, CountryNetwork, GraphError};
use crate::richclub::{RichClubCurve, RichClubPoint};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("edge list line {line}: {source}")]
    BadEdge { line: u64, source: GraphError },
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRow {
    src: String,
    dst: String,
    weight: u64,
}

/// Writes `src,dst,weight` rows sorted by `(src, dst)`.
pub fn write_network_csv<W: Write>(net: &CountryNetwork, out: W) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["src", "dst", "weight"])?;
    for (s, d, weight) in net.edges() {
        w.write_record([s.as_str(), d.as_str(), &weight.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an edge list written by [`write_network_csv`]. Repeated pairs
/// accumulate.
pub fn read_network_csv<R: Read>(input: R) -> Result<CountryNetwork, ExportError> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut net = CountryNetwork::new();
    for (i, row) in rdr.deserialize::<EdgeRow>().enumerate() {
        let row = row?;
        let line = i as u64 + 2;
        let bad = |source| ExportError::BadEdge { line, source };
        let s = CountryCode::new(row.src.trim()).map_err(bad)?;
        let d = CountryCode::new(row.dst.trim()).map_err(bad)?;
        net.accumulate_edge(s, d, row.weight).map_err(bad)?;
    }
    Ok(net)
}

pub fn write_curve_json<W: Write>(curve: &RichClubCurve, mut out: W) -> Result<(), ExportError> {
    serde_json::to_writer_pretty(&mut out, &curve.points)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn write_curve_csv<W: Write>(curve: &RichClubCurve, out: W) -> Result<(), ExportError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record([
        "k",
        "n_above",
        "phi",
        "phi_null_mean",
        "phi_null_sd",
        "phi_null_p05",
        "phi_null_p95",
        "rho",
        "null_excluded",
    ])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for p in &curve.points {
        let RichClubPoint {
            k,
            n_above,
            phi,
            phi_null_mean,
            phi_null_sd,
            phi_null_p05,
            phi_null_p95,
            rho,
            null_excluded,
        } = p;
        w.write_record([
            k.to_string(),
            n_above.to_string(),
            phi.to_string(),
            opt(*phi_null_mean),
            opt(*phi_null_sd),
            opt(*phi_null_p05),
            opt(*phi_null_p95),
            opt(*rho),
            null_excluded.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct CoreJson<'a> {
    pub k_used: usize,
    pub members: &'a StrengthRanking,
    pub internal_flows: &'a [Flow],
    pub coverage: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// `core.json`. An empty core is written with no members and a warning.
pub fn write_core_json<W: Write>(
    core: Option<&CoreReport>,
    k: usize,
    mut out: W,
) -> Result<(), ExportError> {
    let empty = StrengthRanking::default();
    let doc = match core {
        Some(c) => CoreJson {
            k_used: c.k_used,
            members: &c.members,
            internal_flows: &c.internal_flows,
            coverage: c.coverage,
            warning: None,
        },
        None => CoreJson {
            k_used: k,
            members: &empty,
            internal_flows: &[],
            coverage: 0.0,
            warning: Some(format!("empty core: no country has degree above {k}")),
        },
    };
    serde_json::to_writer_pretty(&mut out, &doc)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// One `src,dst,weight` row per ribbon.
pub fn write_chord_csv<W: Write>(flows: &[Flow], out: W) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["src", "dst", "weight"])?;
    for f in flows {
        w.write_record([f.src.as_str(), f.dst.as_str(), &f.weight.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_ranking_csv<W: Write>(ranking: &StrengthRanking, out: W) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rank", "country", "strength", "in_strength", "out_strength"])?;
    for r in &ranking.rows {
        w.write_record([
            r.rank.to_string(),
            r.country.to_string(),
            r.strength.to_string(),
            r.in_strength.to_string(),
            r.out_strength.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct PerturbJson<'a> {
    removed: CountryCode,
    k: usize,
    before: &'a StrengthRanking,
    after: &'a StrengthRanking,
    rank_changes: Vec<RankChange>,
    top_before: Option<CountryCode>,
    top_after: Option<CountryCode>,
    core_after: Option<Vec<CountryCode>>,
}

pub fn write_perturb_json<W: Write>(
    before: &StrengthRanking,
    perturbation: &Perturbation,
    k: usize,
    mut out: W,
) -> Result<(), ExportError> {
    let doc = PerturbJson {
        removed: perturbation.removed,
        k,
        before,
        after: &perturbation.ranking,
        rank_changes: rank_changes(before, &perturbation.ranking),
        top_before: before.top(),
        top_after: perturbation.ranking.top(),
        core_after: perturbation
            .core
            .as_ref()
            .map(|c| c.members.order()),
    };
    serde_json::to_writer_pretty(&mut out, &doc)?;
    out.write_all(b"\n")?;
    Ok(())
}
