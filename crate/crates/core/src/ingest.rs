//! Offshore-leaks CSV ingestion and projection onto a country network.
//!
//! Records (entities, officers, intermediaries, addresses) each carry a list
//! of countries; relationships link two records. A [`Projection`] strategy
//! folds both tables into a [`CountryNetwork`] where each bridging
//! record-pair adds one unit of weight.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{CountryCode, CountryNetwork};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed header: missing column {0:?}")]
    MalformedHeader(String),
    #[error("CSV syntax error: {0}")]
    CsvSyntax(String),
    #[error("unknown projection mode {0:?}")]
    UnknownMode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RecordKind {
    Entity,
    Officer,
    Intermediary,
    Address,
}

impl RecordKind {
    fn parse(s: &str) -> Option<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "entity" | "entities" => Some(RecordKind::Entity),
            "officer" | "officers" => Some(RecordKind::Officer),
            "intermediary" | "intermediaries" => Some(RecordKind::Intermediary),
            "address" | "addresses" => Some(RecordKind::Address),
            _ => None,
        }
    }

    /// Guesses the record kind from an ICIJ dump file name such as
    /// `nodes-officers.csv`.
    pub fn from_file_name(name: &str) -> Option<Self> {
        let name = name.to_ascii_lowercase();
        if name.contains("officer") {
            Some(RecordKind::Officer)
        } else if name.contains("intermediar") {
            Some(RecordKind::Intermediary)
        } else if name.contains("address") {
            Some(RecordKind::Address)
        } else if name.contains("entit") {
            Some(RecordKind::Entity)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeakRecord {
    pub node_id: i64,
    pub kind: RecordKind,
    pub name: String,
    /// Deduplicated and sorted.
    pub country_codes: Vec<CountryCode>,
    pub jurisdiction: Option<CountryCode>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeakRelationship {
    pub src_id: i64,
    pub dst_id: i64,
    pub rel_type: String,
}

/// Counters accumulated over one ingestion run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub records_read: u64,
    pub relationships_read: u64,
    pub records_missing_country: u64,
    pub self_loops_dropped: u64,
    pub dangling_relationships: u64,
    /// Record rows skipped for an unparseable or repeated `node_id`.
    pub records_skipped: u64,
    /// Country tokens dropped for not being three letters A-Z.
    pub invalid_country_tokens: u64,
}

impl IngestReport {
    pub fn merge(&mut self, other: &IngestReport) {
        self.records_read += other.records_read;
        self.relationships_read += other.relationships_read;
        self.records_missing_country += other.records_missing_country;
        self.self_loops_dropped += other.self_loops_dropped;
        self.dangling_relationships += other.dangling_relationships;
        self.records_skipped += other.records_skipped;
        self.invalid_country_tokens += other.invalid_country_tokens;
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    /// Kind assigned when the file has no `kind`/`type` column.
    pub default_kind: RecordKind,
    /// Fold the `jurisdiction` code into `country_codes`.
    pub merge_jurisdiction: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            default_kind: RecordKind::Entity,
            merge_jurisdiction: false,
        }
    }
}

impl From<csv::Error> for IngestError {
    fn from(e: csv::Error) -> Self {
        IngestError::CsvSyntax(e.to_string())
    }
}

/// Tracks the parity of `"` bytes read so far. Well-formed RFC-4180 input
/// always holds an even number of them; the CSV parser itself silently
/// accepts an unterminated quoted field at end of input.
struct QuoteParity<R> {
    inner: R,
    odd: bool,
}

impl<R: Read> Read for QuoteParity<R> {
    fn read(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
        let n = self.inner.read(buf)?;
        let quotes = buf[..n].iter().filter(|&&b| b == b'"').count();
        self.odd ^= quotes % 2 == 1;
        Ok(n)
    }
}

fn check_quotes<R: Read>(rdr: &csv::Reader<QuoteParity<R>>) -> Result<(), IngestError> {
    if rdr.get_ref().odd {
        return Err(IngestError::CsvSyntax("unbalanced quoting".to_string()));
    }
    Ok(())
}

fn find_column(headers: &csv::StringRecord, names: &[&str]) -> Option<usize> {
    headers
        .iter()
        .position(|h| names.iter().any(|n| h.trim().eq_ignore_ascii_case(n)))
}

fn require_column(headers: &csv::StringRecord, names: &[&str]) -> Result<usize, IngestError> {
    find_column(headers, names).ok_or_else(|| IngestError::MalformedHeader(names[0].to_string()))
}

fn reader<R: Read>(stream: R) -> csv::Reader<QuoteParity<R>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(QuoteParity {
            inner: stream,
            odd: false,
        })
}

/// Parses one record table. Requires `node_id` and `country_codes` columns;
/// `name`, `jurisdiction` and `kind` (or `type`) are optional.
pub fn parse_records<R: Read>(
    stream: R,
    opts: ParseOptions,
) -> Result<(Vec<LeakRecord>, IngestReport), IngestError> {
    let mut rdr = reader(stream);
    let headers = rdr.headers()?.clone();
    let id_col = require_column(&headers, &["node_id"])?;
    let cc_col = require_column(&headers, &["country_codes"])?;
    let name_col = find_column(&headers, &["name"]);
    let jur_col = find_column(&headers, &["jurisdiction"]);
    let kind_col = find_column(&headers, &["kind", "type"]);

    let mut report = IngestReport::default();
    let mut seen = std::collections::HashSet::new();
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let Ok(node_id) = row.get(id_col).unwrap_or("").trim().parse::<i64>() else {
            report.records_skipped += 1;
            continue;
        };
        if !seen.insert(node_id) {
            report.records_skipped += 1;
            continue;
        }
        let mut codes = BTreeSet::new();
        for token in row.get(cc_col).unwrap_or("").split(';') {
            let token = token.trim();
            if token.is_empty() {
                continue;
            }
            match CountryCode::new(token) {
                Ok(c) => {
                    codes.insert(c);
                }
                Err(_) => report.invalid_country_tokens += 1,
            }
        }
        let jurisdiction = jur_col
            .and_then(|c| row.get(c))
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .and_then(|s| CountryCode::new(s).ok());
        if opts.merge_jurisdiction {
            codes.extend(jurisdiction);
        }
        let kind = kind_col
            .and_then(|c| row.get(c))
            .and_then(RecordKind::parse)
            .unwrap_or(opts.default_kind);
        report.records_read += 1;
        if codes.is_empty() {
            report.records_missing_country += 1;
        }
        records.push(LeakRecord {
            node_id,
            kind,
            name: name_col.and_then(|c| row.get(c)).unwrap_or("").to_string(),
            country_codes: codes.into_iter().collect(),
            jurisdiction,
        });
    }
    check_quotes(&rdr)?;
    Ok((records, report))
}

/// Parses a relationship table with source, target and label columns.
/// Accepts the ICIJ names (`node_id_start`, `node_id_end`, `rel_type`) as
/// well as `src_id`, `dst_id`. Rows whose ids do not parse are counted as
/// dangling.
pub fn parse_relationships<R: Read>(
    stream: R,
) -> Result<(Vec<LeakRelationship>, IngestReport), IngestError> {
    let mut rdr = reader(stream);
    let headers = rdr.headers()?.clone();
    let src_col = require_column(&headers, &["node_id_start", "src_id", "start_id", "src"])?;
    let dst_col = require_column(&headers, &["node_id_end", "dst_id", "end_id", "dst"])?;
    let rel_col = require_column(&headers, &["rel_type", "link", "relationship"])?;

    let mut report = IngestReport::default();
    let mut rels = Vec::new();
    for row in rdr.records() {
        let row = row?;
        report.relationships_read += 1;
        let src = row.get(src_col).unwrap_or("").trim().parse::<i64>();
        let dst = row.get(dst_col).unwrap_or("").trim().parse::<i64>();
        match (src, dst) {
            (Ok(src_id), Ok(dst_id)) => rels.push(LeakRelationship {
                src_id,
                dst_id,
                rel_type: row.get(rel_col).unwrap_or("").to_string(),
            }),
            _ => report.dangling_relationships += 1,
        }
    }
    check_quotes(&rdr)?;
    Ok((rels, report))
}

/// Records indexed by `node_id`; the first occurrence of an id wins.
pub struct RecordTable<'a> {
    by_id: HashMap<i64, &'a LeakRecord>,
    records: &'a [LeakRecord],
}

impl<'a> RecordTable<'a> {
    pub fn new(records: &'a [LeakRecord]) -> Self {
        let mut by_id = HashMap::with_capacity(records.len());
        for r in records {
            by_id.entry(r.node_id).or_insert(r);
        }
        RecordTable { by_id, records }
    }

    pub fn get(&self, id: i64) -> Option<&'a LeakRecord> {
        self.by_id.get(&id).copied()
    }

    /// Unique records in input order.
    pub fn iter(&self) -> impl Iterator<Item = &'a LeakRecord> + '_ {
        self.records
            .iter()
            .filter(|r| std::ptr::eq(self.by_id[&r.node_id], *r))
    }
}

/// A rule that turns the record and relationship tables into weighted
/// country-country edges.
pub trait Projection: Send + Sync {
    /// Registry key, as accepted by `--mode`.
    fn name(&self) -> &'static str;

    fn project(
        &self,
        table: &RecordTable<'_>,
        relationships: &[LeakRelationship],
        net: &mut CountryNetwork,
        report: &mut IngestReport,
    );
}

fn accumulate(net: &mut CountryNetwork, report: &mut IngestReport, s: CountryCode, d: CountryCode) {
    if net.accumulate_edge(s, d, 1).is_err() {
        report.self_loops_dropped += 1;
    }
}

/// Each relationship bridges every country of its source record to every
/// country of its target record, in the relationship's direction.
#[derive(Debug, Default, Clone, Copy)]
pub struct RelationshipBridge;

impl Projection for RelationshipBridge {
    fn name(&self) -> &'static str {
        "relationship-bridge"
    }

    fn project(
        &self,
        table: &RecordTable<'_>,
        relationships: &[LeakRelationship],
        net: &mut CountryNetwork,
        report: &mut IngestReport,
    ) {
        for rel in relationships {
            let (Some(src), Some(dst)) = (table.get(rel.src_id), table.get(rel.dst_id)) else {
                report.dangling_relationships += 1;
                continue;
            };
            for &cs in &src.country_codes {
                for &cd in &dst.country_codes {
                    accumulate(net, report, cs, cd);
                }
            }
        }
    }
}

/// Each record with several countries links every pair of them, directed
/// from the lexicographically smaller code.
#[derive(Debug, Default, Clone, Copy)]
pub struct RecordClique;

impl Projection for RecordClique {
    fn name(&self) -> &'static str {
        "record-clique"
    }

    fn project(
        &self,
        table: &RecordTable<'_>,
        _relationships: &[LeakRelationship],
        net: &mut CountryNetwork,
        report: &mut IngestReport,
    ) {
        for record in table.iter() {
            let codes = &record.country_codes;
            for (i, &a) in codes.iter().enumerate() {
                for &b in &codes[i + 1..] {
                    let (s, d) = if a < b { (a, b) } else { (b, a) };
                    accumulate(net, report, s, d);
                }
            }
        }
    }
}

/// Union of [`RelationshipBridge`] and [`RecordClique`].
#[derive(Debug, Default, Clone, Copy)]
pub struct Both;

impl Projection for Both {
    fn name(&self) -> &'static str {
        "both"
    }

    fn project(
        &self,
        table: &RecordTable<'_>,
        relationships: &[LeakRelationship],
        net: &mut CountryNetwork,
        report: &mut IngestReport,
    ) {
        RelationshipBridge.project(table, relationships, net, report);
        RecordClique.project(table, relationships, net, report);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProjectionMode {
    #[default]
    RelationshipBridge,
    RecordClique,
    Both,
}

impl ProjectionMode {
    pub const ALL: [ProjectionMode; 3] = [
        ProjectionMode::RelationshipBridge,
        ProjectionMode::RecordClique,
        ProjectionMode::Both,
    ];

    pub fn strategy(self) -> Box<dyn Projection> {
        match self {
            ProjectionMode::RelationshipBridge => Box::new(RelationshipBridge),
            ProjectionMode::RecordClique => Box::new(RecordClique),
            ProjectionMode::Both => Box::new(Both),
        }
    }

    pub fn name(self) -> &'static str {
        self.strategy().name()
    }
}

impl FromStr for ProjectionMode {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProjectionMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| IngestError::UnknownMode(s.to_string()))
    }
}

impl fmt::Display for ProjectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Registered projection strategies, keyed by name.
pub fn projection_registry() -> Vec<Box<dyn Projection>> {
    ProjectionMode::ALL.into_iter().map(|m| m.strategy()).collect()
}

pub fn projection_by_name(name: &str) -> Option<Box<dyn Projection>> {
    projection_registry().into_iter().find(|p| p.name() == name)
}

pub fn build_country_network(
    records: &[LeakRecord],
    relationships: &[LeakRelationship],
    projection: &dyn Projection,
) -> (CountryNetwork, IngestReport) {
    let table = RecordTable::new(records);
    let mut net = CountryNetwork::new();
    let mut report = IngestReport::default();
    projection.project(&table, relationships, &mut net, &mut report);
    (net, report)
}
