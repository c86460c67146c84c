//! `taxnet` command-line interface.
//!
//! Exit statuses: 0 success, 2 input error, 3 analysis precondition
//! failure, 4 unknown entity. Failures print one JSON line with an `"error"`
//! key on stderr.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use thiserror::Error;

use crate::core_extract::{self, CoreError, DEFAULT_CORE_K};
use crate::export;
use crate::graph::{CountryCode, CountryNetwork, GraphError};
use crate::ingest::{self, IngestReport, ParseOptions, ProjectionMode, RecordKind};
use crate::nullmodel::{EnsembleConfig, DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_SWAPS_PER_EDGE};
use crate::richclub::{self, RichClubError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Precondition(String),
    #[error("{0}")]
    UnknownEntity(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::UnknownEntity(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Input(_) => "input",
            CliError::Precondition(_) => "precondition",
            CliError::UnknownEntity(_) => "unknown_entity",
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::json!({ "error": self.to_string(), "kind": self.kind() }).to_string()
    }
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Graph(GraphError::UnknownNode(_)) => CliError::UnknownEntity(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<RichClubError> for CliError {
    fn from(e: RichClubError) -> Self {
        match e {
            RichClubError::UnknownEstimator(_) => CliError::Input(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "taxnet", version, about = "Country networks from offshore-leak dumps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Project record and relationship CSVs onto a country edge list.
    Ingest(CommonArgs),
    /// Rank countries by total strength.
    Rank(CommonArgs),
    /// Rich-club curve normalized by the null ensemble.
    Richclub(CommonArgs),
    /// Extract the core above a degree threshold.
    Core(CommonArgs),
    /// Remove one country and re-rank.
    Perturb(PerturbArgs),
}

#[derive(Debug, Args, Default, Clone)]
pub struct CommonArgs {
    /// Record CSV (repeatable, one per ICIJ node file).
    #[arg(long)]
    pub records: Vec<PathBuf>,
    #[arg(long)]
    pub relationships: Option<PathBuf>,
    /// Prebuilt `src,dst,weight` edge list.
    #[arg(long)]
    pub network: Option<PathBuf>,
    /// relationship-bridge | record-clique | both
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub merge_jurisdiction: bool,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub swaps_per_edge: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Rows shown on stdout by `rank`; the file is never truncated.
    #[arg(long)]
    pub top: Option<usize>,
    /// topological | weighted
    #[arg(long)]
    pub estimator: Option<String>,
    /// Worker threads for ensemble generation (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// TOML file of `key = value` settings; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct PerturbArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Country code to remove.
    #[arg(long)]
    pub remove: String,
}

/// Settings accepted in a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FileConfig {
    records: Option<Vec<PathBuf>>,
    relationships: Option<PathBuf>,
    network: Option<PathBuf>,
    mode: Option<String>,
    merge_jurisdiction: Option<bool>,
    samples: Option<usize>,
    swaps_per_edge: Option<usize>,
    seed: Option<u64>,
    k: Option<usize>,
    out_dir: Option<PathBuf>,
    top: Option<usize>,
    estimator: Option<String>,
    threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputSource {
    Raw {
        records: Vec<PathBuf>,
        relationships: PathBuf,
    },
    Network(PathBuf),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: InputSource,
    pub mode: ProjectionMode,
    pub merge_jurisdiction: bool,
    pub ensemble: EnsembleConfig,
    pub k: usize,
    pub out_dir: PathBuf,
    pub top: usize,
    pub estimator: String,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self, CliError> {
        let file: FileConfig = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| input_err(format!("{}: {e}", path.display())))?;
                toml::from_str(&text).map_err(|e| input_err(format!("{}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let records = if args.records.is_empty() {
            file.records.unwrap_or_default()
        } else {
            args.records.clone()
        };
        let relationships = args.relationships.clone().or(file.relationships);
        let network = args.network.clone().or(file.network);
        let input = match (records.is_empty(), relationships, network) {
            (false, Some(relationships), None) => InputSource::Raw {
                records,
                relationships,
            },
            (true, None, Some(net)) => InputSource::Network(net),
            _ => {
                return Err(input_err(
                    "supply either --records with --relationships, or --network",
                ))
            }
        };
        let mode = match args.mode.clone().or(file.mode) {
            Some(m) => m.parse().map_err(input_err)?,
            None => ProjectionMode::default(),
        };
        let ensemble = EnsembleConfig {
            n_samples: args.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES),
            swaps_per_edge: args
                .swaps_per_edge
                .or(file.swaps_per_edge)
                .unwrap_or(DEFAULT_SWAPS_PER_EDGE),
            master_seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        };
        ensemble.validate().map_err(input_err)?;
        let threads = args.threads.or(file.threads);
        if threads == Some(0) {
            return Err(input_err("--threads must be at least 1"));
        }
        Ok(RunConfig {
            input,
            mode,
            merge_jurisdiction: args.merge_jurisdiction || file.merge_jurisdiction.unwrap_or(false),
            ensemble,
            k: args.k.or(file.k).unwrap_or(DEFAULT_CORE_K),
            out_dir: args
                .out_dir
                .clone()
                .or(file.out_dir)
                .unwrap_or_else(|| PathBuf::from(".")),
            top: args.top.or(file.top).unwrap_or(30),
            estimator: args
                .estimator
                .clone()
                .or(file.estimator)
                .unwrap_or_else(|| "topological".to_string()),
            threads,
        })
    }
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    fs::create_dir_all(dir).map_err(|e| input_err(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn finish(mut w: BufWriter<File>) -> Result<(), CliError> {
    w.flush().map_err(input_err)
}

fn parse_record_file(path: &Path, merge_jurisdiction: bool) -> Result<(Vec<ingest::LeakRecord>, IngestReport), CliError> {
    let default_kind = path
        .file_name()
        .and_then(|n| n.to_str())
        .and_then(RecordKind::from_file_name)
        .unwrap_or(RecordKind::Entity);
    let opts = ParseOptions {
        default_kind,
        merge_jurisdiction,
    };
    ingest::parse_records(open(path)?, opts).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

/// Parses and projects the raw CSV pair.
pub fn load_raw(
    records: &[PathBuf],
    relationships: &Path,
    mode: ProjectionMode,
    merge_jurisdiction: bool,
) -> Result<(CountryNetwork, IngestReport), CliError> {
    let (recs, rels) = rayon::join(
        || -> Result<_, CliError> {
            let mut all = Vec::new();
            let mut report = IngestReport::default();
            for path in records {
                let (r, rep) = parse_record_file(path, merge_jurisdiction)?;
                all.extend(r);
                report.merge(&rep);
            }
            Ok((all, report))
        },
        || {
            ingest::parse_relationships(open(relationships)?)
                .map_err(|e| input_err(format!("{}: {e}", relationships.display())))
        },
    );
    let (recs, mut report) = recs?;
    let (rels, rel_report) = rels?;
    report.merge(&rel_report);
    let (net, proj_report) = ingest::build_country_network(&recs, &rels, mode.strategy().as_ref());
    report.merge(&proj_report);
    Ok((net, report))
}

fn load_network(cfg: &RunConfig) -> Result<CountryNetwork, CliError> {
    match &cfg.input {
        InputSource::Network(path) => export::read_network_csv(open(path)?)
            .map_err(|e| input_err(format!("{}: {e}", path.display()))),
        InputSource::Raw {
            records,
            relationships,
        } => load_raw(records, relationships, cfg.mode, cfg.merge_jurisdiction).map(|(n, _)| n),
    }
}

pub fn cmd_ingest(cfg: &RunConfig) -> Result<(), CliError> {
    let InputSource::Raw {
        records,
        relationships,
    } = &cfg.input
    else {
        return Err(input_err("ingest needs --records and --relationships"));
    };
    let (net, report) = load_raw(records, relationships, cfg.mode, cfg.merge_jurisdiction)?;
    let mut w = create(&cfg.out_dir, "network.csv")?;
    export::write_network_csv(&net, &mut w).map_err(input_err)?;
    finish(w)?;
    let mut w = create(&cfg.out_dir, "ingest_report.json")?;
    serde_json::to_writer_pretty(&mut w, &report).map_err(input_err)?;
    w.write_all(b"\n").map_err(input_err)?;
    finish(w)
}

pub fn cmd_rank(cfg: &RunConfig) -> Result<(), CliError> {
    let net = load_network(cfg)?;
    let ranking = core_extract::rank_by_strength(&net)?;
    let mut w = create(&cfg.out_dir, "ranking.csv")?;
    export::write_ranking_csv(&ranking, &mut w).map_err(input_err)?;
    finish(w)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let view = crate::core_extract::StrengthRanking {
        rows: ranking.rows.iter().take(cfg.top).cloned().collect(),
    };
    export::write_ranking_csv(&view, &mut out).map_err(input_err)
}

pub fn cmd_richclub(cfg: &RunConfig) -> Result<(), CliError> {
    let estimator = richclub::estimator_by_name(&cfg.estimator)?;
    let net = load_network(cfg)?;
    let view = net.undirected();
    let curve = richclub::rho_curve(view.graph(), &cfg.ensemble, estimator.as_ref())?;
    let mut w = create(&cfg.out_dir, "richclub.json")?;
    export::write_curve_json(&curve, &mut w).map_err(input_err)?;
    finish(w)?;
    let mut w = create(&cfg.out_dir, "richclub.csv")?;
    export::write_curve_csv(&curve, &mut w).map_err(input_err)?;
    finish(w)
}

pub fn cmd_core(cfg: &RunConfig) -> Result<(), CliError> {
    let net = load_network(cfg)?;
    let core = match core_extract::extract_core(&net, cfg.k) {
        Ok(core) => Some(core),
        Err(CoreError::EmptyCore(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let mut w = create(&cfg.out_dir, "core.json")?;
    export::write_core_json(core.as_ref(), cfg.k, &mut w).map_err(input_err)?;
    finish(w)?;
    let flows = core.as_ref().map(|c| c.internal_flows.as_slice()).unwrap_or(&[]);
    let mut w = create(&cfg.out_dir, "chord.csv")?;
    export::write_chord_csv(flows, &mut w).map_err(input_err)?;
    finish(w)
}

pub fn cmd_perturb(cfg: &RunConfig, removed: &str) -> Result<(), CliError> {
    let removed = CountryCode::new(removed).map_err(input_err)?;
    let net = load_network(cfg)?;
    if !net.contains(removed) {
        return Err(CliError::UnknownEntity(format!("unknown node {removed}")));
    }
    let before = core_extract::rank_by_strength(&net)?;
    let perturbation = core_extract::remove_and_rerank(&net, removed, cfg.k)?;
    let mut w = create(&cfg.out_dir, "perturb.json")?;
    export::write_perturb_json(&before, &perturbation, cfg.k, &mut w).map_err(input_err)?;
    finish(w)
}

fn dispatch(command: &Command) -> Result<(), CliError> {
    let (args, removed) = match command {
        Command::Ingest(a) | Command::Rank(a) | Command::Richclub(a) | Command::Core(a) => (a, None),
        Command::Perturb(p) => (&p.common, Some(p.remove.as_str())),
    };
    let cfg = RunConfig::resolve(args)?;
    let run = || match command {
        Command::Ingest(_) => cmd_ingest(&cfg),
        Command::Rank(_) => cmd_rank(&cfg),
        Command::Richclub(_) => cmd_richclub(&cfg),
        Command::Core(_) => cmd_core(&cfg),
        Command::Perturb(_) => cmd_perturb(&cfg, removed.expect("perturb has --remove")),
    };
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(input_err)?
            .install(run),
        None => run(),
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// status. Errors are reported on stderr as one JSON line.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            e.exit_code()
        }
    }
}
