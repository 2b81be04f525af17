//! The `linkage-area` command line: argument parsing, file formats and exit
//! codes.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Tolerances;
use crate::critical::{
    classify_configuration, enumerate_critical_pnd, euler_sum, match_numeric, CriticalError, CriticalRecord,
    IndexMismatch, PolygonWithDiagonals,
};
use crate::geom::{wall_check, Configuration, WallReport};
use crate::graph::{is_partial_two_tree, relative_decomposition, sp_decompose, Linkage, RelativeDecomposition, SPTree};
use crate::oracle::{
    continue_family, fd_check, find_critical_numeric, ContinuationSettings, FdMismatch, Problem, SearchSettings,
};

pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const NOT_PTT: i32 = 3;
    pub const WALL: i32 = 4;
    pub const MISMATCH: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("not a partial two-tree")]
    NotPtt,
    #[error("lengths lie on a wall ({} hits) and --strict is set", .0)]
    Wall(usize),
    #[error("verification failed: {0}")]
    Mismatch(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io(_) => exit::USAGE,
            CliError::NotPtt => exit::NOT_PTT,
            CliError::Wall(_) => exit::WALL,
            CliError::Mismatch(_) => exit::MISMATCH,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "linkage-area", version, about = "Critical points of the oriented area of planar linkages")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol_length: f64,
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_collinear: f64,
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_concyclic: f64,
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol_gradient: f64,
    #[arg(long, global = true, default_value_t = 1e-7)]
    pub tol_eigen_zero: f64,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 1000)]
    pub n_seeds: usize,
    /// Refuse to run on lengths that lie on a wall.
    #[arg(long, global = true)]
    pub strict: bool,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Partial two-tree test, SP tree and decomposition relative to Γ.
    Recognize { file: PathBuf },
    /// Enumerate critical points and critical manifolds.
    Critical { file: PathBuf },
    /// Cross-check a records file against the numeric oracle.
    Verify { file: PathBuf, records: PathBuf },
    /// Follow critical points while one edge length varies.
    Continue {
        file: PathBuf,
        /// Edge index, or its endpoints as `u:v`.
        #[arg(long)]
        edge: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub tolerances: Tolerances,
    pub seed: u64,
    pub n_seeds: usize,
    pub strict: bool,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn from_args(a: &GlobalArgs) -> Result<Self, CliError> {
        let tolerances = Tolerances {
            length: a.tol_length,
            collinear: a.tol_collinear,
            concyclic: a.tol_concyclic,
            gradient: a.tol_gradient,
            eigen_zero: a.tol_eigen_zero,
        };
        tolerances.validate().map_err(CliError::Input)?;
        if a.n_seeds == 0 {
            return Err(CliError::Input("--n-seeds must be positive".into()));
        }
        Ok(Self { tolerances, seed: a.seed, n_seeds: a.n_seeds, strict: a.strict, out: a.out.clone(), format: a.format })
    }

    pub fn search(&self) -> SearchSettings {
        SearchSettings { n_seeds: self.n_seeds, seed: self.seed, tol: self.tolerances, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecognizeReport {
    pub ptt: bool,
    pub sp_tree: Option<SPTree>,
    pub decomposition: Option<RelativeDecomposition>,
    pub warnings: Vec<String>,
}

/// Critical point found only numerically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericRecord {
    pub configuration: Configuration,
    pub area: f64,
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Symbolic,
    Numeric,
}

/// Contents of the file written by `critical`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordsFile {
    pub wall_check: WallReport,
    pub mode: Mode,
    pub warnings: Vec<String>,
    pub euler_sum: Option<i64>,
    pub records: Vec<CriticalRecord>,
    #[serde(default)]
    pub numeric: Vec<NumericRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub records: usize,
    pub oracle_points: usize,
    pub unmatched_records: Vec<usize>,
    pub unmatched_oracle: Vec<usize>,
    pub index_mismatches: Vec<IndexMismatch>,
    /// Records whose representative fails the criticality test.
    pub not_critical: Vec<usize>,
    pub fd_failures: Vec<(usize, Vec<FdMismatch>)>,
    pub warnings: Vec<String>,
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    match execute(&cli) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = RunConfig::from_args(&cli.global)?;
    match &cli.command {
        Command::Recognize { file } => recognize(&load(file)?, &cfg),
        Command::Critical { file } => {
            let out = critical(&load(file)?, &cfg)?;
            match cfg.format {
                Format::Json => emit(&cfg, &to_json(&out)),
                Format::Csv => emit(&cfg, &records_csv(&out)),
            }
        }
        Command::Verify { file, records } => {
            let linkage = load(file)?;
            let text = std::fs::read_to_string(records).map_err(|e| CliError::Input(format!("{}: {e}", records.display())))?;
            let recs: RecordsFile =
                serde_json::from_str(&text).map_err(|e| CliError::Input(format!("malformed records file: {e}")))?;
            let report = verify(&linkage, &recs, &cfg)?;
            emit(&cfg, &to_json(&report))?;
            if report.ok {
                Ok(())
            } else {
                Err(CliError::Mismatch(mismatch_summary(&report)))
            }
        }
        Command::Continue { file, edge, from, to, steps } => {
            let linkage = load(file)?;
            let e = parse_edge(&linkage, edge)?;
            let settings = ContinuationSettings {
                search: SearchSettings { n_seeds: cfg.n_seeds.min(300), ..cfg.search() },
                ..Default::default()
            };
            let diagram = continue_family(&linkage, e, *from, *to, *steps, &settings)
                .map_err(|e| CliError::Input(e.to_string()))?;
            for w in &diagram.warnings {
                eprintln!("warning: {w}");
            }
            match (&cfg.out, cfg.format) {
                (Some(path), Format::Json) => {
                    write_file(path, &to_json(&diagram))?;
                    write_file(&path.with_extension("csv"), &diagram.to_csv())
                }
                (_, Format::Json) => emit(&cfg, &to_json(&diagram)),
                (_, Format::Csv) => emit(&cfg, &diagram.to_csv()),
            }
        }
    }
}

fn load(path: &Path) -> Result<Linkage, CliError> {
    Linkage::from_json_file(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)?;
    Ok(())
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.out {
        Some(p) => write_file(p, text),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn parse_edge(linkage: &Linkage, s: &str) -> Result<usize, CliError> {
    if let Ok(i) = s.parse::<usize>() {
        return if i < linkage.graph.edge_count() {
            Ok(i)
        } else {
            Err(CliError::Input(format!("no edge {i}")))
        };
    }
    let (u, v) = s
        .split_once(':')
        .ok_or_else(|| CliError::Input(format!("edge {s:?} is neither an index nor u:v")))?;
    linkage.graph.find_edge(u, v).ok_or_else(|| CliError::Input(format!("no edge {u}-{v}")))
}

pub fn recognize(linkage: &Linkage, cfg: &RunConfig) -> Result<(), CliError> {
    let report = recognize_report(linkage);
    let text = match cfg.format {
        Format::Json => to_json(&report),
        Format::Csv => format!("ptt\n{}\n", report.ptt),
    };
    emit(cfg, &text)?;
    if report.ptt {
        Ok(())
    } else {
        Err(CliError::NotPtt)
    }
}

pub fn recognize_report(linkage: &Linkage) -> RecognizeReport {
    let g = &linkage.graph;
    let ptt = is_partial_two_tree(g);
    let mut warnings = Vec::new();
    if !ptt {
        return RecognizeReport { ptt, sp_tree: None, decomposition: None, warnings };
    }
    let sp_tree = match &linkage.terminals {
        Some((i, t)) => sp_decompose(g, i, t)
            .map_err(|e| warnings.push(e.to_string()))
            .ok(),
        None => {
            let vs = g.vertices();
            vs.iter()
                .enumerate()
                .flat_map(|(a, u)| vs[a + 1..].iter().map(move |v| (u, v)))
                .find_map(|(u, v)| sp_decompose(g, u, v).ok())
        }
    };
    if sp_tree.is_none() {
        warnings.push("no terminal pair gives a two-terminal series-parallel decomposition".into());
    }
    let decomposition = linkage.gamma.as_ref().and_then(|gamma| {
        relative_decomposition(g, gamma).map_err(|e| warnings.push(e.to_string())).ok()
    });
    RecognizeReport { ptt, sp_tree, decomposition, warnings }
}

/// Symbolic enumeration when the linkage is a polygon with diagonal chains,
/// numeric search otherwise.
pub fn critical(linkage: &Linkage, cfg: &RunConfig) -> Result<RecordsFile, CliError> {
    if !is_partial_two_tree(&linkage.graph) {
        return Err(CliError::NotPtt);
    }
    let walls = wall_check(&linkage.graph, cfg.tolerances.length * linkage.graph.total_length());
    if cfg.strict && !walls.is_clean() {
        return Err(CliError::Wall(walls.hits.len()));
    }
    let mut warnings = Vec::new();
    if !walls.is_clean() {
        warnings.push(format!("{} wall hits; indices may be unreliable", walls.hits.len()));
    }
    let symbolic = match enumerate_critical_pnd(linkage) {
        Ok(r) => Some(r),
        Err(e @ (CriticalError::NotInClass(_) | CriticalError::Graph(_))) => {
            warnings.push(format!("{e}; falling back to numeric search"));
            None
        }
        Err(e @ CriticalError::NonGeneric(_)) if cfg.strict => {
            return Err(CliError::Input(e.to_string()));
        }
        Err(e) => {
            warnings.push(format!("{e}; falling back to numeric search"));
            None
        }
    };
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    match symbolic {
        Some(records) => Ok(RecordsFile {
            wall_check: walls,
            mode: Mode::Symbolic,
            warnings,
            euler_sum: euler_sum(&records).ok(),
            records,
            numeric: Vec::new(),
        }),
        None => {
            let gamma = linkage
                .gamma
                .as_ref()
                .ok_or_else(|| CliError::Input("linkage file has no gamma cycle".into()))?;
            let problem = Problem::area(&linkage.graph, gamma).map_err(|e| CliError::Input(e.to_string()))?;
            let mut numeric: Vec<NumericRecord> = find_critical_numeric(&problem, &cfg.search())
                .into_iter()
                .map(|n| NumericRecord {
                    configuration: n.configuration,
                    area: n.value,
                    negative: n.inertia.negative,
                    zero: n.inertia.zero,
                    positive: n.inertia.positive,
                })
                .collect();
            numeric.sort_by(|a, b| a.negative.cmp(&b.negative).then(a.area.total_cmp(&b.area)));
            let euler = numeric
                .iter()
                .all(|n| n.zero == 0)
                .then(|| numeric.iter().map(|n| if n.negative % 2 == 0 { 1 } else { -1 }).sum());
            Ok(RecordsFile { wall_check: walls, mode: Mode::Numeric, warnings, euler_sum: euler, records: Vec::new(), numeric })
        }
    }
}

fn records_csv(f: &RecordsFile) -> String {
    let mut out = String::from("index,kind,area,manifold_dim\n");
    for r in &f.records {
        out.push_str(&format!("{},{},{:.16e},{}\n", r.index.index, r.kind_key(), r.area, r.manifold_dim));
    }
    for n in &f.numeric {
        out.push_str(&format!("{},numeric,{:.16e},{}\n", n.negative, n.area, n.zero));
    }
    out
}

/// Oracle cross-check of a records file: every record found numerically
/// with the stated inertia, nothing found outside the list, derivatives
/// consistent at each representative.
pub fn verify(linkage: &Linkage, file: &RecordsFile, cfg: &RunConfig) -> Result<VerifyReport, CliError> {
    let gamma = linkage
        .gamma
        .as_ref()
        .ok_or_else(|| CliError::Input("linkage file has no gamma cycle".into()))?;
    let problem = Problem::area(&linkage.graph, gamma).map_err(|e| CliError::Input(e.to_string()))?;
    let mut warnings = Vec::new();
    let walls = wall_check(&linkage.graph, cfg.tolerances.length * linkage.graph.total_length());
    if !walls.is_clean() {
        warnings.push(format!("{} wall hits; verification is partial", walls.hits.len()));
    }
    let found = find_critical_numeric(&problem, &cfg.search());
    let mut report = VerifyReport {
        ok: false,
        records: file.records.len() + file.numeric.len(),
        oracle_points: found.len(),
        unmatched_records: Vec::new(),
        unmatched_oracle: Vec::new(),
        index_mismatches: Vec::new(),
        not_critical: Vec::new(),
        fd_failures: Vec::new(),
        warnings,
    };
    match file.mode {
        Mode::Symbolic => {
            let pnd = PolygonWithDiagonals::from_linkage(linkage).map_err(|e| CliError::Input(e.to_string()))?;
            let m = match_numeric(&pnd, &file.records, &found, 1e-5);
            report.unmatched_records = m.unmatched_records();
            report.unmatched_oracle = m.unmatched_oracle;
            report.index_mismatches = m.index_mismatches;
            for (i, r) in file.records.iter().enumerate() {
                match classify_configuration(linkage, &r.representative, &cfg.tolerances) {
                    Ok(c) if c.critical => {}
                    _ => report.not_critical.push(i),
                }
                match fd_check(&problem, &r.representative) {
                    Ok(_) => {}
                    Err(crate::oracle::OracleError::CheckFailed(bad)) => report.fd_failures.push((i, bad)),
                    Err(e) => report.warnings.push(format!("record {i}: {e}")),
                }
            }
        }
        Mode::Numeric => {
            if found.len() != file.numeric.len() {
                report.warnings.push(format!(
                    "oracle finds {} critical points, file lists {}",
                    found.len(),
                    file.numeric.len()
                ));
            }
            let tol = 1e-5 * problem.scale();
            let ids = linkage.graph.vertices();
            for (i, n) in file.numeric.iter().enumerate() {
                let hit = found.iter().position(|f| {
                    let (a, b) = (&gamma.vertices()[0], &gamma.vertices()[1]);
                    match (f.configuration.normalized(a, b), n.configuration.normalized(a, b)) {
                        (Ok(x), Ok(y)) => x.max_distance(&y, ids).map(|d| d <= tol).unwrap_or(false),
                        _ => false,
                    }
                });
                match hit {
                    None => report.unmatched_records.push(i),
                    Some(o) if found[o].inertia.negative != n.negative || found[o].inertia.zero != n.zero => {
                        report.index_mismatches.push(IndexMismatch {
                            record: i,
                            oracle: o,
                            expected_index: n.negative as i64,
                            expected_dim: n.zero,
                            negative: found[o].inertia.negative,
                            zero: found[o].inertia.zero,
                        })
                    }
                    Some(_) => {}
                }
            }
        }
    }
    report.ok = report.unmatched_records.is_empty()
        && report.unmatched_oracle.is_empty()
        && report.index_mismatches.is_empty()
        && report.not_critical.is_empty()
        && report.fd_failures.is_empty();
    Ok(report)
}

fn mismatch_summary(r: &VerifyReport) -> String {
    let mut parts = Vec::new();
    for m in &r.index_mismatches {
        parts.push(format!(
            "record {} has index {} (dim {}), oracle inertia ({}, {})",
            m.record, m.expected_index, m.expected_dim, m.negative, m.zero
        ));
    }
    if !r.unmatched_records.is_empty() {
        parts.push(format!("records not found by the oracle: {:?}", r.unmatched_records));
    }
    if !r.unmatched_oracle.is_empty() {
        parts.push(format!("{} oracle points outside the record list", r.unmatched_oracle.len()));
    }
    if !r.not_critical.is_empty() {
        parts.push(format!("representatives not critical: {:?}", r.not_critical));
    }
    if !r.fd_failures.is_empty() {
        parts.push(format!("derivative checks failed at records {:?}", r.fd_failures.iter().map(|f| f.0).collect::<Vec<_>>()));
    }
    parts.join("; ")
}
