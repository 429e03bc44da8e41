//! Run measurements, experiment batches and their CSV/JSON output.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{split_line, ConfigError, SimConfig};
use crate::engine::sim::run;
use crate::engine::SimTime;
use crate::ids::{BlockId, ColorId, ConflictSetId, NodeId};

/// An honest node's preference for `set` moved to `color` at `at`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpinionChange {
    pub at: SimTime,
    pub node: NodeId,
    pub set: ConflictSetId,
    pub color: ColorId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfirmationRecord {
    pub node: NodeId,
    pub block: BlockId,
    pub issued_at: SimTime,
    pub confirmed_at: Option<SimTime>,
}

impl ConfirmationRecord {
    pub fn latency(&self) -> Option<u64> {
        self.confirmed_at.map(|t| t - self.issued_at)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    pub config: SimConfig,
    /// When the second color of the first conflict set was issued.
    pub conflict_start: Option<SimTime>,
    pub consensus_time: Option<u64>,
    pub liveness_failure: bool,
    pub safety_failure: bool,
    pub confirmations: Vec<ConfirmationRecord>,
    pub orphan_reattach_count: u64,
    pub opinion_log: Vec<OpinionChange>,
    pub colors_issued: usize,
    pub blocks_issued: usize,
    pub end_time: SimTime,
    pub events_processed: u64,
    pub trace_hash: u64,
}

impl RunResult {
    pub fn confirmation_latencies(&self) -> Vec<u64> {
        self.confirmations
            .iter()
            .filter(|r| r.block != BlockId::GENESIS)
            .filter_map(ConfirmationRecord::latency)
            .collect()
    }
}

/// Time from `start` until every honest node holds the same preference for
/// `set` and keeps it to the end of the log. `None` if the final
/// preferences differ or some honest node never formed one.
pub fn consensus_time(
    log: &[OpinionChange],
    honest: &[NodeId],
    set: ConflictSetId,
    start: SimTime,
) -> Option<u64> {
    let mut last: HashMap<NodeId, (SimTime, ColorId)> = HashMap::new();
    for change in log.iter().filter(|c| c.set == set) {
        last.insert(change.node, (change.at, change.color));
    }
    let mut color = None;
    let mut settled = start;
    for node in honest {
        let &(at, c) = last.get(node)?;
        if *color.get_or_insert(c) != c {
            return None;
        }
        settled = settled.max(at);
    }
    Some(settled - start)
}

/// Median of `values`; the lower middle element for even lengths.
pub fn median(values: &mut [u64]) -> Option<u64> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable();
    Some(values[(values.len() - 1) / 2])
}

/// Nearest-rank percentile, `p` in `[0, 100]`.
pub fn percentile(values: &mut [u64], p: f64) -> Option<u64> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable();
    let rank = ((p / 100.0) * values.len() as f64).ceil() as usize;
    Some(values[rank.clamp(1, values.len()) - 1])
}

#[derive(Debug, Error)]
pub enum BatchError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cell {cell}: {message}")]
    InvalidCell { cell: usize, message: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> BatchError + '_ {
    move |source| BatchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> BatchError + '_ {
    move |source| BatchError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// A grid of configurations, each run `runs` times.
///
/// The file format is the config format plus: a comma-separated value makes
/// the key a sweep, and the keys `runs`, `seed_base` and
/// `confirmation_runs` (how many runs per cell write confirmation records)
/// control the batch itself.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchSpec {
    pub base: SimConfig,
    pub sweeps: Vec<(String, Vec<String>)>,
    pub runs: u64,
    pub seed_base: u64,
    pub confirmation_runs: u64,
}

impl Default for BatchSpec {
    fn default() -> Self {
        Self {
            base: SimConfig::default(),
            sweeps: Vec::new(),
            runs: 1,
            seed_base: 0,
            confirmation_runs: 1,
        }
    }
}

fn parse_count(key: &str, value: &str) -> Result<u64, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
    })
}

impl BatchSpec {
    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let mut spec = BatchSpec::default();
        for (i, raw) in text.lines().enumerate() {
            let Some((key, value)) = split_line(raw, i + 1)? else {
                continue;
            };
            match key {
                "runs" => spec.runs = parse_count(key, value)?,
                "seed_base" => spec.seed_base = parse_count(key, value)?,
                "confirmation_runs" => spec.confirmation_runs = parse_count(key, value)?,
                _ if value.contains(',') => {
                    let values: Vec<String> = value
                        .split(',')
                        .map(|v| v.trim().to_string())
                        .filter(|v| !v.is_empty())
                        .collect();
                    // type-check every value up front
                    let mut probe = spec.base.clone();
                    for v in &values {
                        probe.set(key, v)?;
                    }
                    spec.sweeps.retain(|(k, _)| k != key);
                    spec.sweeps.push((key.to_string(), values));
                }
                _ => {
                    spec.base.set(key, value)?;
                    spec.sweeps.retain(|(k, _)| k != key);
                }
            }
        }
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse_str(&text)
    }

    /// Every combination of sweep values, the last sweep varying fastest.
    pub fn cells(&self) -> Vec<SimConfig> {
        let mut cells = vec![self.base.clone()];
        for (key, values) in &self.sweeps {
            cells = cells
                .into_iter()
                .flat_map(|cell| {
                    values.iter().map(move |v| {
                        let mut next = cell.clone();
                        next.set(key, v).expect("checked at parse time");
                        next
                    })
                })
                .collect();
        }
        cells
    }

    pub fn validate(&self) -> Result<(), BatchError> {
        for (cell, config) in self.cells().iter().enumerate() {
            let errors = config.validate();
            if !errors.is_empty() {
                let message = errors
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join("; ");
                return Err(BatchError::InvalidCell { cell, message });
            }
        }
        Ok(())
    }
}

/// One line of the runs table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub run_id: u64,
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: usize,
    pub s: f64,
    pub q: f64,
    pub theta: f64,
    pub bps: f64,
    pub k: usize,
    pub gamma: f64,
    pub l: f64,
    pub d_min_ms: u64,
    pub d_max_ms: u64,
    pub srrs: bool,
    pub consensus_time_ms: Option<u64>,
    pub liveness_failure: bool,
    pub safety_failure: bool,
}

impl RunRow {
    pub fn new(run_id: u64, result: &RunResult) -> Self {
        let c = &result.config;
        Self {
            run_id,
            seed: result.seed,
            n: c.n,
            s: c.s,
            q: c.q,
            theta: c.theta,
            bps: c.bps,
            k: c.k,
            gamma: c.gamma,
            l: c.l,
            d_min_ms: c.d_min,
            d_max_ms: c.d_max,
            srrs: c.srrs_enabled,
            consensus_time_ms: result.consensus_time,
            liveness_failure: result.liveness_failure,
            safety_failure: result.safety_failure,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfirmationRow {
    pub node_id: u32,
    pub block_id: u32,
    pub issued_ms: u64,
    pub confirmed_ms: Option<u64>,
}

impl From<&ConfirmationRecord> for ConfirmationRow {
    fn from(r: &ConfirmationRecord) -> Self {
        Self {
            node_id: r.node.0,
            block_id: r.block.0,
            issued_ms: r.issued_at.as_millis(),
            confirmed_ms: r.confirmed_at.map(SimTime::as_millis),
        }
    }
}

impl From<&ConfirmationRow> for ConfirmationRecord {
    fn from(r: &ConfirmationRow) -> Self {
        Self {
            node: NodeId(r.node_id),
            block: BlockId(r.block_id),
            issued_at: SimTime(r.issued_ms),
            confirmed_at: r.confirmed_ms.map(SimTime),
        }
    }
}

pub const RUNS_FILE: &str = "runs.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn confirmation_file(cell: usize) -> String {
    format!("confirmations_cell{cell:03}.csv")
}

pub fn write_runs(path: &Path, rows: &[RunRow]) -> Result<(), BatchError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for row in rows {
        w.serialize(row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_runs(path: &Path) -> Result<Vec<RunRow>, BatchError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize()
        .collect::<Result<_, _>>()
        .map_err(csv_err(path))
}

pub fn write_confirmations<'a>(
    path: &Path,
    records: impl IntoIterator<Item = &'a ConfirmationRecord>,
) -> Result<(), BatchError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    // keep the header even when there are no records
    w.write_record(["node_id", "block_id", "issued_ms", "confirmed_ms"])
        .map_err(csv_err(path))?;
    for record in records {
        let row = ConfirmationRow::from(record);
        w.write_record([
            row.node_id.to_string(),
            row.block_id.to_string(),
            row.issued_ms.to_string(),
            row.confirmed_ms.map(|t| t.to_string()).unwrap_or_default(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_confirmations(path: &Path) -> Result<Vec<ConfirmationRecord>, BatchError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize::<ConfirmationRow>()
        .map(|row| row.map(|row| ConfirmationRecord::from(&row)))
        .collect::<Result<_, _>>()
        .map_err(csv_err(path))
}

#[derive(Clone, Debug, Serialize)]
struct CellManifest {
    cell: usize,
    config: SimConfig,
    run_ids: Vec<u64>,
    confirmation_file: String,
    /// Rows each written run contributed to the confirmation file, in order.
    confirmation_rows: Vec<(u64, usize)>,
}

#[derive(Clone, Debug, Serialize)]
struct Manifest {
    version: &'static str,
    spec: BatchSpec,
    cells: Vec<CellManifest>,
    safety_failures: usize,
}

/// Summary of a finished batch.
#[derive(Clone, Debug)]
pub struct BatchOutcome {
    pub rows: Vec<RunRow>,
    pub safety_failures: usize,
}

/// Runs every cell of `spec` and writes the runs table, one confirmation
/// file per cell and a manifest into `out`.
pub fn run_batch(spec: &BatchSpec, out: &Path) -> Result<BatchOutcome, BatchError> {
    spec.validate()?;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let cells = spec.cells();
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|cell| (0..spec.runs).map(move |r| (cell, r)))
        .collect();
    let results: Vec<RunResult> = jobs
        .par_iter()
        .map(|&(cell, r)| {
            let mut result = run(&cells[cell], spec.seed_base + r).expect("validated config");
            if r >= spec.confirmation_runs {
                result.confirmations = Vec::new();
            }
            result.opinion_log = Vec::new();
            result
        })
        .collect();

    let rows: Vec<RunRow> = results
        .iter()
        .enumerate()
        .map(|(i, result)| RunRow::new(i as u64, result))
        .collect();
    write_runs(&out.join(RUNS_FILE), &rows)?;

    let mut manifests = Vec::with_capacity(cells.len());
    for (cell, config) in cells.iter().enumerate() {
        let first = cell * spec.runs as usize;
        let slice = &results[first..first + spec.runs as usize];
        let name = confirmation_file(cell);
        write_confirmations(
            &out.join(&name),
            slice.iter().flat_map(|r| r.confirmations.iter()),
        )?;
        manifests.push(CellManifest {
            cell,
            config: config.clone(),
            run_ids: (first as u64..(first + slice.len()) as u64).collect(),
            confirmation_file: name,
            confirmation_rows: slice
                .iter()
                .enumerate()
                .filter(|(r, _)| (*r as u64) < spec.confirmation_runs)
                .map(|(r, result)| ((first + r) as u64, result.confirmations.len()))
                .collect(),
        });
    }

    let safety_failures = rows.iter().filter(|r| r.safety_failure).count();
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        spec: spec.clone(),
        cells: manifests,
        safety_failures,
    };
    let path = out.join(MANIFEST_FILE);
    let file = File::create(&path).map_err(io_err(&path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, &manifest).map_err(|e| BatchError::Io {
        path: path.clone(),
        source: e.into(),
    })?;
    w.flush().map_err(io_err(&path))?;

    Ok(BatchOutcome {
        rows,
        safety_failures,
    })
}
