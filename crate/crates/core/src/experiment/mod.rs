//! Reproducible Monte Carlo experiments and their output files.
//!
//! Every replicate draws from its own stream, derived from the master seed,
//! the experiment kind, the grid cell and the replicate index, so results do
//! not depend on the number of worker threads. Records are always gathered in
//! (cell, replicate) order.

mod emit;
mod runs;
mod stats;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::SeedSpec;

pub use emit::{
    emit, read_json, read_replicates_csv, read_summary_csv, sibling_path, CsvReplicateRow,
    CsvSummaryRow,
};
pub use runs::{
    run_borel, run_bounds, run_eps_transition, run_lognormal, run_moments, run_vardist,
};
pub use stats::{quantile, SampleStats};

pub const VERSION: &str = concat!("haarapprox ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Vardist,
    Lognormal,
    EpsTransition,
    Borel,
    Bounds,
    Moments,
}

impl ExperimentKind {
    pub fn tag(self) -> &'static str {
        match self {
            Self::Vardist => "vardist",
            Self::Lognormal => "lognormal",
            Self::EpsTransition => "eps-transition",
            Self::Borel => "borel",
            Self::Bounds => "bounds",
            Self::Moments => "moments",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format '{other}', expected csv or json")),
        }
    }
}

/// Parameters of the `bounds` experiment beyond the shared grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsParams {
    /// Gamma-ratio sandwich checked for `n = 1..=gamma_max`.
    pub gamma_max: u64,
    /// Normal-tail sandwich grid: `points` log-spaced values on `[lo, hi]`.
    pub tail_grid: (f64, f64, usize),
    pub coupling_n: usize,
    pub coupling_m: usize,
    pub r: f64,
    pub s: f64,
    pub t: f64,
    /// Replicates for the coupling frequency; 0 evaluates the bound only.
    pub coupling_reps: usize,
}

impl Default for BoundsParams {
    fn default() -> Self {
        Self {
            gamma_max: 1000,
            tail_grid: (0.01, 8.0, 100),
            coupling_n: 10_000,
            coupling_m: 100,
            r: 0.2,
            s: 6.0,
            t: 3.0,
            coupling_reps: 0,
        }
    }
}

/// Everything that determines a run. Echoed into every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n: Vec<usize>,
    pub p: Vec<usize>,
    pub q: Vec<usize>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub alpha: Vec<f64>,
    pub m: Vec<usize>,
    pub k_max: u32,
    pub reps: usize,
    pub master_seed: u64,
    pub workers: usize,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub bounds: BoundsParams,
}

impl ExperimentConfig {
    /// Empty grids, 1000 replicates, seed 1, one worker, CSV.
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            n: Vec::new(),
            p: Vec::new(),
            q: Vec::new(),
            x: Vec::new(),
            y: Vec::new(),
            alpha: Vec::new(),
            m: Vec::new(),
            k_max: 3,
            reps: 1000,
            master_seed: 1,
            workers: 1,
            out: None,
            format: OutputFormat::Csv,
            bounds: BoundsParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.reps == 0 {
            return fail("reps must be at least 1".into());
        }
        if self.workers == 0 {
            return fail("workers must be at least 1".into());
        }
        if self
            .x
            .iter()
            .chain(&self.y)
            .chain(&self.alpha)
            .any(|v| !v.is_finite() || *v <= 0.0)
        {
            return fail("x, y and alpha values must be positive and finite".into());
        }
        let needs_n = !matches!(self.kind, ExperimentKind::Moments);
        if needs_n && self.n.is_empty() {
            return fail(format!("{} needs at least one --n", self.kind));
        }
        if self.n.contains(&0) {
            return fail("n must be positive".into());
        }
        match self.kind {
            ExperimentKind::Vardist => {
                self.block_pairs()?;
            }
            ExperimentKind::Lognormal => {
                if self.x.is_empty() {
                    return fail("lognormal needs --x and --y".into());
                }
                self.block_pairs()?;
            }
            ExperimentKind::EpsTransition => {
                if self.alpha.is_empty() {
                    return fail("eps-transition needs at least one --alpha".into());
                }
                if self.n.iter().any(|&n| n < 3) {
                    return fail("eps-transition needs n >= 3".into());
                }
            }
            ExperimentKind::Borel => {}
            ExperimentKind::Bounds => {
                if self.m.len() != self.n.len() {
                    return fail("bounds needs one --m per --n".into());
                }
                if self
                    .n
                    .iter()
                    .zip(&self.m)
                    .any(|(&n, &m)| m == 0 || 2 * m > n)
                {
                    return fail("bounds needs 1 <= m <= n/2".into());
                }
                let b = &self.bounds;
                if b.gamma_max == 0
                    || b.tail_grid.2 < 2
                    || !(0.0 < b.tail_grid.0 && b.tail_grid.0 < b.tail_grid.1)
                {
                    return fail("invalid gamma sweep or tail grid".into());
                }
                if b.coupling_m == 0 || b.coupling_m > b.coupling_n {
                    return fail("coupling evaluation needs 1 <= m <= n".into());
                }
            }
            ExperimentKind::Moments => {
                if self.p.is_empty() {
                    return fail("moments needs at least one --p".into());
                }
                if !(1..=8).contains(&self.k_max) {
                    return fail("k-max must lie in 1..=8".into());
                }
                if self.reps < 100 {
                    return fail("moments needs at least 100 replicates".into());
                }
                self.block_pairs()?;
            }
        }
        Ok(())
    }

    /// Pairs `(p, q)` or `(x, y)` matched by position; a single entry broadcasts.
    pub(crate) fn block_pairs(&self) -> Result<Vec<BlockShape>> {
        fn zip<A: Copy>(a: &[A], b: &[A], what: &str) -> Result<Vec<(A, A)>> {
            let b = if b.is_empty() { a } else { b };
            let len = a.len().max(b.len());
            if (a.len() != len && a.len() != 1) || (b.len() != len && b.len() != 1) {
                return Err(Error::Config(format!(
                    "{what} lists must have equal length or length 1"
                )));
            }
            Ok((0..len)
                .map(|i| (a[i.min(a.len() - 1)], b[i.min(b.len() - 1)]))
                .collect())
        }
        match (self.p.is_empty(), self.x.is_empty()) {
            (false, true) => {
                if self.p.contains(&0) || self.q.contains(&0) {
                    return Err(Error::Config("p and q must be positive".into()));
                }
                Ok(zip(&self.p, &self.q, "p/q")?
                    .into_iter()
                    .map(|(p, q)| BlockShape::Integer(p, q))
                    .collect())
            }
            (true, false) => Ok(zip(&self.x, &self.y, "x/y")?
                .into_iter()
                .map(|(x, y)| BlockShape::Scaled(x, y))
                .collect()),
            (false, false) => Err(Error::Config(
                "give either --p/--q or --x/--y, not both".into(),
            )),
            (true, true) => Err(Error::Config("block shape needs --p/--q or --x/--y".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum BlockShape {
    Integer(usize, usize),
    Scaled(f64, f64),
}

/// Grid point of an experiment. Unused coordinates are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Cell {
    pub index: usize,
    pub n: usize,
    pub p: Option<usize>,
    pub q: Option<usize>,
    pub m: Option<usize>,
    pub alpha: Option<f64>,
    pub x: Option<f64>,
    pub y: Option<f64>,
}

/// One observed value of one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub cell: Cell,
    pub replicate: u64,
    pub stream_id: u64,
    pub metric: String,
    /// Abscissa of deterministic sweeps.
    pub point: Option<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub cell: Cell,
    pub metric: String,
    pub stats: SampleStats,
    /// Theoretical target, bound or limit the metric is compared with.
    pub reference: Option<f64>,
    pub reference_sd: Option<f64>,
    pub normalized_median: Option<f64>,
    pub ks_statistic: Option<f64>,
    pub ks_threshold: Option<f64>,
}

impl SummaryRow {
    fn new(cell: Cell, metric: &str, values: &[f64]) -> Self {
        Self {
            cell,
            metric: metric.to_string(),
            stats: SampleStats::of(values),
            reference: None,
            reference_sd: None,
            normalized_median: None,
            ks_statistic: None,
            ks_threshold: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRun {
    pub config: ExperimentConfig,
    pub replicates: Vec<ReplicateRecord>,
    pub summary: Vec<SummaryRow>,
    pub seed: u64,
    pub version: String,
    pub wall_clock_seconds: f64,
}

impl ExperimentRun {
    /// Summary rows for `metric`, in cell order.
    pub fn summary_for<'a>(&'a self, metric: &'a str) -> impl Iterator<Item = &'a SummaryRow> + 'a {
        self.summary.iter().filter(move |r| r.metric == metric)
    }

    /// Values of `metric` in cell `cell`, in replicate order.
    pub fn values(&self, cell: usize, metric: &str) -> Vec<f64> {
        self.replicates
            .iter()
            .filter(|r| r.cell.index == cell && r.metric == metric)
            .map(|r| r.value)
            .collect()
    }
}

/// Validates `cfg` and runs the experiment it names.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    match cfg.kind {
        ExperimentKind::Vardist => run_vardist(cfg),
        ExperimentKind::Lognormal => run_lognormal(cfg),
        ExperimentKind::EpsTransition => run_eps_transition(cfg),
        ExperimentKind::Borel => run_borel(cfg),
        ExperimentKind::Bounds => run_bounds(cfg),
        ExperimentKind::Moments => run_moments(cfg),
    }
}

/// Runs `job` for every `(cell, replicate)` on a pool of `workers` threads and
/// returns the records in (cell, replicate) order.
pub(crate) fn replicate_records<F>(
    cfg: &ExperimentConfig,
    cells: &[(Cell, usize)],
    job: F,
) -> Result<Vec<ReplicateRecord>>
where
    F: Fn(&Cell, SeedSpec) -> Result<Vec<(&'static str, f64)>> + Sync,
{
    let tasks: Vec<(Cell, u64)> = cells
        .iter()
        .flat_map(|&(cell, reps)| (0..reps as u64).map(move |r| (cell, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let tag = cfg.kind.tag();
    let per_task: Vec<Vec<ReplicateRecord>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(cell, r)| {
                let seed = SeedSpec::derive(cfg.master_seed, tag, cell.index as u64, r);
                let values = job(&cell, seed)?;
                Ok(values
                    .into_iter()
                    .map(|(metric, value)| ReplicateRecord {
                        cell,
                        replicate: r,
                        stream_id: seed.stream_id,
                        metric: metric.to_string(),
                        point: None,
                        value,
                    })
                    .collect())
            })
            .collect::<Result<_>>()
    })?;
    Ok(per_task.into_iter().flatten().collect())
}

/// One summary row per (cell, metric), in first-appearance order.
pub(crate) fn summarize(records: &[ReplicateRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(usize, &str)> = Vec::new();
    let mut groups: std::collections::HashMap<(usize, &str), (Cell, Vec<f64>)> = Default::default();
    for r in records {
        let key = (r.cell.index, r.metric.as_str());
        groups
            .entry(key)
            .or_insert_with(|| {
                keys.push(key);
                (r.cell, Vec::new())
            })
            .1
            .push(r.value);
    }
    keys.into_iter()
        .map(|key| {
            let (cell, values) = &groups[&key];
            SummaryRow::new(*cell, key.1, values)
        })
        .collect()
}

pub(crate) fn finish(
    cfg: &ExperimentConfig,
    replicates: Vec<ReplicateRecord>,
    summary: Vec<SummaryRow>,
    started: std::time::Instant,
) -> ExperimentRun {
    ExperimentRun {
        config: cfg.clone(),
        replicates,
        summary,
        seed: cfg.master_seed,
        version: VERSION.to_string(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    }
}
