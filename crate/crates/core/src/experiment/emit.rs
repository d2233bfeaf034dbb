use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    Cell, ExperimentKind, ExperimentRun, OutputFormat, ReplicateRecord, SampleStats, SummaryRow,
};
use crate::error::{Error, Result};

/// Flat CSV form of a [`ReplicateRecord`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvReplicateRow {
    pub kind: ExperimentKind,
    pub master_seed: u64,
    pub version: String,
    pub cell: usize,
    pub n: usize,
    pub p: Option<usize>,
    pub q: Option<usize>,
    pub m: Option<usize>,
    pub alpha: Option<f64>,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub replicate: u64,
    pub stream_id: u64,
    pub metric: String,
    pub point: Option<f64>,
    pub value: f64,
}

/// Flat CSV form of a [`SummaryRow`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSummaryRow {
    pub kind: ExperimentKind,
    pub master_seed: u64,
    pub version: String,
    pub cell: usize,
    pub n: usize,
    pub p: Option<usize>,
    pub q: Option<usize>,
    pub m: Option<usize>,
    pub alpha: Option<f64>,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub metric: String,
    pub count: usize,
    pub mean: f64,
    pub variance: Option<f64>,
    pub se: Option<f64>,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    pub min: f64,
    pub max: f64,
    pub reference: Option<f64>,
    pub reference_sd: Option<f64>,
    pub normalized_median: Option<f64>,
    pub ks_statistic: Option<f64>,
    pub ks_threshold: Option<f64>,
}

impl CsvReplicateRow {
    fn new(run: &ExperimentRun, r: &ReplicateRecord) -> Self {
        let c = r.cell;
        Self {
            kind: run.config.kind,
            master_seed: run.seed,
            version: run.version.clone(),
            cell: c.index,
            n: c.n,
            p: c.p,
            q: c.q,
            m: c.m,
            alpha: c.alpha,
            x: c.x,
            y: c.y,
            replicate: r.replicate,
            stream_id: r.stream_id,
            metric: r.metric.clone(),
            point: r.point,
            value: r.value,
        }
    }

    pub fn into_record(self) -> ReplicateRecord {
        ReplicateRecord {
            cell: Cell {
                index: self.cell,
                n: self.n,
                p: self.p,
                q: self.q,
                m: self.m,
                alpha: self.alpha,
                x: self.x,
                y: self.y,
            },
            replicate: self.replicate,
            stream_id: self.stream_id,
            metric: self.metric,
            point: self.point,
            value: self.value,
        }
    }
}

impl CsvSummaryRow {
    fn new(run: &ExperimentRun, r: &SummaryRow) -> Self {
        let (c, s) = (r.cell, r.stats);
        Self {
            kind: run.config.kind,
            master_seed: run.seed,
            version: run.version.clone(),
            cell: c.index,
            n: c.n,
            p: c.p,
            q: c.q,
            m: c.m,
            alpha: c.alpha,
            x: c.x,
            y: c.y,
            metric: r.metric.clone(),
            count: s.count,
            mean: s.mean,
            variance: s.variance,
            se: s.se,
            median: s.median,
            q1: s.q1,
            q3: s.q3,
            iqr: s.iqr(),
            min: s.min,
            max: s.max,
            reference: r.reference,
            reference_sd: r.reference_sd,
            normalized_median: r.normalized_median,
            ks_statistic: r.ks_statistic,
            ks_threshold: r.ks_threshold,
        }
    }

    pub fn into_summary(self) -> SummaryRow {
        SummaryRow {
            cell: Cell {
                index: self.cell,
                n: self.n,
                p: self.p,
                q: self.q,
                m: self.m,
                alpha: self.alpha,
                x: self.x,
                y: self.y,
            },
            metric: self.metric,
            stats: SampleStats {
                count: self.count,
                mean: self.mean,
                variance: self.variance,
                se: self.se,
                median: self.median,
                q1: self.q1,
                q3: self.q3,
                min: self.min,
                max: self.max,
            },
            reference: self.reference,
            reference_sd: self.reference_sd,
            normalized_median: self.normalized_median,
            ks_statistic: self.ks_statistic,
            ks_threshold: self.ks_threshold,
        }
    }
}

/// `dir/stem.<suffix>` next to `path`, e.g. `run.csv` -> `run.summary.csv`.
pub fn sibling_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::Serialize {
            path: path.to_path_buf(),
            detail: format!("{other:?}"),
        },
    }
}

fn write_csv<W: Write, R: Serialize>(
    writer: W,
    rows: impl Iterator<Item = R>,
    path: &Path,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

fn write_json<W: Write, T: Serialize>(writer: W, value: &T, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(writer);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Serialize {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    w.write_all(b"\n").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(io_err(path))
}

/// Writes `run` and returns the files created.
///
/// JSON goes to a single file. CSV writes the per-replicate table to `path`,
/// the summary to `<stem>.summary.csv` and the configuration to
/// `<stem>.config.json`. Without a path the JSON document, or the CSV summary,
/// is written to standard output.
pub fn emit(
    run: &ExperimentRun,
    format: OutputFormat,
    path: Option<&Path>,
) -> Result<Vec<PathBuf>> {
    let stdout = Path::new("<stdout>");
    match (format, path) {
        (OutputFormat::Json, Some(p)) => {
            write_json(create(p)?, run, p)?;
            Ok(vec![p.to_path_buf()])
        }
        (OutputFormat::Json, None) => {
            write_json(std::io::stdout().lock(), run, stdout).map(|_| Vec::new())
        }
        (OutputFormat::Csv, Some(p)) => {
            let summary = sibling_path(p, "summary.csv");
            let config = sibling_path(p, "config.json");
            write_csv(
                BufWriter::new(create(p)?),
                run.replicates.iter().map(|r| CsvReplicateRow::new(run, r)),
                p,
            )?;
            write_csv(
                BufWriter::new(create(&summary)?),
                run.summary.iter().map(|r| CsvSummaryRow::new(run, r)),
                &summary,
            )?;
            write_json(create(&config)?, &run.config, &config)?;
            Ok(vec![p.to_path_buf(), summary, config])
        }
        (OutputFormat::Csv, None) => write_csv(
            std::io::stdout().lock(),
            run.summary.iter().map(|r| CsvSummaryRow::new(run, r)),
            stdout,
        )
        .map(|_| Vec::new()),
    }
}

pub fn read_json(path: &Path) -> Result<ExperimentRun> {
    let file = File::open(path).map_err(io_err(path))?;
    serde_json::from_reader(std::io::BufReader::new(file)).map_err(|e| Error::Serialize {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })
}

fn read_csv<R: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<R>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    reader
        .deserialize()
        .map(|row| row.map_err(|e| csv_err(path, e)))
        .collect()
}

pub fn read_replicates_csv(path: &Path) -> Result<Vec<ReplicateRecord>> {
    Ok(read_csv::<CsvReplicateRow>(path)?
        .into_iter()
        .map(CsvReplicateRow::into_record)
        .collect())
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>> {
    Ok(read_csv::<CsvSummaryRow>(path)?
        .into_iter()
        .map(CsvSummaryRow::into_summary)
        .collect())
}
