use std::time::Instant;

use statrs::distribution::{Beta, ContinuousCDF};

use super::{
    finish, replicate_records, summarize, BlockShape, Cell, ExperimentConfig, ExperimentKind,
    ExperimentRun, ReplicateRecord, SampleStats, SummaryRow,
};
use crate::density::{log_density_ratio, lognormal_params, phi_lower_bound, BlockSpec};
use crate::error::{Error, Result};
use crate::moments::{
    cov_trace12_asymptotic, covariance, expected_trace_pow_asymptotic, expected_trace_pow_exact,
    trace_powers, var_trace2_asymptotic,
};
use crate::numerics::{
    chi2_ratio_tail_bound, coupling_tail_bound, gamma_ratio_bounds, ks_statistic_unsorted,
    normal_cdf, normal_tail_sandwich,
};
use crate::sampler::{
    epsilon_stat, gaussian_matrix, n_alpha, n_alpha_floor, sample_haar_columns,
    sample_haar_coupled, GaussianStream,
};

/// Largest `n` for which `borel` also builds the full matrix to test its first row.
pub const BOREL_ROW_MAX_N: usize = 128;

const TRACE_METRICS: [&str; 8] = [
    "trace_pow_1",
    "trace_pow_2",
    "trace_pow_3",
    "trace_pow_4",
    "trace_pow_5",
    "trace_pow_6",
    "trace_pow_7",
    "trace_pow_8",
];

fn expect_kind(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if cfg.kind != kind {
        return Err(Error::Config(format!(
            "expected a {kind} config, got {}",
            cfg.kind
        )));
    }
    cfg.validate()
}

fn config_error(e: Error) -> Error {
    match e {
        Error::Domain { function, detail } | Error::Precondition { function, detail } => {
            Error::Config(format!("{function}: {detail}"))
        }
        other => other,
    }
}

fn block_cells(cfg: &ExperimentConfig) -> Result<Vec<(Cell, BlockSpec)>> {
    let mut cells = Vec::new();
    for &n in &cfg.n {
        for shape in cfg.block_pairs()? {
            let spec = match shape {
                BlockShape::Integer(p, q) => BlockSpec::new(n, p, q),
                BlockShape::Scaled(x, y) => BlockSpec::from_scaling(n, x, y),
            }
            .map_err(config_error)?;
            let cell = Cell {
                index: cells.len(),
                n,
                p: Some(spec.p),
                q: Some(spec.q),
                x: Some(spec.x),
                y: Some(spec.y),
                ..Cell::default()
            };
            cells.push((cell, spec));
        }
    }
    Ok(cells)
}

fn ks_against<F: Fn(f64) -> f64>(row: &mut SummaryRow, values: Vec<f64>, cdf: F) -> Result<()> {
    let ks = ks_statistic_unsorted(values, cdf)?;
    row.ks_statistic = Some(ks.statistic);
    row.ks_threshold = Some(ks.threshold);
    Ok(())
}

/// Monte Carlo estimate of the variation distance `E|K_n L_n - 1|` per `(n, p, q)`.
pub fn run_vardist(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    let started = Instant::now();
    expect_kind(cfg, ExperimentKind::Vardist)?;
    let cells = block_cells(cfg)?;
    let jobs: Vec<(Cell, usize)> = cells.iter().map(|(c, _)| (*c, cfg.reps)).collect();
    let records = replicate_records(cfg, &jobs, |cell, seed| {
        let spec = cells[cell.index].1;
        let x = gaussian_matrix(spec.p, spec.q, seed)?;
        let ratio = log_density_ratio(&x, &spec)?;
        let mut out = vec![
            ("abs_deviation", ratio.abs_deviation()),
            ("boundary_hit", f64::from(u8::from(ratio.boundary_hit))),
        ];
        if let Some(w) = ratio.log_ratio().finite() {
            out.push(("log_ratio", w));
        }
        Ok(out)
    })?;
    let mut summary = summarize(&records);
    for row in summary.iter_mut().filter(|r| r.metric == "abs_deviation") {
        let spec = cells[row.cell.index].1;
        row.reference = Some(phi_lower_bound(spec.x, spec.y)?.value);
    }
    Ok(finish(cfg, records, summary, started))
}

/// Sample of `log K_n L_n` against its lognormal limit `N(-x²y²/8, (xy/4)²)`.
pub fn run_lognormal(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    let started = Instant::now();
    expect_kind(cfg, ExperimentKind::Lognormal)?;
    let cells = block_cells(cfg)?;
    let jobs: Vec<(Cell, usize)> = cells.iter().map(|(c, _)| (*c, cfg.reps)).collect();
    let records = replicate_records(cfg, &jobs, |cell, seed| {
        let spec = cells[cell.index].1;
        let ratio = log_density_ratio(&gaussian_matrix(spec.p, spec.q, seed)?, &spec)?;
        let mut out = vec![("boundary_hit", f64::from(u8::from(ratio.boundary_hit)))];
        if let Some(w) = ratio.log_ratio().finite() {
            out.push(("log_ratio", w));
        }
        Ok(out)
    })?;
    let mut summary = summarize(&records);
    for row in summary.iter_mut().filter(|r| r.metric == "log_ratio") {
        let spec = cells[row.cell.index].1;
        let lp = lognormal_params(spec.x, spec.y, &spec);
        row.reference = Some(lp.limit_mean_log);
        row.reference_sd = Some(lp.limit_sd_log);
        let values = values_of(&records, row.cell.index, "log_ratio");
        ks_against(row, values, |v| {
            normal_cdf((v - lp.limit_mean_log) / lp.limit_sd_log)
        })?;
    }
    Ok(finish(cfg, records, summary, started))
}

fn values_of(records: &[ReplicateRecord], cell: usize, metric: &str) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.cell.index == cell && r.metric == metric)
        .map(|r| r.value)
        .collect()
}

/// `ε_n(m)` at both column-count thresholds for each `(n, α)`.
///
/// The `m` of `eps_n_alpha` records is `⌈nα/(log n - (5/4) log log n)⌉`, that
/// of `eps_floor` records `⌊nα/log n⌋`.
pub fn run_eps_transition(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    let started = Instant::now();
    expect_kind(cfg, ExperimentKind::EpsTransition)?;
    let mut cells = Vec::new();
    let mut floors = Vec::new();
    for &n in &cfg.n {
        for &alpha in &cfg.alpha {
            let m = n_alpha(n, alpha).map_err(config_error)?;
            let floor = n_alpha_floor(n, alpha).map_err(config_error)?;
            if m > n || floor > n {
                return Err(Error::Config(format!(
                    "alpha={alpha} needs more than n={n} columns"
                )));
            }
            cells.push(Cell {
                index: cells.len(),
                n,
                m: Some(m),
                alpha: Some(alpha),
                ..Cell::default()
            });
            floors.push(floor);
        }
    }
    let jobs: Vec<(Cell, usize)> = cells.iter().map(|c| (*c, cfg.reps)).collect();
    let mut records = replicate_records(cfg, &jobs, |cell, seed| {
        let m = cell.m.expect("set above");
        let floor = floors[cell.index];
        let coupling = sample_haar_columns(cell.n, m.max(floor).max(1), seed)?;
        let mut out = vec![("eps_n_alpha", epsilon_stat(&coupling, m)?)];
        if floor >= 1 {
            out.push(("eps_floor", epsilon_stat(&coupling, floor)?));
        }
        Ok(out)
    })?;
    for r in records.iter_mut().filter(|r| r.metric == "eps_floor") {
        r.cell.m = Some(floors[r.cell.index]);
    }
    let mut summary = summarize(&records);
    for row in &mut summary {
        let target = 2.0 * row.cell.alpha.expect("set above").sqrt();
        row.reference = Some(target);
        row.normalized_median = Some(row.stats.median / target);
    }
    Ok(finish(cfg, records, summary, started))
}

/// Marginal law of `γ_11` and of the first row of a Haar matrix.
pub fn run_borel(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    let started = Instant::now();
    expect_kind(cfg, ExperimentKind::Borel)?;
    let cells: Vec<Cell> = cfg
        .n
        .iter()
        .enumerate()
        .map(|(index, &n)| Cell {
            index,
            n,
            ..Cell::default()
        })
        .collect();
    let jobs: Vec<(Cell, usize)> = cells.iter().map(|c| (*c, cfg.reps)).collect();
    let records = replicate_records(cfg, &jobs, |cell, seed| {
        let n = cell.n;
        let full = n <= BOREL_ROW_MAX_N;
        let coupling = if full {
            sample_haar_coupled(n, seed)?
        } else {
            sample_haar_columns(n, 1, seed)?
        };
        let g11 = coupling.gamma_entry(0, 0);
        let mut out = vec![
            ("sqrt_n_gamma11", (n as f64).sqrt() * g11),
            ("gamma11_sq", g11 * g11),
        ];
        if full {
            if n >= 2 {
                let g1n = coupling.gamma_entry(0, n - 1);
                out.push(("row_entry_sq", g1n * g1n));
            }
            out.push((
                "orthonormality_residual",
                coupling.gamma().orthonormality_residual(),
            ));
        }
        Ok(out)
    })?;
    let mut summary = summarize(&records);
    for row in &mut summary {
        let values = values_of(&records, row.cell.index, &row.metric);
        let n = row.cell.n;
        match row.metric.as_str() {
            "sqrt_n_gamma11" => ks_against(row, values, normal_cdf)?,
            "gamma11_sq" | "row_entry_sq" if n >= 2 => {
                let beta = Beta::new(0.5, (n as f64 - 1.0) / 2.0)
                    .map_err(|e| Error::Config(e.to_string()))?;
                ks_against(row, values, |v| beta.cdf(v))?
            }
            _ => {}
        }
    }
    Ok(finish(cfg, records, summary, started))
}

fn deterministic(
    cell: Cell,
    metric: &str,
    points: impl Iterator<Item = (f64, f64)>,
) -> Vec<ReplicateRecord> {
    points
        .enumerate()
        .map(|(i, (point, value))| ReplicateRecord {
            cell,
            replicate: i as u64,
            stream_id: 0,
            metric: metric.to_string(),
            point: Some(point),
            value,
        })
        .collect()
}

/// Pointwise checks of the analytic inequalities and simulated frequencies
/// against the probability bounds.
///
/// Cell 0 is the gamma-ratio sweep, cell 1 the normal-tail grid, then one cell
/// per `(n, m, x)` for the chi-square ratio bound, and last the coupling bound.
pub fn run_bounds(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    let started = Instant::now();
    expect_kind(cfg, ExperimentKind::Bounds)?;
    let b = &cfg.bounds;
    let mut records = Vec::new();

    let gamma_cell = Cell {
        index: 0,
        n: b.gamma_max as usize,
        ..Cell::default()
    };
    let sweep = (1..=b.gamma_max)
        .map(|n| {
            Ok((
                n as f64,
                f64::from(u8::from(!{
                    let g = gamma_ratio_bounds(n)?;
                    g.half_shift.holds_strictly() && g.half_argument.holds_strictly()
                })),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    records.extend(deterministic(
        gamma_cell,
        "gamma_ratio_violation",
        sweep.into_iter(),
    ));

    let (lo, hi, points) = b.tail_grid;
    let tail_cell = Cell {
        index: 1,
        n: points,
        ..Cell::default()
    };
    let grid = (0..points)
        .map(|i| {
            let x = lo * (hi / lo).powf(i as f64 / (points - 1) as f64);
            Ok((x, f64::from(u8::from(!normal_tail_sandwich(x)?.holds()))))
        })
        .collect::<Result<Vec<_>>>()?;
    records.extend(deterministic(
        tail_cell,
        "tail_sandwich_violation",
        grid.into_iter(),
    ));

    let xs = if cfg.x.is_empty() {
        vec![0.5, 1.0, 1.5, 2.0]
    } else {
        cfg.x.clone()
    };
    let mut chi_cells = Vec::new();
    let mut chi_bounds = Vec::new();
    for (&n, &m) in cfg.n.iter().zip(&cfg.m) {
        for &x in &xs {
            chi_bounds.push(chi2_ratio_tail_bound(n as u64, m as u64, x).map_err(config_error)?);
            chi_cells.push((
                Cell {
                    index: 2 + chi_cells.len(),
                    n,
                    m: Some(m),
                    x: Some(x),
                    ..Cell::default()
                },
                cfg.reps,
            ));
        }
    }
    records.extend(replicate_records(cfg, &chi_cells, |cell, seed| {
        let (n, m) = (cell.n, cell.m.expect("set above"));
        let mut stream = GaussianStream::new(seed);
        let mut s_m = 0.0;
        let mut s_n = 0.0;
        for i in 0..n {
            let z = stream.next_normal();
            s_n += z * z;
            if i < m {
                s_m += z * z;
            }
        }
        let dev = (s_n / s_m - n as f64 / m as f64).abs();
        Ok(vec![
            ("ratio_deviation", dev),
            (
                "ratio_exceeds",
                f64::from(u8::from(dev >= cell.x.expect("set above"))),
            ),
        ])
    })?);

    let coupling_cell = Cell {
        index: 2 + chi_cells.len(),
        n: b.coupling_n,
        m: Some(b.coupling_m),
        ..Cell::default()
    };
    let coupling = coupling_tail_bound(b.coupling_n as u64, b.coupling_m as u64, b.r, b.s, b.t)
        .map_err(config_error)?;
    records.extend(deterministic(
        coupling_cell,
        "coupling_bound",
        std::iter::once((coupling.threshold, coupling.bound)),
    ));
    if b.coupling_reps > 0 {
        let threshold = coupling.threshold;
        records.extend(replicate_records(
            cfg,
            &[(coupling_cell, b.coupling_reps)],
            |cell, seed| {
                let m = cell.m.expect("set above");
                let eps = epsilon_stat(&sample_haar_columns(cell.n, m, seed)?, m)?;
                Ok(vec![
                    ("coupling_eps", eps),
                    ("coupling_exceeds", f64::from(u8::from(eps >= threshold))),
                ])
            },
        )?);
    }

    let mut summary = summarize(&records);
    for row in &mut summary {
        match row.metric.as_str() {
            "gamma_ratio_violation" | "tail_sandwich_violation" => row.reference = Some(0.0),
            "ratio_exceeds" => row.reference = Some(chi_bounds[row.cell.index - 2]),
            "coupling_exceeds" | "coupling_bound" => row.reference = Some(coupling.bound),
            "coupling_eps" => row.reference = Some(coupling.threshold),
            _ => {}
        }
    }
    Ok(finish(cfg, records, summary, started))
}

/// Monte Carlo trace moments per `(p, q)`, with the variance of `tr((X'X)²)`
/// and its covariance with `tr(X'X)` as extra summary rows whose `mean` and
/// `se` hold the estimate and its standard error.
pub fn run_moments(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    let started = Instant::now();
    expect_kind(cfg, ExperimentKind::Moments)?;
    let mut cells = Vec::new();
    for shape in cfg.block_pairs()? {
        let BlockShape::Integer(p, q) = shape else {
            return Err(Error::Config("moments takes --p/--q".into()));
        };
        cells.push((
            Cell {
                index: cells.len(),
                n: p + q,
                p: Some(p),
                q: Some(q),
                ..Cell::default()
            },
            cfg.reps,
        ));
    }
    let k_max = cfg.k_max;
    let records = replicate_records(cfg, &cells, |cell, seed| {
        let x = gaussian_matrix(cell.p.expect("set"), cell.q.expect("set"), seed)?;
        Ok(TRACE_METRICS
            .iter()
            .copied()
            .zip(trace_powers(&x, k_max))
            .collect())
    })?;
    let mut summary = summarize(&records);
    for row in &mut summary {
        let (p, q) = (row.cell.p.expect("set"), row.cell.q.expect("set"));
        let k = row.metric["trace_pow_".len()..]
            .parse::<u32>()
            .expect("metric name");
        row.reference = Some(match expected_trace_pow_exact::<f64>(p, q, k) {
            Ok(v) => v,
            Err(_) => expected_trace_pow_asymptotic(p, q, k)?,
        });
    }
    if k_max >= 2 {
        for (cell, _) in &cells {
            let t1 = values_of(&records, cell.index, "trace_pow_1");
            let t2 = values_of(&records, cell.index, "trace_pow_2");
            let (p, q) = (cell.p.expect("set"), cell.q.expect("set"));
            for (metric, est, reference) in [
                (
                    "var_trace2",
                    covariance(&t2, &t2),
                    var_trace2_asymptotic(p, q),
                ),
                (
                    "cov_trace12",
                    covariance(&t1, &t2),
                    cov_trace12_asymptotic(p, q),
                ),
            ] {
                let v = est.value;
                summary.push(SummaryRow {
                    cell: *cell,
                    metric: metric.to_string(),
                    stats: SampleStats {
                        count: t1.len(),
                        mean: v,
                        variance: None,
                        se: Some(est.se),
                        median: v,
                        q1: v,
                        q3: v,
                        min: v,
                        max: v,
                    },
                    reference: Some(reference),
                    reference_sd: None,
                    normalized_median: None,
                    ks_statistic: None,
                    ks_threshold: None,
                });
            }
        }
    }
    Ok(finish(cfg, records, summary, started))
}
