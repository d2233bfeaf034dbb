use crate::error::{Error, Result};

/// One-sample Kolmogorov–Smirnov distance with its 5% reference line.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    /// Asymptotic 5% critical value `1.36/√N`.
    pub threshold: f64,
    pub n: usize,
}

impl KsResult {
    pub fn passes(&self) -> bool {
        self.statistic < self.threshold
    }
}

/// Sup-distance between the empirical CDF of an ascending `sample` and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<KsResult> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = sample.len() as f64;
    let statistic = sample.iter().enumerate().fold(0.0f64, |acc, (i, &x)| {
        let c = cdf(x);
        let above = (i as f64 + 1.0) / n - c;
        let below = c - i as f64 / n;
        acc.max(above).max(below)
    });
    Ok(KsResult {
        statistic,
        threshold: 1.36 / n.sqrt(),
        n: sample.len(),
    })
}

pub fn ks_statistic_unsorted<F: Fn(f64) -> f64>(mut sample: Vec<f64>, cdf: F) -> Result<KsResult> {
    sample.sort_by(f64::total_cmp);
    ks_statistic(&sample, cdf)
}

/// Two-sample KS distance; the threshold is `1.36 √((n+m)/(nm))`.
pub fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(KsResult {
        statistic: d,
        threshold: 1.36 * ((na + nb) / (na * nb)).sqrt(),
        n: a.len().min(b.len()),
    })
}
