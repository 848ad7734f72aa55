//! Across-run statistics of the best-so-far error.
//!
//! `summary.csv` columns:
//!
//! | column | meaning |
//! |---|---|
//! | `axis` | `generation` or `calls` |
//! | `x` | generation number, or the call budget at the end of the bucket |
//! | `metric` | `relative_error` if every record has one, else `best_value` |
//! | `runs` | runs contributing a value |
//! | `median`, `q1`, `q3` | quartiles, linear interpolation (type 7) |
//! | `mean` | arithmetic mean |
//! | `stderr` | sample standard deviation / √runs; empty for one run |
//!
//! A run that stopped early keeps contributing its final value. In the
//! `calls` rows a run contributes the last record whose call count is within
//! the bucket's budget, and nothing before its first record.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{BenchError, Result};
use crate::records::{read_run_file, RecordLine};

#[derive(Clone, Debug, PartialEq)]
pub struct Stats {
    pub n: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub mean: f64,
    pub stderr: Option<f64>,
}

/// Type-7 quantile of sorted data: `h = (n-1)q`, interpolating between
/// `x[⌊h⌋]` and `x[⌊h⌋+1]`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Statistics of `values`; `None` when empty. The values are sorted first,
/// so the result does not depend on their order.
pub fn stats(values: &[f64]) -> Option<Stats> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let mean = v.iter().sum::<f64>() / n as f64;
    let stderr = (n > 1).then(|| {
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        var.sqrt() / (n as f64).sqrt()
    });
    Some(Stats {
        n,
        median: quantile_sorted(&v, 0.5),
        q1: quantile_sorted(&v, 0.25),
        q3: quantile_sorted(&v, 0.75),
        mean,
        stderr,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Generation,
    Calls,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::Generation => "generation",
            Axis::Calls => "calls",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub axis: Axis,
    pub x: usize,
    pub metric: &'static str,
    pub stats: Stats,
}

/// Summary rows for a set of runs, each a list of records in generation
/// order. Generation rows come first, then call-budget buckets of width
/// `bucket`.
pub fn summarize(runs: &[Vec<RecordLine>], bucket: usize) -> Result<Vec<SummaryRow>> {
    if runs.is_empty() || runs.iter().any(|r| r.is_empty()) {
        return Err(BenchError::config("nothing to summarize"));
    }
    if bucket == 0 {
        return Err(BenchError::config("bucket width must be positive"));
    }
    let use_rel = runs.iter().flatten().all(|r| r.relative_error.is_some());
    let (metric, value): (&'static str, fn(&RecordLine) -> Option<f64>) = if use_rel {
        ("relative_error", |r| r.relative_error)
    } else {
        ("best_value", |r| r.best_value)
    };
    let mut rows = Vec::new();

    let last_gen = runs.iter().map(|r| r.last().unwrap().generation).max().unwrap();
    for g in 0..=last_gen {
        let vals: Vec<f64> = runs
            .iter()
            .filter_map(|r| r.iter().take_while(|rec| rec.generation <= g).last())
            .filter_map(value)
            .collect();
        if let Some(stats) = stats(&vals) {
            rows.push(SummaryRow {
                axis: Axis::Generation,
                x: g,
                metric,
                stats,
            });
        }
    }

    let max_calls = runs.iter().map(|r| r.last().unwrap().calls).max().unwrap();
    for b in 1..=max_calls.div_ceil(bucket) {
        let budget = b * bucket;
        let vals: Vec<f64> = runs
            .iter()
            .filter_map(|r| r.iter().take_while(|rec| rec.calls <= budget).last())
            .filter_map(value)
            .collect();
        if let Some(stats) = stats(&vals) {
            rows.push(SummaryRow {
                axis: Axis::Calls,
                x: budget,
                metric,
                stats,
            });
        }
    }
    Ok(rows)
}

pub const CSV_HEADER: &str = "axis,x,metric,runs,median,q1,q3,mean,stderr";

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let s = &r.stats;
        let stderr = s.stderr.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.axis.name(),
            r.x,
            r.metric,
            s.n,
            s.median,
            s.q1,
            s.q3,
            s.mean,
            stderr
        )
        .unwrap();
    }
    out
}

pub fn write_summary_csv(rows: &[SummaryRow], path: &Path) -> Result<()> {
    std::fs::write(path, summary_csv(rows)).map_err(|e| BenchError::io(path, e))
}

/// Reads every `run_*.jsonl` in `dir`, in file-name order.
pub fn read_runs(dir: &Path) -> Result<Vec<Vec<RecordLine>>> {
    let entries = std::fs::read_dir(dir).map_err(|e| BenchError::io(dir, e))?;
    let mut paths = Vec::new();
    for e in entries {
        let path = e.map_err(|e| BenchError::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.starts_with("run_") && name.ends_with(".jsonl") {
            paths.push(path);
        }
    }
    paths.sort();
    if paths.is_empty() {
        return Err(BenchError::parse(dir, "no run_*.jsonl files"));
    }
    paths.iter().map(|p| read_run_file(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartiles_by_hand() {
        let s = stats(&[7.0, 1.0, 3.0, 10.0, 4.0]).unwrap();
        // sorted 1 3 4 7 10: h = 1, 2, 3
        assert_eq!((s.q1, s.median, s.q3), (3.0, 4.0, 7.0));
        assert_eq!(s.mean, 5.0);
        let four = stats(&[1.0, 2.0, 4.0, 8.0]).unwrap();
        // h = 0.75, 1.5, 2.25
        assert_eq!((four.q1, four.median, four.q3), (1.75, 3.0, 5.0));
    }

    #[test]
    fn single_value() {
        let s = stats(&[2.5]).unwrap();
        assert_eq!((s.median, s.mean, s.q1, s.q3, s.stderr), (2.5, 2.5, 2.5, 2.5, None));
        assert!(stats(&[]).is_none());
    }

    #[test]
    fn standard_error_definition() {
        let v = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        // mean 5, squared deviations sum to 32, sample var 32/7
        let s = stats(&v).unwrap();
        assert!((s.stderr.unwrap() - (32.0f64 / 7.0).sqrt() / 8f64.sqrt()).abs() < 1e-15);
    }
}
