//! Runs every seed of an experiment on a worker pool and writes one
//! `run_<seed>.jsonl` per seed plus `summary.csv`.
//!
//! Seed `s` drives the solver from stream `RUN` of `s` and the optional
//! reference model from stream `REFERENCE`, so the records of a seed do not
//! depend on the other seeds, the worker count or the reference.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;

use tneda::diagnostics::{KlObserver, KlReport};
use tneda::engine::{run_eda, GenerationView, Observer, RunRecord, SolverConfig};
use tneda::rng::{self, stream};

use crate::config::{ExperimentConfig, Instance};
use crate::error::{BenchError, Result};
use crate::records::RecordLine;
use crate::summary::{summarize, write_summary_csv};

pub const SUMMARY_FILE: &str = "summary.csv";
pub const RESOLVED_FILE: &str = "resolved_config.json";

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Replaces the config's seeds.
    pub seeds: Option<Vec<u64>>,
    /// Worker threads; all available cores when `None`.
    pub jobs: Option<usize>,
    /// Replaces the config's output directory.
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub dir: PathBuf,
    pub run_files: Vec<PathBuf>,
    pub summary: PathBuf,
}

pub fn run_file_name(seed: u64) -> String {
    format!("run_{seed}.jsonl")
}

struct Probe {
    kl: Option<KlObserver>,
    start: Instant,
    times: Vec<f64>,
}

impl Observer for Probe {
    fn observe(&mut self, view: &GenerationView<'_>) -> tneda::Result<Option<KlReport>> {
        match &mut self.kl {
            Some(k) => k.observe(view),
            None => Ok(None),
        }
    }

    fn record_done(&mut self, _record: &RunRecord) {
        self.times.push(self.start.elapsed().as_secs_f64() * 1e3);
    }
}

/// One seed's records, in generation order.
pub fn run_seed(cfg: &ExperimentConfig, solver: &SolverConfig, instance: &Instance, seed: u64) -> Result<Vec<RecordLine>> {
    let kl = match &cfg.reference {
        Some(r) => Some(KlObserver::new(r.resolve(solver), rng::stream(seed, stream::REFERENCE))?),
        None => None,
    };
    let mut probe = Probe {
        kl,
        start: Instant::now(),
        times: Vec::new(),
    };
    let result = run_eda(&*instance.problem, solver, &mut rng::stream(seed, stream::RUN), Some(&mut probe))?;
    Ok(result
        .records
        .iter()
        .zip(&probe.times)
        .map(|(r, &t)| RecordLine::new(seed, r, instance, cfg.record_wall_time.then_some(t)))
        .collect())
}

fn write_lines(path: &Path, lines: &[RecordLine]) -> Result<()> {
    let mut out = String::new();
    for l in lines {
        out.push_str(&l.to_line());
        out.push('\n');
    }
    let mut f = fs::File::create(path).map_err(|e| BenchError::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| BenchError::io(path, e))
}

fn output_dir(cfg: &ExperimentConfig, base: &Path, opts: &RunOptions) -> PathBuf {
    if let Some(o) = &opts.out {
        return o.clone();
    }
    match &cfg.output {
        Some(o) if o.is_absolute() => o.clone(),
        Some(o) => base.join(o),
        None => base.join("results").join(cfg.name.as_deref().unwrap_or("experiment")),
    }
}

/// Runs the experiment. `base` is the directory relative paths in `cfg`
/// refer to.
pub fn run_experiment(cfg: &ExperimentConfig, base: &Path, opts: &RunOptions) -> Result<ExperimentOutput> {
    let solver = cfg.solver_config()?;
    let seeds = match &opts.seeds {
        Some(s) => crate::config::Seeds::List(s.clone()).expand()?,
        None => cfg.seeds.expand()?,
    };
    let instance = cfg.instance(base)?;
    if let Some(r) = &cfg.reference {
        // Surface reference errors before any work starts.
        KlObserver::new(r.resolve(&solver), rng::seeded(0))?;
    }
    let dir = output_dir(cfg, base, opts);
    fs::create_dir_all(&dir).map_err(|e| BenchError::io(&dir, e))?;

    let resolved = serde_json::json!({ "experiment": cfg, "solver": solver, "optimum": instance.optimum, "seeds": seeds });
    let resolved_path = dir.join(RESOLVED_FILE);
    fs::write(&resolved_path, serde_json::to_string_pretty(&resolved).expect("config serializes") + "\n")
        .map_err(|e| BenchError::io(&resolved_path, e))?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = opts.jobs {
        if j == 0 {
            return Err(BenchError::config("--jobs must be at least 1"));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| BenchError::config(e.to_string()))?;

    // Workers send finished runs to this thread, which alone writes files.
    let (tx, rx) = mpsc::channel::<(u64, Result<Vec<RecordLine>>)>();
    let mut runs: Vec<(u64, Vec<RecordLine>)> = Vec::with_capacity(seeds.len());
    let mut first_error: Option<BenchError> = None;
    std::thread::scope(|scope| {
        scope.spawn(|| {
            pool.install(|| {
                seeds.par_iter().for_each_with(tx, |tx, &seed| {
                    let res = run_seed(cfg, &solver, &instance, seed);
                    tx.send((seed, res)).expect("sink outlives workers");
                });
            });
        });
        for (seed, res) in rx {
            match res.and_then(|lines| {
                write_lines(&dir.join(run_file_name(seed)), &lines)?;
                Ok(lines)
            }) {
                Ok(lines) => runs.push((seed, lines)),
                Err(e) => {
                    first_error.get_or_insert(e);
                }
            }
        }
    });
    if let Some(e) = first_error {
        return Err(e);
    }
    runs.sort_by_key(|(s, _)| *s);
    let run_files = runs.iter().map(|(s, _)| dir.join(run_file_name(*s))).collect();
    let bucket = cfg.bucket_size.unwrap_or(solver.eda.n_children).max(1);
    let rows = summarize(&runs.into_iter().map(|(_, r)| r).collect::<Vec<_>>(), bucket)?;
    let summary = dir.join(SUMMARY_FILE);
    write_summary_csv(&rows, &summary)?;
    Ok(ExperimentOutput { dir, run_files, summary })
}
