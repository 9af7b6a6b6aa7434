//! The simulation study: every (model, innovation, n, replication) cell is
//! simulated at length `2n`, each method is fit on the first half and scored on
//! the second half through the shared holdout path.
//!
//! Replications run on a rayon pool. Their rows go through one writer that
//! emits them in task order and flushes after every replication, so the files
//! do not depend on the number of workers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use pacgibbs_core::baselines::{fit_order, select_order};
use pacgibbs_core::rng::derive_seed;
use pacgibbs_core::sampler::fit_gibbs;
use pacgibbs_core::simulate::{simulate, BenchmarkModel, InnovationSpec};
use pacgibbs_core::{holdout_risk, BasisKind, PredictorBasis};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

pub const RESULTS_HEADER: &str = "model,innovation,n,rep,method,test_mse,wall_ms,seed";
pub const SUMMARY_HEADER: &str = "model,innovation,n,method,mean_mse,sd_mse";
pub const METHODS: [&str; 3] = ["gibbs", "aic", "full"];

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub model: &'static str,
    pub innovation: &'static str,
    pub n: usize,
    pub rep: usize,
    pub method: &'static str,
    pub test_mse: f64,
    pub wall_ms: f64,
    pub seed: u64,
}

impl ResultRow {
    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.3},{}",
            self.model,
            self.innovation,
            self.n,
            self.rep,
            self.method,
            self.test_mse,
            self.wall_ms,
            self.seed
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub model: &'static str,
    pub innovation: &'static str,
    pub n: usize,
    pub method: &'static str,
    pub mean_mse: f64,
    /// Sample standard deviation (divisor `reps - 1`); NaN for one replication.
    pub sd_mse: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub results: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
    pub results_path: PathBuf,
    pub summary_path: PathBuf,
}

impl ExperimentOutput {
    pub fn cell(&self, model: &str, innovation: &str, n: usize, method: &str) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|s| s.model == model && s.innovation == innovation && s.n == n && s.method == method)
    }
}

#[derive(Debug, Clone, Copy)]
struct Task {
    model: BenchmarkModel,
    innovation: InnovationSpec,
    n: usize,
    rep: usize,
}

fn model_id(m: BenchmarkModel) -> u64 {
    BenchmarkModel::ALL.iter().position(|x| *x == m).unwrap_or(0) as u64
}

fn innovation_id(i: &InnovationSpec) -> u64 {
    match i {
        InnovationSpec::Uniform { .. } => 0,
        InnovationSpec::Gaussian { .. } => 1,
    }
}

/// Seed of one replication; depends on the cell, not on its position in the run.
pub fn task_seed(master: u64, model: BenchmarkModel, innovation: &InnovationSpec, n: usize, rep: usize) -> u64 {
    derive_seed(
        master,
        &[model_id(model), innovation_id(innovation), n as u64, rep as u64],
    )
}

fn tasks(config: &ExperimentConfig) -> Vec<Task> {
    let mut out = Vec::new();
    for &model in &config.models {
        for &innovation in &config.innovations {
            for &n in &config.n_values {
                for rep in 0..config.replications {
                    out.push(Task {
                        model,
                        innovation,
                        n,
                        rep,
                    });
                }
            }
        }
    }
    out
}

fn run_task(config: &ExperimentConfig, task: &Task) -> CliResult<Vec<ResultRow>> {
    let seed = task_seed(config.master_seed, task.model, &task.innovation, task.n, task.rep);
    let spec = task.model.spec(task.innovation).with_burn_in(config.burn_in);
    let series = simulate(&spec, 2 * task.n, seed)?;
    let (train, test) = series.split_at(task.n)?;
    let q = config.q;
    let basis = PredictorBasis::new(BasisKind::ArLinear, q)?;

    let timed = |f: &mut dyn FnMut() -> CliResult<f64>| -> CliResult<(f64, f64)> {
        let start = Instant::now();
        let mse = f()?;
        let ms = if config.record_wall_ms {
            start.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        };
        Ok((mse, ms))
    };
    let gibbs = timed(&mut || {
        let mut sampler = config.sampler.clone();
        sampler.seed = seed;
        let fit = fit_gibbs(&train, &basis, &sampler)?;
        Ok(holdout_risk(&fit.theta, &basis, &test)?.empirical_risk)
    })?;
    let aic = timed(&mut || Ok(select_order(&train, q, q, config.baseline)?.holdout_risk(&test, q)?))?;
    let full = timed(&mut || Ok(fit_order(&train, q, q, config.baseline)?.holdout_risk(&test, q)?))?;

    Ok(METHODS
        .iter()
        .zip([gibbs, aic, full])
        .map(|(&method, (test_mse, wall_ms))| ResultRow {
            model: task.model.name(),
            innovation: task.innovation.name(),
            n: task.n,
            rep: task.rep,
            method,
            test_mse,
            wall_ms,
            seed,
        })
        .collect())
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, var.sqrt())
}

/// Groups rows by (model, innovation, n, method) in order of first appearance.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut order = Vec::new();
    let mut groups: BTreeMap<(&str, &str, usize, &str), Vec<f64>> = BTreeMap::new();
    for r in rows {
        let key = (r.model, r.innovation, r.n, r.method);
        groups
            .entry(key)
            .or_insert_with(|| {
                order.push((r.model, r.innovation, r.n, r.method));
                Vec::new()
            })
            .push(r.test_mse);
    }
    order
        .into_iter()
        .map(|(model, innovation, n, method)| {
            let (mean_mse, sd_mse) = mean_sd(&groups[&(model, innovation, n, method)]);
            SummaryRow {
                model,
                innovation,
                n,
                method,
                mean_mse,
                sd_mse,
            }
        })
        .collect()
}

pub fn summary_csv(summary: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for s in summary {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            s.model, s.innovation, s.n, s.method, s.mean_mse, s.sd_mse
        );
    }
    out
}

/// Runs the study with `jobs` workers (0 = rayon's default) and writes
/// `results.csv` and `summary.csv` into `out_dir`.
pub fn run_experiment(config: &ExperimentConfig, jobs: usize, out_dir: &Path) -> CliResult<ExperimentOutput> {
    config.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let results_path = out_dir.join("results.csv");
    let summary_path = out_dir.join("summary.csv");
    let mut writer = BufWriter::new(File::create(&results_path)?);
    writeln!(writer, "{RESULTS_HEADER}")?;
    writer.flush()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Runtime(format!("cannot start worker pool: {e}")))?;
    let all = tasks(config);
    let failed = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<(usize, CliResult<Vec<ResultRow>>)>();

    let mut rows = Vec::with_capacity(all.len() * METHODS.len());
    let mut first_error: Option<CliError> = None;
    std::thread::scope(|scope| -> CliResult<()> {
        scope.spawn(|| {
            pool.install(|| {
                all.par_iter().enumerate().for_each_with(tx, |tx, (i, task)| {
                    let result = if failed.load(Ordering::Relaxed) {
                        Err(CliError::Runtime("cancelled".into()))
                    } else {
                        run_task(config, task)
                    };
                    if result.is_err() {
                        failed.store(true, Ordering::Relaxed);
                    }
                    let _ = tx.send((i, result));
                });
            });
        });
        let mut pending = BTreeMap::new();
        let mut next = 0usize;
        for (i, result) in rx {
            pending.insert(i, result);
            while let Some(result) = pending.remove(&next) {
                next += 1;
                if first_error.is_some() {
                    continue;
                }
                match result {
                    Ok(task_rows) => {
                        for r in &task_rows {
                            writeln!(writer, "{}", r.csv())?;
                        }
                        writer.flush()?;
                        rows.extend(task_rows);
                    }
                    Err(e) => first_error = Some(e),
                }
            }
        }
        Ok(())
    })?;
    if let Some(e) = first_error {
        return Err(e);
    }

    let summary = summarize(&rows);
    std::fs::write(&summary_path, summary_csv(&summary))?;
    Ok(ExperimentOutput {
        results: rows,
        summary,
        results_path,
        summary_path,
    })
}
