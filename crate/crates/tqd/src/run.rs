//! Trace and sweep execution.

use anyhow::{anyhow, Context};
use rayon::prelude::*;

use tqd_core::dynamics::{run_fidelity_trace, FidelityTrace, System};

use crate::config::ExperimentConfig;
use crate::output::CsvRecord;

/// Rows plus the number of runs that had driver divergences or failures.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub records: Vec<CsvRecord>,
    pub divergence_events: usize,
    pub failed_runs: usize,
    pub messages: Vec<String>,
}

impl RunOutput {
    /// 0 on success, 2 when any run diverged or failed but rows were written.
    pub fn exit_code(&self) -> i32 {
        if self.divergence_events > 0 || self.failed_runs > 0 {
            2
        } else {
            0
        }
    }
}

struct Job {
    protocol: usize,
    n: usize,
}

fn jobs(cfg: &ExperimentConfig) -> Vec<Job> {
    let sizes = cfg.run_sizes();
    (0..cfg.schedules.len()).flat_map(|protocol| sizes.iter().map(move |&n| Job { protocol, n })).collect()
}

fn execute(cfg: &ExperimentConfig, job: &Job) -> anyhow::Result<FidelityTrace> {
    let p = &cfg.schedules[job.protocol];
    let system = System::new(p.model(cfg.model, job.n)?)?;
    let tc = cfg.trace_config(system.duration());
    Ok(run_fidelity_trace(&system, cfg.driver_mode.mode(), &tc)?)
}

fn pool(threads: usize) -> anyhow::Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build().context("thread pool")
}

/// Runs every `(protocol, N)` pair. Results are ordered by protocol, then N,
/// whatever the thread count.
fn run_all(cfg: &ExperimentConfig, threads: usize) -> anyhow::Result<Vec<(Job, anyhow::Result<FidelityTrace>)>> {
    let jobs = jobs(cfg);
    let results: Vec<_> = pool(threads)?.install(|| jobs.par_iter().map(|j| execute(cfg, j)).collect());
    Ok(jobs.into_iter().zip(results).collect())
}

fn record(cfg: &ExperimentConfig, job: &Job, r: &tqd_core::dynamics::TraceRecord) -> CsvRecord {
    CsvRecord {
        t: r.t,
        fidelity: Some(r.fidelity),
        min_gap: r.min_gap,
        adiabaticity: r.adiabaticity,
        norm_drift: r.norm_drift,
        n: job.n,
        protocol: cfg.schedules[job.protocol].label(),
        mode: cfg.driver_mode.as_str().to_string(),
    }
}

/// One row per output point of every run. Any failed run is fatal.
pub fn trace(cfg: &ExperimentConfig, threads: usize) -> anyhow::Result<RunOutput> {
    let mut out = RunOutput::default();
    for (job, result) in run_all(cfg, threads)? {
        let label = cfg.schedules[job.protocol].label();
        let tr = result.map_err(|e| anyhow!("{label} N={}: {e:#}", job.n))?;
        if tr.divergence_events > 0 {
            out.messages.push(format!("{label} N={}: driver diverged at {} evaluations", job.n, tr.divergence_events));
        }
        out.divergence_events += tr.divergence_events;
        out.records.extend(tr.records.iter().map(|r| record(cfg, &job, r)));
    }
    Ok(out)
}

/// One row per `(protocol, N)` with the final-time values. Failed runs
/// produce an error row.
pub fn sweep(cfg: &ExperimentConfig, threads: usize) -> anyhow::Result<RunOutput> {
    let mut out = RunOutput::default();
    for (job, result) in run_all(cfg, threads)? {
        let p = &cfg.schedules[job.protocol];
        match result {
            Ok(tr) => {
                if tr.divergence_events > 0 {
                    out.messages.push(format!("{} N={}: driver diverged at {} evaluations", p.label(), job.n, tr.divergence_events));
                }
                out.divergence_events += tr.divergence_events;
                out.records.push(record(cfg, &job, tr.records.last().expect("nonempty trace")));
            }
            Err(e) => {
                out.messages.push(format!("{} N={}: {e:#}", p.label(), job.n));
                out.failed_runs += 1;
                out.records.push(CsvRecord {
                    t: p.duration()?,
                    fidelity: None,
                    min_gap: f64::NAN,
                    adiabaticity: f64::NAN,
                    norm_drift: f64::NAN,
                    n: job.n,
                    protocol: p.label(),
                    mode: cfg.driver_mode.as_str().to_string(),
                });
            }
        }
    }
    Ok(out)
}
