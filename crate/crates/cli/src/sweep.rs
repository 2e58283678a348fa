//! Parallel sweep driver.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::json;

use crate::config::{ConfigError, SweepSpec, Task};
use crate::output::{
    prune_empty, to_json, write_bytes, write_csv, Cell, Failure, Manifest, TaskEntry, MANIFEST,
};
use crate::tasks::{columns, run_point, PointResult};

pub const PARAM_COLUMNS: [&str; 9] = [
    "n_spins",
    "g",
    "g_sqrt_n",
    "delta",
    "epsilon",
    "kappa",
    "gamma",
    "pump_w",
    "gamma_phi",
];

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}: directory is not empty and holds no {MANIFEST}")]
    Unmanaged(PathBuf),
    #[error("no output directory: pass --out or set run.out")]
    NoOutput,
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SweepReport {
    pub records: usize,
    pub failures: usize,
}

/// Open `dir` for writing, returning the manifest of an earlier run there.
pub fn open_output(dir: &Path) -> Result<Manifest, SweepError> {
    if !dir.exists() {
        fs::create_dir_all(dir)?;
        return Ok(Manifest::default());
    }
    match Manifest::load(dir)? {
        Some(m) => Ok(m),
        None if fs::read_dir(dir)?.next().is_none() => Ok(Manifest::default()),
        None => Err(SweepError::Unmanaged(dir.to_path_buf())),
    }
}

/// Paths owned by `task`: its CSV, sidecars and figures.
pub fn owned_by(task: &str, path: &str) -> bool {
    path == format!("{task}.csv")
        || path.starts_with(&format!("{task}/"))
        || path.starts_with(&format!("figures/{task}"))
}

pub fn payload_path(task: Task, index: usize) -> String {
    format!("{task}/{index:06}.json")
}

fn task_config(spec: &SweepSpec, task: Task) -> serde_json::Value {
    let settings = match task {
        Task::Hysteresis => serde_json::to_value(&spec.hysteresis),
        Task::Spectra => serde_json::to_value(&spec.spectra),
        Task::QSnapshots => serde_json::to_value(&spec.q_snapshots),
        Task::ExactSteadyState => serde_json::to_value(&spec.exact),
        Task::PhaseDiagram | Task::SqueezeMap => Ok(serde_json::Value::Null),
    }
    .expect("settings serialize");
    let mut axes = spec.axes.clone();
    if task == Task::Hysteresis {
        axes.retain(|a| a.name != "pump_w");
    }
    json!({ "params": spec.params, "axes": axes, "settings": settings })
}

fn build_pool(jobs: usize) -> Result<rayon::ThreadPool, SweepError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))
}

/// Run every task of `spec` into `out`; `jobs = 0` uses all cores.
pub fn run_sweep(
    spec: &SweepSpec,
    tasks: &[Task],
    out: &Path,
    jobs: usize,
) -> Result<SweepReport, SweepError> {
    let mut manifest = open_output(out)?;
    let pool = build_pool(jobs)?;
    let mut report = SweepReport::default();
    for &task in tasks {
        let name = task.as_str();
        for f in manifest.files.iter().filter(|f| owned_by(name, &f.path)) {
            let p = out.join(&f.path);
            if p.exists() {
                fs::remove_file(p)?;
            }
        }
        manifest.tasks.remove(name);
        let points = if task == Task::Hysteresis {
            spec.ramp_points()
        } else {
            spec.points()
        };
        let results: Vec<PointResult> = pool.install(|| {
            points
                .par_iter()
                .map(|pt| run_point(spec, task, &pt.params))
                .collect()
        });

        let mut header: Vec<&str> = vec!["index"];
        header.extend(PARAM_COLUMNS);
        header.extend(columns(task));
        header.extend(["payload", "error"]);
        let mut rows = Vec::with_capacity(points.len());
        let mut failures = Vec::new();
        for (pt, r) in points.iter().zip(&results) {
            let m = &pt.params;
            let mut row: Vec<Cell> = vec![
                pt.index.into(),
                Cell::Int(m.n_spins),
                m.g.into(),
                m.collective_coupling().into(),
                m.delta.into(),
                m.epsilon.into(),
                m.kappa.into(),
                m.gamma.into(),
                m.pump_w.into(),
                m.gamma_phi.into(),
            ];
            row.extend(r.cells.iter().cloned());
            match &r.payload {
                Some(v) => {
                    let rel = payload_path(task, pt.index);
                    write_bytes(&out.join(&rel), &to_json(v))?;
                    row.push(Cell::Text(rel));
                }
                None => row.push(Cell::Empty),
            }
            match &r.error {
                Some((tag, message)) => {
                    row.push(Cell::Text(tag.clone()));
                    failures.push(Failure {
                        index: pt.index,
                        tag: tag.clone(),
                        message: message.clone(),
                    });
                }
                None => row.push(Cell::Empty),
            }
            rows.push(row);
        }
        let csv = format!("{name}.csv");
        write_csv(&out.join(&csv), &header, &rows)?;
        report.records += rows.len();
        report.failures += failures.len();
        manifest.tasks.insert(
            name.to_string(),
            TaskEntry {
                config: task_config(spec, task),
                records: rows.len(),
                csv,
                failures,
            },
        );
    }
    prune_empty(out)?;
    manifest.store(out)?;
    Ok(report)
}
