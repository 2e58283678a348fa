//! SVG figures from a result directory.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::Path;

use serde_json::Value;

use crate::config::{Axis, Task};
use crate::output::{write_bytes, Manifest, MANIFEST};
use crate::svg::{heatmap, line_plot, Fill, Series, PALETTE};

#[derive(Debug, thiserror::Error)]
pub enum FigureError {
    #[error("{0}: no {MANIFEST}; run a sweep first")]
    NoResults(String),
    #[error("missing payload {0}")]
    MissingPayload(String),
    #[error("malformed results: {0}")]
    Malformed(String),
    #[error("io error: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Default)]
pub struct FigureReport {
    pub written: Vec<String>,
    /// Per-figure failures; the other figures are still written.
    pub errors: Vec<FigureError>,
}

type Row = HashMap<String, String>;

fn read_rows(path: &Path) -> Result<Vec<Row>, FigureError> {
    if !path.exists() {
        return Err(FigureError::MissingPayload(path.display().to_string()));
    }
    let mut r = csv::Reader::from_path(path).map_err(|e| FigureError::Malformed(e.to_string()))?;
    let header = r
        .headers()
        .map_err(|e| FigureError::Malformed(e.to_string()))?
        .clone();
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| FigureError::Malformed(e.to_string()))?;
            Ok(header
                .iter()
                .zip(rec.iter())
                .map(|(h, v)| (h.to_string(), v.to_string()))
                .collect())
        })
        .collect()
}

fn num(row: &Row, key: &str) -> Option<f64> {
    row.get(key).and_then(|s| s.parse().ok())
}

fn text<'a>(row: &'a Row, key: &str) -> &'a str {
    row.get(key).map(String::as_str).unwrap_or("")
}

fn floats(v: &Value, key: &str) -> Result<Vec<f64>, FigureError> {
    v.get(key)
        .and_then(Value::as_array)
        .map(|a| a.iter().map(|x| x.as_f64().unwrap_or(f64::NAN)).collect())
        .ok_or_else(|| FigureError::Malformed(format!("payload lacks `{key}`")))
}

fn label(row: &Row, with_pump: bool) -> String {
    let mut s = String::new();
    for (k, name) in [("epsilon", "ε"), ("pump_w", "w"), ("n_spins", "N")] {
        if k == "pump_w" && !with_pump {
            continue;
        }
        if let Some(v) = num(row, k) {
            if !s.is_empty() {
                s.push_str(", ");
            }
            s.push_str(&format!("{name} = {}", crate::svg::tick(v)));
        }
    }
    s
}

struct Out<'a> {
    dir: &'a Path,
    report: FigureReport,
}

impl Out<'_> {
    fn write(&mut self, name: String, svg: String) -> io::Result<()> {
        let rel = format!("figures/{name}.svg");
        write_bytes(&self.dir.join(&rel), svg.as_bytes())?;
        self.report.written.push(rel);
        Ok(())
    }

    fn payload(&self, row: &Row) -> Result<Value, FigureError> {
        let rel = text(row, "payload");
        let path = self.dir.join(rel);
        let bytes = fs::read(&path).map_err(|_| FigureError::MissingPayload(rel.to_string()))?;
        serde_json::from_slice(&bytes).map_err(|e| FigureError::Malformed(format!("{rel}: {e}")))
    }
}

/// Write figures for every task in the manifest (or only `only`).
pub fn emit_figures(dir: &Path, only: Option<&[Task]>) -> Result<FigureReport, FigureError> {
    let mut manifest =
        Manifest::load(dir)?.ok_or_else(|| FigureError::NoResults(dir.display().to_string()))?;
    let old = dir.join("figures");
    if old.exists() {
        for task in manifest.tasks.keys() {
            if only.is_some_and(|o| !o.iter().any(|t| t.as_str() == task)) {
                continue;
            }
            for e in fs::read_dir(&old)? {
                let e = e?;
                if e.file_name().to_string_lossy().starts_with(task.as_str()) {
                    fs::remove_file(e.path())?;
                }
            }
        }
    }
    let mut out = Out {
        dir,
        report: FigureReport::default(),
    };
    for (name, entry) in &manifest.tasks {
        let Some(task) = Task::parse(name) else {
            continue;
        };
        if only.is_some_and(|o| !o.contains(&task)) {
            continue;
        }
        let rows = match read_rows(&dir.join(&entry.csv)) {
            Ok(r) => r,
            Err(e) => {
                out.report.errors.push(e);
                continue;
            }
        };
        let axes: Vec<Axis> = serde_json::from_value(entry.config["axes"].clone())
            .map_err(|e| FigureError::Malformed(format!("{MANIFEST}: {e}")))?;
        match task {
            Task::PhaseDiagram => {
                grid_figure(&mut out, task, "a2", &axes, &rows, "a2_over_n", "|a|²/N")?;
                phase_figure(&mut out, &axes, &rows)?;
            }
            Task::SqueezeMap => grid_figure(
                &mut out,
                task,
                "zeta",
                &axes,
                &rows,
                "zeta0_db",
                "ζ(0) [dB]",
            )?,
            _ => {
                for row in rows.iter().filter(|r| !text(r, "payload").is_empty()) {
                    let res = out
                        .payload(row)
                        .and_then(|v| point_figure(&mut out, task, row, &v));
                    if let Err(e) = res {
                        out.report.errors.push(e);
                    }
                }
            }
        }
    }
    let mut report = out.report;
    report.written.sort();
    manifest.store(dir)?;
    Ok(report)
}

/// Axes with more than one value, as `(axis position, axis)`.
fn active(axes: &[Axis]) -> Vec<(usize, &Axis)> {
    axes.iter()
        .enumerate()
        .filter(|(_, a)| a.count > 1)
        .collect()
}

fn strides(axes: &[Axis]) -> Vec<usize> {
    let mut s = vec![1; axes.len()];
    for k in (0..axes.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * axes[k + 1].count;
    }
    s
}

fn grid_figure(
    out: &mut Out<'_>,
    task: Task,
    suffix: &str,
    axes: &[Axis],
    rows: &[Row],
    key: &str,
    what: &str,
) -> Result<(), FigureError> {
    let act = active(axes);
    let st = &strides(axes);
    let title = format!("{what} ({task})");
    match act.as_slice() {
        [(k, a)] => {
            let xs = a.values();
            let ys = (0..a.count)
                .map(|i| {
                    rows.get(i * st[*k])
                        .and_then(|r| num(r, key))
                        .unwrap_or(f64::NAN)
                })
                .collect();
            let s = Series {
                label: key.into(),
                xs,
                ys,
                color: PALETTE[1],
                dashed: false,
            };
            out.write(
                format!("{task}-{suffix}"),
                line_plot(&title, &a.name, what, &[s], false),
            )?;
        }
        [(kx, ax), (ky, ay)] => {
            let values: Vec<Option<f64>> = (0..ay.count)
                .flat_map(|iy| (0..ax.count).map(move |ix| iy * st[*ky] + ix * st[*kx]))
                .map(|i| rows.get(i).and_then(|r| num(r, key)))
                .collect();
            let svg = heatmap(
                &title,
                &ax.name,
                &ay.name,
                &ax.values(),
                &ay.values(),
                Fill::Scalar {
                    values: &values,
                    label: what,
                },
            );
            out.write(format!("{task}-{suffix}"), svg)?;
        }
        _ => {}
    }
    Ok(())
}

fn phase_figure(out: &mut Out<'_>, axes: &[Axis], rows: &[Row]) -> Result<(), FigureError> {
    let act = active(axes);
    let [(kx, ax), (ky, ay)] = act.as_slice() else {
        return Ok(());
    };
    let st = &strides(axes);
    let names: Vec<String> = ["normal", "lasing", "bistable"].map(String::from).to_vec();
    let values: Vec<Option<usize>> = (0..ay.count)
        .flat_map(|iy| (0..ax.count).map(move |ix| iy * st[*ky] + ix * st[*kx]))
        .map(|i| {
            rows.get(i)
                .and_then(|r| names.iter().position(|n| n == text(r, "phase")))
        })
        .collect();
    let svg = heatmap(
        "phase (phase-diagram)",
        &ax.name,
        &ay.name,
        &ax.values(),
        &ay.values(),
        Fill::Categorical {
            values: &values,
            names: &names,
        },
    );
    Ok(out.write("phase-diagram-phase".into(), svg)?)
}

fn point_figure(out: &mut Out<'_>, task: Task, row: &Row, v: &Value) -> Result<(), FigureError> {
    let index: usize = num(row, "index").map(|i| i as usize).unwrap_or(0);
    let stem = format!("{task}-{index:06}");
    let lab = label(row, task != Task::Hysteresis);
    match task {
        Task::Spectra => {
            let omega = floats(v, "omega")?;
            let series = [
                ("S₊", "s_plus", PALETTE[0], false),
                ("S₋", "s_minus", PALETTE[1], false),
                ("χ = 0", "s_reference", PALETTE[2], true),
            ]
            .into_iter()
            .map(|(l, k, color, dashed)| {
                Ok(Series {
                    label: l.into(),
                    xs: omega.clone(),
                    ys: floats(v, k)?,
                    color,
                    dashed,
                })
            })
            .collect::<Result<Vec<_>, FigureError>>()?;
            out.write(
                stem,
                line_plot(&format!("noise spectra, {lab}"), "ω", "S(ω)", &series, true),
            )?;
        }
        Task::Hysteresis => {
            let mut series = Vec::new();
            for (dir, color) in [("up", PALETTE[0]), ("down", PALETTE[1])] {
                let r = &v[dir];
                series.push(Series {
                    label: dir.into(),
                    xs: floats(r, "pump_w")?,
                    ys: floats(r, "jz_over_n")?,
                    color,
                    dashed: dir == "down",
                });
            }
            out.write(
                stem,
                line_plot(&format!("hysteresis, {lab}"), "w", "Jᶻ/N", &series, false),
            )?;
        }
        Task::QSnapshots => {
            let (xs, ps) = (floats(v, "x")?, floats(v, "p")?);
            let snaps = v["snapshots"].as_array().cloned().unwrap_or_default();
            for (k, s) in snaps.iter().enumerate() {
                let values: Vec<Option<f64>> = floats(s, "values")?.into_iter().map(Some).collect();
                let t = s["time"].as_f64().unwrap_or(f64::NAN);
                let svg = heatmap(
                    &format!("Q at t = {}, {lab}", crate::svg::tick(t)),
                    "x",
                    "p",
                    &xs,
                    &ps,
                    Fill::Scalar {
                        values: &values,
                        label: "Q",
                    },
                );
                out.write(format!("{stem}-s{k}"), svg)?;
            }
        }
        Task::ExactSteadyState => {
            let pmf = floats(v, "photon_pmf")?;
            let n: Vec<f64> = (0..pmf.len()).map(|k| k as f64).collect();
            let s = Series {
                label: "P(n)".into(),
                xs: n,
                ys: pmf,
                color: PALETTE[1],
                dashed: false,
            };
            out.write(
                format!("{stem}-photons"),
                line_plot(&format!("photon pmf, {lab}"), "n", "P(n)", &[s], true),
            )?;
            let spin = floats(v, "spin_pmf")?;
            let half = (spin.len() - 1) as f64 / 2.0;
            let m: Vec<f64> = (0..spin.len()).map(|k| k as f64 - half).collect();
            let s = Series {
                label: "P(M)".into(),
                xs: m.clone(),
                ys: spin,
                color: PALETTE[0],
                dashed: false,
            };
            out.write(
                format!("{stem}-spin"),
                line_plot(&format!("spin pmf, {lab}"), "M", "P(M)", &[s], false),
            )?;
            let two_j_min = v["two_j_min"].as_f64().unwrap_or(0.0);
            let joint = v["joint_jm"].as_array().cloned().unwrap_or_default();
            let js: Vec<f64> = (0..joint.len())
                .map(|k| two_j_min / 2.0 + k as f64)
                .collect();
            let mut values = Vec::new();
            for row in &joint {
                let r: Vec<f64> = row
                    .as_array()
                    .map(|a| a.iter().map(|x| x.as_f64().unwrap_or(0.0)).collect())
                    .unwrap_or_default();
                values.extend(r.into_iter().map(Some));
            }
            if !js.is_empty() && values.len() == js.len() * m.len() {
                let svg = heatmap(
                    &format!("P(J, M), {lab}"),
                    "M",
                    "J",
                    &m,
                    &js,
                    Fill::Scalar {
                        values: &values,
                        label: "P",
                    },
                );
                out.write(format!("{stem}-joint"), svg)?;
            }
        }
        Task::PhaseDiagram | Task::SqueezeMap => {}
    }
    Ok(())
}
