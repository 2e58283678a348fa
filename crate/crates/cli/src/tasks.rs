//! Per-point computations for every sweep task.

use serde_json::{json, Value};
use spinlase_core::dicke::{converge_cutoff, CutoffPolicy};
use spinlase_core::fluctuations::{
    below_threshold_stats, fluct_coeffs, principal_spectra, q_representation, squeeze_db, GridSpec,
    Truncation,
};
use spinlase_core::meanfield::{
    hysteresis_ramp, phase_boundaries, phase_from_stability, ramp_jumps, solve_stationary, Branch,
    RampControls, RampDirection, RampPoint, StationarySolution,
};
use spinlase_core::model::{classify_phase, cooperativity_branches};
use spinlase_core::{Error, ModelParams, Phase};

use crate::config::{SweepSpec, Task};
use crate::output::Cell;

/// Outcome of one grid point.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub cells: Vec<Cell>,
    pub payload: Option<Value>,
    pub error: Option<(String, String)>,
}

impl PointResult {
    fn ok(cells: Vec<Cell>, payload: Option<Value>) -> Self {
        Self {
            cells,
            payload,
            error: None,
        }
    }

    fn failed(task: Task, e: &Error) -> Self {
        let cells = vec![Cell::Empty; columns(task).len()];
        Self {
            cells,
            payload: None,
            error: Some((error_tag(e).to_string(), e.to_string())),
        }
    }
}

pub fn error_tag(e: &Error) -> &'static str {
    match e {
        Error::InvalidParameter { .. } => "InvalidParameter",
        Error::DegenerateRates => "DegenerateRates",
        Error::ComplexBranches { .. } => "ComplexBranches",
        Error::StepFailure { .. } => "StepFailure",
        Error::BoundViolation { .. } => "BoundViolation",
        Error::NotStationary { .. } => "NotStationary",
        Error::AboveThreshold { .. } => "AboveThreshold",
        Error::BelowThreshold => "BelowThreshold",
        Error::TruncationFailure { .. } => "TruncationFailure",
        Error::NegativeQ { .. } => "NegativeQ",
        Error::DomainError { .. } => "DomainError",
        Error::DegenerateNullSpace { .. } => "DegenerateNullSpace",
        Error::Factorization => "Factorization",
        Error::CutoffExceeded { .. } => "CutoffExceeded",
        Error::DimensionTooLarge { .. } => "DimensionTooLarge",
    }
}

/// Task-specific CSV columns, after the parameter columns.
pub fn columns(task: Task) -> &'static [&'static str] {
    match task {
        Task::PhaseDiagram => &[
            "phase",
            "stability_phase",
            "c_plus",
            "c_minus",
            "a2_over_n",
            "jz_over_n",
            "eps1",
            "eps2",
            "eps3",
            "eps4",
        ],
        Task::SqueezeMap => &[
            "phase",
            "a2_over_n",
            "kappa_a",
            "d_a",
            "d_phi",
            "chi",
            "zeta0_db",
        ],
        Task::Spectra => &[
            "phase",
            "kappa_a",
            "d_a",
            "d_phi",
            "chi",
            "zeta0_db",
            "theta",
            "squeezed_axis",
        ],
        Task::Hysteresis => &[
            "w_min",
            "w_max",
            "steps",
            "jump_up_w",
            "jump_down_w",
            "bistable_w_min",
            "bistable_w_max",
            "unconverged",
        ],
        Task::QSnapshots => &["kappa_a", "d_a", "d_phi", "chi", "a_mag"],
        Task::ExactSteadyState => &[
            "n_cut",
            "dim",
            "n_photons",
            "jz_over_n",
            "fano",
            "tail_mass",
            "relative_gap",
            "mf_phase",
            "thermal_n_photons",
        ],
    }
}

pub fn run_point(spec: &SweepSpec, task: Task, p: &ModelParams) -> PointResult {
    let r = match task {
        Task::PhaseDiagram => phase_diagram(p),
        Task::SqueezeMap => squeeze_map(p),
        Task::Spectra => spectra(spec, p),
        Task::Hysteresis => hysteresis(spec, p),
        Task::QSnapshots => q_snapshots(spec, p),
        Task::ExactSteadyState => exact(spec, p),
    };
    r.unwrap_or_else(|e| PointResult::failed(task, &e))
}

fn phase_cell(p: Phase) -> Cell {
    Cell::from(p.as_str())
}

/// Stable lasing solution with the most photons, falling back to any lasing one.
fn lasing_solution(sols: &[StationarySolution]) -> Option<&StationarySolution> {
    let by_photons = |a: &&StationarySolution, b: &&StationarySolution| {
        a.state.photons().partial_cmp(&b.state.photons()).unwrap()
    };
    let lasing = || sols.iter().filter(|s| s.branch != Branch::Normal);
    lasing()
        .filter(|s| s.stable)
        .max_by(by_photons)
        .or_else(|| lasing().max_by(by_photons))
}

fn phase_diagram(p: &ModelParams) -> Result<PointResult, Error> {
    let phase = classify_phase(p)?;
    let b = cooperativity_branches(p)?;
    let sols = solve_stationary(p)?;
    let n = p.n();
    let (a2, jz) = match (phase, lasing_solution(&sols)) {
        (Phase::Normal, _) | (_, None) => (0.0, sols[0].state.jz),
        (_, Some(s)) => (s.state.photons(), s.state.jz),
    };
    let pb = phase_boundaries(p)?;
    Ok(PointResult::ok(
        vec![
            phase_cell(phase),
            phase_cell(phase_from_stability(&sols)),
            b.c_plus.into(),
            b.c_minus.into(),
            (a2 / n).into(),
            (jz / n).into(),
            pb.eps1.into(),
            pb.eps2.into(),
            pb.eps3.into(),
            pb.eps4.into(),
        ],
        None,
    ))
}

fn squeeze_map(p: &ModelParams) -> Result<PointResult, Error> {
    let phase = classify_phase(p)?;
    let cells = match fluct_coeffs(p) {
        Ok(c) => vec![
            phase_cell(phase),
            (c.a_mag * c.a_mag / p.n()).into(),
            c.kappa_a.into(),
            c.d_a.into(),
            c.d_phi.into(),
            c.chi.into(),
            squeeze_db(&c)?.into(),
        ],
        Err(Error::BelowThreshold) => {
            vec![
                phase_cell(phase),
                0.0.into(),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                0.0.into(),
            ]
        }
        Err(e) => return Err(e),
    };
    Ok(PointResult::ok(cells, None))
}

fn spectra(spec: &SweepSpec, p: &ModelParams) -> Result<PointResult, Error> {
    let phase = classify_phase(p)?;
    let phys = fluct_coeffs(p)?;
    let s = &spec.spectra;
    let c = if s.amplitude_diffusion {
        phys
    } else {
        phys.with_d_a(0.0)
    };
    let half = s.omega_max * c.kappa_a;
    let grid: Vec<f64> = (0..s.points)
        .map(|k| -half + 2.0 * half * k as f64 / (s.points - 1) as f64)
        .collect();
    let sp = principal_spectra(&c, &grid);
    let reference = principal_spectra(&c.with_chi(0.0), &grid);
    let payload = json!({
        "omega": sp.omega_grid,
        "s_plus": sp.s_plus,
        "s_minus": sp.s_minus,
        "s_reference": reference.s_plus,
        "theta": sp.theta,
        "squeezed_axis": sp.squeezed_axis,
    });
    Ok(PointResult::ok(
        vec![
            phase_cell(phase),
            c.kappa_a.into(),
            phys.d_a.into(),
            c.d_phi.into(),
            c.chi.into(),
            squeeze_db(&c)?.into(),
            sp.theta.into(),
            sp.squeezed_axis.into(),
        ],
        Some(payload),
    ))
}

fn ramp_json(p: &ModelParams, ramp: &[RampPoint]) -> Value {
    let n = p.n();
    let jumps: Vec<Value> = ramp_jumps(ramp)
        .into_iter()
        .map(|(w0, w1, from, to)| json!({ "w_before": w0, "w_after": w1, "from": from.as_str(), "to": to.as_str() }))
        .collect();
    json!({
        "pump_w": ramp.iter().map(|r| r.pump_w).collect::<Vec<_>>(),
        "jz_over_n": ramp.iter().map(|r| r.state.jz / n).collect::<Vec<_>>(),
        "a2_over_n": ramp.iter().map(|r| r.state.photons() / n).collect::<Vec<_>>(),
        "branch": ramp.iter().map(|r| r.branch.as_str()).collect::<Vec<_>>(),
        "converged": ramp.iter().map(|r| r.converged).collect::<Vec<_>>(),
        "jumps": jumps,
    })
}

/// Midpoint of the last lasing-to-normal jump (`to_normal`) or of the first
/// normal-to-lasing jump.
fn ramp_jump(ramp: &[RampPoint], to_normal: bool) -> Option<f64> {
    let jumps = ramp_jumps(ramp);
    let mid = |j: &(f64, f64, Branch, Branch)| 0.5 * (j.0 + j.1);
    if to_normal {
        jumps.iter().rev().find(|j| j.3 == Branch::Normal).map(mid)
    } else {
        jumps.iter().find(|j| j.2 == Branch::Normal).map(mid)
    }
}

fn hysteresis(spec: &SweepSpec, p: &ModelParams) -> Result<PointResult, Error> {
    let (lo, hi) = spec.ramp_range().expect("checked at load");
    let h = &spec.hysteresis;
    let ctl = RampControls {
        max_time_gamma: h.max_time_gamma,
        ..RampControls::default()
    };
    let up = hysteresis_ramp(p, lo, hi, h.steps, RampDirection::Up, &ctl)?;
    let down = hysteresis_ramp(p, lo, hi, h.steps, RampDirection::Down, &ctl)?;
    let mut bistable: Option<(f64, f64)> = None;
    for r in &up {
        if classify_phase(&p.at_pump(r.pump_w))? == Phase::Bistable {
            let (a, b) = bistable.unwrap_or((r.pump_w, r.pump_w));
            bistable = Some((a.min(r.pump_w), b.max(r.pump_w)));
        }
    }
    let unconverged = up.iter().chain(&down).filter(|r| !r.converged).count();
    let payload = json!({ "up": ramp_json(p, &up), "down": ramp_json(p, &down) });
    Ok(PointResult::ok(
        vec![
            lo.into(),
            hi.into(),
            h.steps.into(),
            ramp_jump(&up, true).into(),
            ramp_jump(&down, false).into(),
            bistable.map(|b| b.0).into(),
            bistable.map(|b| b.1).into(),
            unconverged.into(),
        ],
        Some(payload),
    ))
}

fn q_snapshots(spec: &SweepSpec, p: &ModelParams) -> Result<PointResult, Error> {
    let c = fluct_coeffs(p)?;
    let s = &spec.q_snapshots;
    let grid = GridSpec::around_peak(&c, s.half_width, s.points);
    let tr = Truncation {
        tol: s.tol,
        ..Truncation::default()
    };
    let mut snaps = Vec::with_capacity(s.times.len());
    for &t in &s.times {
        let q = q_representation(&c, s.z0, s.phi0, t, &grid, &tr)?;
        let (mx, mp, vx, cxp, vp) = q.moments();
        snaps.push(json!({
            "time": t,
            "mass": q.mass(),
            "moments": { "mean_x": mx, "mean_p": mp, "var_x": vx, "cov_xp": cxp, "var_p": vp },
            "values": q.values,
        }));
    }
    let payload = json!({ "x": grid.xs(), "p": grid.ps(), "snapshots": snaps });
    Ok(PointResult::ok(
        vec![
            c.kappa_a.into(),
            c.d_a.into(),
            c.d_phi.into(),
            c.chi.into(),
            c.a_mag.into(),
        ],
        Some(payload),
    ))
}

fn exact(spec: &SweepSpec, p: &ModelParams) -> Result<PointResult, Error> {
    let e = &spec.exact;
    let policy = CutoffPolicy {
        start: e.n_cut_start,
        max_cutoff: e.n_cut_max,
        tail_tol: e.tail_tol,
        tail_window: e.tail_window,
    };
    let conv = converge_cutoff(p, &policy)?;
    let sol = &conv.solution;
    let d = sol.distributions();
    let thermal = below_threshold_stats(p).ok().map(|s| s.n_photons);
    let last = conv.ladder.last().expect("ladder holds the accepted step");
    let ladder: Vec<Value> = conv
        .ladder
        .iter()
        .map(|s| json!({ "n_cut": s.n_cut, "dim": s.dim, "tail_mass": s.tail_mass, "n_photons": s.n_photons }))
        .collect();
    let payload = json!({
        "photon_pmf": d.photon_pmf,
        "spin_pmf": d.spin_pmf,
        "two_j_min": d.two_j_min(),
        "joint_jm": d.joint_jm,
        "ladder": ladder,
    });
    Ok(PointResult::ok(
        vec![
            conv.n_cut.into(),
            last.dim.into(),
            sol.n_photons().into(),
            (sol.jz() / p.n()).into(),
            d.fano_factor().into(),
            last.tail_mass.into(),
            sol.relative_gap.into(),
            phase_cell(classify_phase(p)?),
            thermal.into(),
        ],
        Some(payload),
    ))
}
