//! Mean-field dynamics of the cavity amplitude `a`, the magnon amplitude `J⁻`
//! and the polarization `Jᶻ`: right-hand side, time integration, closed-form
//! stationary states, linear stability, analytic phase boundaries and
//! quasi-adiabatic pump ramps.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{
    cooperativity_at, cooperativity_branches, derive_rates, effective_detuning, DerivedRates,
    ModelParams, Phase, BRANCH_TOL,
};
use crate::ode::{self, OdeControls};

/// Mean-field amplitudes in the frame rotating at the laser frequency.
///
/// The same struct doubles as a tangent vector (time derivatives).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldState {
    pub a: C64,
    pub j_minus: C64,
    pub jz: f64,
}

impl MeanFieldState {
    pub fn norm(&self) -> f64 {
        (self.a.norm_sqr() + self.j_minus.norm_sqr() + self.jz * self.jz).sqrt()
    }

    pub fn photons(&self) -> f64 {
        self.a.norm_sqr()
    }

    fn to_array(self) -> [f64; 5] {
        [
            self.a.re,
            self.a.im,
            self.j_minus.re,
            self.j_minus.im,
            self.jz,
        ]
    }

    fn from_array(y: &[f64; 5]) -> Self {
        Self {
            a: C64::new(y[0], y[1]),
            j_minus: C64::new(y[2], y[3]),
            jz: y[4],
        }
    }

    /// Rotate the U(1) phase so that `a` is real and non-negative.
    pub fn gauge_fixed(&self) -> Self {
        let r = self.a.norm();
        if r == 0.0 {
            return *self;
        }
        let rot = self.a.conj() / r;
        Self {
            a: C64::new(r, 0.0),
            j_minus: self.j_minus * rot,
            jz: self.jz,
        }
    }

    /// Seed used to trigger lasing without noise: `a = 10⁻³√N`, `J⁻ = 0`, `Jᶻ = −N/2`.
    pub fn standard_seed(p: &ModelParams) -> Self {
        Self {
            a: C64::new(1e-3 * p.n().sqrt(), 0.0),
            j_minus: C64::new(0.0, 0.0),
            jz: -0.5 * p.n(),
        }
    }

    /// Non-lasing state `a = J⁻ = 0`, `Jᶻ = (N/2)(w−γ)/(w+γ)`.
    pub fn normal(p: &ModelParams, rates: &DerivedRates) -> Self {
        Self {
            a: C64::new(0.0, 0.0),
            j_minus: C64::new(0.0, 0.0),
            jz: 0.5 * p.n() * rates.pump_factor,
        }
    }
}

/// Time derivative of the mean-field amplitudes.
///
/// `omega_offset = ω_L − ω_c` is the frequency of the rotating frame relative
/// to the cavity.
pub fn mf_rhs(p: &ModelParams, s: &MeanFieldState, omega_offset: f64) -> MeanFieldState {
    let kappa_s = p.pump_w + p.gamma + p.gamma_phi;
    let de = effective_detuning(p, s.jz);
    let i = C64::new(0.0, 1.0);
    let da = (i * omega_offset - 0.5 * p.kappa) * s.a + p.g * s.j_minus;
    let dj = (-i * (de - omega_offset) - 0.5 * kappa_s) * s.j_minus + 2.0 * p.g * s.jz * s.a;
    let djz = 0.5 * p.n() * (p.pump_w - p.gamma)
        - (p.pump_w + p.gamma) * s.jz
        - 2.0 * p.g * (s.a * s.j_minus.conj()).re;
    MeanFieldState {
        a: da,
        j_minus: dj,
        jz: djz,
    }
}

/// Lasing frequency offset `ω_L − ω_c = (κ/Γ) Δ_ε` at polarization `jz`.
pub fn laser_frequency_offset(p: &ModelParams, jz: f64) -> f64 {
    let gamma_total = p.pump_w + p.gamma + p.gamma_phi + p.kappa;
    p.kappa / gamma_total * effective_detuning(p, jz)
}

/// Norm of [`mf_rhs`] in the frame co-rotating with the frequency-pulled laser.
///
/// This vanishes at every stationary point, lasing or not, independently of
/// the global phase.
pub fn stationarity_residual(p: &ModelParams, s: &MeanFieldState) -> f64 {
    mf_rhs(p, s, laser_frequency_offset(p, s.jz)).norm()
}

/// Stationarity tolerance `1e−8 · N · Γ`.
pub fn stationarity_tolerance(p: &ModelParams) -> f64 {
    let gamma_total = p.pump_w + p.gamma + p.gamma_phi + p.kappa;
    1e-8 * p.n() * gamma_total
}

/// Controls for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateControls {
    pub ode: OdeControls,
    /// Frame frequency `ω_L − ω_c` used while integrating.
    pub omega_offset: f64,
    /// Spacing of stored samples (0 stores every accepted step).
    pub sample_dt: f64,
    /// Stop as soon as [`stationarity_residual`] drops below this value.
    pub stop_residual: Option<f64>,
}

impl Default for IntegrateControls {
    fn default() -> Self {
        Self {
            ode: OdeControls::default(),
            omega_offset: 0.0,
            sample_dt: 0.0,
            stop_residual: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<(f64, MeanFieldState)>,
    /// Co-rotating residual at the final sample.
    pub terminal_residual: f64,
    /// True when integration ended because `stop_residual` was met.
    pub reached_stationary: bool,
}

impl Trajectory {
    pub fn last(&self) -> (f64, MeanFieldState) {
        *self
            .samples
            .last()
            .expect("trajectory always holds the initial sample")
    }
}

/// Integrate the mean-field equations over `t_span`.
pub fn integrate(
    p: &ModelParams,
    initial: MeanFieldState,
    t_span: (f64, f64),
    ctl: &IntegrateControls,
) -> Result<Trajectory> {
    p.validate()?;
    let half_n = 0.5 * p.n();
    let bound = half_n + 1e-9 * p.n();
    let mut ode_ctl = ctl.ode;
    if ode_ctl.atol == OdeControls::default().atol {
        ode_ctl.atol *= p.n().max(1.0);
    }
    let mut samples = alloc::vec![(t_span.0, initial)];
    let mut next_sample = t_span.0 + ctl.sample_dt;
    let mut reached = false;
    let omega = ctl.omega_offset;
    let stop = ctl.stop_residual;
    let (t_final, y_final) = ode::integrate(
        |_, y: &[f64; 5]| mf_rhs(p, &MeanFieldState::from_array(y), omega).to_array(),
        t_span.0,
        initial.to_array(),
        t_span.1,
        &ode_ctl,
        |t, y| {
            let s = MeanFieldState::from_array(y);
            if s.jz.abs() > bound {
                return Err(Error::BoundViolation {
                    jz: s.jz.abs(),
                    half_n,
                });
            }
            if ctl.sample_dt <= 0.0 || t >= next_sample {
                samples.push((t, s));
                next_sample = t + ctl.sample_dt;
            }
            if let Some(tol) = stop {
                if stationarity_residual(p, &s) < tol {
                    reached = true;
                    return Ok(false);
                }
            }
            Ok(true)
        },
    )?;
    let last = MeanFieldState::from_array(&y_final);
    if samples.last().map(|(t, _)| *t) != Some(t_final) {
        samples.push((t_final, last));
    }
    Ok(Trajectory {
        terminal_residual: stationarity_residual(p, &last),
        samples,
        reached_stationary: reached,
    })
}

/// Which stationary solution a state corresponds to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Normal,
    /// Lasing on the `C⁺` branch.
    Upper,
    /// Lasing on the `C⁻` branch.
    Lower,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Normal => "normal",
            Branch::Upper => "upper",
            Branch::Lower => "lower",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationarySolution {
    pub branch: Branch,
    pub state: MeanFieldState,
    /// Effective cooperativity evaluated at the solution's `Jᶻ`.
    pub cooperativity: f64,
    pub laser_freq_offset: f64,
    pub stable: bool,
    pub jacobian_eigenvalues: [C64; 5],
}

/// Closed-form lasing amplitudes for a branch value `c > 1`, with `a` real and positive.
pub fn lasing_state(p: &ModelParams, c: f64) -> Result<MeanFieldState> {
    let r = derive_rates(p)?;
    let jz = 0.5 * p.n() * r.pump_factor / c;
    let a_sq = jz.abs() * (p.pump_w + p.gamma) * (c - 1.0) / p.kappa;
    let a = a_sq.max(0.0).sqrt();
    let omega = laser_frequency_offset(p, jz);
    // da/dt = 0 fixes J⁻ = (κ/2 − iω) a / g
    let j_minus = C64::new(0.5 * p.kappa, -omega) * a / p.g;
    Ok(MeanFieldState {
        a: C64::new(a, 0.0),
        j_minus,
        jz,
    })
}

/// Normal state plus one lasing solution per real branch above threshold.
pub fn solve_stationary(p: &ModelParams) -> Result<Vec<StationarySolution>> {
    let r = derive_rates(p)?;
    let mut out = Vec::with_capacity(3);
    let normal = MeanFieldState::normal(p, &r);
    out.push(make_solution(p, &r, Branch::Normal, normal)?);
    let b = cooperativity_branches(p)?;
    for (branch, c) in [(Branch::Upper, b.c_plus), (Branch::Lower, b.c_minus)] {
        if let Some(c) = c {
            if c > 1.0 + BRANCH_TOL && p.g > 0.0 {
                out.push(make_solution(p, &r, branch, lasing_state(p, c)?)?);
            }
        }
    }
    Ok(out)
}

fn make_solution(
    p: &ModelParams,
    r: &DerivedRates,
    branch: Branch,
    state: MeanFieldState,
) -> Result<StationarySolution> {
    let st = jacobian_stability(p, &state)?;
    Ok(StationarySolution {
        branch,
        state,
        cooperativity: cooperativity_at(p, r, state.jz),
        laser_freq_offset: laser_frequency_offset(p, state.jz),
        stable: st.stable,
        jacobian_eigenvalues: st.eigenvalues,
    })
}

/// Jacobian of the mean-field flow, variables ordered `(a, a*, J⁻, J⁺, Jᶻ)`,
/// in the frame rotating at `(κ/Γ) Δ_ε`.
pub fn jacobian(p: &ModelParams, s: &MeanFieldState) -> [[C64; 5]; 5] {
    let kappa_s = p.pump_w + p.gamma + p.gamma_phi;
    let gamma_total = kappa_s + p.kappa;
    let de = effective_detuning(p, s.jz);
    let i = C64::new(0.0, 1.0);
    let z = C64::new(0.0, 0.0);
    let g = C64::new(p.g, 0.0);
    let two_eps_n = 2.0 * p.epsilon / p.n();
    let jp = s.j_minus.conj();
    let ac = s.a.conj();
    [
        [
            -0.5 * p.kappa + i * (p.kappa * de / gamma_total),
            z,
            g,
            z,
            z,
        ],
        [
            z,
            -0.5 * p.kappa - i * (p.kappa * de / gamma_total),
            z,
            g,
            z,
        ],
        [
            2.0 * g * s.jz,
            z,
            -0.5 * kappa_s - i * (kappa_s * de / gamma_total),
            z,
            i * two_eps_n * s.j_minus + 2.0 * g * s.a,
        ],
        [
            z,
            2.0 * g * s.jz,
            z,
            -0.5 * kappa_s + i * (kappa_s * de / gamma_total),
            -i * two_eps_n * jp + 2.0 * g * ac,
        ],
        [
            -g * jp,
            -g * s.j_minus,
            -g * ac,
            -g * s.a,
            C64::new(-(p.pump_w + p.gamma), 0.0),
        ],
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stability {
    pub matrix: [[C64; 5]; 5],
    pub eigenvalues: [C64; 5],
    /// Index of the eigenvalue treated as the U(1) phase mode, if any.
    pub goldstone: Option<usize>,
    pub stable: bool,
}

/// Linear stability of a stationary point.
///
/// For lasing states the eigenvalue of smallest modulus is the phase mode; it
/// is excluded when `|Re λ| ≤ 1e−9 Γ`. All remaining eigenvalues must satisfy
/// `Re λ < 1e−10 Γ`.
pub fn jacobian_stability(p: &ModelParams, s: &MeanFieldState) -> Result<Stability> {
    let r = derive_rates(p)?;
    let residual = stationarity_residual(p, s);
    let tol = 1e-6 * p.n() * r.gamma_total;
    if !(residual <= tol) {
        return Err(Error::NotStationary {
            residual,
            tolerance: tol,
        });
    }
    let m = jacobian(p, s);
    let mat = Mat::<C64>::from_fn(5, 5, |i, j| m[i][j]);
    let ev = mat.eigenvalues().map_err(|_| Error::Factorization)?;
    let mut eigenvalues = [C64::new(0.0, 0.0); 5];
    eigenvalues.copy_from_slice(&ev[..5]);
    eigenvalues.sort_by(|x, y| {
        y.re.partial_cmp(&x.re)
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let lasing = s.a.norm() > 0.0;
    let goldstone = if lasing {
        let (idx, lam) = eigenvalues
            .iter()
            .enumerate()
            .min_by(|(_, x), (_, y)| x.norm().partial_cmp(&y.norm()).unwrap())
            .map(|(i, l)| (i, *l))
            .unwrap();
        (lam.re.abs() <= 1e-9 * r.gamma_total).then_some(idx)
    } else {
        None
    };
    let stable = eigenvalues
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != goldstone)
        .all(|(_, l)| l.re < 1e-10 * r.gamma_total);
    Ok(Stability {
        matrix: m,
        eigenvalues,
        goldstone,
        stable,
    })
}

/// Phase read off from which stationary solutions are linearly stable.
pub fn phase_from_stability(solutions: &[StationarySolution]) -> Phase {
    let normal_stable = solutions
        .iter()
        .any(|s| s.branch == Branch::Normal && s.stable);
    let lasing_stable = solutions
        .iter()
        .any(|s| s.branch != Branch::Normal && s.stable);
    match (normal_stable, lasing_stable) {
        (true, true) => Phase::Bistable,
        (false, true) => Phase::SuperradiantLasing,
        _ => Phase::Normal,
    }
}

/// Interaction strengths bounding the phases at fixed pump.
///
/// `eps1`/`eps2` are where `C⁺ = C⁻` (the branches merge), `eps3`/`eps4`
/// where one branch crosses `C = 1`; the latter only exist when
/// `C₀ (w−γ)/(w+γ) ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseBoundaries {
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: Option<f64>,
    pub eps4: Option<f64>,
    /// Double-root cooperativity at `eps1` and `eps2`.
    pub merge_c1: f64,
    pub merge_c2: f64,
}

pub fn phase_boundaries(p: &ModelParams) -> Result<PhaseBoundaries> {
    let r = derive_rates(p)?;
    let g = r.gamma_total;
    let d = p.delta;
    let root = (g * g + 4.0 * d * d).sqrt();
    let eps1 = 0.25 * r.c0 * (2.0 * d + root);
    let eps2 = 0.25 * r.c0 * (2.0 * d - root);
    let merge =
        |e: f64| r.pump_factor * (r.c0 * g * g + 8.0 * d * e) / (2.0 * (g * g + 4.0 * d * d));
    let excess = r.c0 * r.pump_factor - 1.0;
    let (eps3, eps4) = if excess >= 0.0 && r.pump_factor > 0.0 {
        let pre = g / (2.0 * r.pump_factor);
        let s = excess.sqrt();
        (Some(pre * (2.0 * d / g + s)), Some(pre * (2.0 * d / g - s)))
    } else {
        (None, None)
    };
    Ok(PhaseBoundaries {
        eps1,
        eps2,
        eps3,
        eps4,
        merge_c1: merge(eps1),
        merge_c2: merge(eps2),
    })
}

impl PhaseBoundaries {
    /// Phase at interaction strength `eps` implied by the boundaries.
    pub fn phase_at(&self, eps: f64) -> Phase {
        let (Some(e3), Some(e4)) = (self.eps3, self.eps4) else {
            return Phase::Normal;
        };
        if e4 < eps && eps < e3 {
            return Phase::SuperradiantLasing;
        }
        if e3 <= eps && eps < self.eps1 && self.merge_c1 > 1.0 {
            return Phase::Bistable;
        }
        if self.eps2 < eps && eps <= e4 && self.merge_c2 > 1.0 {
            return Phase::Bistable;
        }
        Phase::Normal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RampDirection {
    Up,
    Down,
}

/// Controls for quasi-adiabatic pump ramps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampControls {
    pub ode: OdeControls,
    /// Relaxation time cap in units of `1/Γ`.
    pub max_time_gamma: f64,
}

impl Default for RampControls {
    fn default() -> Self {
        Self {
            ode: OdeControls::default(),
            max_time_gamma: 1e4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RampPoint {
    pub pump_w: f64,
    pub state: MeanFieldState,
    pub branch: Branch,
    /// False when the relaxation cap was hit before stationarity.
    pub converged: bool,
    pub residual: f64,
}

/// Follow the attractor while the pump is stepped from `w_lo` to `w_hi` (Up)
/// or back (Down).
///
/// At each pump value the state relaxes from the previous endpoint until it is
/// stationary. Whenever `|a|` has decayed below the seed amplitude the seed is
/// re-injected, so an unstable normal state is always left.
pub fn hysteresis_ramp(
    p: &ModelParams,
    w_lo: f64,
    w_hi: f64,
    n_steps: usize,
    direction: RampDirection,
    ctl: &RampControls,
) -> Result<Vec<RampPoint>> {
    if n_steps < 2 {
        return Err(Error::InvalidParameter {
            name: "n_steps",
            reason: "must be at least 2",
        });
    }
    let ws: Vec<f64> = (0..n_steps)
        .map(|k| {
            let f = k as f64 / (n_steps - 1) as f64;
            match direction {
                RampDirection::Up => w_lo + (w_hi - w_lo) * f,
                RampDirection::Down => w_hi - (w_hi - w_lo) * f,
            }
        })
        .collect();
    let seed = MeanFieldState::standard_seed(p);
    let mut state = seed;
    let mut out = Vec::with_capacity(n_steps);
    for w in ws {
        let q = p.at_pump(w);
        let r = derive_rates(&q)?;
        if state.a.norm() < seed.a.re {
            state.a = seed.a;
        }
        let tol = stationarity_tolerance(&q);
        let ictl = IntegrateControls {
            ode: ctl.ode,
            omega_offset: 0.0,
            sample_dt: f64::INFINITY,
            stop_residual: Some(tol),
        };
        let traj = integrate(&q, state, (0.0, ctl.max_time_gamma / r.gamma_total), &ictl)?;
        let (_, end) = traj.last();
        state = end;
        out.push(RampPoint {
            pump_w: w,
            state: end.gauge_fixed(),
            branch: identify_branch(&q, &end)?,
            converged: traj.reached_stationary,
            residual: traj.terminal_residual,
        });
    }
    Ok(out)
}

/// Nearest closed-form stationary solution to `s`.
pub fn identify_branch(p: &ModelParams, s: &MeanFieldState) -> Result<Branch> {
    let sols = solve_stationary(p)?;
    let n = p.n();
    let dist =
        |t: &MeanFieldState| ((s.photons() - t.photons()) / n).abs() + ((s.jz - t.jz) / n).abs();
    Ok(sols
        .iter()
        .min_by(|x, y| dist(&x.state).partial_cmp(&dist(&y.state)).unwrap())
        .map(|x| x.branch)
        .unwrap_or(Branch::Normal))
}

/// Pump values at which the occupied branch changes between consecutive ramp points.
pub fn ramp_jumps(ramp: &[RampPoint]) -> Vec<(f64, f64, Branch, Branch)> {
    ramp.windows(2)
        .filter(|w| w[0].branch != w[1].branch)
        .map(|w| (w[0].pump_w, w[1].pump_w, w[0].branch, w[1].branch))
        .collect()
}
