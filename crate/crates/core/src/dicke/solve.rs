use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use faer::c64;
use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use super::basis::{enumerate_basis, DickeBasis, DickeIndex};
use super::liouvillian::{assemble_liouvillian, LiouvillianMatrix};
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Relative spectral gap below which the null space counts as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-6;

/// Above this dimension the null vector comes from shift-invert iteration.
pub const DIRECT_LIMIT: usize = 6000;

/// Steady-state coefficient vector on a [`DickeBasis`].
#[derive(Debug, Clone)]
pub struct SteadyStateSolution {
    pub basis: DickeBasis,
    pub coefficients: Vec<c64>,
    pub trace_residual: f64,
    /// `‖L·ρ‖/‖ρ‖`.
    pub null_residual: f64,
    /// Estimated `|λ₂|/‖L‖₁`, the slowest decay rate relative to the generator scale.
    pub relative_gap: f64,
}

fn norm(v: &[c64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn to_mat(v: &[c64]) -> Mat<c64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

fn from_mat(m: &Mat<c64>) -> Vec<c64> {
    (0..m.nrows()).map(|i| m[(i, 0)]).collect()
}

fn finite(v: &[c64]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn one_norm(l: &LiouvillianMatrix) -> f64 {
    let mut col = vec![0.0f64; l.dim()];
    for &(_, c, v) in &l.entries {
        col[c] += v.norm();
    }
    col.into_iter().fold(0.0, f64::max)
}

fn factorize(d: usize, trips: &[Triplet<usize, usize, c64>]) -> Result<Lu<usize, c64>> {
    let a = SparseColMat::<usize, c64>::try_new_from_triplets(d, d, trips)
        .map_err(|_| Error::Factorization)?;
    a.sp_lu().map_err(|_| Error::Factorization)
}

/// Solve `L x = 0, tr x = 1` with the first population row replaced by the trace.
fn trace_row_solve(l: &LiouvillianMatrix) -> Result<Vec<c64>> {
    let d = l.dim();
    // the row is redundant: columns of L sum to zero under the trace
    let pivot_row = l
        .basis
        .diagonal_positions()
        .next()
        .ok_or(Error::Factorization)?;
    let mut trips: Vec<_> = l
        .entries
        .iter()
        .filter(|(r, _, _)| *r != pivot_row)
        .map(|&(r, c, v)| Triplet::new(r, c, v))
        .collect();
    trips.extend(
        l.basis
            .diagonal_positions()
            .map(|c| Triplet::new(pivot_row, c, c64::new(1.0, 0.0))),
    );
    let lu = factorize(d, &trips)?;
    let mut rhs = Mat::<c64>::zeros(d, 1);
    rhs[(pivot_row, 0)] = c64::new(1.0, 0.0);
    lu.solve_in_place(&mut rhs);
    Ok(from_mat(&rhs))
}

/// Inverse iteration with `L − σ` for a small positive σ.
struct ShiftInvert {
    lu: Lu<usize, c64>,
}

impl ShiftInvert {
    fn new(l: &LiouvillianMatrix, shift: f64) -> Result<Self> {
        let mut trips: Vec<_> = l
            .entries
            .iter()
            .map(|&(r, c, v)| Triplet::new(r, c, v))
            .collect();
        trips.extend((0..l.dim()).map(|i| Triplet::new(i, i, c64::new(-shift, 0.0))));
        Ok(Self {
            lu: factorize(l.dim(), &trips)?,
        })
    }

    fn apply(&self, v: &[c64]) -> Vec<c64> {
        let mut m = to_mat(v);
        self.lu.solve_in_place(&mut m);
        from_mat(&m)
    }

    fn null_vector(&self, l: &LiouvillianMatrix) -> Vec<c64> {
        let mut x: Vec<c64> = l
            .basis
            .indices
            .iter()
            .map(|i| c64::new(i.is_diagonal() as u8 as f64, 0.0))
            .collect();
        for _ in 0..4 {
            x = self.apply(&x);
            let t = l.trace(&x);
            for v in &mut x {
                *v /= t;
            }
        }
        x
    }

    /// Growth of the inverse on the traceless complement of `v`, i.e. `1/|λ₂ − σ|`.
    fn complement_growth(&self, l: &LiouvillianMatrix, v: &[c64]) -> f64 {
        let deflate = |y: &mut Vec<c64>| {
            let t = l.trace(y);
            for (yi, vi) in y.iter_mut().zip(v) {
                *yi -= t * vi;
            }
        };
        let mut y: Vec<c64> = (0..l.dim())
            .map(|i| {
                let s = ((i as f64 + 1.0) * 12.9898).sin() * 43758.5453;
                c64::new(s - s.floor() - 0.5, 0.0)
            })
            .collect();
        deflate(&mut y);
        let mut growth = 0.0;
        for _ in 0..8 {
            let ny = norm(&y);
            for yi in &mut y {
                *yi /= ny;
            }
            y = self.apply(&y);
            deflate(&mut y);
            growth = norm(&y);
        }
        growth
    }
}

/// Unique steady state of the generator.
///
/// Small systems replace one redundant population row with the trace
/// functional and solve directly; larger ones use shift-invert iteration.
/// Both report the relative gap from deflated inverse iteration.
pub fn steady_state(l: &LiouvillianMatrix) -> Result<SteadyStateSolution> {
    let scale = one_norm(l);
    if scale == 0.0 {
        return Err(Error::DegenerateNullSpace { gap: 0.0 });
    }
    let shift = 1e-10 * scale;
    let si = ShiftInvert::new(l, shift)?;
    let coefficients = if l.dim() <= DIRECT_LIMIT {
        trace_row_solve(l)?
    } else {
        si.null_vector(l)
    };
    if !finite(&coefficients) {
        return Err(Error::DegenerateNullSpace { gap: 0.0 });
    }
    let growth = si.complement_growth(l, &coefficients);
    let relative_gap = if growth > 0.0 {
        (1.0 / growth - shift).max(0.0) / scale
    } else {
        f64::INFINITY
    };
    if !(relative_gap >= DEGENERACY_GAP) {
        return Err(Error::DegenerateNullSpace { gap: relative_gap });
    }

    let trace = l.trace(&coefficients);
    let residual = l.apply(&coefficients);
    Ok(SteadyStateSolution {
        basis: l.basis.clone(),
        null_residual: norm(&residual) / norm(&coefficients),
        trace_residual: (trace - c64::new(1.0, 0.0)).norm(),
        coefficients,
        relative_gap,
    })
}

/// Assemble and solve in one step.
pub fn solve_exact(p: &ModelParams, n_cut: usize) -> Result<SteadyStateSolution> {
    p.validate()?;
    let basis = enumerate_basis(p.n_spins, n_cut);
    steady_state(&assemble_liouvillian(p, &basis))
}

/// Normal-ordered monomial `(J⁺)^p (Jᶻ)^r (J⁻)^q (a†)^k a^{k′}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub p: u32,
    pub r: u32,
    pub q: u32,
    pub k: u32,
    pub k_prime: u32,
}

impl Monomial {
    pub const IDENTITY: Self = Self::new(0, 0, 0, 0, 0);
    pub const N_PHOTONS: Self = Self::new(0, 0, 0, 1, 1);
    pub const JZ: Self = Self::new(0, 1, 0, 0, 0);
    pub const J_PLUS_J_MINUS: Self = Self::new(1, 0, 1, 0, 0);
    pub const J_PLUS_A: Self = Self::new(1, 0, 0, 0, 1);

    pub const fn new(p: u32, r: u32, q: u32, k: u32, k_prime: u32) -> Self {
        Self {
            p,
            r,
            q,
            k,
            k_prime,
        }
    }

    pub fn obeys_selection_rule(&self) -> bool {
        self.p + self.k == self.q + self.k_prime
    }
}

/// `x!/(x−k)!`, zero when `x < k`.
fn falling(x: i64, k: u32) -> f64 {
    if x < k as i64 {
        return 0.0;
    }
    (0..k as i64).map(|i| (x - i) as f64).product()
}

/// `Tr[P_{J,M,M′}|n⟩⟨n′| · O]` for one basis element.
pub fn monomial_matrix_element(idx: &DickeIndex, o: &Monomial) -> f64 {
    let (two_j, two_m, two_mp) = (idx.two_j, idx.two_m, idx.two_mp);
    if two_mp - 2 * o.p as i64 != two_m - 2 * o.q as i64 {
        return 0.0;
    }
    if idx.np as i64 - o.k as i64 != idx.n as i64 - o.k_prime as i64 {
        return 0.0;
    }
    let jpm = (two_j + two_m) / 2;
    let jmm = (two_j - two_m) / 2;
    let jpmp = (two_j + two_mp) / 2;
    let jmmp = (two_j - two_mp) / 2;
    let spin = falling(jpm, o.q)
        * falling(jmm + o.q as i64, o.q)
        * falling(jpmp, o.p)
        * falling(jmmp + o.p as i64, o.p);
    let photon = falling(idx.n as i64, o.k_prime) * falling(idx.np as i64, o.k);
    if spin == 0.0 || photon == 0.0 {
        return 0.0;
    }
    let mq = (two_m - 2 * o.q as i64) as f64 / 2.0;
    mq.powi(o.r as i32) * (spin * photon).sqrt()
}

impl SteadyStateSolution {
    pub fn n_spins(&self) -> u64 {
        self.basis.n_spins
    }

    pub fn n_cut(&self) -> usize {
        self.basis.n_cut
    }

    pub fn coefficient(&self, idx: &DickeIndex) -> Option<c64> {
        self.basis.position(idx).map(|p| self.coefficients[p])
    }

    /// `⟨O⟩` for one monomial; exactly zero if the selection rule fails.
    pub fn expect(&self, o: &Monomial) -> c64 {
        if !o.obeys_selection_rule() {
            return c64::new(0.0, 0.0);
        }
        let mut acc = c64::new(0.0, 0.0);
        for (idx, &rho) in self.basis.indices.iter().zip(&self.coefficients) {
            let b = monomial_matrix_element(idx, o);
            if b != 0.0 {
                acc += rho * b;
            }
        }
        acc
    }

    pub fn n_photons(&self) -> f64 {
        self.expect(&Monomial::N_PHOTONS).re
    }

    pub fn jz(&self) -> f64 {
        self.expect(&Monomial::JZ).re
    }

    /// Largest violation of `ρ^{n,n′}_{J,M,M′} = conj(ρ^{n′,n}_{J,M′,M})`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.basis
            .indices
            .iter()
            .zip(&self.coefficients)
            .map(|(idx, &rho)| {
                let partner = self
                    .coefficient(&idx.adjoint())
                    .unwrap_or(c64::new(0.0, 0.0));
                (rho - partner.conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Most negative population (0 if none).
    pub fn min_population(&self) -> f64 {
        self.basis
            .diagonal_positions()
            .map(|p| self.coefficients[p].re)
            .fold(0.0, f64::min)
    }

    /// Largest imaginary part among populations.
    pub fn population_imag(&self) -> f64 {
        self.basis
            .diagonal_positions()
            .map(|p| self.coefficients[p].im.abs())
            .fold(0.0, f64::max)
    }

    pub fn distributions(&self) -> Distributions {
        distributions(self)
    }
}

/// Weighted sum of monomial expectations.
pub fn observables(sol: &SteadyStateSolution, terms: &[(Monomial, c64)]) -> c64 {
    terms.iter().map(|(o, w)| *w * sol.expect(o)).sum()
}

/// Photon, polarization and `(J, M)` population marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct Distributions {
    pub n_spins: u64,
    /// Indexed by photon number `0..=n_cut`.
    pub photon_pmf: Vec<f64>,
    /// Indexed by `M + N/2`.
    pub spin_pmf: Vec<f64>,
    /// `joint_jm[j][m]` with `j = J − J_min` and `m = M + N/2`; zero where `|M| > J`.
    pub joint_jm: Vec<Vec<f64>>,
}

impl Distributions {
    pub fn two_j_min(&self) -> i64 {
        (self.n_spins % 2) as i64
    }

    pub fn mean_photons(&self) -> f64 {
        self.photon_pmf
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    pub fn photon_variance(&self) -> f64 {
        let m = self.mean_photons();
        self.photon_pmf
            .iter()
            .enumerate()
            .map(|(n, p)| (n as f64 - m).powi(2) * p)
            .sum()
    }

    /// Variance over mean of the photon number.
    pub fn fano_factor(&self) -> f64 {
        self.photon_variance() / self.mean_photons()
    }

    /// R² of a straight-line fit to `ln P(n)` over the photon numbers with
    /// `P(n) ≥ floor · max P`. `None` with fewer than three such points.
    pub fn log_linear_r2(&self, floor: f64) -> Option<f64> {
        let peak = self.photon_pmf.iter().cloned().fold(0.0, f64::max);
        let pts: Vec<(f64, f64)> = self
            .photon_pmf
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0 && p >= floor * peak)
            .map(|(n, &p)| (n as f64, p.ln()))
            .collect();
        if pts.len() < 3 {
            return None;
        }
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
        if syy == 0.0 {
            return Some(1.0);
        }
        Some(sxy * sxy / (sxx * syy))
    }

    /// Photon numbers that are strict local maxima of the pmf with
    /// `P(n) ≥ floor · max P`; the endpoints compare with their one neighbour.
    pub fn photon_local_maxima(&self, floor: f64) -> Vec<usize> {
        let p = &self.photon_pmf;
        let peak = p.iter().cloned().fold(0.0, f64::max);
        (0..p.len())
            .filter(|&n| {
                let left = n == 0 || p[n] > p[n - 1];
                let right = n + 1 == p.len() || p[n] > p[n + 1];
                left && right && p[n] >= floor * peak
            })
            .collect()
    }

    /// Probability mass at photon numbers strictly above `n_cut − window`.
    pub fn photon_tail(&self, window: usize) -> f64 {
        let start = (self.photon_pmf.len()).saturating_sub(window);
        self.photon_pmf[start..].iter().sum()
    }
}

pub fn distributions(sol: &SteadyStateSolution) -> Distributions {
    let n = sol.n_spins() as usize;
    let j0 = (n % 2) as i64;
    let mut photon_pmf = vec![0.0; sol.n_cut() + 1];
    let mut spin_pmf = vec![0.0; n + 1];
    let mut joint_jm = vec![vec![0.0; n + 1]; n / 2 + 1];
    for p in sol.basis.diagonal_positions() {
        let idx = &sol.basis.indices[p];
        let v = sol.coefficients[p].re;
        let m = ((idx.two_m + n as i64) / 2) as usize;
        photon_pmf[idx.n] += v;
        spin_pmf[m] += v;
        joint_jm[((idx.two_j - j0) / 2) as usize][m] += v;
    }
    Distributions {
        n_spins: sol.n_spins(),
        photon_pmf,
        spin_pmf,
        joint_jm,
    }
}

/// Photon-cutoff ladder and acceptance criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffPolicy {
    pub start: usize,
    pub max_cutoff: usize,
    /// Tail mass allowed above `n_cut − tail_window`.
    pub tail_tol: f64,
    pub tail_window: usize,
}

impl Default for CutoffPolicy {
    fn default() -> Self {
        Self {
            start: 8,
            max_cutoff: 512,
            tail_tol: 1e-8,
            tail_window: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderStep {
    pub n_cut: usize,
    pub dim: usize,
    pub tail_mass: f64,
    pub n_photons: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergedSolution {
    pub n_cut: usize,
    pub solution: SteadyStateSolution,
    pub ladder: Vec<LadderStep>,
}

/// Walk the doubling ladder until the photon tail is below tolerance.
pub fn converge_cutoff(p: &ModelParams, policy: &CutoffPolicy) -> Result<ConvergedSolution> {
    let mut n_cut = policy.start.max(policy.tail_window + 1);
    let mut ladder = Vec::new();
    loop {
        let solution = solve_exact(p, n_cut)?;
        let dist = distributions(&solution);
        let tail_mass = dist.photon_tail(policy.tail_window).max(0.0);
        ladder.push(LadderStep {
            n_cut,
            dim: solution.basis.dim(),
            tail_mass,
            n_photons: dist.mean_photons(),
        });
        if tail_mass < policy.tail_tol {
            return Ok(ConvergedSolution {
                n_cut,
                solution,
                ladder,
            });
        }
        if n_cut * 2 > policy.max_cutoff {
            return Err(Error::CutoffExceeded { n_cut });
        }
        n_cut *= 2;
    }
}
