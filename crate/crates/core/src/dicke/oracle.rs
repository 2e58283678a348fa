//! Dense full-Hilbert-space reference solver for a handful of spins.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use faer::c64;
use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use super::basis::{multiplicity_f64, DickeBasis, DickeIndex};
use super::solve::Monomial;
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Largest spin number the oracle accepts.
pub const MAX_ORACLE_SPINS: u64 = 3;
/// Largest superoperator dimension `(2^N (n_cut+1))²`.
pub const MAX_ORACLE_SUPERDIM: usize = 4096;

const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
const ONE: c64 = c64 { re: 1.0, im: 0.0 };

/// Operators of `N` spins ⊗ truncated cavity; spin index is the outer one.
#[derive(Debug, Clone)]
pub struct FullSpace {
    pub n_spins: u64,
    pub n_cut: usize,
    n_states: usize,
}

fn identity(d: usize) -> Mat<c64> {
    Mat::from_fn(d, d, |i, j| if i == j { ONE } else { ZERO })
}

fn kron(a: &Mat<c64>, b: &Mat<c64>) -> Mat<c64> {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

fn adjoint(a: &Mat<c64>) -> Mat<c64> {
    a.adjoint().to_owned()
}

fn transpose(a: &Mat<c64>) -> Mat<c64> {
    a.transpose().to_owned()
}

fn conj(a: &Mat<c64>) -> Mat<c64> {
    a.conjugate().to_owned()
}

fn nonzeros(a: &Mat<c64>) -> Vec<(usize, usize, c64)> {
    let mut out = Vec::new();
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let v = a[(i, j)];
            if v != ZERO {
                out.push((i, j, v));
            }
        }
    }
    out
}

/// `target += s · (a ⊗ b)`, touching only nonzero products.
fn add_kron(target: &mut Mat<c64>, s: c64, a: &Mat<c64>, b: &Mat<c64>) {
    let nb = b.nrows();
    let bz = nonzeros(b);
    for (ia, ja, va) in nonzeros(a) {
        for &(ib, jb, vb) in &bz {
            target[(ia * nb + ib, ja * nb + jb)] += s * va * vb;
        }
    }
}

fn mat_pow(a: &Mat<c64>, k: u32) -> Mat<c64> {
    let mut out = identity(a.nrows());
    for _ in 0..k {
        out = &out * a;
    }
    out
}

impl FullSpace {
    pub fn new(n_spins: u64, n_cut: usize) -> Result<Self> {
        let n_states = (1usize << n_spins.min(20)) * (n_cut + 1);
        if n_spins > MAX_ORACLE_SPINS {
            return Err(Error::DimensionTooLarge {
                dim: n_states * n_states,
                limit: MAX_ORACLE_SUPERDIM,
            });
        }
        if n_states * n_states > MAX_ORACLE_SUPERDIM {
            return Err(Error::DimensionTooLarge {
                dim: n_states * n_states,
                limit: MAX_ORACLE_SUPERDIM,
            });
        }
        Ok(Self {
            n_spins,
            n_cut,
            n_states,
        })
    }

    pub fn dim(&self) -> usize {
        self.n_states
    }

    fn spin_dim(&self) -> usize {
        1 << self.n_spins
    }

    fn photons(&self) -> usize {
        self.n_cut + 1
    }

    /// Single-spin operator on the spin space; bit `j` set means spin `j` up.
    fn spin_local(&self, j: usize, kind: char) -> Mat<c64> {
        let d = self.spin_dim();
        Mat::from_fn(d, d, |r, c| {
            let up_c = c >> j & 1 == 1;
            match kind {
                '+' if !up_c && r == c | (1 << j) => ONE,
                '-' if up_c && r == c & !(1 << j) => ONE,
                'z' if r == c => c64::new(if up_c { 0.5 } else { -0.5 }, 0.0),
                _ => ZERO,
            }
        })
    }

    fn collective(&self, kind: char) -> Mat<c64> {
        let mut m = Mat::<c64>::zeros(self.spin_dim(), self.spin_dim());
        for j in 0..self.n_spins as usize {
            m += self.spin_local(j, kind);
        }
        m
    }

    fn annihilation(&self) -> Mat<c64> {
        let d = self.photons();
        Mat::from_fn(d, d, |r, c| {
            if c == r + 1 {
                c64::new((c as f64).sqrt(), 0.0)
            } else {
                ZERO
            }
        })
    }

    fn on_spins(&self, s: &Mat<c64>) -> Mat<c64> {
        kron(s, &identity(self.photons()))
    }

    fn on_cavity(&self, c: &Mat<c64>) -> Mat<c64> {
        kron(&identity(self.spin_dim()), c)
    }

    /// Full operator for a normal-ordered monomial.
    pub fn monomial(&self, o: &Monomial) -> Mat<c64> {
        let spin = &(&mat_pow(&self.collective('+'), o.p) * &mat_pow(&self.collective('z'), o.r))
            * &mat_pow(&self.collective('-'), o.q);
        let a = self.annihilation();
        let cav = &mat_pow(&adjoint(&a), o.k) * &mat_pow(&a, o.k_prime);
        kron(&spin, &cav)
    }

    pub fn hamiltonian(&self, p: &ModelParams) -> Mat<c64> {
        let a = self.on_cavity(&self.annihilation());
        let jm = self.on_spins(&self.collective('-'));
        let jp = self.on_spins(&self.collective('+'));
        let jz = self.on_spins(&self.collective('z'));
        let ig = c64::new(0.0, p.g);
        let coupling = &adjoint(&a) * &jm - &a * &jp;
        let jz2 = &jz * &jz;
        coupling * faer::Scale(ig) + jz * faer::Scale(c64::new(p.delta, 0.0))
            - jz2 * faer::Scale(c64::new(p.epsilon / p.n(), 0.0))
    }

    /// Jump operators with their rates `r`, each entering as `r(OρO† − ½{O†O, ρ})`.
    pub fn jumps(&self, p: &ModelParams) -> Vec<(f64, Mat<c64>)> {
        let mut out = vec![(p.kappa, self.on_cavity(&self.annihilation()))];
        for j in 0..self.n_spins as usize {
            out.push((p.gamma, self.on_spins(&self.spin_local(j, '-'))));
            out.push((p.pump_w, self.on_spins(&self.spin_local(j, '+'))));
            out.push((2.0 * p.gamma_phi, self.on_spins(&self.spin_local(j, 'z'))));
        }
        out
    }

    /// Column-major superoperator: `vec(ρ)[i + d·j] = ρ[i, j]`.
    pub fn superoperator(&self, p: &ModelParams) -> Mat<c64> {
        let d = self.dim();
        let id = identity(d);
        let h = self.hamiltonian(p);
        let mut l = Mat::<c64>::zeros(d * d, d * d);
        add_kron(&mut l, c64::new(0.0, -1.0), &id, &h);
        add_kron(&mut l, c64::new(0.0, 1.0), &transpose(&h), &id);
        for (r, o) in self.jumps(p) {
            if r == 0.0 {
                continue;
            }
            let od = adjoint(&o);
            let odo = &od * &o;
            add_kron(&mut l, c64::new(r, 0.0), &conj(&o), &o);
            add_kron(&mut l, c64::new(-0.5 * r, 0.0), &id, &odo);
            add_kron(&mut l, c64::new(-0.5 * r, 0.0), &transpose(&odo), &id);
        }
        l
    }

    /// Ladder-consistent states `|J, M, ι⟩` on the spin space, as `[ι][J − M]`.
    pub fn multiplet(&self, two_j: i64) -> Vec<Vec<Vec<c64>>> {
        let jp = self.collective('+');
        let jm = self.collective('-');
        let jz = self.collective('z');
        let j = two_j as f64 / 2.0;
        let shift = &jz - identity(self.spin_dim()) * faer::Scale(c64::new(j, 0.0));
        let a = &jm * &jp + &shift * &shift;
        let eig = a
            .self_adjoint_eigen(Side::Lower)
            .expect("hermitian eigensolver");
        let (s, u) = (eig.S(), eig.U());
        let mut out = Vec::new();
        for k in 0..self.spin_dim() {
            if s[k].re.abs() > 1e-9 {
                continue;
            }
            let mut chain = Vec::new();
            let mut v: Mat<c64> = u.col(k).to_owned().as_mat().to_owned();
            let mut m = j;
            loop {
                chain.push((0..self.spin_dim()).map(|i| v[(i, 0)]).collect::<Vec<_>>());
                if m <= -j + 0.5 {
                    break;
                }
                let c = ((j + m) * (j - m + 1.0)).sqrt();
                v = (&jm * &v) * faer::Scale(c64::new(1.0 / c, 0.0));
                m -= 1.0;
            }
            out.push(chain);
        }
        out
    }

    fn multiplets(&self) -> Vec<(i64, Vec<Vec<Vec<c64>>>)> {
        let n = self.n_spins as i64;
        (0..=n)
            .filter(|tj| (n - tj) % 2 == 0)
            .map(|tj| (tj, self.multiplet(tj)))
            .collect()
    }

    fn embed(&self, spin: &[c64], n: usize) -> Vec<(usize, c64)> {
        spin.iter()
            .enumerate()
            .filter(|(_, v)| **v != ZERO)
            .map(|(s, v)| (s * self.photons() + n, *v))
            .collect()
    }

    /// `ρ^{n,n′}_{J,M,M′} = Σ_ι ⟨J,M,ι;n|ρ|J,M′,ι;n′⟩` for every basis element.
    pub fn project(&self, rho: &Mat<c64>, basis: &DickeBasis) -> Vec<c64> {
        let mult = self.multiplets();
        basis
            .indices
            .iter()
            .map(|idx| {
                let chains = &mult
                    .iter()
                    .find(|(tj, _)| *tj == idx.two_j)
                    .expect("J present")
                    .1;
                let (a, b) = (
                    ((idx.two_j - idx.two_m) / 2) as usize,
                    ((idx.two_j - idx.two_mp) / 2) as usize,
                );
                let mut acc = ZERO;
                for chain in chains {
                    let bra = self.embed(&chain[a], idx.n);
                    let ket = self.embed(&chain[b], idx.np);
                    for &(i, vi) in &bra {
                        for &(k, vk) in &ket {
                            acc += vi.conj() * rho[(i, k)] * vk;
                        }
                    }
                }
                acc
            })
            .collect()
    }

    /// The operator `P_{J,M,M′} ⊗ |n⟩⟨n′|` on the full space.
    pub fn dicke_operator(&self, idx: &DickeIndex) -> Result<Mat<c64>> {
        let d_j = multiplicity_f64(self.n_spins, idx.two_j)?;
        let chains = self.multiplet(idx.two_j);
        let (a, b) = (
            ((idx.two_j - idx.two_m) / 2) as usize,
            ((idx.two_j - idx.two_mp) / 2) as usize,
        );
        let mut x = Mat::<c64>::zeros(self.dim(), self.dim());
        for chain in &chains {
            for (i, vi) in self.embed(&chain[a], idx.n) {
                for (k, vk) in self.embed(&chain[b], idx.np) {
                    x[(i, k)] += vi * vk.conj() / d_j;
                }
            }
        }
        Ok(x)
    }

    /// Generator projected onto the permutation-symmetric coefficients of `basis`.
    pub fn projected_generator(
        &self,
        p: &ModelParams,
        basis: &DickeBasis,
    ) -> Result<Vec<Vec<c64>>> {
        let l = self.superoperator(p);
        let d = self.dim();
        let mut out = vec![vec![ZERO; basis.dim()]; basis.dim()];
        for (col, idx) in basis.indices.iter().enumerate() {
            let x = self.dicke_operator(idx)?;
            let vx = Mat::from_fn(d * d, 1, |i, _| x[(i % d, i / d)]);
            let ly = &l * &vx;
            let y = Mat::from_fn(d, d, |i, j| ly[(i + d * j, 0)]);
            for (row, v) in self.project(&y, basis).into_iter().enumerate() {
                out[row][col] = v;
            }
        }
        Ok(out)
    }

    /// Permutation swapping spins 0 and 1, on the full space.
    pub fn swap01(&self) -> Mat<c64> {
        let d = self.spin_dim();
        let s = Mat::from_fn(d, d, |r, c| {
            let (b0, b1) = (c & 1, c >> 1 & 1);
            let swapped = (c & !3) | (b0 << 1) | b1;
            if r == swapped {
                ONE
            } else {
                ZERO
            }
        });
        self.on_spins(&s)
    }
}

/// Steady state of the literal master equation on the full space.
#[derive(Debug, Clone)]
pub struct FullSteadyState {
    pub space: FullSpace,
    pub rho: Mat<c64>,
}

pub fn brute_force_steady_state(p: &ModelParams, n_cut: usize) -> Result<FullSteadyState> {
    p.validate()?;
    let space = FullSpace::new(p.n_spins, n_cut)?;
    let d = space.dim();
    let mut l = space.superoperator(p);
    for c in 0..d * d {
        l[(0, c)] = ZERO;
    }
    for i in 0..d {
        l[(0, i + d * i)] = ONE;
    }
    let mut rhs = Mat::<c64>::zeros(d * d, 1);
    rhs[(0, 0)] = ONE;
    let x = l.partial_piv_lu().solve(&rhs);
    let rho = Mat::from_fn(d, d, |i, j| x[(i + d * j, 0)]);
    if rho.norm_l2().is_nan() {
        return Err(Error::Factorization);
    }
    Ok(FullSteadyState { space, rho })
}

impl FullSteadyState {
    pub fn expect_operator(&self, o: &Mat<c64>) -> c64 {
        let d = self.space.dim();
        let mut acc = ZERO;
        for i in 0..d {
            for j in 0..d {
                acc += self.rho[(i, j)] * o[(j, i)];
            }
        }
        acc
    }

    pub fn expect(&self, o: &Monomial) -> c64 {
        self.expect_operator(&self.space.monomial(o))
    }

    pub fn photon_pmf(&self) -> Vec<f64> {
        let nc = self.space.photons();
        let mut pmf = vec![0.0; nc];
        for i in 0..self.space.dim() {
            pmf[i % nc] += self.rho[(i, i)].re;
        }
        pmf
    }

    /// `‖[S₀₁, ρ]‖_F` for the swap of the first two spins.
    pub fn swap_commutator_norm(&self) -> f64 {
        if self.space.n_spins < 2 {
            return 0.0;
        }
        let s = self.space.swap01();
        (&s * &self.rho - &self.rho * &s).norm_l2()
    }

    pub fn project(&self, basis: &DickeBasis) -> Vec<c64> {
        self.space.project(&self.rho, basis)
    }
}
