use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Multiplicity `D_J` of the spin-`J` manifold of `N` spin-½ particles.
///
/// Computed as `C(N, N/2−J) − C(N, N/2−J−1)` in exact integer arithmetic.
pub fn multiplicity(n_spins: u64, two_j: i64) -> Result<u128> {
    let n = n_spins as i64;
    if two_j < 0 || two_j > n || (n - two_j) % 2 != 0 {
        return Err(Error::DomainError { n_spins, two_j });
    }
    let k = ((n - two_j) / 2) as u64;
    let overflow = Error::DomainError { n_spins, two_j };
    let hi = binomial(n_spins, k).ok_or(overflow.clone())?;
    let lo = if k == 0 {
        0
    } else {
        binomial(n_spins, k - 1).ok_or(overflow)?
    };
    Ok(hi - lo)
}

fn binomial(n: u64, k: u64) -> Option<u128> {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        // c·(n−i) is divisible by (i+1) at every step
        c = c.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(c)
}

/// `D_J` as a float; exact for every N the exact solver can handle.
pub fn multiplicity_f64(n_spins: u64, two_j: i64) -> Result<f64> {
    multiplicity(n_spins, two_j).map(|d| d as f64)
}

/// One coefficient `ρ^{n,n′}_{J,M,M′}`, with doubled spin quantum numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DickeIndex {
    pub two_j: i64,
    pub two_m: i64,
    pub two_mp: i64,
    pub n: usize,
    pub np: usize,
}

impl DickeIndex {
    /// Twice the excitation number `M + n` of the ket side.
    pub fn two_q(&self) -> i64 {
        self.two_m + 2 * self.n as i64
    }

    pub fn is_diagonal(&self) -> bool {
        self.two_m == self.two_mp && self.n == self.np
    }

    /// Index of the Hermitian-conjugate partner `ρ^{n′,n}_{J,M′,M}`.
    pub fn adjoint(&self) -> Self {
        Self {
            two_j: self.two_j,
            two_m: self.two_mp,
            two_mp: self.two_m,
            n: self.np,
            np: self.n,
        }
    }

    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    pub fn m(&self) -> f64 {
        self.two_m as f64 / 2.0
    }

    pub fn mp(&self) -> f64 {
        self.two_mp as f64 / 2.0
    }

    fn sort_key(&self) -> (i64, i64, i64, usize, i64) {
        (self.two_q(), self.two_j, self.two_m, self.n, self.two_mp)
    }
}

/// Contiguous run of indices sharing the same `2(M+n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChargeSector {
    pub two_q: i64,
    pub start: usize,
    pub end: usize,
}

/// All coefficients allowed by the excitation-number selection rule.
#[derive(Debug, Clone, PartialEq)]
pub struct DickeBasis {
    pub n_spins: u64,
    pub n_cut: usize,
    pub indices: Vec<DickeIndex>,
    pub sectors: Vec<ChargeSector>,
    lookup: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

/// Enumerate the basis, sorted by `(q, 2J, 2M, n)` and grouped into sectors.
pub fn enumerate_basis(n_spins: u64, n_cut: usize) -> DickeBasis {
    let n = n_spins as i64;
    let mut indices = Vec::new();
    let mut two_j = n % 2;
    while two_j <= n {
        for two_m in (-two_j..=two_j).step_by(2) {
            for two_mp in (-two_j..=two_j).step_by(2) {
                for nn in 0..=n_cut {
                    let np = nn as i64 + (two_m - two_mp) / 2;
                    if np < 0 || np > n_cut as i64 {
                        continue;
                    }
                    indices.push(DickeIndex {
                        two_j,
                        two_m,
                        two_mp,
                        n: nn,
                        np: np as usize,
                    });
                }
            }
        }
        two_j += 2;
    }
    indices.sort_by_key(|i| i.sort_key());

    let mut sectors: Vec<ChargeSector> = Vec::new();
    for (pos, idx) in indices.iter().enumerate() {
        match sectors.last_mut() {
            Some(s) if s.two_q == idx.two_q() => s.end = pos + 1,
            _ => sectors.push(ChargeSector {
                two_q: idx.two_q(),
                start: pos,
                end: pos + 1,
            }),
        }
    }

    let mut basis = DickeBasis {
        n_spins,
        n_cut,
        indices,
        sectors,
        lookup: Vec::new(),
    };
    basis.lookup = vec![ABSENT; basis.lookup_len()];
    for pos in 0..basis.indices.len() {
        let slot = basis
            .slot(&basis.indices[pos])
            .expect("enumerated index is in range");
        basis.lookup[slot] = pos as u32;
    }
    basis
}

impl DickeBasis {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    fn n_j(&self) -> usize {
        self.n_spins as usize / 2 + 1
    }

    fn width(&self) -> usize {
        self.n_spins as usize + 1
    }

    fn lookup_len(&self) -> usize {
        self.n_j() * self.width() * self.width() * (self.n_cut + 1)
    }

    fn slot(&self, i: &DickeIndex) -> Option<usize> {
        let n = self.n_spins as i64;
        if i.two_j < n % 2 || i.two_j > n || (i.two_j - n) % 2 != 0 {
            return None;
        }
        if i.two_m.abs() > i.two_j || i.two_mp.abs() > i.two_j || (i.two_m - i.two_j) % 2 != 0 {
            return None;
        }
        if (i.two_mp - i.two_j) % 2 != 0 || i.n > self.n_cut || i.np > self.n_cut {
            return None;
        }
        if i.two_m + 2 * i.n as i64 != i.two_mp + 2 * i.np as i64 {
            return None;
        }
        let jj = ((i.two_j - n % 2) / 2) as usize;
        let m = ((i.two_m + n) / 2) as usize;
        let mp = ((i.two_mp + n) / 2) as usize;
        Some(((jj * self.width() + m) * self.width() + mp) * (self.n_cut + 1) + i.n)
    }

    /// Position of an index, or `None` if it violates any basis invariant.
    pub fn position(&self, i: &DickeIndex) -> Option<usize> {
        let slot = self.slot(i)?;
        match self.lookup[slot] {
            ABSENT => None,
            p => Some(p as usize),
        }
    }

    /// Positions of the population coefficients `ρ^{n,n}_{J,M,M}`.
    pub fn diagonal_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices
            .iter()
            .enumerate()
            .filter(|(_, i)| i.is_diagonal())
            .map(|(p, _)| p)
    }
}
