use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use faer::c64;

use super::basis::{ChargeSector, DickeBasis, DickeIndex};
use crate::model::ModelParams;

/// Sparse generator acting on the coefficient vector of a [`DickeBasis`].
#[derive(Debug, Clone)]
pub struct LiouvillianMatrix {
    pub basis: DickeBasis,
    /// `(row, col, value)`; a row may hold duplicate columns, which add.
    pub entries: Vec<(usize, usize, c64)>,
}

impl LiouvillianMatrix {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn sectors(&self) -> &[ChargeSector] {
        &self.basis.sectors
    }

    /// `L·x`.
    pub fn apply(&self, x: &[c64]) -> Vec<c64> {
        let mut y = vec![c64::new(0.0, 0.0); self.dim()];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    /// Trace functional `Σ_{n,J,M} v^{n,n}_{J,M,M}`.
    pub fn trace(&self, v: &[c64]) -> c64 {
        self.basis.diagonal_positions().map(|p| v[p]).sum()
    }

    /// Dense copy, for small systems and tests.
    pub fn to_dense(&self) -> Vec<Vec<c64>> {
        let d = self.dim();
        let mut m = vec![vec![c64::new(0.0, 0.0); d]; d];
        for &(r, c, v) in &self.entries {
            m[r][c] += v;
        }
        m
    }
}

fn sqrt_pos(x: f64) -> f64 {
    if x > 0.0 {
        x.sqrt()
    } else {
        0.0
    }
}

/// Spin-dissipator coefficients, each evaluated at its own `(J, M, M′)`.
struct SpinRates {
    n: f64,
    w: f64,
    gamma: f64,
    gamma_phi: f64,
}

impl SpinRates {
    fn same_j(&self, j: f64) -> f64 {
        if j > 0.0 {
            (self.n + 2.0) / (j * (j + 1.0))
        } else {
            0.0
        }
    }

    fn lower_j(&self, j: f64) -> f64 {
        if j > 0.0 {
            (self.n + 2.0 * j + 2.0) / (j * (2.0 * j + 1.0))
        } else {
            0.0
        }
    }

    fn raise_j(&self, j: f64) -> f64 {
        (self.n - 2.0 * j) / ((j + 1.0) * (2.0 * j + 1.0))
    }

    fn x(&self, j: f64, m: f64, mp: f64) -> f64 {
        let deph = if j > 0.0 {
            self.n - m * mp * (self.n + 2.0) / (j * (j + 1.0))
        } else {
            self.n
        };
        0.5 * self.w * (self.n - m - mp)
            + 0.5 * self.gamma * (self.n + m + mp)
            + 0.5 * self.gamma_phi * deph
    }

    fn y(&self, j: f64, m: f64, mp: f64) -> f64 {
        0.5 * self.gamma_phi * self.lower_j(j) * sqrt_pos((j + m) * (j - m) * (j + mp) * (j - mp))
    }

    fn z(&self, j: f64, m: f64, mp: f64) -> f64 {
        0.5 * self.gamma_phi
            * self.raise_j(j)
            * sqrt_pos((j + m + 1.0) * (j - m + 1.0) * (j + mp + 1.0) * (j - mp + 1.0))
    }

    fn u(&self, j: f64, m: f64, mp: f64) -> f64 {
        0.25 * self.gamma
            * self.same_j(j)
            * sqrt_pos((j + m) * (j - m + 1.0) * (j + mp) * (j - mp + 1.0))
    }

    fn v(&self, j: f64, m: f64, mp: f64) -> f64 {
        0.25 * self.gamma
            * self.lower_j(j)
            * sqrt_pos((j + m) * (j + m - 1.0) * (j + mp) * (j + mp - 1.0))
    }

    fn w_(&self, j: f64, m: f64, mp: f64) -> f64 {
        0.25 * self.gamma
            * self.raise_j(j)
            * sqrt_pos((j - m + 1.0) * (j - m + 2.0) * (j - mp + 1.0) * (j - mp + 2.0))
    }

    fn r(&self, j: f64, m: f64, mp: f64) -> f64 {
        0.25 * self.w
            * self.same_j(j)
            * sqrt_pos((j - m) * (j + m + 1.0) * (j - mp) * (j + mp + 1.0))
    }

    fn s(&self, j: f64, m: f64, mp: f64) -> f64 {
        0.25 * self.w
            * self.lower_j(j)
            * sqrt_pos((j - m) * (j - m - 1.0) * (j - mp) * (j - mp - 1.0))
    }

    fn t(&self, j: f64, m: f64, mp: f64) -> f64 {
        0.25 * self.w
            * self.raise_j(j)
            * sqrt_pos((j + m + 1.0) * (j + m + 2.0) * (j + mp + 1.0) * (j + mp + 2.0))
    }
}

/// Assemble the generator of the full master equation on `basis`.
///
/// Frame: cavity frequency 0, spin frequency Δ. Sources outside the basis
/// (photon number above the cutoff, `|M| > J`, `J` out of range) are dropped.
pub fn assemble_liouvillian(p: &ModelParams, basis: &DickeBasis) -> LiouvillianMatrix {
    let nf = p.n();
    let rates = SpinRates {
        n: nf,
        w: p.pump_w,
        gamma: p.gamma,
        gamma_phi: p.gamma_phi,
    };
    let mut entries = Vec::with_capacity(basis.dim() * 16);
    for (row, t) in basis.indices.iter().enumerate() {
        let (j, m, mp) = (t.j(), t.m(), t.mp());
        let (n, np) = (t.n as f64, t.np as f64);
        let mut push = |src: DickeIndex, v: f64| {
            if v != 0.0 {
                if let Some(col) = basis.position(&src) {
                    entries.push((row, col, c64::new(v, 0.0)));
                }
            }
        };

        // cavity feed κ√((n+1)(n′+1))
        push(
            DickeIndex {
                n: t.n + 1,
                np: t.np + 1,
                ..*t
            },
            p.kappa * ((n + 1.0) * (np + 1.0)).sqrt(),
        );

        // coherent exchange from H = ig(a†J⁻ − aJ⁺)
        if t.n > 0 {
            push(
                DickeIndex {
                    two_m: t.two_m + 2,
                    n: t.n - 1,
                    ..*t
                },
                p.g * n.sqrt() * sqrt_pos((j + m + 1.0) * (j - m)),
            );
        }
        push(
            DickeIndex {
                two_m: t.two_m - 2,
                n: t.n + 1,
                ..*t
            },
            -p.g * (n + 1.0).sqrt() * sqrt_pos((j - m + 1.0) * (j + m)),
        );
        push(
            DickeIndex {
                two_mp: t.two_mp - 2,
                np: t.np + 1,
                ..*t
            },
            -p.g * (np + 1.0).sqrt() * sqrt_pos((j - mp + 1.0) * (j + mp)),
        );
        if t.np > 0 {
            push(
                DickeIndex {
                    two_mp: t.two_mp + 2,
                    np: t.np - 1,
                    ..*t
                },
                p.g * np.sqrt() * sqrt_pos((j + mp + 1.0) * (j - mp)),
            );
        }

        // spin dissipators: the coefficient carries the source quantum numbers
        let shifted = |dj: i64, dm: i64| DickeIndex {
            two_j: t.two_j + 2 * dj,
            two_m: t.two_m + 2 * dm,
            two_mp: t.two_mp + 2 * dm,
            ..*t
        };
        for (dj, dm) in [
            (1, 0),
            (-1, 0),
            (0, 1),
            (1, 1),
            (-1, 1),
            (0, -1),
            (1, -1),
            (-1, -1),
        ] {
            let src = shifted(dj, dm);
            if src.two_j < 0 {
                continue;
            }
            let (js, ms, mps) = (src.j(), src.m(), src.mp());
            let v = match (dj, dm) {
                (1, 0) => rates.y(js, ms, mps),
                (-1, 0) => rates.z(js, ms, mps),
                (0, 1) => rates.u(js, ms, mps),
                (1, 1) => rates.v(js, ms, mps),
                (-1, 1) => rates.w_(js, ms, mps),
                (0, -1) => rates.r(js, ms, mps),
                (1, -1) => rates.s(js, ms, mps),
                _ => rates.t(js, ms, mps),
            };
            push(src, v);
        }

        let h = p.delta * (m - mp) - p.epsilon / nf * (m * m - mp * mp);
        let diag = c64::new(-0.5 * p.kappa * (n + np) - rates.x(j, m, mp), -h);
        if diag != c64::new(0.0, 0.0) {
            entries.push((row, row, diag));
        }
    }
    LiouvillianMatrix {
        basis: basis.clone(),
        entries,
    }
}
