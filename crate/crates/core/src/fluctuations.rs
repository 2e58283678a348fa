//! Linearized photon fluctuations: thermal statistics below threshold, the
//! amplitude/phase Fokker–Planck coefficients above threshold, its Green's
//! function and Husimi Q-function, and the quadrature noise spectra.

use alloc::vec::Vec;
use core::f64::consts::{LN_10, PI};
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::meanfield::{laser_frequency_offset, lasing_state};
use crate::model::{
    cooperativity_at, cooperativity_branches, derive_rates, effective_detuning, ModelParams,
};

/// Stationary photon and spin statistics of the normal (non-lasing) state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BelowThresholdStats {
    pub cooperativity: f64,
    pub n_photons: f64,
    pub delta_jz: f64,
    /// `g¹(τ) = exp(−g1_decay · τ)`.
    pub g1_decay: C64,
    /// `g²(τ) = 1 + exp(−g2_decay · τ)`.
    pub g2_decay: f64,
    pub g2_zero: f64,
}

pub fn below_threshold_stats(p: &ModelParams) -> Result<BelowThresholdStats> {
    let r = derive_rates(p)?;
    let jz = 0.5 * p.n() * r.pump_factor;
    let c = cooperativity_at(p, &r, jz);
    if c >= 1.0 {
        return Err(Error::AboveThreshold { cooperativity: c });
    }
    let de = effective_detuning(p, jz);
    let g2 = r.gamma_total * r.gamma_total;
    // C/(w−γ) without the 0/0 at w = γ
    let c_over_inv = r.c0 * g2 / ((g2 + 4.0 * de * de) * (p.pump_w + p.gamma));
    let omega = laser_frequency_offset(p, jz);
    Ok(BelowThresholdStats {
        cooperativity: c,
        n_photons: p.pump_w * c_over_inv / (1.0 - c),
        delta_jz: (p.n() * p.pump_w * p.gamma).sqrt() / (p.pump_w + p.gamma),
        g1_decay: C64::new(0.5 * p.kappa, omega) * (1.0 - c),
        g2_decay: p.kappa * (1.0 - c),
        g2_zero: 2.0,
    })
}

/// Coefficients of the linearized amplitude/phase Fokker–Planck equation
/// `∂ₜP = [κ_a ∂_z z + ½D_a ∂²_z + ½D_φ ∂²_φ + (κ_a χ/|a|)(2z − ½∂_z)∂_φ] P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuationCoeffs {
    pub kappa_a: f64,
    pub d_a: f64,
    pub d_phi: f64,
    pub chi: f64,
    /// Stationary cavity–magnon phase difference `Φ`.
    pub phi_lock: f64,
    pub a_mag: f64,
    /// `ω_L − ω_c`.
    pub omega_l: f64,
    /// Absent when the coefficients were supplied directly.
    pub cooperativity: Option<f64>,
}

impl FluctuationCoeffs {
    /// Coefficients given directly rather than derived from a model.
    pub fn effective(kappa_a: f64, d_a: f64, d_phi: f64, chi: f64, a_mag: f64) -> Self {
        Self {
            kappa_a,
            d_a,
            d_phi,
            chi,
            phi_lock: 0.0,
            a_mag,
            omega_l: 0.0,
            cooperativity: None,
        }
    }

    /// Same coefficients with a different twist.
    pub fn with_chi(&self, chi: f64) -> Self {
        Self { chi, ..*self }
    }

    pub fn with_d_a(&self, d_a: f64) -> Self {
        Self { d_a, ..*self }
    }
}

/// Coefficients on the upper lasing branch.
pub fn fluct_coeffs(p: &ModelParams) -> Result<FluctuationCoeffs> {
    let r = derive_rates(p)?;
    let c = match cooperativity_branches(p)?.c_plus {
        Some(c) if c > 1.0 && p.g > 0.0 => c,
        _ => return Err(Error::BelowThreshold),
    };
    let s = lasing_state(p, c)?;
    let a2 = s.a.norm_sqr();
    let (ks, wg, k) = (r.kappa_s, p.pump_w + p.gamma, p.kappa);
    let inv_pf = 1.0 / r.pump_factor;
    let common = 0.25 * inv_pf + (ks + wg) / (8.0 * c * ks);
    let d_a = k / c * (common + (c - 1.0) * wg / (2.0 * c * ks));
    let d_phi = k * c / a2 * (ks * ks) / (r.gamma_total * r.gamma_total) * common;
    let de = effective_detuning(p, s.jz);
    Ok(FluctuationCoeffs {
        kappa_a: k * (1.0 - 1.0 / c),
        d_a,
        d_phi,
        chi: 2.0 * s.jz * p.epsilon / (p.n() * r.gamma_total),
        phi_lock: -(2.0 * de).atan2(r.gamma_total),
        a_mag: a2.sqrt(),
        omega_l: laser_frequency_offset(p, s.jz),
        cooperativity: Some(c),
    })
}

/// Truncation of the Fourier series in the phase variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    /// Bound on the relative size of the first dropped term.
    pub tol: f64,
    pub cap: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            cap: 100_000,
        }
    }
}

/// Time-dependent parameters shared by the Green's function and the Q-function.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Propagator {
    kappa_a: f64,
    d_a: f64,
    chi: f64,
    a: f64,
    z0: f64,
    t: f64,
    /// `e^{−κ_a t}`
    e: f64,
    sigma2: f64,
    d_phi_tilde: f64,
    /// `Im z̃ₙ = b·n`
    b: f64,
    /// `Re c̃ₙ = c2·n²`
    c2: f64,
}

impl Propagator {
    fn new(c: &FluctuationCoeffs, z0: f64, t: f64) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter {
                name: "t",
                reason: "must be finite and non-negative",
            });
        }
        if !(c.kappa_a > 0.0) {
            return Err(Error::BelowThreshold);
        }
        if !(c.a_mag > 0.0) {
            return Err(Error::InvalidParameter {
                name: "a_mag",
                reason: "must be positive",
            });
        }
        let (ka, da, chi, a) = (c.kappa_a, c.d_a, c.chi, c.a_mag);
        let a2 = a * a;
        let e = (-ka * t).exp();
        let one_e = -(-ka * t).exp_m1();
        Ok(Self {
            kappa_a: ka,
            d_a: da,
            chi,
            a,
            z0,
            t,
            e,
            sigma2: da / ka * -(-2.0 * ka * t).exp_m1(),
            d_phi_tilde: c.d_phi + 4.0 * chi * chi * da / a2 + 2.0 * chi * chi * ka / a2,
            b: chi * da / (a * ka) * one_e * one_e + chi / (2.0 * a) * one_e,
            c2: one_e * (da / (ka * a2) * (3.0 - e) + 1.0 / a2) * chi * chi,
        })
    }

    fn one_minus_e(&self) -> f64 {
        -(-self.kappa_a * self.t).exp_m1()
    }

    fn z_tilde(&self, n: f64) -> C64 {
        C64::new(self.z0 * self.e, self.b * n)
    }

    fn c_tilde(&self, n: f64) -> C64 {
        let (chi, a) = (self.chi, self.a);
        let one_e = self.one_minus_e();
        C64::new(
            self.c2 * n * n,
            -4.0 * self.z0 * n * chi / a + one_e * 2.0 * self.z0 * n * chi / a,
        )
    }

    /// Gaussian decay rate of the n-th term, `exp(−rate · n²)`, given the
    /// width that `z̃ₙ` is measured against.
    fn n2_rate(&self, width2: f64) -> f64 {
        0.5 * self.d_phi_tilde * self.t - self.c2 - self.b * self.b / width2
    }
}

fn gaussian_n_max(rate: f64, tol: f64) -> Option<usize> {
    if rate > 0.0 {
        let n = ((1.0 / tol).ln() / rate).sqrt().ceil() + 8.0;
        (n < 1e15).then_some(n as usize)
    } else {
        None
    }
}

/// Green's function of the linearized amplitude/phase equation, started from
/// `δ(z − z₀) δ(φ − φ₀)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenFunction {
    prop: Propagator,
    pub phi0: f64,
    pub n_max: usize,
}

/// Build the Green's function at time `t > 0`.
///
/// Fails with `TruncationFailure` when the Fourier series does not decay fast
/// enough to meet `truncation.tol` within `truncation.cap` terms; this
/// includes `t = 0` and coefficient sets whose diffusion is not positive
/// definite at small `t`.
pub fn green_function(
    c: &FluctuationCoeffs,
    z0: f64,
    phi0: f64,
    t: f64,
    truncation: &Truncation,
) -> Result<GreenFunction> {
    let prop = Propagator::new(c, z0, t)?;
    let n_max = if prop.sigma2 > 0.0 {
        gaussian_n_max(prop.n2_rate(prop.sigma2), truncation.tol)
    } else {
        None
    };
    match n_max {
        Some(n) if n <= truncation.cap => Ok(GreenFunction {
            prop,
            phi0,
            n_max: n,
        }),
        Some(n) => Err(Error::TruncationFailure {
            required: n,
            cap: truncation.cap,
        }),
        None => Err(Error::TruncationFailure {
            required: usize::MAX,
            cap: truncation.cap,
        }),
    }
}

impl GreenFunction {
    pub fn sigma2(&self) -> f64 {
        self.prop.sigma2
    }

    pub fn d_phi_tilde(&self) -> f64 {
        self.prop.d_phi_tilde
    }

    /// Whether the amplitude spread is small against the mean amplitude
    /// (`|a| > 10 σ̃`), so that extending `z` to the whole real line is harmless.
    pub fn domain_ok(&self) -> bool {
        self.prop.a > 10.0 * self.prop.sigma2.sqrt()
    }

    fn term(&self, z: f64, phi: f64, n: i64) -> C64 {
        let pr = &self.prop;
        let nf = n as f64;
        let dz = C64::new(z, 0.0) - pr.z_tilde(nf);
        let expo = C64::new(
            -0.5 * pr.d_phi_tilde * nf * nf * pr.t,
            nf * (phi - self.phi0),
        ) - dz * dz / pr.sigma2
            + pr.c_tilde(nf);
        expo.exp()
    }

    fn norm(&self) -> f64 {
        1.0 / ((PI * self.prop.sigma2).sqrt() * 2.0 * PI)
    }

    /// Density from the paired series `term₀ + 2 Σ Re termₙ`.
    ///
    /// Every term has the form `exp(C − r n² + i n θ)` with real `C`, `r`, `θ`,
    /// so for slowly decaying series (`r < ½`) the sum is evaluated in its
    /// Poisson-dual form `√(π/r) Σₖ exp(−(θ + 2πk)²/4r)`, which is exact.
    pub fn density(&self, z: f64, phi: f64) -> f64 {
        let pr = &self.prop;
        let zz = z - pr.z0 * pr.e;
        let lead = -zz * zz / pr.sigma2;
        let rate = pr.n2_rate(pr.sigma2);
        let theta = (phi - self.phi0) + 2.0 * zz * pr.b / pr.sigma2 + self.c_phase();
        let s = if rate < 0.5 {
            let th = theta - 2.0 * PI * (theta / (2.0 * PI)).round();
            let k_max = ((4.0 * rate * 40.0).sqrt() / (2.0 * PI)).ceil() as i64 + 1;
            (-k_max..=k_max)
                .map(|k| {
                    let d = th + 2.0 * PI * k as f64;
                    (-d * d / (4.0 * rate)).exp()
                })
                .sum::<f64>()
                * (PI / rate).sqrt()
        } else {
            1.0 + 2.0
                * (1..=self.n_max)
                    .map(|n| {
                        let nf = n as f64;
                        (-rate * nf * nf).exp() * (nf * theta).cos()
                    })
                    .sum::<f64>()
        };
        lead.exp() * s * self.norm()
    }

    /// Coefficient of `i n` in `c̃ₙ`.
    fn c_phase(&self) -> f64 {
        let pr = &self.prop;
        (-4.0 + 2.0 * pr.one_minus_e()) * pr.z0 * pr.chi / pr.a
    }

    /// The unpaired sum over `−n_max..=n_max`, whose imaginary part measures
    /// the conjugate symmetry of the series.
    pub fn density_unpaired(&self, z: f64, phi: f64) -> C64 {
        let m = self.n_max as i64;
        (-m..=m).map(|n| self.term(z, phi, n)).sum::<C64>() * self.norm()
    }

    /// Amplitude marginal `∫ G dφ`: only the `n = 0` term survives.
    pub fn z_marginal(&self, z: f64) -> f64 {
        self.term(z, 0.0, 0).re * 2.0 * PI * self.norm()
    }
}

/// Square grid in the quadrature plane `x = √2 Re q`, `p = √2 Im q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub center: (f64, f64),
    pub half_width: f64,
    pub points: usize,
}

impl GridSpec {
    /// Grid centred on the coherent peak `x = √2|a|`, `p = 0`.
    pub fn around_peak(c: &FluctuationCoeffs, half_width: f64, points: usize) -> Self {
        Self {
            center: (core::f64::consts::SQRT_2 * c.a_mag, 0.0),
            half_width,
            points,
        }
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    pub fn coord(&self, i: usize) -> (f64, f64) {
        (
            self.center.0 - self.half_width + i as f64 * self.step(),
            self.center.1 - self.half_width + i as f64 * self.step(),
        )
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.coord(i).0).collect()
    }

    pub fn ps(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.coord(i).1).collect()
    }
}

/// Husimi function sampled on a [`GridSpec`], normalized so that
/// `Σ Q dx dp ≈ 1`. `values[ip * points + ix]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QGrid {
    pub spec: GridSpec,
    pub time: f64,
    pub values: Vec<f64>,
    /// Largest Fourier index used at any grid point.
    pub n_max: usize,
}

impl QGrid {
    pub fn at(&self, ix: usize, ip: usize) -> f64 {
        self.values[ip * self.spec.points + ix]
    }

    pub fn mass(&self) -> f64 {
        let h = self.spec.step();
        self.values.iter().sum::<f64>() * h * h
    }

    /// Mean and covariance `(⟨x⟩, ⟨p⟩, var x, cov xp, var p)` by grid quadrature.
    pub fn moments(&self) -> (f64, f64, f64, f64, f64) {
        let (xs, ps) = (self.spec.xs(), self.spec.ps());
        let n = self.spec.points;
        let (mut m0, mut mx, mut mp) = (0.0, 0.0, 0.0);
        for ip in 0..n {
            for ix in 0..n {
                let q = self.values[ip * n + ix];
                m0 += q;
                mx += q * xs[ix];
                mp += q * ps[ip];
            }
        }
        let (cx, cp) = (mx / m0, mp / m0);
        let (mut vxx, mut vxp, mut vpp) = (0.0, 0.0, 0.0);
        for ip in 0..n {
            for ix in 0..n {
                let q = self.values[ip * n + ix];
                let (dx, dp) = (xs[ix] - cx, ps[ip] - cp);
                vxx += q * dx * dx;
                vxp += q * dx * dp;
                vpp += q * dp * dp;
            }
        }
        (cx, cp, vxx / m0, vxp / m0, vpp / m0)
    }

    /// `⟨e^{iφ}⟩` of the polar angle of `(x, p)`, weighted by `Q`.
    pub fn mean_phase_factor(&self) -> C64 {
        let (xs, ps) = (self.spec.xs(), self.spec.ps());
        let n = self.spec.points;
        let (mut m0, mut acc) = (0.0, C64::new(0.0, 0.0));
        for ip in 0..n {
            for ix in 0..n {
                let q = self.values[ip * n + ix];
                let r = xs[ix].hypot(ps[ip]);
                if r > 0.0 {
                    acc += q * C64::new(xs[ix] / r, ps[ip] / r);
                }
                m0 += q;
            }
        }
        acc / m0
    }
}

/// Largest Bessel-type index that contributes beyond `tol` for a given
/// exponent curvature `kappa` (`e^{−k²/2κ}` tail).
fn bessel_bandwidth(kappa: f64, tol: f64) -> f64 {
    (2.0 * kappa.max(0.0) * (1.0 / tol).ln()).sqrt() + 10.0
}

/// Husimi function of the Green's-function solution at time `t`.
pub fn q_representation(
    c: &FluctuationCoeffs,
    z0: f64,
    phi0: f64,
    t: f64,
    grid: &GridSpec,
    truncation: &Truncation,
) -> Result<QGrid> {
    if grid.points < 2 || !(grid.half_width > 0.0) {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: "needs at least 2 points and positive width",
        });
    }
    let pr = Propagator::new(c, z0, t)?;
    let den = 1.0 + pr.sigma2;
    let n_gauss = gaussian_n_max(pr.n2_rate(den), truncation.tol);
    let a_eff = pr.a + z0 * pr.e;
    let mut values = Vec::with_capacity(grid.points * grid.points);
    let mut n_used = 0usize;
    let mut weights = Vec::new();
    let mut rot = Vec::new();
    let mut acc = Vec::new();
    for ip in 0..grid.points {
        for ix in 0..grid.points {
            let x = grid.center.0 - grid.half_width + ix as f64 * grid.step();
            let p = grid.center.1 - grid.half_width + ip as f64 * grid.step();
            let qm = x.hypot(p) * core::f64::consts::FRAC_1_SQRT_2;
            let phi_q = p.atan2(x);
            let alpha = 2.0 * a_eff * qm / den;
            let beta = 2.0 * pr.b * qm / den;
            let bb = qm * qm * pr.sigma2 / den;
            let k_max = bessel_bandwidth(alpha.abs() + 2.0 * bb, truncation.tol);
            // term n only survives while n ≤ n|β| + k_max + O((n|β|)^{1/3})
            let n_bessel = if beta.abs() < 0.9 {
                let mut n = k_max / (1.0 - beta.abs());
                for _ in 0..4 {
                    n = (k_max + 10.0 * (n * beta.abs()).cbrt()) / (1.0 - beta.abs());
                }
                Some(n.ceil() as usize + 8)
            } else {
                None
            };
            let n_max = match (n_gauss, n_bessel) {
                (Some(a), Some(b)) => a.min(b),
                (Some(a), None) | (None, Some(a)) => a,
                (None, None) => {
                    return Err(Error::TruncationFailure {
                        required: usize::MAX,
                        cap: truncation.cap,
                    })
                }
            };
            if n_max > truncation.cap {
                return Err(Error::TruncationFailure {
                    required: n_max,
                    cap: truncation.cap,
                });
            }
            n_used = n_used.max(n_max);
            let nf = n_max as f64;
            let nodes = (4 * n_max + 64).max(
                (nf * (1.0 + beta.abs()) + k_max + 10.0 * (nf * beta.abs()).cbrt()).ceil() as usize
                    + 32,
            );
            let s = alpha.abs() + bb;
            weights.clear();
            rot.clear();
            for k in 0..nodes {
                let ph = 2.0 * PI * k as f64 / nodes as f64;
                let cs = ph.cos();
                weights.push((alpha * cs + bb * cs * cs - s).exp() / nodes as f64);
                rot.push(C64::from_polar(1.0, ph + beta * cs));
            }
            acc.clear();
            acc.extend(weights.iter().map(|&w| C64::new(w, 0.0)));
            let base = -qm * qm + s;
            let mut total = 0.0;
            for n in 0..=n_max {
                let nf = n as f64;
                let integral: C64 = if n == 0 {
                    C64::new(weights.iter().sum(), 0.0)
                } else {
                    for (a, r) in acc.iter_mut().zip(&rot) {
                        *a *= r;
                    }
                    acc.iter().sum()
                };
                let u = C64::new(a_eff, pr.b * nf);
                let expo = C64::new(
                    base - 0.5 * pr.d_phi_tilde * nf * nf * pr.t,
                    nf * (phi_q - phi0),
                ) + pr.c_tilde(nf)
                    - u * u / den;
                let term = expo.exp() * integral;
                total += if n == 0 { term.re } else { 2.0 * term.re };
            }
            let q = total / (PI * den.sqrt()) * 0.5;
            if q < 0.0 {
                if q < -1e-9 {
                    return Err(Error::NegativeQ { value: q });
                }
                values.push(0.0);
            } else {
                values.push(q);
            }
        }
    }
    Ok(QGrid {
        spec: *grid,
        time: t,
        values,
        n_max: n_used,
    })
}

/// Real symmetric noise-spectrum matrix of `(δx, δp)` at frequency `ω`.
pub fn noise_spectrum_matrix(c: &FluctuationCoeffs, omega: f64) -> [[f64; 2]; 2] {
    let (ka, da, chi) = (c.kappa_a, c.d_a, c.chi);
    let l = ka * ka + omega * omega;
    let pre = (4.0 * da + ka) / l;
    let off = pre * (-2.0 * ka * ka * chi / l);
    [
        [pre, off],
        [
            off,
            pre * (4.0 * ka * ka * chi * chi / l + ka / (4.0 * da + ka)),
        ],
    ]
}

/// Eigenvalues (larger, smaller) of a real symmetric 2×2 matrix and the angle
/// of the eigenvector belonging to the smaller one, in `(−π/2, π/2]`.
pub fn symmetric_eigen(m: &[[f64; 2]; 2]) -> (f64, f64, f64) {
    let (a, b, d) = (m[0][0], m[0][1], m[1][1]);
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    // the larger eigenvector sits at ½·atan2(2b, a−d); the smaller is orthogonal
    let mut ang = 0.5 * (2.0 * b).atan2(a - d) + 0.5 * PI;
    if ang > 0.5 * PI {
        ang -= PI;
    }
    (mean + rad, mean - rad, ang)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpectra {
    pub omega_grid: Vec<f64>,
    pub s_plus: Vec<f64>,
    pub s_minus: Vec<f64>,
    /// `atan χ`.
    pub theta: f64,
    /// Direction of the minimum-noise quadrature at `ω = 0`, measured from the x axis.
    pub squeezed_axis: f64,
}

/// Principal spectra from the eigenvalues of [`noise_spectrum_matrix`].
pub fn principal_spectra(c: &FluctuationCoeffs, omega_grid: &[f64]) -> NoiseSpectra {
    let (mut s_plus, mut s_minus) = (
        Vec::with_capacity(omega_grid.len()),
        Vec::with_capacity(omega_grid.len()),
    );
    for &w in omega_grid {
        let (hi, lo, _) = symmetric_eigen(&noise_spectrum_matrix(c, w));
        s_plus.push(hi);
        s_minus.push(lo);
    }
    let (_, _, axis) = symmetric_eigen(&noise_spectrum_matrix(c, 0.0));
    NoiseSpectra {
        omega_grid: omega_grid.to_vec(),
        s_plus,
        s_minus,
        theta: c.chi.atan(),
        squeezed_axis: axis,
    }
}

/// Closed-form eigenvalues `(S₊, S₋)` including amplitude diffusion.
pub fn principal_spectra_closed(c: &FluctuationCoeffs, omega: f64) -> (f64, f64) {
    let (ka, da, chi) = (c.kappa_a, c.d_a, c.chi);
    let l = ka * ka + omega * omega;
    let mid = (2.0 * da + ka) / (2.0 * ka) + (4.0 * da * ka * chi * chi + ka * ka * chi * chi) / l;
    let u = (4.0 * da * ka * chi + ka * ka * chi) / l;
    let v = da / ka - (4.0 * da * ka * chi * chi + ka * ka * chi * chi) / l;
    let rad = (u * u + v * v).sqrt();
    let pre = 2.0 * ka / l;
    (pre * (mid + rad), pre * (mid - rad))
}

/// Closed-form `(S₊, S₋)` with amplitude diffusion dropped, ordered so that `S₊ ≥ S₋`.
pub fn principal_spectra_simplified(c: &FluctuationCoeffs, omega: f64) -> (f64, f64) {
    let (ka, chi) = (c.kappa_a, c.chi);
    let l = ka * ka + omega * omega;
    let root = (1.0 + chi * chi).sqrt();
    let f = |sign: f64| ka / l * (1.0 + 2.0 * ka * ka * chi / l * (chi + sign * root));
    let (a, b) = (f(1.0), f(-1.0));
    (a.max(b), a.min(b))
}

/// Zero-frequency squeezing in dB, `(20/ln 10) asinh|χ|`.
pub fn squeeze_db(c: &FluctuationCoeffs) -> Result<f64> {
    if !(c.kappa_a > 0.0) {
        return Err(Error::BelowThreshold);
    }
    Ok(20.0 / LN_10 * c.chi.abs().asinh())
}

/// Zero-frequency squeezing in dB from the eigenvalues of the noise matrix,
/// referenced to the `χ = 0` spectrum with the same `D_a`.
pub fn squeeze_db_from_spectra(c: &FluctuationCoeffs) -> Result<f64> {
    if !(c.kappa_a > 0.0) {
        return Err(Error::BelowThreshold);
    }
    let (_, lo, _) = symmetric_eigen(&noise_spectrum_matrix(c, 0.0));
    let (_, lo0, _) = symmetric_eigen(&noise_spectrum_matrix(&c.with_chi(0.0), 0.0));
    Ok(-10.0 * (lo / lo0).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{classify_phase, Phase};
    use approx::assert_relative_eq;

    fn baseline(n: u64, epsilon: f64, w: f64) -> ModelParams {
        ModelParams::with_collective_coupling(n, 1.0, 1.0, epsilon, 1.0, 0.01, w, 1.0)
    }

    fn twisted() -> FluctuationCoeffs {
        FluctuationCoeffs::effective(1.0, 0.1, 0.01, 1.0, 10.0)
    }

    /// Positive-definite diffusion so that G itself is a well-defined density.
    fn pd() -> FluctuationCoeffs {
        FluctuationCoeffs::effective(1.0, 0.5, 0.05, 0.5, 10.0)
    }

    #[test]
    fn thermal_below_threshold() {
        let p = baseline(100, 0.0, 0.02);
        assert_eq!(classify_phase(&p).unwrap(), Phase::Normal);
        let s = below_threshold_stats(&p).unwrap();
        let c = s.cooperativity;
        assert!(c > 0.0 && c < 1.0);
        assert_relative_eq!(
            s.n_photons,
            0.02 * c / (0.01 * (1.0 - c)),
            max_relative = 1e-12
        );
        assert_eq!(s.g2_zero, 2.0);
        assert_relative_eq!(s.g2_decay, 2.0 * s.g1_decay.re, max_relative = 1e-14);
        assert_relative_eq!(
            s.delta_jz,
            (100.0 * 0.02 * 0.01f64).sqrt() / 0.03,
            max_relative = 1e-14
        );
    }

    #[test]
    fn photons_vanish_without_coupling() {
        let mut p = baseline(100, 0.0, 0.01);
        p.g = 1e-9;
        assert!(below_threshold_stats(&p).unwrap().n_photons < 1e-15);
    }

    #[test]
    fn above_threshold_is_rejected() {
        assert!(matches!(
            below_threshold_stats(&baseline(100, 0.0, 0.3)),
            Err(Error::AboveThreshold { .. })
        ));
        assert_eq!(
            fluct_coeffs(&baseline(100, 0.0, 0.015)),
            Err(Error::BelowThreshold)
        );
    }

    #[test]
    fn coefficient_limits() {
        let c = fluct_coeffs(&baseline(1000, 0.0, 0.3)).unwrap();
        assert_eq!(c.chi, 0.0);
        assert!(c.kappa_a > 0.0 && c.d_a > 0.0 && c.d_phi > 0.0);
        assert_relative_eq!(
            c.phi_lock,
            -(2.0f64).atan2(2.3 + 0.01),
            max_relative = 1e-12
        );
        let mut strong =
            ModelParams::with_collective_coupling(1000, 200.0, 0.0, 0.0, 1.0, 0.01, 0.5, 1.0);
        strong.delta = 0.0;
        let cs = fluct_coeffs(&strong).unwrap();
        assert!((cs.kappa_a - 1.0).abs() < 1e-3);
    }

    #[test]
    fn phase_diffusion_times_photons_is_size_independent() {
        let a = fluct_coeffs(&baseline(1000, 0.5, 0.3)).unwrap();
        let b = fluct_coeffs(&baseline(1_000_000, 0.5, 0.3)).unwrap();
        assert_relative_eq!(
            a.d_phi * a.a_mag * a.a_mag,
            b.d_phi * b.a_mag * b.a_mag,
            max_relative = 1e-9
        );
    }

    /// Parameters with fixed `C₀`, `κ_s = 1.3`, and cavity loss `kappa`.
    fn cavity_limit(kappa: f64) -> ModelParams {
        let (w, gamma, gphi) = (0.3, 0.01, 0.99);
        let ks = w + gamma + gphi;
        let c0 = 3.0;
        let n = 1_000_000u64;
        let g = (c0 * kappa * ks / (4.0 * n as f64)).sqrt();
        ModelParams {
            n_spins: n,
            g,
            delta: 0.0,
            epsilon: 0.0,
            kappa,
            gamma,
            pump_w: w,
            gamma_phi: gphi,
        }
    }

    /// `(C, (w−γ)/(w+γ), ¼(w+γ)/(w−γ) + (κ_s+w+γ)/(8Cκ_s))` for [`cavity_limit`].
    fn limit_factors() -> (f64, f64, f64) {
        let (w, gamma, ks) = (0.3, 0.01, 1.3);
        let pf = (w - gamma) / (w + gamma);
        let c = 3.0 * pf;
        (c, pf, 0.25 / pf + (ks + w + gamma) / (8.0 * c * ks))
    }

    #[test]
    fn bad_cavity_linewidth_scales_as_kappa_s_over_n() {
        let ks = 1.3;
        let (c, pf, bracket) = limit_factors();
        // D_φ N/κ_s → 2C² (κ_s/(w+γ)) [·] / (pf (C−1))
        let limit = 2.0 * c * c * ks / 0.31 * bracket / (pf * (c - 1.0));
        for k in [100.0 * ks, 1000.0 * ks] {
            let p = cavity_limit(k);
            let r = fluct_coeffs(&p).unwrap().d_phi * p.n() / ks;
            assert!(
                (r / limit - 1.0).abs() < 0.1,
                "kappa={k} ratio={r} limit={limit}"
            );
        }
    }

    #[test]
    fn good_cavity_linewidth_scales_as_kappa_over_photons() {
        let (c, _, bracket) = limit_factors();
        // D_φ|a|²/κ → C [·]
        for k in [0.013, 0.0013] {
            let cf = fluct_coeffs(&cavity_limit(k)).unwrap();
            let r = cf.d_phi * cf.a_mag * cf.a_mag / k;
            assert!((r / (c * bracket) - 1.0).abs() < 0.1, "kappa={k} ratio={r}");
        }
    }

    #[test]
    fn green_normalization_and_reality() {
        let c = pd();
        for &t in &[0.05, 0.3, 2.0] {
            let g = green_function(&c, 0.0, 0.0, t, &Truncation::default()).unwrap();
            let sig = g.sigma2().sqrt();
            let (nz, nphi) = (801usize, 4 * g.n_max + 64);
            let (zl, zh) = (-8.0 * sig - 1.0, 8.0 * sig + 1.0);
            let hz = (zh - zl) / (nz - 1) as f64;
            let hphi = 2.0 * PI / nphi as f64;
            let mut mass = 0.0;
            let mut max_im: f64 = 0.0;
            for i in 0..nz {
                let z = zl + i as f64 * hz;
                let wz = if i == 0 || i == nz - 1 { 0.5 } else { 1.0 };
                for j in 0..nphi {
                    let phi = -PI + j as f64 * hphi;
                    mass += wz * g.density(z, phi) * hz * hphi;
                    if j % 37 == 0 && i % 41 == 0 {
                        let full = g.density_unpaired(z, phi);
                        max_im = max_im.max(full.im.abs());
                        assert!((full.re - g.density(z, phi)).abs() < 1e-10 * g.norm());
                    }
                }
            }
            assert!((mass - 1.0).abs() < 1e-6, "t={t} mass={mass}");
            assert!(max_im < 1e-12, "t={t} im={max_im}");
        }
    }

    #[test]
    fn green_factorizes_without_twist() {
        let c = pd().with_chi(0.0);
        let t = 0.7;
        let g = green_function(&c, 0.3, 0.2, t, &Truncation::default()).unwrap();
        let s2 = c.d_a / c.kappa_a * (1.0 - (-2.0 * c.kappa_a * t).exp());
        let zc = 0.3 * (-c.kappa_a * t).exp();
        let var_phi = c.d_phi * t;
        for &(z, phi) in &[(0.1, 0.0), (-0.4, 1.0), (0.5, -2.5), (0.2, 3.0)] {
            let gz = (-(z - zc) * (z - zc) / s2).exp() / (PI * s2).sqrt();
            let wrapped: f64 = (-50..=50)
                .map(|k| {
                    let d = phi - 0.2 + 2.0 * PI * k as f64;
                    (-d * d / (2.0 * var_phi)).exp() / (2.0 * PI * var_phi).sqrt()
                })
                .sum();
            assert_relative_eq!(g.density(z, phi), gz * wrapped, max_relative = 1e-10);
        }
    }

    #[test]
    fn green_amplitude_marginal_is_ornstein_uhlenbeck() {
        let c = pd();
        let t = 0.4;
        let g = green_function(&c, 0.0, 0.0, t, &Truncation::default()).unwrap();
        // n = 0 term: centre 0, variance D_a(1−e^{−2κ_a t})/(2κ_a)
        let var = c.d_a * (1.0 - (-2.0 * c.kappa_a * t).exp()) / (2.0 * c.kappa_a);
        for &z in &[-0.5, 0.0, 0.2, 0.9] {
            let ou = (-z * z / (2.0 * var)).exp() / (2.0 * PI * var).sqrt();
            assert_relative_eq!(g.z_marginal(z), ou, max_relative = 1e-12);
        }
    }

    #[test]
    fn green_concentrates_at_origin_for_small_t() {
        let c = pd().with_chi(0.05);
        let t = 2e-7;
        let g = green_function(&c, 0.0, 0.0, t, &Truncation::default()).unwrap();
        assert!(g.sigma2() < 1e-6);
        let (n, d) = (200usize, 1e-2);
        let h = 2.0 * d / n as f64;
        let mut mass = 0.0;
        for i in 0..n {
            let z = -d + (i as f64 + 0.5) * h;
            for j in 0..n {
                let phi = -d + (j as f64 + 0.5) * h;
                mass += g.density(z, phi) * h * h;
            }
        }
        assert!(mass > 0.999, "mass {mass}");
    }

    #[test]
    fn green_solves_fokker_planck() {
        let c = pd();
        let (ka, da, dp, chi, a) = (c.kappa_a, c.d_a, c.d_phi, c.chi, c.a_mag);
        let tr = Truncation::default();
        let (z, phi, t) = (0.15, 0.3, 0.5);
        let at = |z: f64, phi: f64, t: f64| {
            green_function(&c, 0.0, 0.0, t, &tr)
                .unwrap()
                .density(z, phi)
        };
        let h = 1e-3;
        let g0 = at(z, phi, t);
        let dt = (at(z, phi, t + h) - at(z, phi, t - h)) / (2.0 * h);
        let dz = (at(z + h, phi, t) - at(z - h, phi, t)) / (2.0 * h);
        let dzz = (at(z + h, phi, t) - 2.0 * g0 + at(z - h, phi, t)) / (h * h);
        let dphi = (at(z, phi + h, t) - at(z, phi - h, t)) / (2.0 * h);
        let dpp = (at(z, phi + h, t) - 2.0 * g0 + at(z, phi - h, t)) / (h * h);
        let dzp = (at(z + h, phi + h, t) - at(z + h, phi - h, t) - at(z - h, phi + h, t)
            + at(z - h, phi - h, t))
            / (4.0 * h * h);
        let rhs = ka * (g0 + z * dz)
            + 0.5 * da * dzz
            + 0.5 * dp * dpp
            + ka * chi / a * (2.0 * z * dphi - 0.5 * dzp);
        assert!(
            (dt - rhs).abs() < 1e-4 * dt.abs().max(g0),
            "dt={dt} rhs={rhs}"
        );
    }

    #[test]
    fn green_needs_positive_time() {
        let r = green_function(&pd(), 0.0, 0.0, 0.0, &Truncation::default());
        assert!(matches!(r, Err(Error::TruncationFailure { .. })));
    }

    #[test]
    fn q_at_t0_is_coherent_state() {
        let c = twisted();
        let spec = GridSpec::around_peak(&c, 5.0, 41);
        let q = q_representation(&c, 0.0, 0.0, 0.0, &spec, &Truncation::default()).unwrap();
        let (xs, ps) = (spec.xs(), spec.ps());
        let x0 = core::f64::consts::SQRT_2 * c.a_mag;
        for ip in 0..spec.points {
            for ix in 0..spec.points {
                let (dx, dp) = (xs[ix] - x0, ps[ip]);
                let exact = (-(dx * dx + dp * dp) / 2.0).exp() / (2.0 * PI);
                assert!(
                    (q.at(ix, ip) - exact).abs() < 1e-8,
                    "({ix},{ip}) {} vs {exact}",
                    q.at(ix, ip)
                );
            }
        }
        assert!((q.mass() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn q_twist_tilts_covariance() {
        let c = twisted();
        let t = 4.0;
        let spec = GridSpec::around_peak(&c, 18.0, 121);
        let q = q_representation(&c, 0.0, 0.0, t, &spec, &Truncation::default()).unwrap();
        assert!((q.mass() - 1.0).abs() < 1e-3, "mass {}", q.mass());
        let (_, _, _, cxp, _) = q.moments();
        assert!(cxp < -0.05, "cov {cxp}");
        let flipped = q_representation(
            &c.with_chi(-1.0),
            0.0,
            0.0,
            t,
            &spec,
            &Truncation::default(),
        )
        .unwrap();
        assert!(flipped.moments().3 > 0.05);
    }

    #[test]
    fn q_phase_diffusion_rate() {
        let c = FluctuationCoeffs::effective(1.0, 0.1, 0.05, 0.0, 6.0);
        let mut spec = GridSpec::around_peak(&c, 9.0, 121);
        spec.center = (0.0, 0.0);
        spec.half_width = 6.0 * core::f64::consts::SQRT_2 + 4.0;
        let tr = Truncation::default();
        let f = |t: f64| {
            q_representation(&c, 0.0, 0.0, t, &spec, &tr)
                .unwrap()
                .mean_phase_factor()
                .norm()
                .ln()
        };
        let (t1, t2) = (6.0, 16.0);
        let slope = -2.0 * (f(t2) - f(t1)) / (t2 - t1);
        assert!((slope / c.d_phi - 1.0).abs() < 0.02, "slope {slope}");
    }

    #[test]
    fn q_amplitude_variance_relaxes_at_twice_kappa_a() {
        let c = FluctuationCoeffs::effective(1.0, 0.4, 1e-4, 0.0, 12.0);
        let spec = GridSpec::around_peak(&c, 6.0, 81);
        let tr = Truncation::default();
        let vx = |t: f64| {
            q_representation(&c, 0.0, 0.0, t, &spec, &tr)
                .unwrap()
                .moments()
                .2
                - 1.0
        };
        let t = 0.4;
        let (v1, v2) = (vx(t), vx(2.0 * t));
        let rate = -(v2 / v1 - 1.0).ln() / t;
        assert!((rate / (2.0 * c.kappa_a) - 1.0).abs() < 0.02, "rate {rate}");
    }

    /// `Re[R diag(κ_a+4D_a, κ_a) R†]` with `R = (−iω − A)⁻¹` for the drift of `(δx, δp)`.
    fn langevin_oracle(c: &FluctuationCoeffs, omega: f64) -> [[f64; 2]; 2] {
        let (ka, da, chi) = (c.kappa_a, c.d_a, c.chi);
        let i = C64::new(0.0, 1.0);
        // A = [[−κ_a, 0], [−2χκ_a, −κ_a]], M = −iω I − A
        let m = [
            [-i * omega + ka, C64::new(0.0, 0.0)],
            [C64::new(2.0 * chi * ka, 0.0), -i * omega + ka],
        ];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let r = [
            [m[1][1] / det, -m[0][1] / det],
            [-m[1][0] / det, m[0][0] / det],
        ];
        let noise = [ka + 4.0 * da, ka];
        let mut out = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                let s: C64 = (0..2).map(|k| r[a][k] * noise[k] * r[b][k].conj()).sum();
                out[a][b] = s.re;
            }
        }
        out
    }

    #[test]
    fn noise_matrix_matches_langevin_oracle() {
        for &(chi, da) in &[(0.0, 0.0), (0.6, 0.1), (-1.3, 0.02), (3.0, 0.5)] {
            let c = FluctuationCoeffs::effective(0.8, da, 0.01, chi, 10.0);
            for &w in &[0.0, 0.3, 1.0, 7.0] {
                let s = noise_spectrum_matrix(&c, w);
                let o = langevin_oracle(&c, w);
                for a in 0..2 {
                    for b in 0..2 {
                        assert!((s[a][b] - o[a][b]).abs() <= 1e-12 * o[a][b].abs().max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn noise_matrix_limits() {
        let c = FluctuationCoeffs::effective(0.7, 0.0, 0.01, 0.0, 10.0);
        let s = noise_spectrum_matrix(&c, 0.5);
        let d = 0.7 / (0.49 + 0.25);
        assert_relative_eq!(s[0][0], d, max_relative = 1e-14);
        assert_relative_eq!(s[1][1], d, max_relative = 1e-14);
        assert_eq!(s[0][1], 0.0);
        let c = c.with_chi(1.0).with_d_a(0.1);
        let (a, b) = (
            noise_spectrum_matrix(&c, 1e3),
            noise_spectrum_matrix(&c, 2e3),
        );
        assert_relative_eq!(a[0][0] / b[0][0], 4.0, max_relative = 1e-5);
        assert_relative_eq!(a[0][1] / b[0][1], 16.0, max_relative = 1e-5);
    }

    #[test]
    fn spectra_closed_forms() {
        let grid: Vec<f64> = (0..50).map(|k| 0.1 * k as f64).collect();
        for &(chi, da) in &[(0.0, 0.1), (0.6, 0.05), (-2.0, 0.01)] {
            let c = FluctuationCoeffs::effective(1.0, da, 0.01, chi, 10.0);
            let s = principal_spectra(&c, &grid);
            for (k, &w) in grid.iter().enumerate() {
                assert!(s.s_plus[k] >= s.s_minus[k] && s.s_minus[k] >= 0.0);
                let (hi, lo) = principal_spectra_closed(&c, w);
                assert_relative_eq!(hi, s.s_plus[k], max_relative = 1e-12);
                assert_relative_eq!(lo, s.s_minus[k], max_relative = 1e-10);
                let (shi, slo) = principal_spectra_simplified(&c, w);
                let bound = 20.0 * da / c.kappa_a * (1.0 + chi * chi) / c.kappa_a;
                assert!((shi - s.s_plus[k]).abs() <= bound);
                assert!((slo - s.s_minus[k]).abs() <= bound);
            }
        }
    }

    #[test]
    fn no_twist_no_squeezing() {
        let c = FluctuationCoeffs::effective(1.0, 0.0, 0.01, 0.0, 10.0);
        let s = principal_spectra(&c, &[0.0, 0.5, 2.0]);
        assert_eq!(s.s_plus, s.s_minus);
        let sq = principal_spectra(&c.with_chi(0.4), &[0.0]);
        assert!(sq.s_minus[0] < s.s_minus[0]);
    }

    #[test]
    fn uncertainty_product_preserved() {
        for &chi in &[0.1, 0.6, 2.0, -5.0] {
            let c = FluctuationCoeffs::effective(1.7, 0.0, 0.01, chi, 10.0);
            let s = principal_spectra(&c, &[0.0]);
            assert_relative_eq!(
                s.s_plus[0] * s.s_minus[0],
                1.0 / (1.7 * 1.7),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn squeeze_law() {
        let c = FluctuationCoeffs::effective(1.0, 0.0, 0.01, 0.6, 10.0);
        assert_relative_eq!(
            squeeze_db(&c).unwrap(),
            20.0 / LN_10 * 0.6f64.asinh(),
            max_relative = 1e-15
        );
        assert!((squeeze_db(&c).unwrap() - 4.94).abs() < 5e-3);
        assert_eq!(squeeze_db(&c.with_chi(0.0)).unwrap(), 0.0);
        for &chi in &[0.05, 0.6, 1.0, -3.0, 10.0] {
            let c = c.with_chi(chi);
            assert!((squeeze_db(&c).unwrap() - squeeze_db_from_spectra(&c).unwrap()).abs() < 1e-10);
        }
        let big = squeeze_db(&c.with_chi(10.0)).unwrap();
        assert!((big / (20.0 * 20f64.log10()) - 1.0).abs() < 5e-3);
    }

    #[test]
    fn squeezed_axis_angle() {
        for &chi in &[0.3, 1.0, -2.0] {
            let c = FluctuationCoeffs::effective(1.0, 0.0, 0.01, chi, 10.0);
            let s = principal_spectra(&c, &[0.0]);
            let theta = chi.atan();
            assert_eq!(s.theta, theta);
            let expect = chi.signum() * PI / 4.0 - theta / 2.0;
            assert!(
                (s.squeezed_axis - expect).abs() < 1e-12,
                "chi={chi} {} vs {expect}",
                s.squeezed_axis
            );
        }
    }
}
